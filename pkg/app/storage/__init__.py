from app.storage.instance_files import (
    load_instance,
    read_rows,
    write_instance,
    write_json,
    write_metric_rows,
    write_resolved_config,
    write_rows,
)

__all__ = [
    "load_instance",
    "read_rows",
    "write_instance",
    "write_json",
    "write_metric_rows",
    "write_resolved_config",
    "write_rows",
]
