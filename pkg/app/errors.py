from typing import Optional


class GirgError(RuntimeError):
    """Base class for every error raised by the package."""

    exit_code = 4


class ConfigError(GirgError):
    exit_code = 2


class BdfSyntaxError(ConfigError):
    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class BdfValidationError(ConfigError):
    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        super().__init__(message)


class PreconditionError(GirgError):
    exit_code = 2


class EmptyGiantError(PreconditionError):
    pass


class StorageError(GirgError):
    exit_code = 3


class InvariantBreach(GirgError):
    exit_code = 4
