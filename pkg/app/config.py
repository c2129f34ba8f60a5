import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.errors import ConfigError, StorageError

load_dotenv()

# ---------- ENV HELPERS ----------

def env_str(name: str, default: str) -> str:
    return os.getenv(name) or default


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")


def configure_logging(level: Optional[str] = None) -> None:
    level = (level or env_str("GIRG_LOG_LEVEL", "INFO")).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(level)


def default_block_pairs() -> int:
    return max(1, env_int("GIRG_BLOCK_PAIRS", 1 << 21))


def default_workers() -> int:
    return max(1, env_int("GIRG_WORKERS", 1))


# ---------- MODELS ----------

class GirgParams(BaseModel):
    model_config = {"frozen": True}

    n: int = Field(ge=1)
    beta: float = 2.5
    alpha: float = 1.5
    c: float = 0.5
    seed: int = Field(default_factory=lambda: env_int("GIRG_SEED", 42), ge=0, lt=2**64)

    @field_validator("beta")
    @classmethod
    def _beta_in_range(cls, v: float) -> float:
        if not 2.0 < v < 3.0:
            raise ValueError(f"beta must lie in (2, 3), got {v}")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha_above_one(cls, v: float) -> float:
        if not v > 1.0:
            raise ValueError(f"alpha must be > 1, got {v}")
        return v

    @field_validator("c")
    @classmethod
    def _c_in_unit(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"c must lie in (0, 1], got {v}")
        return v


def make_params(**fields: Any) -> GirgParams:
    try:
        return GirgParams(**fields)
    except ValidationError as e:
        raise ConfigError(_first_error(e))


class ExperimentConfig(BaseModel):
    bdf: str = "min(x1,x2)"
    n: int = Field(default=1024, ge=1)
    beta: float = 2.5
    alpha: float = 1.5
    c: float = 0.5
    seed: int = Field(default_factory=lambda: env_int("GIRG_SEED", 42), ge=0, lt=2**64)
    n_grid: List[int] = Field(default_factory=lambda: [2**10, 2**11, 2**12], min_length=1)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    delta: float = 0.05
    l: float = 1.0
    epsilons: List[float] = Field(default_factory=lambda: [0.25, 0.1, 0.01, 0.001], min_length=1)
    radii: List[float] = Field(default_factory=lambda: [2.0**-k for k in range(1, 11)], min_length=1)
    offsets: List[float] = Field(default_factory=lambda: [i / 8 for i in range(4)], min_length=1)
    cell_fractions: List[float] = Field(default_factory=lambda: [0.0005, 0.001, 0.002], min_length=1)
    steps: int = Field(default=200, ge=1)
    samples: int = Field(default=100_000, ge=1)
    out_dir: str = Field(default_factory=lambda: env_str("GIRG_OUT_DIR", "out"))
    workers: int = Field(default_factory=default_workers, ge=1)
    input_prefix: Optional[str] = None

    @field_validator("delta")
    @classmethod
    def _delta_in_unit(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {v}")
        return v

    @field_validator("l")
    @classmethod
    def _l_in_unit(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"l must lie in (0, 1], got {v}")
        return v

    @field_validator("n_grid")
    @classmethod
    def _n_grid_positive(cls, v: List[int]) -> List[int]:
        for n in v:
            if n < 1:
                raise ValueError(f"every n must be >= 1, got {n}")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds_in_range(cls, v: List[int]) -> List[int]:
        for s in v:
            if not 0 <= s < 2**64:
                raise ValueError(f"seed must lie in [0, 2^64), got {s}")
        return v

    @field_validator("epsilons")
    @classmethod
    def _epsilons_in_range(cls, v: List[float]) -> List[float]:
        for eps in v:
            if not 0.0 < eps <= 0.25:
                raise ValueError(f"epsilon must lie in (0, 1/4], got {eps}")
        return v

    @field_validator("radii")
    @classmethod
    def _radii_finite(cls, v: List[float]) -> List[float]:
        for r in v:
            if not (math.isfinite(r) and r >= 0.0):
                raise ValueError(f"radius must be finite and >= 0, got {r}")
        return v

    @field_validator("offsets")
    @classmethod
    def _offsets_in_unit(cls, v: List[float]) -> List[float]:
        for o in v:
            if not (math.isfinite(o) and 0.0 <= o < 1.0):
                raise ValueError(f"offset must lie in [0, 1), got {o}")
        return v

    @field_validator("cell_fractions")
    @classmethod
    def _fractions_in_unit(cls, v: List[float]) -> List[float]:
        for f in v:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"cell fraction must lie in (0, 1], got {f}")
        return v

    @model_validator(mode="after")
    def _params_valid(self) -> "ExperimentConfig":
        # surfaces beta/alpha/c problems before any sampling starts
        try:
            GirgParams(n=self.n, beta=self.beta, alpha=self.alpha, c=self.c, seed=self.seed)
        except ValidationError as e:
            raise ValueError(_first_error(e))
        return self

    def params(self, n: Optional[int] = None, seed: Optional[int] = None) -> GirgParams:
        return make_params(
            n=self.n if n is None else n,
            beta=self.beta,
            alpha=self.alpha,
            c=self.c,
            seed=self.seed if seed is None else seed,
        )


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    loc = ".".join(str(p) for p in err.get("loc", ()))
    msg = err.get("msg", str(e))
    return f"{loc}: {msg}" if loc else msg


def resolve_config(config_path: Optional[str], overrides: Dict[str, Any]) -> ExperimentConfig:
    """Flags override the config file, which overrides env-backed defaults."""
    data: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        try:
            with path.open("r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise StorageError(f"Cannot read config {path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must hold a JSON object")

    data.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(_first_error(e))
