"""Experiment configuration: one flat JSON document, validated before any physics runs."""

from __future__ import annotations

import difflib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

OUTPUT_ENV = "KERRGATE_OUT"
DEFAULT_OUTPUT = "kerrgate-out"

EXPERIMENTS = ("self_kerr", "cross_kerr", "control_z", "scaling", "bound_check")
# these derive tau from R_list and T instead of taking it as input
R_DRIVEN = ("control_z", "scaling", "bound_check")


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "self_kerr": dict(tau=0.02, T_list=[0.2, 0.4, 0.6, 0.8], beta=1.0, eta=1 - 5.6e-4, n_max=25),
    "cross_kerr": dict(
        tau=0.05, T_list=[math.pi], T_step=0.1, alpha=1.0, beta=1.0, eta=1 - 3.5e-3, n_max=12,
        R_list=[1000, 2500],
    ),
    "control_z": dict(tau=None, T_list=[math.pi], n_max=1, R_list=[10, 100, 1000]),
    "scaling": dict(tau=None, T_list=[0.8], beta=1.0, n_max=25, R_list=[500, 1000, 2000]),
    "bound_check": dict(tau=None, T_list=[0.8], beta=1.0, n_max=25, R_list=[1000], epsilon=0.8e-4),
}


def _complex(value, key: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{key}: expected a number or [re, im], got {value!r}")


def _real(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a real number, got {value!r}")
    return float(value)


def _count(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    tau: float | None = None
    T_list: tuple[float, ...] = ()
    T_step: float = 0.1
    beta: complex = 1.0
    alpha: complex = 1.0
    eta: float = 1.0
    n_max: int = 25
    grid_extent: float = 6.0
    grid_points: int = 241
    R_list: tuple[int, ...] = ()
    epsilon: float = 0.8e-4
    output_dir: str = field(default_factory=lambda: os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.experiment in R_DRIVEN:
            if self.tau is not None:
                raise ConfigError(f"tau: {self.experiment} derives tau from R_list; remove it")
            if not self.R_list:
                raise ConfigError("R_list: must not be empty")
        elif self.tau is None or not self.tau > 0:
            raise ConfigError(f"tau: must be positive, got {self.tau}")
        if any(r < 1 for r in self.R_list):
            raise ConfigError(f"R_list: entries must be >= 1, got {list(self.R_list)}")
        if not self.T_list or any(not t > 0 for t in self.T_list):
            raise ConfigError(f"T_list: needs positive strengths, got {list(self.T_list)}")
        if not 0 < self.eta <= 1:
            raise ConfigError(f"eta: must lie in (0, 1], got {self.eta}")
        if self.n_max < 1:
            raise ConfigError(f"n_max: must be >= 1, got {self.n_max}")
        if not self.T_step > 0:
            raise ConfigError(f"T_step: must be positive, got {self.T_step}")
        if not self.grid_extent > 0 or self.grid_points < 3:
            raise ConfigError("grid_extent must be positive and grid_points >= 3")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon: must be positive, got {self.epsilon}")
        if self.threads < 1:
            raise ConfigError(f"threads: must be >= 1, got {self.threads}")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)} | {"T"}
        unknown = sorted(set(data) - known)
        if unknown:
            hints = []
            for key in unknown:
                close = difflib.get_close_matches(key, known, n=1)
                hints.append(f"{key!r}" + (f" (did you mean {close[0]!r}?)" if close else ""))
            raise ConfigError("unknown config key(s): " + ", ".join(hints))
        if "experiment" not in data:
            raise ConfigError("experiment: missing")
        exp = data["experiment"]
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {exp!r}")
        if "T" in data and "T_list" in data:
            raise ConfigError("give either T or T_list, not both")
        merged = {**DEFAULTS[exp], **data}
        if "T" in merged:
            merged["T_list"] = [merged.pop("T")]
        return cls(**_coerce(merged))

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("beta", "alpha"):
            out[key] = [out[key].real, out[key].imag]
        out["T_list"] = list(self.T_list)
        out["R_list"] = list(self.R_list)
        return out

    def override(self, **changes) -> ExperimentConfig:
        """Apply command-line overrides; ``None`` values are ignored."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        data = {**self.to_dict(), **changes}
        return replace(self, **_coerce(data))

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)


def _coerce(data: dict) -> dict:
    out = dict(data)
    out["experiment"] = str(out["experiment"])
    if out.get("tau") is not None:
        out["tau"] = _real(out["tau"], "tau")
    for key in ("beta", "alpha"):
        if key in out:
            out[key] = _complex(out[key], key)
    for key in ("eta", "T_step", "grid_extent", "epsilon"):
        if key in out:
            out[key] = _real(out[key], key)
    for key in ("n_max", "grid_points", "seed", "threads"):
        if key in out:
            out[key] = _count(out[key], key)
    if "T_list" in out:
        values = out["T_list"] if isinstance(out["T_list"], (list, tuple)) else [out["T_list"]]
        out["T_list"] = tuple(_real(v, "T_list") for v in values)
    if "R_list" in out:
        if not isinstance(out["R_list"], (list, tuple)):
            raise ConfigError(f"R_list: expected a list, got {out['R_list']!r}")
        out["R_list"] = tuple(_count(v, "R_list") for v in out["R_list"])
    if "output_dir" in out:
        out["output_dir"] = str(out["output_dir"])
    return out


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    try:
        return ExperimentConfig.from_dict(data)
    except ConfigError as err:
        raise ConfigError(f"{path}: {err}") from None
