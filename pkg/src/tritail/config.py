"""Experiment configuration and result records.

Configs live in TOML files; command-line flags override file values.  A record
embeds the config it was produced from, so rerunning that config reproduces
every value field.
"""

import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

ESTIMATORS = ("mean-triangles", "tail-single-hub", "tail-crude", "boundary", "hub-lln",
              "planted-hub", "many-hub", "bounds")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    alpha: float = 1.6
    x_min: float = 1.0
    n: int = None
    n_grid: list = field(default_factory=list)
    a: float = 1.0
    theta: float = None
    gamma: float = None
    z: list = field(default_factory=list)
    s: float = None  # threshold of the single-hub estimator; default 0.5·c_a(n)
    reps: int = 100
    seed: int = 0
    estimator: str = "mean-triangles"
    mode: str = "conditional"
    out: str = None
    trace: bool = False
    threads: int = 0  # 0 means one worker per CPU
    subset: str = "all"
    rtol: float = 1e-6
    tolerances: dict = field(default_factory=dict)

    def validate(self):
        if not 1 < self.alpha < 2:
            raise ConfigError(f"alpha = {self.alpha} is outside α ∈ (1,2)")
        if not self.x_min > 0:
            raise ConfigError(f"x_min must be positive, got {self.x_min}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.n is not None and self.n < 3:
            raise ConfigError(f"n must be >= 3, got {self.n}")
        if any(m < 3 for m in self.n_grid):
            raise ConfigError("every n in n_grid must be >= 3")
        if not self.a > 0:
            raise ConfigError(f"a must be positive, got {self.a}")
        if self.theta is not None and not (self.alpha > 4 / 3 and 0 < self.theta < 1.5 * self.alpha - 2):
            raise ConfigError(f"theta regime needs α > 4/3 and θ ∈ (0, 3α/2 − 2); got α={self.alpha}, "
                              f"θ={self.theta}")
        if self.gamma is not None and not max(1.0, 3 - 1.5 * self.alpha) < self.gamma < 3:
            raise ConfigError(f"gamma regime needs γ ∈ (max(1, 3 − 3α/2), 3); got γ={self.gamma}")
        if any(not x > 0 for x in self.z):
            raise ConfigError("hub sizes z must be positive")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; choose from {', '.join(ESTIMATORS)}")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        return self

    def grid(self):
        if self.n_grid:
            return list(self.n_grid)
        return [self.n] if self.n is not None else []

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_toml(self):
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        bad = sorted(set(d) - names)
        if bad:
            raise ConfigError(f"unknown config keys: {', '.join(bad)}")
        return cls(**d)

    @classmethod
    def from_toml(cls, text):
        try:
            return cls.from_dict(tomllib.loads(text))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read())


def _version():
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0+unknown"


@dataclass
class ResultRecord:
    command: str
    config: dict
    outputs: dict
    flags: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    version: str = field(default_factory=_version)
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))

    def to_json(self):
        return json.dumps(_finite(asdict(self)), indent=2, sort_keys=True, default=_jsonable,
                          allow_nan=False) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


def _finite(x):
    """Strict JSON has no NaN/Infinity; those become null."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if hasattr(x, "tolist"):
        return _finite(x.tolist())
    return x


def _jsonable(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "to_dict"):
        return x.to_dict()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        w.writerows(rows)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True, default=_jsonable) + "\n")
