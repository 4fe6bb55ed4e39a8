"""Sweep configuration: one JSON file, overridable field by field."""
from dataclasses import asdict, dataclass, field, fields, replace
import json
import os

import numpy as np

from ..errors import ConicHeatError, DomainError
from ..geometry import Kind
from ..kernels import EvalConfig, KernelParams

THREADS_ENV = "CONICHEAT_THREADS"


class ConfigError(ConicHeatError, ValueError):
    """Malformed or inconsistent configuration (CLI exit code 2)."""


def log_tau_grid(lo=1e-3, hi=1.0, n=16):
    if not (0 < lo <= hi <= 1):
        raise ConfigError(f"tau bounds must satisfy 0 < lo <= hi <= 1, got [{lo}, {hi}]")
    if n < 1:
        raise ConfigError(f"tau grid needs >= 1 point, got {n}")
    return tuple(float(t) for t in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepConfig:
    kind: str = "ConeSurface"
    parity: str = "even"
    d: tuple = (2,)
    gamma: tuple = (0.0,)
    mu: tuple = (0.0,)
    rho: tuple = (0.5,)
    tau_min: float = 1e-3
    tau_max: float = 1.0
    n_tau: int = 16
    pairs: int = 200
    seed: int = 0
    min_exponent_guard: float = -700.0
    roundoff_guard: float = 1e-9
    drift_tol: float = 0.1
    transport_tol: float = 1e-12
    workers: int = 1
    csv_path: str = None
    json_path: str = None
    taus: tuple = field(init=False)

    def __post_init__(self):
        for name in ("d", "gamma", "mu", "rho"):
            val = getattr(self, name)
            if np.ndim(val) == 0:
                val = (val,)
            conv = int if name == "d" else float
            object.__setattr__(self, name, tuple(conv(v) for v in val))
            if not getattr(self, name):
                raise ConfigError(f"{name} list must not be empty")
        try:
            Kind(self.kind)
        except ValueError:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {[k.value for k in Kind]}") from None
        if self.parity not in ("even", "odd"):
            raise ConfigError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.pairs < 1:
            raise ConfigError(f"pairs must be >= 1, got {self.pairs}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        object.__setattr__(self, "taus", log_tau_grid(self.tau_min, self.tau_max, self.n_tau))
        self.cells()

    @property
    def eval_config(self):
        return EvalConfig(min_exponent_guard=self.min_exponent_guard, roundoff_guard=self.roundoff_guard)

    def cells(self):
        """Kernel parameters of every cell, in a fixed order."""
        kind = Kind(self.kind)
        mus = self.mu if kind.is_solid else (0.0,)
        rhos = self.rho if kind.is_hyper else (0.0,)
        out = []
        for d in self.d:
            for g in self.gamma:
                for mu in mus:
                    for rho in rhos:
                        try:
                            out.append(KernelParams(kind, self.parity, d, g, mu, rho))
                        except DomainError as exc:
                            raise ConfigError(str(exc)) from None
        return out

    def to_dict(self):
        out = asdict(self)
        out.pop("taus")
        for k in ("d", "gamma", "mu", "rho"):
            out[k] = list(out[k])
        return out


_FIELDS = {f.name for f in fields(SweepConfig) if f.init}


def sweep_config_from_dict(data):
    unknown = set(data) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return SweepConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None, overrides=None):
    """Read a JSON config (if any) and apply non-``None`` overrides on top."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return sweep_config_from_dict(data)


def with_overrides(cfg, **kw):
    kw = {k: v for k, v in kw.items() if v is not None}
    try:
        return replace(cfg, **kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def worker_cap(requested):
    """``requested`` capped by ``$CONICHEAT_THREADS`` when that is set."""
    cap = int(requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            env_cap = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if env_cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        cap = min(cap, env_cap)
    return max(1, cap)
