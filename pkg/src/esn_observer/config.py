"""Flat ``key=value`` run configuration.

One pair per line, ``#`` starts a comment. Unknown keys are rejected and
missing keys take the defaults below, which :func:`format_config` writes back
out in full so that a manifest reproduces its run.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields

from .dynamics import RosslerParams
from .harness import DEFAULT_SWEEPS, SWEEP_PARAMETERS, ExperimentPlan, PlanError, Times, range_list
from .reservoir import ReservoirConfig
from .topology import TopologyError, TopologyKind


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    # reservoir
    n: int = 400
    rho: float = 1.0
    mean_degree: int = 20
    zeta: float = 1.0
    alpha: float = 1.0
    input_scale: float = 1.0
    ridge_beta: float = 1e-6
    topology: str = "erdos_renyi"
    rewire_prob: float = 0.1
    seed: int = 0
    # Rössler system and initial condition
    a: float = 0.5
    b: float = 2.0
    c: float = 4.0
    x0: float = 1.0
    y0: float = 1.0
    z0: float = 1.0
    # time windows
    dt: float = 0.1
    t0: float = 100.0
    t1: float = 260.0
    t2: float = 500.0
    # experiment
    seeds_per_value: int = 10
    master_seed: int = 0
    sweep_values: str = ""
    workers: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError("value must be finite", f.name)
        if self.workers < 1:
            raise ConfigError("must be >= 1", "workers")
        try:
            object.__setattr__(self, "topology", TopologyKind.parse(self.topology).value)
            self.reservoir_config().topology_spec
            self.rossler_params()
            self.times()
            self.plan()
            if self.sweep_values:
                parse_values(self.sweep_values)
        except ConfigError:
            raise
        except (PlanError, TopologyError, ValueError) as exc:
            raise ConfigError(str(exc), _guess_key(str(exc))) from exc

    def reservoir_config(self) -> ReservoirConfig:
        return ReservoirConfig(n=self.n, rho=self.rho, mean_degree=self.mean_degree,
                               zeta=self.zeta, alpha=self.alpha, input_scale=self.input_scale,
                               ridge_beta=self.ridge_beta, topology=self.topology,
                               rewire_prob=self.rewire_prob, seed=self.seed)

    def rossler_params(self) -> RosslerParams:
        return RosslerParams(self.a, self.b, self.c)

    def times(self) -> Times:
        return Times(self.t0, self.t1, self.t2, self.dt)

    def plan(self, parameter: str | None = None) -> ExperimentPlan:
        """Experiment plan; with ``parameter``, sweeps ``sweep_values`` or the default list."""
        values: tuple = ()
        if parameter is not None:
            if parameter not in SWEEP_PARAMETERS:
                raise ConfigError(f"unknown sweep parameter {parameter!r}; "
                                  f"choose from {', '.join(SWEEP_PARAMETERS)}")
            values = tuple(parse_values(self.sweep_values) if self.sweep_values
                           else DEFAULT_SWEEPS[parameter])
        return ExperimentPlan(self.reservoir_config(), self.rossler_params(), self.times(),
                              parameter, values, self.seeds_per_value, self.master_seed,
                              (self.x0, self.y0, self.z0))


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _guess_key(message: str) -> str | None:
    low = message.lower()
    for name in ("alpha", "rho", "ridge_beta", "mean_degree", "rewire_prob", "input_scale",
                 "seeds_per_value", "topology"):
        if name in low:
            return name
    if "leakage" in low:
        return "alpha"
    if "t0" in low or "t1" in low or "t2" in low:
        return "t0/t1/t2"
    if "dt" in low:
        return "dt"
    if "reservoir size" in low:
        return "n"
    return None


def parse_values(text: str) -> list:
    """``A:inc:B`` range or comma-separated list of numbers."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be A:inc:B", "sweep_values")
        return range_list(*(_number(p, "sweep_values") for p in parts))
    vals = [_number(p, "sweep_values") for p in text.split(",") if p.strip()]
    if not vals:
        raise ConfigError("empty value list", "sweep_values")
    return vals


def _number(text: str, key: str, line: int | None = None):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text.strip()!r}", key, line) from None
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def _coerce(key: str, raw: str, line: int | None = None):
    kind = _FIELDS[key].type
    raw = raw.strip()
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", key, line) from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"expected a number, got {raw!r}", key, line) from None
    return raw


def parse_pairs(text: str) -> dict:
    """Parse ``key=value`` lines into coerced values, with line-precise errors."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected key=value, got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", key, lineno)
        out[key] = (_coerce(key, value, lineno), lineno)
    return out


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Build a validated :class:`RunConfig` from a config document.

    ``overrides`` (already-parsed ``key: value`` pairs, e.g. from ``--set``)
    win over the document.
    """
    pairs = parse_pairs(text)
    values = {k: v for k, (v, _) in pairs.items()}
    values.update(overrides or {})
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        if exc.key in pairs and exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1], exc.key, pairs[exc.key][1]) from None
        raise


def parse_override(item: str) -> dict:
    """Parse one ``--set key=value`` argument."""
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = (s.strip() for s in item.split("=", 1))
    if key not in _FIELDS:
        raise ConfigError("unknown key", key)
    return {key: _coerce(key, value)}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(cfg: RunConfig) -> str:
    """Every effective parameter as ``key=value`` lines; parses back exactly."""
    lines = ["# effective run configuration"]
    lines += [f"{f.name}={_fmt(getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def replace(cfg: RunConfig, **changes) -> RunConfig:
    return dataclasses.replace(cfg, **changes)
