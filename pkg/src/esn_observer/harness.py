"""Parameter sweeps and topology comparison with positional seeding."""

from __future__ import annotations

import dataclasses
import functools
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import reservoir as res
from .dynamics import DivergenceError, RosslerParams, Trajectory, generate_trajectory
from .reservoir import ReservoirConfig
from .topology import SpectralRadiusError, TopologyError, TopologyKind

#: Single-seed MSE values reported for each reservoir model (Table I).
PAPER_TABLE_I = {
    TopologyKind.ERDOS_RENYI: 0.0669,
    TopologyKind.RANDOM_MATRIX: 0.1811,
    TopologyKind.BARABASI_ALBERT: 0.0808,
    TopologyKind.SMALL_WORLD: 0.1638,
}

PAPER_KINDS = (TopologyKind.ERDOS_RENYI, TopologyKind.RANDOM_MATRIX,
               TopologyKind.BARABASI_ALBERT, TopologyKind.SMALL_WORLD)

SWEEP_PARAMETERS = ("N", "D", "T0", "T1", "T2", "delta")

# Exceptions a single trial may raise that are recorded rather than propagated.
_TRIAL_ERRORS = (DivergenceError, SpectralRadiusError, TopologyError, res.ReadoutError,
                 FloatingPointError, np.linalg.LinAlgError, ValueError)


class PlanError(ValueError):
    """Invalid experiment plan."""


class SweepError(RuntimeError):
    """Every trial of a sweep failed."""


def range_list(a: float, inc: float, b: float) -> list:
    """Inclusive arithmetic range ``a:inc:b``.

    Integers stay integers; float values are rounded to 12 decimals so that
    e.g. ``0.02:0.02:0.4`` yields ``0.06`` rather than ``0.060000000000000005``.
    """
    if not inc > 0:
        raise PlanError(f"increment must be > 0, got {inc}")
    if a > b:
        raise PlanError(f"range start {a} exceeds end {b}")
    count = int(math.floor((b - a) / inc + 1e-9)) + 1
    if all(float(v).is_integer() for v in (a, inc, b)):
        return [int(a) + i * int(inc) for i in range(count)]
    return [round(a + i * inc, 12) for i in range(count)]


DEFAULT_SWEEPS = {
    "N": range_list(50, 50, 2000),
    "D": range_list(10, 20, 390),
    "T0": range_list(10, 10, 200),
    "T1": range_list(260, 10, 450),
    "T2": range_list(450, 10, 800),
    "delta": range_list(0.02, 0.02, 0.4),
}


@dataclass(frozen=True)
class Times:
    t0: float = 100.0
    t1: float = 260.0
    t2: float = 500.0
    dt: float = 0.1

    def __post_init__(self):
        if not self.dt > 0:
            raise PlanError(f"dt must be > 0, got {self.dt}")
        if not 0 <= self.t0 < self.t1 < self.t2:
            raise PlanError(f"need 0 <= T0 < T1 < T2, got {self.t0}, {self.t1}, {self.t2}")

    def indices(self) -> tuple[int, int, int]:
        """Grid indices: washout ``[0, i0)``, train ``[i0, i1)``, predict ``[i1, i2]``."""
        i0 = math.ceil(self.t0 / self.dt - 1e-9)
        i1 = math.ceil(self.t1 / self.dt - 1e-9)
        i2 = math.floor(self.t2 / self.dt + 1e-9)
        return i0, i1, i2


@dataclass(frozen=True)
class ExperimentPlan:
    base_config: ReservoirConfig = ReservoirConfig()
    rossler: RosslerParams = RosslerParams()
    times: Times = Times()
    swept_parameter: str | None = None
    values: tuple = ()
    seeds_per_value: int = 10
    master_seed: int = 0
    s0: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "s0", tuple(float(v) for v in self.s0))
        if self.seeds_per_value < 1:
            raise PlanError("seeds_per_value must be >= 1")
        if self.swept_parameter is not None:
            if self.swept_parameter not in SWEEP_PARAMETERS:
                raise PlanError(f"unknown sweep parameter {self.swept_parameter!r}; "
                                f"choose from {', '.join(SWEEP_PARAMETERS)}")
            if not self.values:
                raise PlanError("a sweep needs at least one value")
            for v in self.values:
                self.resolve(v)

    def resolve(self, value=None) -> tuple[ReservoirConfig, Times]:
        """Configuration and time windows with the swept parameter set to ``value``."""
        cfg, times = self.base_config, self.times
        name = self.swept_parameter
        if name is None or value is None:
            return cfg, times
        try:
            if name in ("N", "D"):
                if float(value) != int(value):
                    raise PlanError(f"{name} must be an integer, got {value}")
                key = "n" if name == "N" else "mean_degree"
                cfg = dataclasses.replace(cfg, **{key: int(value)})
                cfg.topology_spec  # validates D against n
            elif name == "delta":
                times = dataclasses.replace(times, dt=float(value))
            else:
                times = dataclasses.replace(times, **{name.lower(): float(value)})
        except (TopologyError, ValueError) as exc:
            raise PlanError(f"{name}={value}: {exc}") from exc
        return cfg, times

    def sweep_values(self) -> tuple:
        return self.values if self.swept_parameter else (None,)


@dataclass(frozen=True)
class SweepRecord:
    parameter: str
    value: object
    seed: int
    mse: float
    wall_seconds: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return math.isfinite(self.mse)


@dataclass(frozen=True)
class ComparisonRecord:
    topology: TopologyKind
    seeds: tuple[int, ...]
    mses: tuple[float, ...]
    median_mse: float = field(init=False)
    mean_mse: float = field(init=False)
    n_ok: int = field(init=False)
    n_failed: int = field(init=False)

    def __post_init__(self):
        ok = [m for m in self.mses if math.isfinite(m)]
        object.__setattr__(self, "n_ok", len(ok))
        object.__setattr__(self, "n_failed", len(self.mses) - len(ok))
        object.__setattr__(self, "median_mse", float(np.median(ok)) if ok else math.inf)
        object.__setattr__(self, "mean_mse", float(np.mean(ok)) if ok else math.inf)

    @property
    def reference_mse(self) -> float | None:
        return PAPER_TABLE_I.get(self.topology)


def trial_seed(master_seed: int, parameter: str, value_index: int, trial_index: int) -> int:
    """Seed for one trial, a pure function of its position in the plan."""
    tag = zlib.crc32(parameter.encode())
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, tag, value_index, trial_index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def mse(predicted, truth) -> float:
    """Mean over all steps and channels of the squared error."""
    p = predicted.samples if isinstance(predicted, Trajectory) else np.asarray(predicted, float)
    t = truth.samples if isinstance(truth, Trajectory) else np.asarray(truth, float)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction")
    return float(np.mean((p - t) ** 2))


@functools.lru_cache(maxsize=16)
def _cached_trajectory(p: RosslerParams, s0: tuple, dt: float, t_end: float) -> Trajectory:
    return generate_trajectory(p, s0, dt, t_end)


@dataclass(frozen=True, eq=False)
class TrialResult:
    observer: res.Observer
    truth: Trajectory
    predicted: Trajectory
    mse: float


def run_pipeline(cfg: ReservoirConfig, times: Times, rossler: RosslerParams = RosslerParams(),
                 s0=(1.0, 1.0, 1.0), self_test: bool = False) -> TrialResult:
    """Generate data, wash out, train on ``[T0, T1)``, observe ``[T1, T2]``."""
    data = _cached_trajectory(rossler, tuple(s0), times.dt, times.t2)
    i0, i1, i2 = times.indices()
    i2 = min(i2, len(data) - 1)
    obs = res.init_observer(cfg, 1, 2, ("x",), ("y", "z"))
    obs, r = res.train(obs, data.window(0, i1), washout=i0)
    window = data.window(i1, i2 + 1)
    predicted, _ = res.predict(obs, window, r)
    truth = Trajectory(window.t0, window.dt, ("y", "z"), window.select(("y", "z")))
    if self_test:
        truth = predicted
    return TrialResult(obs, truth, predicted, mse(predicted, truth))


def run_trial(plan: ExperimentPlan, value, seed: int, self_test: bool = False) -> SweepRecord:
    """One full observer trial. Pipeline failures become an ``inf`` record."""
    name = plan.swept_parameter or "none"
    start = time.perf_counter()
    try:
        cfg, times = plan.resolve(value)
        cfg = dataclasses.replace(cfg, seed=seed)
        with np.errstate(over="raise", invalid="raise"):
            score = run_pipeline(cfg, times, plan.rossler, plan.s0, self_test).mse
        if not math.isfinite(score):
            raise FloatingPointError("non-finite MSE")
        err = None
    except _TRIAL_ERRORS as exc:
        score, err = math.inf, f"{type(exc).__name__}: {exc}"
    return SweepRecord(name, value, seed, score, time.perf_counter() - start, err)


def _run_task(args) -> SweepRecord:
    plan, value, seed = args
    return run_trial(plan, value, seed)


def _execute(tasks: list, workers: int) -> list[SweepRecord]:
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


def sweep_tasks(plan: ExperimentPlan) -> list[tuple]:
    """``(plan, value, seed)`` for every trial, value-major then seed-minor."""
    name = plan.swept_parameter or "none"
    return [(plan, value, trial_seed(plan.master_seed, name, vi, ti))
            for vi, value in enumerate(plan.sweep_values())
            for ti in range(plan.seeds_per_value)]


def run_sweep(plan: ExperimentPlan, workers: int = 1) -> list[SweepRecord]:
    """Run every (value, seed) trial of ``plan``.

    Raises:
        SweepError: when no trial produced a finite MSE.
    """
    records = _execute(sweep_tasks(plan), workers)
    if not any(r.ok for r in records):
        reasons = sorted({r.error for r in records if r.error})
        raise SweepError(f"all {len(records)} trials failed: {'; '.join(reasons)}")
    return records


def median_by_value(records: Sequence[SweepRecord]) -> list[tuple[object, float, int]]:
    """``(value, median finite mse, n_excluded)`` in first-seen value order."""
    groups: dict = {}
    for r in records:
        groups.setdefault(r.value, []).append(r.mse)
    out = []
    for value, ms in groups.items():
        ok = [m for m in ms if math.isfinite(m)]
        out.append((value, float(np.median(ok)) if ok else math.inf, len(ms) - len(ok)))
    return out


def compare_topologies(plan: ExperimentPlan, kinds: Sequence = PAPER_KINDS,
                       workers: int = 1) -> list[ComparisonRecord]:
    """Run ``plan.seeds_per_value`` trials per topology at the base config.

    Trial ``i`` uses the same seed for every topology, so the comparison is
    paired.
    """
    kinds = [TopologyKind.parse(k) for k in kinds]
    if not kinds:
        raise PlanError("no topologies to compare")
    seeds = [trial_seed(plan.master_seed, "topology", 0, ti) for ti in range(plan.seeds_per_value)]
    tasks = []
    for kind in kinds:
        sub = dataclasses.replace(plan, swept_parameter=None, values=(),
                                  base_config=dataclasses.replace(plan.base_config, topology=kind))
        tasks += [(sub, None, s) for s in seeds]
    records = _execute(tasks, workers)
    if not any(r.ok for r in records):
        reasons = sorted({r.error for r in records if r.error})
        raise SweepError(f"all {len(records)} trials failed: {'; '.join(reasons)}")
    k = len(seeds)
    return [ComparisonRecord(kind, tuple(seeds), tuple(r.mse for r in records[i * k:(i + 1) * k]))
            for i, kind in enumerate(kinds)]

