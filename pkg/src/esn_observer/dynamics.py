"""Rössler system and fixed-step RK4 trajectory generation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

#: Any state component beyond this magnitude is treated as divergence.
DIVERGENCE_BOUND = 1e6


class DivergenceError(RuntimeError):
    """Raised when an integration produces a non-finite or runaway state."""

    def __init__(self, step: int, state):
        self.step = step
        self.state = np.asarray(state, dtype=float)
        super().__init__(f"integration diverged at step {step}: state={self.state.tolist()}")


@dataclass(frozen=True)
class RosslerParams:
    a: float = 0.5
    b: float = 2.0
    c: float = 4.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Rössler parameter {name} must be finite")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled multichannel time series.

    Sample ``i`` sits at time ``t0 + i * dt``. ``samples`` has shape
    ``(num_steps, len(channels))`` and is made read-only on construction so
    that cached trajectories can be shared safely.
    """

    t0: float
    dt: float
    channels: tuple[str, ...]
    samples: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        samples = np.array(self.samples, dtype=float, ndmin=2, copy=True)
        if samples.size == 0:
            samples = samples.reshape(0, len(self.channels))
        if samples.ndim != 2 or samples.shape[1] != len(self.channels):
            raise ValueError(
                f"samples shape {samples.shape} does not match {len(self.channels)} channels"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.channels.index(name)]

    def select(self, names: Sequence[str]) -> np.ndarray:
        """Return the columns for ``names`` as a ``(steps, len(names))`` array."""
        idx = [self.channels.index(nm) for nm in names]
        return self.samples[:, idx]

    def window(self, start: int, stop: int) -> "Trajectory":
        """Samples ``start <= i < stop`` as a new trajectory."""
        start = max(start, 0)
        stop = min(stop, len(self))
        return Trajectory(self.t0 + start * self.dt, self.dt, self.channels,
                          self.samples[start:stop])

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (self.t0 == other.t0 and self.dt == other.dt
                and self.channels == other.channels
                and np.array_equal(self.samples, other.samples))

    __hash__ = None


def rossler_deriv(s, p: RosslerParams = RosslerParams()) -> np.ndarray:
    x, y, z = s
    return np.array([-y - z, x + p.a * y, p.b + z * (x - p.c)])


def rk4_step(s, p=RosslerParams(), dt: float = 0.1,
             deriv: Callable = rossler_deriv) -> np.ndarray:
    """Advance ``s`` by one classical fourth-order Runge-Kutta step.

    ``deriv(state, p)`` defaults to the Rössler vector field; any other
    autonomous field with the same signature can be stepped too.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    s = np.asarray(s, dtype=float)
    k1 = deriv(s, p)
    k2 = deriv(s + 0.5 * dt * k1, p)
    k3 = deriv(s + 0.5 * dt * k2, p)
    k4 = deriv(s + dt * k3, p)
    out = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(1, out)
    return out


def num_grid_points(dt: float, t_end: float) -> int:
    """Number of grid points ``0, dt, ...`` up to and including ``t_end``."""
    return int(math.floor(t_end / dt + 1e-9)) + 1


def integrate(s0, p, dt: float, steps: int, deriv: Callable = rossler_deriv) -> np.ndarray:
    """Return ``steps + 1`` RK4 states starting at ``s0`` (row 0 is ``s0``)."""
    s = np.asarray(s0, dtype=float)
    out = np.empty((steps + 1, s.size))
    out[0] = s
    for i in range(1, steps + 1):
        try:
            s = rk4_step(s, p, dt, deriv)
        except DivergenceError as exc:
            raise DivergenceError(i, exc.state) from None
        if np.max(np.abs(s)) > DIVERGENCE_BOUND:
            raise DivergenceError(i, s)
        out[i] = s
    return out


def generate_trajectory(p: RosslerParams = RosslerParams(), s0=(1.0, 1.0, 1.0),
                        dt: float = 0.1, t_end: float = 500.0) -> Trajectory:
    """Integrate the Rössler system on the grid ``0, dt, ..., <= t_end``.

    Raises:
        DivergenceError: if any component turns non-finite or exceeds
            ``DIVERGENCE_BOUND``; the offending step index is attached.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not t_end > 0:
        raise ValueError("t_end must be > 0")
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (3,) or not np.all(np.isfinite(s0)):
        raise ValueError("s0 must be three finite numbers")
    steps = num_grid_points(dt, t_end) - 1
    samples = integrate(s0, p, dt, steps)
    return Trajectory(0.0, dt, ("x", "y", "z"), samples)
