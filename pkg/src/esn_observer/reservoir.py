"""Echo state network observer: state update, ridge readout, inference."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .dynamics import Trajectory
from .topology import TopologyKind, TopologySpec, assign_weights, build_skeleton, scale_to_radius

# Above this fill fraction the reservoir is stepped with a dense matvec.
_DENSE_FILL = 0.25


class EchoStateWarning(UserWarning):
    """Spectral radius at or above 1, where the echo property is not guaranteed."""


class ReadoutError(RuntimeError):
    """Readout missing or not solvable."""


@dataclass(frozen=True)
class ReservoirConfig:
    n: int = 400
    rho: float = 1.0
    mean_degree: float = 20
    zeta: float = 1.0
    alpha: float = 1.0
    input_scale: float = 1.0
    ridge_beta: float = 1e-6
    topology: TopologyKind = TopologyKind.ERDOS_RENYI
    rewire_prob: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "topology", TopologyKind.parse(self.topology))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"leakage rate must satisfy 0 < alpha <= 1, got {self.alpha}")
        if self.n < 2:
            raise ValueError(f"reservoir size n must be >= 2, got {self.n}")
        if not self.rho > 0:
            raise ValueError(f"spectral radius rho must be > 0, got {self.rho}")
        if not self.ridge_beta >= 0:
            raise ValueError(f"ridge_beta must be >= 0, got {self.ridge_beta}")
        if not self.input_scale >= 0:
            raise ValueError(f"input_scale must be >= 0, got {self.input_scale}")

    @property
    def topology_spec(self) -> TopologySpec:
        return TopologySpec(self.topology, self.n, self.mean_degree, self.rewire_prob)


@dataclass(frozen=True, eq=False)
class Observer:
    """Reservoir matrices plus, once trained, the linear readout.

    ``w_out`` has shape ``(L, n)`` and ``c`` shape ``(L,)``; both are
    ``None`` until :func:`train` (or :func:`with_readout`) fills them.
    """

    config: ReservoirConfig
    w: sp.csr_matrix
    w_in: np.ndarray
    input_channels: tuple[str, ...] = ("x",)
    output_channels: tuple[str, ...] = ("y", "z")
    w_out: np.ndarray | None = None
    c: np.ndarray | None = None
    _op: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = self.config.n
        if self.w.shape != (n, n):
            raise ValueError(f"W must be {n}x{n}, got {self.w.shape}")
        if self.w_in.shape != (n, len(self.input_channels)):
            raise ValueError(f"W_in must be {n}x{len(self.input_channels)}, got {self.w_in.shape}")
        if self.w_out is not None:
            if self.w_out.shape != (len(self.output_channels), n):
                raise ValueError(f"W_out must be {len(self.output_channels)}x{n}")
            if self.c is None or self.c.shape != (len(self.output_channels),):
                raise ValueError("readout bias c missing or mis-shaped")
        if self._op is None:
            dense = self.w.nnz > _DENSE_FILL * n * n
            object.__setattr__(self, "_op", self.w.toarray() if dense else self.w)

    @property
    def trained(self) -> bool:
        return self.w_out is not None

    @property
    def n(self) -> int:
        return self.config.n


def init_observer(config: ReservoirConfig, k_inputs: int = 1, l_outputs: int = 2,
                  input_channels: Sequence[str] | None = None,
                  output_channels: Sequence[str] | None = None) -> Observer:
    """Build the reservoir for ``config`` with an unset readout.

    Three independent streams are spawned from ``config.seed``: skeleton,
    reservoir weights and input weights.
    """
    if k_inputs < 1 or l_outputs < 1:
        raise ValueError("need at least one input and one output")
    input_channels = tuple(input_channels or (["x"] if k_inputs == 1 else
                                              [f"u{i}" for i in range(k_inputs)]))
    output_channels = tuple(output_channels or (["y", "z"] if l_outputs == 2 else
                                                [f"v{i}" for i in range(l_outputs)]))
    if len(input_channels) != k_inputs or len(output_channels) != l_outputs:
        raise ValueError("channel names do not match k_inputs / l_outputs")
    if config.rho >= 1.0:
        warnings.warn(f"rho={config.rho} >= 1: the echo property is not guaranteed",
                      EchoStateWarning, stacklevel=2)
    s_skel, s_w, s_in = (int(ss.generate_state(1)[0])
                         for ss in np.random.SeedSequence(config.seed).spawn(3))
    skeleton = build_skeleton(config.topology_spec, s_skel)
    w = scale_to_radius(assign_weights(skeleton, s_w), config.rho)
    rng = np.random.default_rng(s_in)
    w_in = rng.uniform(-config.input_scale, config.input_scale, size=(config.n, k_inputs))
    return Observer(config, w, w_in, input_channels, output_channels)


def with_readout(obs: Observer, w_out, c) -> Observer:
    return replace(obs, w_out=np.asarray(w_out, dtype=float),
                   c=np.asarray(c, dtype=float).reshape(-1))


def zero_state(obs: Observer) -> np.ndarray:
    return np.zeros(obs.n)


def update_state(obs: Observer, r, x) -> np.ndarray:
    """One leaky-tanh step: ``(1-a) r + a tanh(W r + W_in x + zeta)``."""
    cfg = obs.config
    r = np.asarray(r, dtype=float)
    drive = obs.w_in @ np.atleast_1d(np.asarray(x, dtype=float)) + cfg.zeta
    act = np.tanh(obs._op @ r + drive)
    if cfg.alpha == 1.0:
        return act
    return (1.0 - cfg.alpha) * r + cfg.alpha * act


def _inputs(obs: Observer, data) -> np.ndarray:
    if isinstance(data, Trajectory):
        return data.select(obs.input_channels)
    u = np.asarray(data, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != len(obs.input_channels):
        raise ValueError(f"expected {len(obs.input_channels)} input columns, got {u.shape[1]}")
    return u


def collect_states(obs: Observer, data, r0=None) -> tuple[np.ndarray, np.ndarray]:
    """Drive the reservoir with every input row of ``data``.

    Returns the ``(steps, n)`` matrix whose row ``t`` is the state after
    consuming input ``t``, and the final state for continuation.
    """
    u = _inputs(obs, data)
    r = zero_state(obs) if r0 is None else np.array(r0, dtype=float)
    states = np.empty((u.shape[0], obs.n))
    if u.shape[0] == 0:
        return states, r
    cfg = obs.config
    drive = u @ obs.w_in.T + cfg.zeta
    op, a = obs._op, cfg.alpha
    for t in range(u.shape[0]):
        act = np.tanh(op @ r + drive[t])
        r = act if a == 1.0 else (1.0 - a) * r + a * act
        states[t] = r
    return states, r


def train_readout(states, targets, ridge_beta: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Ridge regression of ``targets`` on ``states`` with an unpenalized bias.

    Solves the augmented normal equations for ``[W_out | c]``. Returns
    ``w_out`` of shape ``(L, n)`` and ``c`` of shape ``(L,)``.

    Raises:
        ReadoutError: the normal matrix is singular (only possible with
            ``ridge_beta == 0``).
    """
    s = np.asarray(states, dtype=float)
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if s.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: {s.shape[0]} states vs {y.shape[0]} targets")
    rows, n = s.shape
    if rows < n + 1:
        warnings.warn(f"only {rows} training rows for {n + 1} readout unknowns", stacklevel=2)
    a = np.hstack([s, np.ones((rows, 1))])
    gram = a.T @ a
    idx = np.arange(n)
    gram[idx, idx] += ridge_beta
    rhs = a.T @ y
    if ridge_beta == 0 and np.linalg.matrix_rank(a) < n + 1:
        raise ReadoutError("normal matrix is singular; use ridge_beta > 0")
    try:
        coef = scipy.linalg.solve(gram, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ReadoutError(f"normal equations not solvable ({exc}); use ridge_beta > 0") from exc
    if not np.all(np.isfinite(coef)):
        raise ReadoutError("readout solve produced non-finite weights")
    return coef[:n].T.copy(), coef[n].copy()


def readout(obs: Observer, states) -> np.ndarray:
    """Apply ``y = W_out r + c`` row-wise."""
    if not obs.trained:
        raise ReadoutError("observer readout is not trained")
    return np.asarray(states) @ obs.w_out.T + obs.c


def train(obs: Observer, data: Trajectory, r0=None, washout: int = 0) -> tuple[Observer, np.ndarray]:
    """Fit the readout on ``data`` after discarding ``washout`` leading rows.

    Returns the trained observer and the reservoir state after the last row.
    """
    states, r = collect_states(obs, data, r0)
    targets = data.select(obs.output_channels)
    w_out, c = train_readout(states[washout:], targets[washout:], obs.config.ridge_beta)
    return with_readout(obs, w_out, c), r


def predict(obs: Observer, data, r0=None) -> tuple[Trajectory, np.ndarray]:
    """Observer inference: the measured input keeps driving the reservoir.

    Returns the estimated output channels on the same time grid as ``data``
    and the final reservoir state.
    """
    if not obs.trained:
        raise ReadoutError("observer readout is not trained")
    states, r = collect_states(obs, data, r0)
    t0, dt = (data.t0, data.dt) if isinstance(data, Trajectory) else (0.0, 1.0)
    return Trajectory(t0, dt, obs.output_channels, readout(obs, states)), r
