"""Reservoir adjacency matrices from complex-network models.

Matrices are ``scipy.sparse.csr_matrix`` throughout. Builders are pure
functions of their spec and integer seed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
import scipy.sparse as sp

# Below this size a dense eigensolve is cheaper than iterating.
DENSE_EIG_MAX_N = 64


class TopologyError(ValueError):
    """Invalid network-model parameters."""


class SpectralRadiusError(RuntimeError):
    """Spectral radius could not be determined."""


class TopologyKind(str, enum.Enum):
    ERDOS_RENYI = "erdos_renyi"
    BARABASI_ALBERT = "barabasi_albert"
    SMALL_WORLD = "small_world"
    RANDOM_MATRIX = "random_matrix"

    @classmethod
    def parse(cls, value) -> "TopologyKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"er": "erdos_renyi", "ba": "barabasi_albert", "barabasi": "barabasi_albert",
                   "ws": "small_world", "watts_strogatz": "small_world",
                   "random": "random_matrix", "dense": "random_matrix"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise TopologyError(f"unknown topology {value!r} (choose from {choices})") from None


@dataclass(frozen=True)
class TopologySpec:
    kind: TopologyKind = TopologyKind.ERDOS_RENYI
    n: int = 400
    mean_degree: float = 20
    rewire_prob: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", TopologyKind.parse(self.kind))
        if self.n < 2:
            raise TopologyError(f"n must be >= 2, got {self.n}")
        if not 0.0 <= self.rewire_prob <= 1.0:
            raise TopologyError(f"rewire_prob must lie in [0, 1], got {self.rewire_prob}")
        if self.kind is TopologyKind.RANDOM_MATRIX:
            return  # mean degree is ignored for the dense model
        if not 0 < self.mean_degree < self.n:
            raise TopologyError(
                f"mean_degree must satisfy 0 < D < n, got D={self.mean_degree}, n={self.n}")
        if self.kind is TopologyKind.SMALL_WORLD and (
                self.mean_degree != int(self.mean_degree) or int(self.mean_degree) % 2):
            raise TopologyError(f"small-world mean_degree must be an even integer, got {self.mean_degree}")

    @property
    def attachment(self) -> int:
        """Edges added per new node in the preferential-attachment model."""
        return int(math.floor(self.mean_degree / 2 + 0.5))


def _from_graph(g: nx.Graph, n: int) -> sp.csr_matrix:
    rows, cols = [], []
    for u, v in g.edges():
        if u != v:
            rows += [u, v]
            cols += [v, u]
    data = np.ones(len(rows))
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def build_skeleton(spec: TopologySpec, seed: int) -> sp.csr_matrix:
    """0/1 adjacency structure for ``spec``.

    Erdős–Rényi, Barabási–Albert and small-world skeletons are undirected
    (symmetric) without self-loops. The random-matrix skeleton is all ones.
    """
    n = spec.n
    if spec.kind is TopologyKind.RANDOM_MATRIX:
        return sp.csr_matrix(np.ones((n, n)))
    if spec.kind is TopologyKind.ERDOS_RENYI:
        rng = np.random.default_rng(seed)
        p = spec.mean_degree / (n - 1)
        upper = sp.triu(sp.csr_matrix(rng.random((n, n)) < p), k=1)
        adj = (upper + upper.T).astype(float)
        return sp.csr_matrix(adj)
    if spec.kind is TopologyKind.BARABASI_ALBERT:
        m = spec.attachment
        if m < 1 or m >= n:
            raise TopologyError(f"preferential attachment needs 1 <= m < n, got m={m}, n={n}")
        return _from_graph(nx.barabasi_albert_graph(n, m, seed=seed), n)
    if spec.kind is TopologyKind.SMALL_WORLD:
        g = nx.watts_strogatz_graph(n, int(spec.mean_degree), spec.rewire_prob, seed=seed)
        return _from_graph(g, n)
    raise TopologyError(f"unhandled topology {spec.kind}")


def assign_weights(skeleton: sp.spmatrix, seed: int) -> sp.csr_matrix:
    """Replace every structural entry by an independent draw from U[-1, 1]."""
    coo = sp.coo_matrix(skeleton)
    keep = coo.data != 0
    rows, cols = coo.row[keep], coo.col[keep]
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    rng = np.random.default_rng(seed)
    data = rng.uniform(-1.0, 1.0, size=rows.size)
    return sp.csr_matrix((data, (rows, cols)), shape=skeleton.shape)


def dense_spectral_radius(w) -> float:
    a = w.toarray() if sp.issparse(w) else np.asarray(w, dtype=float)
    if a.size == 0:
        return 0.0
    try:
        return float(np.max(np.abs(np.linalg.eigvals(a))))
    except np.linalg.LinAlgError as exc:
        raise SpectralRadiusError(f"dense eigensolver failed: {exc}") from exc


def power_iteration(w, tol: float = 1e-10, max_iter: int | None = None,
                    block: int = 16, seed: int = 0) -> float:
    """Estimate the spectral radius of ``w`` by block power iteration.

    A single power vector stalls on real nonsymmetric matrices whose
    dominant eigenvalues form a complex-conjugate pair or sit close together
    in magnitude, which is the usual case for random reservoirs. So a block
    of ``block`` vectors is iterated and re-orthonormalized each step
    (simultaneous iteration), with the estimate taken from the largest Ritz
    value of the projected ``block x block`` matrix. ``block=1`` is the
    textbook power method.

    Converges when the estimate changes by at most ``tol`` (relative) and
    the dominant Ritz pair's residual is below ``1e-9``.

    Raises:
        SpectralRadiusError: no convergence within ``max_iter`` (default 10 n).
    """
    n = w.shape[0]
    if max_iter is None:
        max_iter = 10 * n
    b = max(1, min(block, n))
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, b)))
    prev = None
    for _ in range(max_iter):
        z = np.asarray(w @ q)
        h = q.T @ z
        theta, s = np.linalg.eig(h)
        i = int(np.argmax(np.abs(theta)))
        est = float(abs(theta[i]))
        if est == 0.0 and not np.any(z):
            return 0.0
        y = q @ s[:, i]
        res = np.linalg.norm(z @ s[:, i] - theta[i] * y) / max(est, 1e-300)
        if prev is not None and abs(est - prev) <= tol * est and res < 1e-9:
            return est
        prev = est
        q, _ = np.linalg.qr(z)
    raise SpectralRadiusError(f"power iteration did not converge in {max_iter} iterations")


def spectral_radius(w, tol: float = 1e-10) -> float:
    """Largest eigenvalue magnitude of ``w``.

    Small matrices (n <= 64) go straight to a dense eigensolver; larger ones
    use :func:`power_iteration` and fall back to the dense solver if it
    fails to converge.
    """
    n = w.shape[0]
    if n < 1:
        raise SpectralRadiusError("empty matrix")
    if n <= DENSE_EIG_MAX_N:
        return dense_spectral_radius(w)
    try:
        return power_iteration(w, tol=tol)
    except SpectralRadiusError:
        return dense_spectral_radius(w)


def scale_to_radius(w, rho_target: float) -> sp.csr_matrix:
    """Return ``w`` rescaled so its spectral radius equals ``rho_target``."""
    if not rho_target > 0:
        raise ValueError("rho_target must be > 0")
    rho = spectral_radius(w)
    if rho == 0.0 or rho < 1e-14 * max(abs(w).max(), 1e-300):
        raise SpectralRadiusError("cannot rescale a matrix with zero spectral radius")
    return sp.csr_matrix(w * (rho_target / rho))


def mean_degree(w) -> float:
    """Average number of off-diagonal structural entries per row."""
    a = sp.csr_matrix(w)
    return (a.nnz - np.count_nonzero(a.diagonal())) / a.shape[0]
