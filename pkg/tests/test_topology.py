import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from esn_observer.topology import (
    SpectralRadiusError,
    TopologyError,
    TopologyKind,
    TopologySpec,
    assign_weights,
    build_skeleton,
    dense_spectral_radius,
    mean_degree,
    power_iteration,
    scale_to_radius,
    spectral_radius,
)


def er(n=400, d=20, seed=0):
    return assign_weights(build_skeleton(TopologySpec("erdos_renyi", n, d), seed), seed + 1)


def oracle_radius(m):
    a = m.toarray() if sp.issparse(m) else np.asarray(m)
    return max(abs(v) for v in np.linalg.eigvals(a))


class TestSpec:
    def test_kind_aliases(self):
        assert TopologyKind.parse("ER") is TopologyKind.ERDOS_RENYI
        assert TopologyKind.parse("watts-strogatz") is TopologyKind.SMALL_WORLD
        with pytest.raises(TopologyError):
            TopologyKind.parse("lattice")

    @pytest.mark.parametrize("kwargs", [
        dict(n=1),
        dict(n=10, mean_degree=10),
        dict(n=10, mean_degree=0),
        dict(kind="small_world", n=10, mean_degree=3),
        dict(rewire_prob=1.5),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(TopologyError):
            TopologySpec(**kwargs)

    def test_random_matrix_ignores_degree(self):
        TopologySpec("random_matrix", n=2, mean_degree=20)


class TestSkeleton:
    def test_er_mean_degree_concentrates(self):
        degs = [mean_degree(build_skeleton(TopologySpec(n=400, mean_degree=20), s)) for s in range(100)]
        inside = sum(18 <= d <= 22 for d in degs)
        assert inside >= 95

    def test_er_edge_count_binomial(self):
        n, d, seeds = 200, 10, 60
        p = d / (n - 1)
        pairs = n * (n - 1) / 2
        counts = [build_skeleton(TopologySpec(n=n, mean_degree=d), s).nnz / 2 for s in range(seeds)]
        sd_of_mean = np.sqrt(pairs * p * (1 - p) / seeds)
        assert abs(np.mean(counts) - n * d / 2) < 3 * sd_of_mean

    @pytest.mark.parametrize("kind, d", [("erdos_renyi", 6), ("barabasi_albert", 6), ("small_world", 6)])
    def test_undirected_no_self_loops(self, kind, d):
        a = build_skeleton(TopologySpec(kind, 60, d), 3)
        assert (a != a.T).nnz == 0
        assert np.all(a.diagonal() == 0)
        assert set(np.unique(a.data)) == {1.0}

    def test_small_world_zero_rewire_is_ring(self):
        a = build_skeleton(TopologySpec("small_world", 10, 4, rewire_prob=0.0), 7).toarray()
        assert np.all(a.sum(axis=1) == 4)
        for i in range(10):
            for off in (1, 2):
                assert a[i, (i + off) % 10] == 1

    def test_random_matrix_dense(self):
        assert build_skeleton(TopologySpec("random_matrix", 5), 0).nnz == 25

    def test_barabasi_degree_matches_target(self):
        a = build_skeleton(TopologySpec("barabasi_albert", 400, 20), 0)
        assert mean_degree(a) == pytest.approx(20, rel=0.05)

    def test_barabasi_attachment_too_large(self):
        with pytest.raises(TopologyError):
            build_skeleton(TopologySpec("barabasi_albert", 5, 0.5), 0)
        spec = TopologySpec("barabasi_albert", 5, 4)
        object.__setattr__(spec, "mean_degree", 10)  # bypass D < n to reach m >= n
        with pytest.raises(TopologyError):
            build_skeleton(spec, 0)

    @pytest.mark.parametrize("kind", list(TopologyKind))
    def test_seed_determinism(self, kind):
        spec = TopologySpec(kind, 50, 6)
        a = assign_weights(build_skeleton(spec, 11), 12)
        b = assign_weights(build_skeleton(spec, 11), 12)
        assert (a != b).nnz == 0
        c = assign_weights(build_skeleton(spec, 13), 14)
        assert (a != c).nnz > 0


class TestWeights:
    def test_zero_skeleton(self):
        w = assign_weights(sp.csr_matrix((4, 4)), 0)
        assert w.nnz == 0

    def test_support_and_pattern(self):
        skel = build_skeleton(TopologySpec(n=100, mean_degree=8), 1)
        w = assign_weights(skel, 2)
        assert np.all(np.abs(w.data) <= 1)
        assert ((w != 0) != (skel != 0)).nnz == 0

    def test_directed_weights_independent(self):
        w = assign_weights(build_skeleton(TopologySpec(n=100, mean_degree=8), 1), 2)
        assert (w != w.T).nnz > 0

    def test_mean_near_zero(self):
        assert abs(er().data.mean()) < 0.05


class TestSpectralRadius:
    def test_identity(self):
        assert spectral_radius(sp.identity(3, format="csr")) == pytest.approx(1.0)

    def test_swap(self):
        assert spectral_radius(sp.csr_matrix([[0.0, 2.0], [2.0, 0.0]])) == pytest.approx(2.0)

    def test_power_iteration_on_swap(self):
        # dominant pair +2 / -2 defeats a single Rayleigh quotient
        assert power_iteration(sp.csr_matrix([[0.0, 2.0], [2.0, 0.0]]), block=2) == pytest.approx(2.0)

    def test_power_iteration_single_vector(self):
        a = np.diag([3.0, 1.0, 0.5])
        assert power_iteration(a, block=1) == pytest.approx(3.0, rel=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_50_vs_dense_oracle(self, seed):
        m = np.random.default_rng(seed).uniform(-1, 1, (50, 50))
        assert power_iteration(m) == pytest.approx(oracle_radius(m), rel=1e-8)
        assert spectral_radius(sp.csr_matrix(m)) == pytest.approx(oracle_radius(m), rel=1e-8)

    def test_large_sparse_vs_dense_oracle(self):
        w = er(seed=5)
        assert spectral_radius(w) == pytest.approx(oracle_radius(w), rel=1e-8)

    def test_zero_matrix(self):
        assert power_iteration(sp.csr_matrix((80, 80))) == 0.0

    def test_nonconvergence_raises(self):
        with pytest.raises(SpectralRadiusError):
            power_iteration(er(seed=1), max_iter=3)

    def test_nonconvergence_falls_back(self, monkeypatch):
        import esn_observer.topology as topo

        def boom(*a, **k):
            raise SpectralRadiusError("no")
        monkeypatch.setattr(topo, "power_iteration", boom)
        w = er(n=100, d=6, seed=2)
        assert topo.spectral_radius(w) == pytest.approx(dense_spectral_radius(w), rel=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.01, 100))
    def test_homogeneity(self, seed, alpha):
        w = er(n=80, d=6, seed=seed)
        assert spectral_radius(alpha * w) == pytest.approx(alpha * spectral_radius(w), rel=1e-9)


class TestScale:
    def test_halving(self):
        w = sp.csr_matrix([[0.0, 2.0], [2.0, 0.0]])
        assert np.allclose(scale_to_radius(w, 1.0).toarray(), w.toarray() / 2)

    def test_identity_scaling(self):
        w = er(n=120, d=8)
        same = scale_to_radius(w, spectral_radius(w))
        assert np.allclose(same.toarray(), w.toarray(), rtol=0, atol=1e-12)

    def test_er_to_0_9(self):
        s = scale_to_radius(er(seed=3), 0.9)
        assert spectral_radius(s) == pytest.approx(0.9, rel=1e-6)

    def test_structure_preserved(self):
        w = er(n=120, d=8)
        s = scale_to_radius(w, 0.5)
        assert ((s != 0) != (w != 0)).nnz == 0

    def test_zero_radius_rejected(self):
        nilpotent = sp.csr_matrix([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(SpectralRadiusError):
            scale_to_radius(nilpotent, 1.0)
        with pytest.raises(ValueError):
            scale_to_radius(sp.identity(2, format="csr"), 0.0)
