import math
import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from esn_observer.dynamics import Trajectory, generate_trajectory
from esn_observer.harness import mse
from esn_observer.reservoir import (
    EchoStateWarning,
    Observer,
    ReadoutError,
    ReservoirConfig,
    collect_states,
    init_observer,
    predict,
    train,
    train_readout,
    update_state,
    with_readout,
)
from esn_observer.topology import spectral_radius


def tiny_observer(n=4, k=1, l=2, alpha=1.0, zeta=0.0, w=None, w_in=None, seed=0):
    rng = np.random.default_rng(seed)
    cfg = ReservoirConfig(n=n, alpha=alpha, zeta=zeta, topology="random_matrix", rho=0.5)
    w = sp.csr_matrix(rng.uniform(-0.5, 0.5, (n, n)) if w is None else w)
    w_in = rng.uniform(-1, 1, (n, k)) if w_in is None else np.asarray(w_in, float)
    return Observer(cfg, w, w_in, tuple(f"u{i}" for i in range(k)), tuple(f"v{i}" for i in range(l)))


def scalar_loop_update(w, w_in, zeta, alpha, r, x):
    n = len(r)
    out = []
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += w[i][j] * r[j]
        for k in range(len(x)):
            acc += w_in[i][k] * x[k]
        acc += zeta
        out.append((1 - alpha) * r[i] + alpha * math.tanh(acc))
    return out


@pytest.fixture(scope="module")
def data():
    return generate_trajectory()


class TestConfig:
    def test_defaults(self):
        c = ReservoirConfig()
        assert (c.n, c.rho, c.mean_degree, c.zeta, c.alpha) == (400, 1.0, 20, 1.0, 1.0)

    @pytest.mark.parametrize("kwargs", [dict(alpha=0), dict(alpha=1.5), dict(n=1),
                                        dict(rho=0), dict(ridge_beta=-1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ReservoirConfig(**kwargs)


class TestInit:
    def test_default_dimensions(self):
        with pytest.warns(EchoStateWarning):
            obs = init_observer(ReservoirConfig(), 1, 2)
        assert obs.w.shape == (400, 400)
        assert obs.w_in.shape == (400, 1)
        assert spectral_radius(obs.w) == pytest.approx(1.0, rel=1e-6)
        assert not obs.trained

    def test_no_warning_below_one(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", EchoStateWarning)
            init_observer(ReservoirConfig(n=50, mean_degree=6, rho=0.9))

    def test_smallest_random_matrix(self):
        obs = init_observer(ReservoirConfig(n=2, topology="random_matrix", rho=0.5))
        assert obs.w.shape == (2, 2)
        assert obs.w.nnz == 4

    def test_same_seed_same_matrices(self):
        cfg = ReservoirConfig(n=60, mean_degree=6, rho=0.9, seed=42)
        a, b = init_observer(cfg), init_observer(cfg)
        assert (a.w != b.w).nnz == 0
        assert np.array_equal(a.w_in, b.w_in)

    def test_input_scale(self):
        obs = init_observer(ReservoirConfig(n=60, mean_degree=6, rho=0.9, input_scale=0.25))
        assert np.abs(obs.w_in).max() <= 0.25

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            tiny_observer(w=np.zeros((3, 3)))
        with pytest.raises(ValueError):
            init_observer(ReservoirConfig(n=10, mean_degree=4, rho=0.5), 0, 1)


class TestUpdate:
    def test_zero_everything(self):
        obs = tiny_observer(w=np.zeros((4, 4)), w_in=np.zeros((4, 1)))
        assert np.array_equal(update_state(obs, np.ones(4), [3.0]), np.zeros(4))

    def test_bias_only(self):
        obs = tiny_observer(w=np.zeros((4, 4)), w_in=np.zeros((4, 1)), zeta=1.0)
        assert np.allclose(update_state(obs, np.full(4, 0.3), [2.0]), math.tanh(1.0))
        assert math.tanh(1.0) == pytest.approx(0.761594, abs=1e-6)

    def test_tiny_leak_keeps_state(self):
        obs = tiny_observer(alpha=1e-9, zeta=1.0)
        r = np.array([0.1, -0.2, 0.3, 0.0])
        assert np.allclose(update_state(obs, r, [1.0]), r, atol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 8), st.integers(1, 3), st.floats(0.01, 1.0), st.floats(-2, 2),
           st.integers(0, 2**31))
    def test_matches_scalar_loop(self, n, k, alpha, zeta, seed):
        rng = np.random.default_rng(seed)
        obs = tiny_observer(n=n, k=k, alpha=alpha, zeta=zeta,
                            w=rng.uniform(-1, 1, (n, n)), w_in=rng.uniform(-1, 1, (n, k)))
        r = rng.uniform(-1, 1, obs.n)
        x = rng.uniform(-3, 3, k)
        expected = scalar_loop_update(obs.w.toarray().tolist(), obs.w_in.tolist(), zeta, alpha,
                                      r.tolist(), x.tolist())
        assert np.allclose(update_state(obs, r, x), expected, rtol=0, atol=1e-12)


class TestCollect:
    def test_empty(self):
        obs = tiny_observer()
        r0 = np.array([0.1, 0.2, 0.3, 0.4])
        states, r = collect_states(obs, np.zeros((0, 1)), r0)
        assert states.shape == (0, 4)
        assert np.array_equal(r, r0)

    def test_one_step_equals_update(self):
        obs = tiny_observer(zeta=0.7, alpha=0.6)
        r0 = np.array([0.1, -0.2, 0.3, 0.4])
        states, r = collect_states(obs, np.array([[1.3]]), r0)
        assert np.array_equal(states[0], update_state(obs, r0, [1.3]))
        assert np.array_equal(r, states[0])

    def test_training_slice_range(self, data):
        obs = init_observer(ReservoirConfig(rho=0.99), 1, 2)
        states, _ = collect_states(obs, data.window(1000, 2600))
        assert states.shape == (1600, 400)
        assert np.all(np.abs(states) < 1)


class TestTrainReadout:
    def test_zero_targets(self):
        s = np.random.default_rng(0).uniform(-1, 1, (50, 5))
        w_out, c = train_readout(s, np.zeros((50, 2)), 1e-6)
        assert np.allclose(w_out, 0) and np.allclose(c, 0)

    def test_recovers_affine_map(self):
        rng = np.random.default_rng(1)
        s = rng.uniform(-1, 1, (200, 6))
        a = rng.normal(size=(2, 6))
        b = np.array([0.5, -1.5])
        w_out, c = train_readout(s, s @ a.T + b, 0.0)
        assert np.allclose(w_out, a, rtol=1e-8, atol=1e-10)
        assert np.allclose(c, b, rtol=1e-8, atol=1e-10)

    def test_huge_ridge_gives_means(self):
        rng = np.random.default_rng(2)
        s = rng.uniform(-1, 1, (100, 5))
        y = rng.normal(size=(100, 2)) + [3.0, -2.0]
        w_out, c = train_readout(s, y, 1e12)
        assert np.abs(w_out).max() < 1e-8
        assert np.allclose(c, y.mean(axis=0), atol=1e-8)

    def test_singular_without_ridge(self):
        s = np.ones((20, 3))
        with pytest.raises(ReadoutError, match="ridge_beta > 0"):
            train_readout(s, np.zeros((20, 1)), 0.0)

    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            train_readout(np.zeros((5, 2)), np.zeros((4, 1)))

    def test_warns_on_few_rows(self):
        with pytest.warns(UserWarning, match="training rows"):
            train_readout(np.random.default_rng(0).uniform(size=(3, 5)), np.zeros((3, 1)), 1e-3)


class TestPredict:
    def test_untrained(self):
        with pytest.raises(ReadoutError):
            predict(tiny_observer(), np.zeros((3, 1)))

    def test_zero_readout(self):
        obs = with_readout(tiny_observer(), np.zeros((2, 4)), np.zeros(2))
        out, _ = predict(obs, np.ones((7, 1)))
        assert out.samples.shape == (7, 2)
        assert not out.samples.any()

    def test_readout_linearity(self):
        obs = tiny_observer()
        rng = np.random.default_rng(3)
        w_out, c = rng.normal(size=(2, 4)), rng.normal(size=2)
        u = rng.normal(size=(10, 1))
        one, _ = predict(with_readout(obs, w_out, c), u)
        two, _ = predict(with_readout(obs, 2 * w_out, 2 * c), u)
        assert np.array_equal(two.samples, 2 * one.samples)

    def test_in_sample_beats_held_out(self, data):
        obs = init_observer(ReservoirConfig(seed=5), 1, 2)
        obs, r = train(obs, data.window(0, 2600), washout=1000)
        train_win = data.window(1000, 2600)
        in_pred, _ = predict(obs, train_win, collect_states(obs, data.window(0, 1000))[1])
        held = data.window(2600, 5001)
        out_pred, _ = predict(obs, held, r)
        assert mse(in_pred, train_win.select(("y", "z"))) < mse(out_pred, held.select(("y", "z")))

    def test_full_pipeline_deterministic(self, data):
        def once():
            obs = init_observer(ReservoirConfig(n=100, mean_degree=10, seed=9), 1, 2)
            obs, r = train(obs, data.window(0, 2600), washout=1000)
            return predict(obs, data.window(2600, 5001), r)[0]
        assert once().samples.tobytes() == once().samples.tobytes()

    def test_output_grid(self, data):
        obs = with_readout(init_observer(ReservoirConfig(n=20, mean_degree=4, rho=0.9)),
                           np.zeros((2, 20)), np.zeros(2))
        out, _ = predict(obs, data.window(2600, 2610))
        assert isinstance(out, Trajectory)
        assert out.channels == ("y", "z")
        assert out.t0 == pytest.approx(260.0)


def test_echo_state_contraction():
    tr = generate_trajectory(dt=0.1, t_end=100.0)
    obs = init_observer(ReservoirConfig(rho=0.9, seed=1), 1, 2)
    rng = np.random.default_rng(0)
    a, _ = collect_states(obs, tr.window(0, 1000), rng.uniform(-1, 1, 400))
    b, _ = collect_states(obs, tr.window(0, 1000), rng.uniform(-1, 1, 400))
    assert np.linalg.norm(a[-1] - b[-1]) < 1e-6
