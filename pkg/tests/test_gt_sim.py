import csv
from dataclasses import replace

import numpy as np
import pytest

from weighted_gt.bounds import BoundInputs, Strategy, consensus_bound, rate_bound, step_size_max
from weighted_gt.errors import BadRange, NonFinite
from weighted_gt.gt_sim import (
    CSV_COLUMNS,
    SimulationConfig,
    closed_form_optimum,
    full_gradient,
    generate_problem,
    loss,
    multi_seed,
    run,
    stochastic_gradient,
    weighted_mean_iterate,
)
from weighted_gt.mixing import doubly_stochastic, metropolis
from weighted_gt.spectral import spectrum
from weighted_gt.topology import ring, static_exponential
from weighted_gt.weights_graph import Graph, make_weights, uniform_weights


def mats(g, lam):
    return metropolis(g, lam), doubly_stochastic(g)


# -- problem generation -----------------------------------------------------------

def test_generate_defaults_and_offsets():
    p = generate_problem(seed=4)
    assert (p.n, p.d, p.mu0, p.reg, p.noise_sigma) == (16, 10, 3.0, 0.01, 1.0)
    assert np.all((p.zeta >= 5.5) & (p.zeta <= 12.5))
    np.testing.assert_allclose(np.linalg.norm(p.centers - p.c_base, axis=1), 3.0, rtol=1e-12)


def test_generate_zero_offset():
    p = generate_problem(mu0=0.0, seed=1)
    assert np.all(p.centers == p.centers[0])


def test_generate_deterministic():
    a, b = generate_problem(seed=9), generate_problem(seed=9)
    for name in ("zeta", "centers", "theta0", "theta0_nodes"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert not np.array_equal(a.zeta, generate_problem(seed=10).zeta)


def test_generate_bad_range():
    with pytest.raises(BadRange):
        generate_problem(zeta_range=(0.0, 1.0))
    with pytest.raises(BadRange):
        generate_problem(zeta_range=(3.0, 2.0))
    with pytest.raises(BadRange):
        generate_problem(d=0)


# -- optimum and gradients --------------------------------------------------------

def test_optimum_identical_centers():
    p = generate_problem(n=6, mu0=0.0, reg=0.0, seed=2)
    lam = make_weights(np.arange(1, 7))
    np.testing.assert_allclose(closed_form_optimum(p, lam), p.centers[0], atol=1e-14)


def test_optimum_symmetric_pair():
    p = generate_problem(n=2, d=3, reg=0.0, seed=0)
    p = replace(p, zeta=np.array([1.0, 1.0]), centers=np.array([[1.0, 0, 0], [-1.0, 0, 0]]))
    np.testing.assert_allclose(closed_form_optimum(p, uniform_weights(2)), 0.0, atol=1e-15)


def test_optimum_zeroes_weighted_gradient(lam_A):
    p = generate_problem(seed=5)
    theta = closed_form_optimum(p, lam_A)
    grad = lam_A.values @ full_gradient(p, theta) / p.n
    assert np.max(np.abs(grad)) <= 1e-12


def test_gradient_noise_free_cases():
    p = generate_problem(n=4, d=3, reg=0.0, sigma=0.0, seed=3)
    for i in range(4):
        np.testing.assert_array_equal(stochastic_gradient(p, i, 7, p.centers[i], s0=0), 0.0)


def test_gradient_matches_finite_differences():
    p = generate_problem(n=5, d=4, sigma=0.0, seed=6)
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(100):
        i = int(rng.integers(5))
        theta = rng.standard_normal(4) * 3
        g = stochastic_gradient(p, i, 0, theta, s0=0)
        fd = np.array([(loss(p, i, theta + h * e) - loss(p, i, theta - h * e)) / (2 * h) for e in np.eye(4)])
        np.testing.assert_allclose(g, fd, atol=1e-6)


def test_gradient_noise_variance():
    p = generate_problem(n=2, d=10, sigma=1.0, seed=0)
    theta = np.zeros(10)
    clean = full_gradient(p, theta)[1]
    sq = [np.sum((stochastic_gradient(p, 1, t, theta, s0=17) - clean) ** 2) for t in range(100_000)]
    assert np.mean(sq) == pytest.approx(p.upsilon2, rel=0.03)


def test_gradient_reproducible():
    p = generate_problem(seed=1)
    th = np.ones(10)
    assert np.array_equal(stochastic_gradient(p, 3, 5, th, 11), stochastic_gradient(p, 3, 5, th, 11))


# -- mean iterate -----------------------------------------------------------------

def test_weighted_mean_iterate(lam_A):
    theta = np.tile(np.arange(3.0), (16, 1))
    for s in Strategy:
        np.testing.assert_allclose(weighted_mean_iterate(theta, lam_A, s), np.arange(3.0), atol=1e-15)
    X = np.random.default_rng(0).standard_normal((16, 3))
    u = uniform_weights(16)
    np.testing.assert_allclose(weighted_mean_iterate(X, u, "I"), weighted_mean_iterate(X, u, "II"), atol=1e-15)


def test_one_step_hand_trace():
    g = Graph.from_edges(2, [(0, 1)])
    lam = make_weights([1.5, 0.5])
    p = generate_problem(n=2, d=1, sigma=0.0, reg=0.0, seed=0)
    p = replace(p, zeta=np.array([2.0, 4.0]), centers=np.array([[1.0], [-1.0]]), theta0=np.array([0.0]))
    W, D = mats(g, lam)
    alpha = 0.1
    tr = run(p, lam, "II", W, D, alpha, 1)
    # g0 = zeta * (0 - c) = [-2, 4]; Theta1 = W (0 - alpha g0)
    step = -alpha * np.array([-2.0, 4.0])
    theta1 = W.entries @ step
    np.testing.assert_allclose(tr.final_theta[:, 0], theta1, atol=1e-15)
    # weighted mean moves by -(alpha/n) sum lam_i g_i
    expected = 0.0 - alpha / 2 * (1.5 * -2.0 + 0.5 * 4.0)
    assert weighted_mean_iterate(tr.final_theta, lam, "II")[0] == pytest.approx(expected, abs=1e-15)


# -- full runs --------------------------------------------------------------------

def test_uniform_weights_make_strategies_identical():
    g = ring(16)
    lam = uniform_weights(16)
    p = generate_problem(seed=3)
    W, D = mats(g, lam)
    a = run(p, lam, "I", W, D, 0.09, 60, record_every=3)
    b = run(p, lam, "II", W, D, 0.09, 60, record_every=3)
    for c in CSV_COLUMNS:
        np.testing.assert_allclose(a[c], b[c], rtol=0, atol=1e-12)
    np.testing.assert_allclose(a.final_theta, b.final_theta, rtol=0, atol=1e-12)
    np.testing.assert_allclose(a.final_tracker, b.final_tracker, rtol=0, atol=1e-12)


@pytest.mark.parametrize("strategy", ["I", "II"])
def test_deterministic_convergence_long_horizon(lam_A, strategy):
    g = static_exponential(16)
    W, D = mats(g, lam_A)
    p = generate_problem(sigma=0.0, seed=0)
    rho = spectrum(D if strategy == "I" else W).rho
    alpha = 0.5 * step_size_max(strategy, p.beta, rho, lam_A.lambda_max)
    tr = run(p, lam_A, strategy, W, D, alpha, 20_000, record_every=1000)
    assert tr.final("dist_to_opt") <= 1e-6
    assert tr.final("consensus_param") <= 1e-10


@pytest.mark.parametrize("strategy", ["I", "II"])
@pytest.mark.parametrize("sigma", [0.0, 1.0])
def test_tracking_and_mean_identities(lam_B, strategy, sigma):
    g = ring(16)
    W, D = mats(g, lam_B)
    p = generate_problem(sigma=sigma, seed=2)
    tr = run(p, lam_B, strategy, W, D, 0.02, 200, record_every=7)
    assert tr.max_tracking_residual <= 1e-10
    assert tr.max_mean_residual <= 1e-10
    assert tr.t.tolist()[-1] == 200 and tr.t.tolist()[:2] == [0, 7]
    assert np.all(np.diff(tr.t) > 0)
    for c in CSV_COLUMNS[1:]:
        assert np.all(tr[c] >= 0)


def test_non_finite_raises(lam_A):
    g = ring(16)
    W, D = mats(g, lam_A)
    with pytest.raises(NonFinite) as info:
        run(generate_problem(seed=0), lam_A, "I", W, D, 50.0, 500)
    assert info.value.t is not None


def test_independent_initialization(lam_A):
    g = ring(16)
    W, D = mats(g, lam_A)
    p = generate_problem(seed=0)
    shared = run(p, lam_A, "II", W, D, 0.05, 0)
    indep = run(p, lam_A, "II", W, D, 0.05, 0, init="independent")
    assert shared["consensus_param"][0] <= 1e-20
    assert indep["consensus_param"][0] > 1.0
    with pytest.raises(ValueError):
        run(p, lam_A, "II", W, D, 0.05, 0, init="bogus")


@pytest.mark.parametrize("strategy", ["I", "II"])
def test_consensus_and_rate_bounds_hold(lam_A, strategy):
    g = static_exponential(16)
    W, D = mats(g, lam_A)
    p = generate_problem(seed=1)
    rho = spectrum(D if strategy == "I" else W).rho
    alpha = 0.5 * step_size_max(strategy, p.beta, rho, lam_A.lambda_max)
    T = 120
    tr = run(p, lam_A, strategy, W, D, alpha, T, record_every=T)
    x = BoundInputs(p.beta, p.upsilon2, alpha, T, 16, rho, lam_A.c_lambda, lam_A.kappa,
                    lam_A.lambda_max, tr.F0_gap, tr.E0_norm2)
    assert tr.sum_consensus <= consensus_bound(strategy, x, tr.sum_grad_sq)
    assert tr.sum_grad_sq / T <= rate_bound(strategy, x)


# -- multi-seed -------------------------------------------------------------------

def _cfg(lam, **kw):
    base = dict(graph=ring(16), weights=lam, strategy=Strategy.II, alpha=0.09, T=30, record_every=3)
    base.update(kw)
    return SimulationConfig(**base)


def test_multi_seed_single_equals_run(lam_A):
    cfg = _cfg(lam_A)
    res = multi_seed(cfg, [4])
    W, D = cfg.matrices()
    tr = run(cfg.problem(4), lam_A, "II", W, D, 0.09, 30, s0=4, record_every=3)
    for c in CSV_COLUMNS:
        assert np.array_equal(res.mean[c], tr[c])


def test_multi_seed_duplicate_seeds(lam_A):
    res = multi_seed(_cfg(lam_A), [2, 2])
    for c in CSV_COLUMNS[1:]:
        np.testing.assert_allclose(res.mean[c], res.runs[0][c], rtol=1e-15)


def test_multi_seed_writes_csvs_and_parallel_matches(tmp_path, lam_A):
    cfg = _cfg(lam_A)
    serial = multi_seed(cfg, [0, 1, 2], out_dir=tmp_path)
    assert {f.name for f in tmp_path.iterdir()} == {"seed_0.csv", "seed_1.csv", "seed_2.csv", "mean.csv"}
    with (tmp_path / "mean.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r[0]) for r in rows[1:]] == list(range(0, 31, 3))
    assert float(rows[-1][1]) == serial.final("weighted_grad_norm")
    parallel = multi_seed(cfg, [0, 1, 2], jobs=2)
    for c in CSV_COLUMNS:
        assert np.array_equal(parallel.mean[c], serial.mean[c])


def test_multi_seed_needs_seeds(lam_A):
    with pytest.raises(ValueError):
        multi_seed(_cfg(lam_A), [])
