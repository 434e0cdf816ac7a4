import numpy as np
import pytest

from ggmlearn import (
    GaussianModel,
    Graph,
    InvalidParameter,
    cycle_graph,
    lbp_run,
    lbp_variance_error,
    synthesize_model,
)


def random_tree(p, seed):
    rng = np.random.default_rng(seed)
    return Graph(p, [(int(rng.integers(0, v)), v) for v in range(1, p)])


def model_on_graph(g, seed, alpha=0.5, diag_range=(1.0, 1.0)):
    """Random magnitudes and signs on a fixed support, diagonal drawn from
    diag_range, |R| spectral norm rescaled to alpha exactly."""
    rng = np.random.default_rng(seed)
    r = np.zeros((g.p, g.p))
    for u, v in g.edges:
        r[u, v] = r[v, u] = rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0])
    r *= alpha / np.max(np.abs(np.linalg.eigvalsh(np.abs(r))))
    d = rng.uniform(*diag_range, size=g.p)
    return GaussianModel(g, np.sqrt(np.outer(d, d)) * (np.eye(g.p) - r))


def test_lbp_exact_on_trees():
    for seed in range(6):
        p = 5 + seed
        m = model_on_graph(random_tree(p, seed), seed, alpha=0.6, diag_range=(1.0, 3.0))
        h = np.random.default_rng(seed + 100).normal(size=p)
        res = lbp_run(m, h)
        assert res.converged and not res.breakdown
        assert np.max(np.abs(res.variances - np.diag(m.sigma()))) < 1e-8
        assert np.max(np.abs(res.means - np.linalg.solve(m.precision, h))) < 1e-8


def test_lbp_zero_potential_means_are_zero():
    m = synthesize_model(cycle_graph(6), 0.5)
    res = lbp_run(m)
    assert np.array_equal(res.means, np.zeros(6))


def test_lbp_means_exact_on_loopy_walk_summable():
    for seed in range(4):
        m = model_on_graph(cycle_graph(8), seed, alpha=0.6)
        h = np.random.default_rng(seed).normal(size=8)
        res = lbp_run(m, h)
        assert res.converged
        assert np.max(np.abs(res.means - np.linalg.solve(m.precision, h))) < 1e-7


def test_lbp_variances_biased_but_close_on_loops():
    m = synthesize_model(cycle_graph(6), 0.5)
    res = lbp_run(m)
    per_node, worst = lbp_variance_error(m, res)
    assert per_node.shape == (6,)
    assert 0 < worst < 0.05
    # single-cycle beliefs underestimate the variance
    assert np.all(res.variances <= np.diag(m.sigma()))


def test_lbp_variance_error_decreases_with_girth():
    errors = []
    for p in (6, 10, 14):
        m = synthesize_model(cycle_graph(p), 0.5)
        res = lbp_run(m)
        assert res.converged
        errors.append(lbp_variance_error(m, res)[1])
    assert errors[0] > errors[1] > errors[2] > 0


def test_lbp_iteration_budget_tracks_contraction():
    # geometric message decay at rate alpha: reaching 1e-10 from O(1)
    # needs about log(tol)/log(alpha) sweeps; allow a generous factor
    for alpha in (0.3, 0.5, 0.7):
        m = synthesize_model(cycle_graph(8), alpha)
        res = lbp_run(m)
        assert res.converged
        budget = 10 * int(np.ceil(np.log(1e-10) / np.log(alpha))) + 10
        assert res.iterations <= budget
        assert res.final_change <= 1e-10


def test_lbp_unnormalized_diagonal_rescaling():
    g = cycle_graph(6)
    base = model_on_graph(g, 3, alpha=0.5)
    scaled = GaussianModel(g, 3.0 * np.asarray(base.precision))
    h = np.random.default_rng(9).normal(size=6)
    res_base = lbp_run(base, h)
    res_scaled = lbp_run(scaled, h)
    # covariance scales by 1/3, means solve the scaled system
    assert np.max(np.abs(res_scaled.variances - res_base.variances / 3.0)) < 1e-12
    assert np.max(np.abs(res_scaled.means - res_base.means / 3.0)) < 1e-12


def test_lbp_breakdown_reported_not_raised():
    # frustrated complete graph: positive definite but far from
    # walk-summable; the cavity precision goes nonpositive
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    signs = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0]
    j = np.eye(4)
    for (u, v), s in zip(edges, signs):
        j[u, v] = j[v, u] = -0.4 * s
    m = GaussianModel(Graph(4, edges), j)
    assert m.alpha > 1.0
    res = lbp_run(m)
    assert res.breakdown
    assert not res.converged


def test_lbp_message_layout():
    m = synthesize_model(cycle_graph(5), 0.4)
    res = lbp_run(m)
    adj = m.graph.adjacency_matrix() > 0
    assert np.all(res.message_precisions[~adj] == 0.0)
    assert np.all(res.message_precisions[adj] < 0.0)


def test_lbp_validation():
    m = synthesize_model(cycle_graph(5), 0.4)
    with pytest.raises(InvalidParameter):
        lbp_run(m, tol=0.0)
    with pytest.raises(InvalidParameter):
        lbp_run(m, h=np.zeros(4))
    with pytest.raises(InvalidParameter):
        lbp_run(m, max_iters=0)


def test_lbp_max_iters_cutoff():
    m = synthesize_model(cycle_graph(6), 0.5)
    res = lbp_run(m, max_iters=2)
    assert not res.converged
    assert res.iterations == 2
