import numpy as np
import pytest

from vicseklab import harness
from vicseklab.calculus import VertexFunction, energy, gradient
from vicseklab.errors import WindowError
from vicseklab.exponents import D_H, D_W, alpha, nash_theta
from vicseklab.families import FunctionFamily, center_mean_zero, generate_family
from vicseklab.reports import KIND_EXPLORATORY
from vicseklab.spectral import validity_window


@pytest.fixture(scope="module")
def family3(decompositions, graphs):
    g, sd = graphs(3), decompositions(3)
    fam = generate_family(FunctionFamily("random-piecewise-affine", 0, 4, param=2), g)
    fam += generate_family(FunctionFamily("eigenmode-combination", 1, 3, param=6), g, sd)
    fam += generate_family(FunctionFamily("cell-indicator-smoothed", 2, 4, param=3), g, sd)
    return fam


def test_exponent_values():
    assert D_H == pytest.approx(np.log(5) / np.log(3))
    assert D_W == pytest.approx(D_H + 1)
    assert D_H / D_W == pytest.approx(0.594316, abs=1e-5)
    assert alpha(2) == pytest.approx(0.5)
    assert alpha(1) == pytest.approx(1 - 1 / D_W)
    assert alpha(np.inf) == pytest.approx(1 / D_W)
    assert nash_theta(2) == pytest.approx(D_H / (1 + 2 * D_H))
    # the introduction's variant of the same exponent
    p = 2.0
    assert nash_theta(p) == pytest.approx((p - 1) * (D_W - 1) / (p * D_W - 1))


def test_family_reproducibility(graphs, decompositions):
    g, sd = graphs(2), decompositions(2)
    for kind, needs_sd in [("random-piecewise-affine", False),
                           ("eigenmode-combination", True),
                           ("cell-indicator-smoothed", True),
                           ("random-edge-antiderivative", False)]:
        fam = FunctionFamily(kind, 42, 3, param=2)
        a = generate_family(fam, g, sd if needs_sd else None)
        b = generate_family(fam, g, sd if needs_sd else None)
        assert len(a) == 3
        for fa, fb in zip(a, b):
            assert np.array_equal(fa.values, fb.values)
    with pytest.raises(ValueError):
        FunctionFamily("bogus-kind", 0, 1)
    with pytest.raises(ValueError):
        generate_family(FunctionFamily("eigenmode-combination", 0, 1), g, None)


def test_family_properties(graphs, decompositions):
    g, sd = graphs(3), decompositions(3)
    # piecewise-affine family keeps its coarse energy at any level
    fam = generate_family(FunctionFamily("random-piecewise-affine", 5, 2, param=1), g)
    fam4 = generate_family(FunctionFamily("random-piecewise-affine", 5, 2, param=1), graphs(4))
    for f3, f4 in zip(fam, fam4):
        assert energy(f3) == pytest.approx(energy(f4), rel=1e-12)
    # eigenmode combinations are mean-zero
    modes = generate_family(FunctionFamily("eigenmode-combination", 6, 3, param=5), g, sd)
    ones = VertexFunction(g, np.ones(g.n_vertices))
    for f in modes:
        assert abs(float(np.dot(f.values * g.vertex_measure, ones.values))) < 1e-11
    centered = center_mean_zero(fam)
    for f in centered:
        assert abs(float(np.dot(f.values, g.vertex_measure))) < 1e-12


def test_exact_suite_small_levels(graphs, decompositions):
    g = graphs(2)
    sd = decompositions(2)
    assert harness.exact_laplacian_identity(g).passed
    assert harness.exact_intertwining(sd, n_functions=10).passed
    assert harness.exact_codifferential_poincare(g, n_functions=50).passed
    assert harness.exact_energy_invariance(1, (2, 3)).passed
    assert harness.exact_kernel_identities(sd).passed


def test_ondiagonal_check(decompositions):
    sd = decompositions(3)
    rep = harness.check_ondiagonal(sd)
    assert rep.passed
    assert abs(rep.fits[0].slope + D_H / D_W) <= 0.1
    assert rep.series and len(rep.series[0]) == 4
    lo, hi = validity_window(sd)
    assert rep.fits[0].window[0] >= lo and rep.fits[0].window[1] <= hi


def test_window_discipline(decompositions):
    sd = decompositions(2)
    with pytest.raises(WindowError):
        harness.check_ondiagonal(sd, t_grid=np.geomspace(10.0, 100.0, 10))


def test_offdiagonal_check(decompositions):
    rep = harness.check_offdiagonal(decompositions(3), seed=0)
    assert rep.fits[0].slope > 0
    assert rep.fits[0].r_squared >= 0.95


def test_gradient_bound_c_sweep(decompositions, graphs):
    """The sup is attained near the diagonal, where p_{ct}(x,x) decreases
    in c, so the empirical constant grows (mildly) with c."""
    sd, g = decompositions(3), graphs(3)
    reps = [harness.check_gradient_bound(sd, g, c=c, seed=1) for c in (1.2, 2.0, 4.0)]
    assert all(r.passed for r in reps)
    sups = [r.sup_ratio for r in reps]
    assert sups[0] < sups[1] < sups[2]
    # growth follows the on-diagonal scaling c**(d_h/d_w), so it stays mild
    assert sups[2] / sups[0] < (4.0 / 1.2) ** 1.0
    with pytest.raises(ValueError):
        harness.check_gradient_bound(sd, g, c=1.0)


def test_lipschitz_check(decompositions):
    rep = harness.check_lipschitz(decompositions(3), seed=2)
    assert rep.passed
    assert rep.parameters["stability"] <= 10.0


def test_lp_gradient_integral(decompositions, graphs):
    sd, g = decompositions(3), graphs(3)
    for p, target in [(1, 1 - 1 / D_W), (2, 2 - 1 / D_W)]:
        rep = harness.check_lp_gradient_integral(sd, g, g.root, p)
        assert rep.passed
        assert rep.fits[0].slope == pytest.approx(-target, abs=0.15)
    with pytest.raises(ValueError):
        harness.check_lp_gradient_integral(sd, g, g.root, 3)


def test_semigroup_lq_lp(decompositions, family3):
    sd = decompositions(3)
    rep = harness.check_semigroup_lq_lp(sd, family3, 2.0, 2.0)
    assert rep.passed
    assert rep.parameters["exponent"] == pytest.approx(alpha(2))
    with pytest.raises(ValueError):
        harness.check_semigroup_lq_lp(sd, family3, 1.0, 2.0)


def test_pseudo_poincare(decompositions, family3):
    rep = harness.check_pseudo_poincare(decompositions(3), family3, 2.0)
    assert rep.passed and rep.sup_ratio < np.inf


def test_heat_measure_poincare(decompositions, graphs, family3):
    rep = harness.check_heat_measure_poincare(decompositions(3), graphs(3), family3, 2.0)
    assert rep.passed


def test_heat_measure_poincare_single_vertex_function(decompositions, graphs):
    """Hand-computed sanity: the gradient of a leaf indicator is supported
    on one edge, so the denominator has a single term."""
    g, sd = graphs(2), decompositions(2)
    from vicseklab.spectral import heat_kernel_columns
    values = np.zeros(g.n_vertices)
    leaf = int(np.flatnonzero((g.coords[:, 0] == -9) & (g.coords[:, 1] == 9))[0])
    values[leaf] = 1.0
    f = VertexFunction(g, values)
    x = g.root
    t = 0.01  # inside the level-2 validity window [1.78e-3, 1.28e-2]
    col_t = heat_kernel_columns(sd, t, [x])[:, 0]
    num = float(np.dot(col_t * g.vertex_measure, np.abs(values - values[x]) ** 2))
    e = int(np.flatnonzero(g.heads == leaf)[0])
    grad_sq = float(gradient(f).values[e]) ** 2
    col_ct = heat_kernel_columns(sd, 2 * t, [x])[:, 0]
    near = harness._edge_nearest_endpoints(g, harness.hop_distances_from(g, x))
    den = t ** (2 * alpha(2)) * g.edge_measure * float(col_ct[near[e]]) * grad_sq
    by_hand = num / den
    rep = harness.check_heat_measure_poincare(
        sd, g, [f], 2.0, t_grid=np.full(8, t), sources=np.array([x]))
    assert rep.sup_ratio == pytest.approx(by_hand, rel=1e-9)


def test_nash_check(graphs, family3):
    g = graphs(3)
    rep = harness.check_nash(g, family3, 2.0)
    assert rep.passed and "surrogate" in rep.notes
    with pytest.raises(ValueError):
        harness.check_nash(g, family3, 1.0)
    const = [VertexFunction(g, np.ones(g.n_vertices))]
    with pytest.raises(ValueError):
        harness.check_nash(g, const, 2.0)


def test_fractional_check(decompositions, family3):
    sd = decompositions(3)
    rep = harness.check_fractional(sd, family3)
    assert rep.passed
    with pytest.raises(ValueError):
        harness.check_fractional(sd, family3, p=4.0)
    with pytest.raises(ValueError):
        harness.check_fractional(sd, family3, s_list=[alpha(2)])
    # MI1 at s -> 0+: ratio <= 1 for mean-zero functions
    rep_small = harness.check_fractional(sd, family3, s_list=[1e-6])
    assert rep_small.sup_ratio <= 1.0 + 1e-6


def test_riesz_experiment(decompositions, family3):
    sd = decompositions(3)
    rep = harness.riesz_ratio_experiment(sd, family3, [2.0, 4.0])
    assert rep.kind == KIND_EXPLORATORY and rep.passed
    lo2, hi2 = rep.parameters["spread"]["2"]
    assert lo2 == pytest.approx(1.0, abs=1e-10)
    assert hi2 == pytest.approx(1.0, abs=1e-10)


def test_exact_riesz_p2(decompositions, family3):
    rep = harness.exact_riesz_p2(decompositions(3), family3)
    assert rep.passed and rep.sup_ratio <= 1e-10


def test_hodge_kernel_bounds(decompositions, graphs):
    sd, g = decompositions(3), graphs(3)
    rep = harness.check_hodge_kernel_bounds(sd, g, c=0.08, seed=3)
    assert rep.passed
    assert rep.parameters["row_integral_stability"] <= 10.0
    assert rep.parameters["decay_rate"] >= 0.95 * sd.spectral_gap


def test_weak_bakry_emery_median(decompositions):
    sd = decompositions(2)
    fam = generate_family(FunctionFamily("random-piecewise-affine", 0, 3, param=1), sd.graph)
    rep = harness.check_weak_bakry_emery_median(sd, fam)
    assert rep.passed
    assert rep.parameters["median_bound_leq_zero_variant"]
    with pytest.raises(ValueError):
        harness.check_weak_bakry_emery_median(sd, [])


def test_ternary_matches_weighted_median_oracle(rng):
    """Ternary search agrees with the exact weighted-median minimizer."""
    n, k = 40, 6
    w = rng.uniform(0.0, 1.0, (n, k))
    f = rng.standard_normal(n)
    got = harness._ternary_min_expectation(w, f)
    order = np.argsort(f)
    for j in range(k):
        wc = w[order, j]
        half = 0.5 * wc.sum()
        idx = int(np.searchsorted(np.cumsum(wc), half))
        best = float(np.sum(w[:, j] * np.abs(f - f[order[idx]])))
        assert got[j] <= best + 1e-9 * max(1.0, best)


def test_gradient_bound_cross_level(decompositions, graphs):
    """Discretization stability of the sup on embedded common sources, m=3 -> 4."""
    from vicseklab.graph import embed_coarse_vertices
    src3 = harness.select_sources(graphs(3), 8, 0)
    emb = embed_coarse_vertices(graphs(4), 3, graphs(3))
    rep3 = harness.check_gradient_bound(decompositions(3), graphs(3), sources=src3)
    rep4 = harness.check_gradient_bound(decompositions(4), graphs(4), sources=emb[src3])
    cross = harness.gradient_bound_cross_level(rep3, rep4)
    assert cross.passed and cross.sup_ratio <= 0.5


def test_gradient_bound_records_endpoint_convention(decompositions, graphs):
    """Evaluation at the nearest endpoint vs the endpoint average: the gap
    is recorded and stays well below an order of magnitude."""
    rep = harness.check_gradient_bound(decompositions(3), graphs(3), seed=0)
    gap = rep.parameters["endpoint_vs_average_gap"]
    assert 0.0 <= gap < 1.0


def test_eigenfunction_sup_stability(decompositions):
    rep = harness.eigenfunction_sup_stability([decompositions(2), decompositions(3)])
    assert rep.passed and rep.sup_ratio <= 2.0


def test_eigenvalue_convergence(decompositions):
    rep = harness.eigenvalue_convergence([decompositions(2), decompositions(3),
                                          decompositions(4)])
    assert rep.passed
    gaps = rep.parameters["lambda1_gaps"]
    assert gaps[0] > gaps[1]


def test_report_pass_recomputable(decompositions, graphs):
    """The pass flag must be a pure function of recorded numbers."""
    rep = harness.check_lp_gradient_integral(decompositions(3), graphs(3),
                                             graphs(3).root, 1)
    recomputed = (rep.fits[0].slope >= -rep.parameters["target_exponent"] - 0.1
                  and rep.parameters["stability"] <= rep.tolerance)
    assert rep.passed == recomputed


def test_deterministic_reports(decompositions, graphs):
    a = harness.check_gradient_bound(decompositions(2), graphs(2), seed=9)
    b = harness.check_gradient_bound(decompositions(2), graphs(2), seed=9)
    assert a.to_dict() == b.to_dict()
