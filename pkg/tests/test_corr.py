import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gafzeros import corr
from gafzeros.errors import DomainError, IllConditionedError, InvalidArgumentError, SizeLimitError
from gafzeros.gauss import ComplexNormalSource, psd_sqrt
from gafzeros.spectral import ArcUniform, Atoms, CovarianceEvaluator, Lebesgue

from conftest import disk_points

HALF = ArcUniform(-math.pi / 2, math.pi / 2)
MEASURES = {"lebesgue": Lebesgue(), "atoms4": Atoms.roots_of_unity(4), "arc": HALF}
PV_27 = 7 / (9 * math.pi**2)


def separated(rng, n, radius, sep=0.1):
    while True:
        a = disk_points(rng, n, radius)
        if n == 1 or min(abs(x - y) for x, y in itertools.combinations(a, 2)) > sep:
            return a


# --- point configurations and results ---------------------------------------


def test_point_config_validation():
    assert corr.PointConfig((0.1, 0.2j)).n == 2
    with pytest.raises(DomainError):
        corr.PointConfig((0.1, 1.0))
    with pytest.raises(InvalidArgumentError):
        corr.PointConfig((0.1, 0.1 + 1e-9))


def test_result_json_schema(lebesgue):
    res = corr.rho_n_direct(lebesgue, (0, 0.5))
    d = json.loads(res.to_json())
    assert set(d) == {"n", "points", "method", "value", "error", "diagnostics"}
    assert d["n"] == 2 and d["method"] == "DirectPermanent" and d["points"] == [[0.0, 0.0], [0.5, 0.0]]


# --- permanent --------------------------------------------------------------


def test_permanent_small_cases():
    assert corr.permanent(np.ones((2, 2))) == 2
    d = np.array([2.0, -1.5, 3j, 0.5])
    assert abs(corr.permanent(np.diag(d)) - np.prod(d)) < 1e-14
    assert corr.permanent(np.zeros((0, 0))) == 1


def test_permanent_random_5x5():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    brute = corr.permanent_bruteforce(A)
    assert abs(corr.permanent(A) - brute) / abs(brute) < 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_ryser_matches_bruteforce_100_trials(n):
    rng = np.random.default_rng(100 + n)
    worst = 0.0
    for _ in range(100):
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        brute = corr.permanent_bruteforce(A)
        worst = max(worst, abs(corr.permanent(A) - brute) / abs(brute))
    assert worst < 1e-12


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, (4, 4), elements=st.floats(-5, 5)), st.permutations(range(4)), st.permutations(range(4)))
def test_permanent_row_column_permutation_invariance(A, p, q):
    assert abs(corr.permanent(A) - corr.permanent(A[np.ix_(p, q)])) <= 1e-9 * (1 + abs(corr.permanent(np.abs(A))))


def test_permanent_size_cap():
    with pytest.raises(SizeLimitError):
        corr.permanent(np.ones((21, 21)))


def test_permanent_gaussian_moment():
    # E|Y1 Y2|^2 = per(Cov) for a centred complex Gaussian pair
    C = CovarianceEvaluator(HALF).kernel(np.array([0.3, -0.4j])[:, None], np.array([0.3, -0.4j])[None, :])
    L = psd_sqrt(C)
    Y = L @ ComplexNormalSource(2024).draw(2 * 200_000).reshape(2, -1)
    x = np.abs(Y[0] * Y[1]) ** 2
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - corr.permanent(C).real) < 3 * se


# --- CUE kernel -------------------------------------------------------------


def test_cue_kernel_values():
    assert corr.cue_kernel(5, 0.7, 0.7) == pytest.approx(5, abs=1e-12)
    assert abs(corr.cue_kernel(2, 0.0, math.pi)) < 1e-15
    assert corr.cue_kernel(4, 2 * math.pi, 0.0) == pytest.approx(-4, abs=1e-12)


def test_cue_kernel_trace_identity():
    phi = 2 * math.pi * (np.arange(512) + 0.5) / 512
    assert abs(np.mean(corr.cue_kernel(3, 0.4, phi) ** 2) - 3) < 1e-10


# --- one-point intensity ----------------------------------------------------


def test_rho1_lebesgue_origin(lebesgue, lebesgue_quad):
    assert abs(corr.rho1_ek(lebesgue, 0) - 1 / math.pi) < 1e-15
    assert abs(corr.rho1_spectral(lebesgue_quad, 0) - 1 / math.pi) < 1e-10


def test_rho1_truncated_closed_form(lebesgue):
    value = corr.rho1_ek(lebesgue.truncated(7), 0.5)
    oracle = (1 / 0.75**2 - 64 * 0.25**7 / (1 - 0.25**8) ** 2) / math.pi
    assert abs(value - oracle) < 1e-10


@pytest.mark.parametrize("r", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("sign", [1, -1])
def test_arc_constant(arc, r, sign):
    g = math.pi * (1 - r * r) ** 2 * corr.rho1_ek(arc, sign * 1j * r)
    assert abs(g - (1 - (2 / math.pi) ** 2)) < 1e-8


def test_rho1_arc_dead_zone(arc):
    z = 0.3 * np.exp(2.5j)
    assert abs(corr.rho1_spectral(arc, z) - corr.rho1_ek(arc, z)) < 1e-8


def test_rho1_atoms_exact():
    ev = CovarianceEvaluator(Atoms.roots_of_unity(2))
    for z in (0.1, 0.4 + 0.3j, -0.7j):
        assert abs(corr.rho1_spectral(ev, z) - corr.rho1_ek(ev, z)) < 1e-12


@pytest.mark.parametrize("name", list(MEASURES))
def test_rho1_route_agreement_grid(name):
    ev = CovarianceEvaluator(MEASURES[name])
    for r in np.linspace(0.1, 0.9, 5):
        for th in np.linspace(-math.pi, math.pi, 8, endpoint=False):
            z = r * np.exp(1j * th)
            ek = corr.rho1_ek(ev, z)
            assert abs(corr.rho1_spectral(ev, z) - ek) < 1e-8 * max(1.0, ek)


@pytest.mark.parametrize("name", ["atoms4", "arc"])
def test_hyperbolic_maximality(name, lebesgue):
    ev = CovarianceEvaluator(MEASURES[name])
    for r in np.linspace(0.05, 0.9, 6):
        for th in np.linspace(-math.pi, math.pi, 12, endpoint=False):
            z = r * np.exp(1j * th)
            assert corr.rho1_ek(ev, z) <= corr.rho1_ek(lebesgue, z) + 1e-10


def test_rho1_result_wrapper(lebesgue):
    res = corr.rho1_result(lebesgue, 0.2)
    assert res.method == "EdelmanKostlan" and res.n == 1
    with pytest.raises(InvalidArgumentError):
        corr.rho1_result(lebesgue, 0.2, method="nope")


# --- conditional kernel -----------------------------------------------------


@pytest.mark.parametrize("name", list(MEASURES))
def test_conditional_kernel_vanishes_at_point(name):
    ev = CovarianceEvaluator(MEASURES[name])
    a = 0.3 - 0.2j
    for w in (0.0, 0.5j, -0.6 + 0.1j):
        assert abs(corr.conditional_kernel(ev, [a], a, w)) < 1e-13


def test_conditional_kernel_at_origin(lebesgue):
    z, w = 0.4, 0.2j
    zw = z * np.conj(w)
    assert abs(corr.conditional_kernel(lebesgue, [0.0], z, w) - zw / (1 - zw)) < 1e-15


@pytest.mark.parametrize("name", list(MEASURES))
def test_conditional_kernel_inductive(name):
    ev = CovarianceEvaluator(MEASURES[name])
    rng = np.random.default_rng(20)
    for _ in range(20):
        a1, a2 = separated(rng, 2, 0.8)
        z, w = disk_points(rng, 2, 0.9)
        K1 = lambda x, y: corr.conditional_kernel(ev, [a1], x, y)  # noqa: E731
        nested = K1(z, w) - K1(z, a2) * K1(a2, w) / K1(a2, a2)
        assert abs(nested - corr.conditional_kernel(ev, [a1, a2], z, w)) < 1e-10


def test_conditional_kernel_ill_conditioned():
    ev = CovarianceEvaluator(Atoms.roots_of_unity(2))
    # the period-2 model has a 2-dimensional Gram range, so three points are degenerate
    with pytest.raises(IllConditionedError):
        corr.conditional_kernel(ev, [0.1, 0.5j, -0.3], 0.2, 0.2)


# --- n-point correlations ---------------------------------------------------


def test_rho_direct_values(lebesgue):
    assert abs(corr.rho_n_direct(lebesgue, [0.0]).value - 1 / math.pi) < 1e-15
    assert abs(corr.rho_n_direct(lebesgue, (0, 0.5)).value - PV_27) < 1e-12
    assert abs(PV_27 - 0.0788054) < 1e-7


@pytest.mark.parametrize("name", list(MEASURES))
def test_rho_direct_symmetry(name):
    ev = CovarianceEvaluator(MEASURES[name])
    a = (0.2 + 0.1j, -0.5j)
    assert abs(corr.rho_n_direct(ev, a).value - corr.rho_n_direct(ev, a[::-1]).value) < 1e-12


@pytest.mark.parametrize("name", list(MEASURES))
def test_rho_direct_n1_equals_ek(name):
    ev = CovarianceEvaluator(MEASURES[name])
    for z in (0.0, 0.3j, -0.6 + 0.2j):
        assert abs(corr.rho_n_direct(ev, [z]).value - corr.rho1_ek(ev, z)) < 1e-12


def test_rho_direct_bergman_dpp_up_to_four(lebesgue):
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        a = separated(rng, n, 0.7, 0.15)
        pv = corr.bergman_dpp_density(a)
        assert abs(corr.rho_n_direct(lebesgue, a).value - pv) < 1e-8 * pv


def test_rho_direct_size_cap(lebesgue):
    with pytest.raises(SizeLimitError):
        corr.rho_n_direct(lebesgue, [0.1, 0.2, 0.3, 0.4, 0.5])


def test_rho2_repulsion_quadratic(lebesgue):
    ratios = [corr.rho_n_direct(lebesgue, (0, a)).value / a**2 for a in (0.1, 0.05, 0.025)]
    assert ratios[-1] > 0
    assert max(ratios) / min(ratios) < 1.05


def test_rho_spectral_values(lebesgue_quad):
    assert abs(corr.rho_n_spectral(lebesgue_quad, [0.0]).value - 1 / math.pi) < 1e-6
    assert abs(corr.rho_n_spectral(lebesgue_quad, (0, 0.5)).value - PV_27) < 1e-4


def test_rho_spectral_arc_vs_direct(arc):
    d, s = corr.rho_n_direct(arc, (0.2, -0.3)), corr.rho_n_spectral(arc, (0.2, -0.3))
    assert s.method == "Theorem4"
    assert abs(d.value - s.value) < max(1e-4, 3 * s.error_estimate)


@pytest.mark.parametrize("name", list(MEASURES))
@pytest.mark.parametrize("n", [1, 2])
def test_rho_route_agreement(name, n):
    ev = CovarianceEvaluator(MEASURES[name])
    rng = np.random.default_rng(40 + n)
    for _ in range(10):
        a = separated(rng, n, 0.6, 0.1)
        d, s = corr.rho_n_direct(ev, a), corr.rho_n_spectral(ev, a)
        assert abs(d.value - s.value) < max(1e-4, 3 * s.error_estimate)
        assert s.value >= -s.error_estimate


def test_rho_spectral_n3(lebesgue_quad):
    a = (0.1, -0.3j, 0.35 + 0.2j)
    s = corr.rho_n_spectral(lebesgue_quad, a, M=24)
    assert abs(s.value - corr.bergman_dpp_density(a)) < max(1e-4, 3 * s.error_estimate)


def test_rho_spectral_warns_when_unconverged(arc):
    with pytest.warns(RuntimeWarning, match="not converged"):
        res = corr.rho_n_spectral(arc, (0.85, -0.85j), M=8)
    assert "warning" in res.diagnostics


# --- Gram / Vandermonde bridge ----------------------------------------------


def test_mu_mass_values(lebesgue_quad):
    assert abs(corr.mu_mass(lebesgue_quad, [0.0]) - 1) < 1e-14
    assert abs(corr.mu_mass(lebesgue_quad, [0.5]) - 4 / 3) < 1e-12
    assert corr.det_gram_residual(lebesgue_quad, (0.3, -0.4j)) < 1e-8


@pytest.mark.parametrize("name", ["lebesgue", "arc"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_det_gram_bridge(name, n):
    ev = CovarianceEvaluator(MEASURES[name])
    a = separated(np.random.default_rng(60 + n), n, 0.6, 0.15)
    assert corr.det_gram_residual(ev, a) < 1e-8


def test_mu_mass_size_cap(lebesgue):
    with pytest.raises(SizeLimitError):
        corr.mu_mass(lebesgue, [0.1, 0.2, 0.3, 0.4])


# --- identities -------------------------------------------------------------


def test_cauchy_n1_exact():
    assert corr.verify_cauchy([0.3 + 0.1j], [0.2j]) == 0.0
    assert corr.verify_borchardt([0.3 + 0.1j], [0.2j]) == 0.0


@pytest.mark.parametrize("n, tol", [(2, 1e-12), (3, 1e-12)])
def test_cauchy_random(n, tol):
    rng = np.random.default_rng(70 + n)
    assert corr.verify_cauchy(disk_points(rng, n, 0.5), disk_points(rng, n, 0.5)) < tol


def test_borchardt_random_n2():
    rng = np.random.default_rng(82)
    assert corr.verify_borchardt(disk_points(rng, 2, 0.5), disk_points(rng, 2, 0.5)) < 1e-12


@pytest.mark.parametrize("check", [corr.cauchy_residual, corr.verify_borchardt])
def test_n6_residual_tracks_conditioning(check):
    # at n = 6 the residual is set by cond(C) * eps of the floating-point determinant,
    # so a fixed absolute cap fails on a fraction of draws; bound it relative to cond
    rng = np.random.default_rng(76)
    eps = np.finfo(float).eps
    res = []
    for _ in range(200):
        a, b = disk_points(rng, 6, 0.5), disk_points(rng, 6, 0.5)
        C = 1 / (1 - a[:, None] * b[None, :])
        r = check(a, b)
        assert r < max(np.linalg.cond(C), np.linalg.cond(C * C)) * eps
        res.append(r)
    assert np.median(res) < 1e-10


def test_borchardt_size_cap():
    with pytest.raises(SizeLimitError):
        corr.verify_borchardt(np.zeros(11), np.zeros(11))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.05, max_magnitude=0.9), min_size=1, max_size=5, unique=True))
def test_vandermonde_identities(a):
    a = np.array(a)
    if len(a) > 1 and min(abs(x - y) for x, y in itertools.combinations(a, 2)) < 1e-3:
        return
    assert corr.product_differences_residual(a) < 1e-9
    assert corr.inverse_vandermonde_residual(a) < 1e-9


def test_reproducing_n1_constant():
    assert corr.verify_reproducing(lambda z: np.ones(np.shape(z)[:-1]), [0.4 - 0.2j]) < 1e-12


def test_reproducing_n2_e1_plain():
    assert corr.verify_reproducing(corr.elementary_symmetric(1), [0.3, -0.2j], "plain") < 1e-10


def test_reproducing_n2_constant_over_z():
    one = lambda z: np.ones(np.shape(z)[:-1])  # noqa: E731
    a = np.array([0.5, 0.25])
    assert corr.verify_reproducing(one, a, "over_z") < 1e-10
    # the residual compares against the hand-evaluated bracket
    bracket = 1 - sum(np.prod(np.delete(a, p) / (np.delete(a, p) - a[p])) for p in range(2))
    lhs = corr._contour_integral(one, a, "over_z", 256)
    assert abs(lhs - (-2) * bracket / np.prod(a)) < 1e-10


@pytest.mark.parametrize("variant", ["plain", "over_z"])
@pytest.mark.parametrize("Q", [corr.elementary_symmetric(2), corr.szego_product([0.5j, -0.1])])
def test_reproducing_n3(variant, Q):
    assert corr.verify_reproducing(Q, [0.2, -0.3j, 0.1 + 0.4j], variant, M=64) < 1e-9


def test_reproducing_rejects_zero_point():
    with pytest.raises(InvalidArgumentError):
        corr.verify_reproducing(corr.elementary_symmetric(1), [0.0, 0.3], "over_z")


@pytest.mark.parametrize("a", [[0.0], [0.5], [0.3, 0.4j], [-0.5 + 0.2j, 0.6j]])
def test_volume_formula(a):
    res = corr.verify_volume_formula(a)
    assert res.mass < 1e-10 and res.kernel < 1e-10


def test_volume_formula_mass_value(lebesgue):
    assert abs(corr.mu_mass(lebesgue, [0.5]) - 4 / 3) < 1e-12


def test_volume_formula_normalization_at_origin():
    a = np.array([0.3, 0.4j])
    rule = corr.build_rule(Lebesgue(), 48)
    mass, mat = corr._tensor_moments(rule, 3, a, probes=[0.0])
    assert abs(mat[0, 0] / mass - 1) < 1e-12


def test_volume_formula_rejects_other_measures(arc):
    with pytest.raises(InvalidArgumentError):
        corr.verify_volume_formula([0.1], ev=arc)


def test_tensor_order_grows_near_circle(lebesgue):
    assert corr._order_for(lebesgue, 2, None, np.array([0.1, 0.2])) == corr.TENSOR_ORDER[2]
    assert corr._order_for(lebesgue, 2, None, np.array([0.8, 0.1])) > corr.TENSOR_ORDER[2]
    assert corr._order_for(lebesgue, 3, None, np.array([0.999])) == corr.TENSOR_ORDER_CAP[3]
    assert corr._order_for(lebesgue, 3, 10, np.array([0.9])) == 10
    res = corr.rho_n_spectral(lebesgue, (0.8, -0.79j))
    assert abs(res.value - corr.bergman_dpp_density((0.8, -0.79j))) < 1e-8
