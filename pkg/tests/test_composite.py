"""Tests for composite polynomials, their Newton polytopes, the
dominance certificate, the conditional-gradient quotient and the
quotient-law report."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from oracles import (
    certificate_instance,
    composite_dominated,
    random_problem,
    zonotope_contains_oracle,
)
from tropdiv.composite import (
    CompositePolynomial,
    FwConfig,
    analytic_phase2,
    check_quotient_laws,
    composite,
    composite_from_json,
    composite_fw_run,
    composite_quotient_fw,
    composite_to_json,
    evaluate_composite_many,
    expand,
    minkowski_newton,
    quotient_feasible,
    unit_arrays,
    vector_divide_simplified,
)
from tropdiv.core import (
    DivisionProblem,
    evaluate,
    polynomial,
    same_function,
    tropical_max,
    tropical_sum,
)
from tropdiv.exact import exact_divide

F = Fraction


def two_relu(biases=(0.0, 0.0)):
    return composite([((1.0, 0.0), biases[0]), ((0.0, 1.0), biases[1])], 2)


# ---------------------------------------------------------------------------
# Construction, evaluation, serialization.
# ---------------------------------------------------------------------------

def test_composite_validation():
    with pytest.raises(ValueError):
        CompositePolynomial((), 2)
    with pytest.raises(ValueError):
        composite([((1.0,), 0.0)], 2)


def test_evaluation_matches_direct_formula():
    p = composite([((2.0, -1.0), 1.0), ((0.0, 1.0), -3.0)], 2)
    assert p((1.0, 1.0)) == pytest.approx(max(2 - 1 + 1, 0) + max(1 - 3, 0))
    assert p((0.0, 4.0)) == pytest.approx(max(-4 + 1, 0) + max(4 - 3, 0))
    many = evaluate_composite_many(p, [[1.0, 1.0], [0.0, 4.0]])
    assert many == pytest.approx([2.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3),
                          st.integers(-3, 3)), min_size=1, max_size=5),
       st.integers(0, 99))
def test_expand_matches_composite_evaluation(units, seed):
    p = composite([((float(a1), float(a2)), float(b)) for a1, a2, b in units],
                  2)
    simple = expand(p)
    pts = np.random.default_rng(seed).uniform(-5, 5, size=(20, 2))
    direct = evaluate_composite_many(p, pts)
    for x, want in zip(pts, direct):
        assert evaluate(simple, tuple(x)) == pytest.approx(want, abs=1e-9)


def test_expand_refuses_blowup():
    p = composite([((1.0,), 0.0)] * 17, 1)
    with pytest.raises(ValueError):
        expand(p)


def test_json_round_trip():
    p = composite([((1.5, -2.0), 0.25), ((0.0, 3.0), -1.0)], 2)
    text = composite_to_json(p)
    again = composite_from_json(text)
    assert again == p
    W, beta = unit_arrays(again)
    assert W.shape == (2, 2) and beta.tolist() == [0.25, -1.0]


# ---------------------------------------------------------------------------
# Newton polytopes in product form.
# ---------------------------------------------------------------------------

def test_unit_square_membership():
    rep = minkowski_newton(two_relu(), "sum")
    for pt in [(0.0, 0.0), (1.0, 1.0), (0.5, 0.25), (1.0, 0.0)]:
        assert rep.contains(pt)
    for pt in [(1.1, 0.0), (-0.1, 0.5), (0.5, 1.01)]:
        assert not rep.contains(pt)


def test_hull_of_union_is_triangle():
    rep = minkowski_newton(two_relu(), "max")
    for pt in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.2, 0.3)]:
        assert rep.contains(pt)
    for pt in [(0.6, 0.6), (1.0, 0.1), (-0.05, 0.2)]:
        assert not rep.contains(pt)


def test_segment_membership_1d():
    rep = minkowski_newton(composite([((2.0,), 0.0)], 1), "sum")
    assert rep.contains([0.0]) and rep.contains([2.0]) and rep.contains([1.3])
    assert not rep.contains([-0.01]) and not rep.contains([2.01])


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        minkowski_newton(two_relu(), "join")


def test_zonotope_membership_matches_corner_hull():
    rng = np.random.default_rng(7)
    checked = 0
    for trial in range(12):
        num = int(rng.integers(2, 7)) if trial < 10 else 10
        dim = int(rng.integers(2, 4))
        gens = rng.normal(size=(num, dim))
        rep = minkowski_newton(composite([(tuple(g), 0.0) for g in gens],
                                         dim), "sum")
        inside = rng.uniform(0.1, 0.9, size=num) @ gens
        direction = rng.normal(size=dim)
        reach = (gens @ direction > 0).astype(float) @ gens
        outside = reach + (0.2 * (1.0 + np.linalg.norm(reach))
                           * direction / np.linalg.norm(direction))
        for pt, want in ((inside, True), (outside, False)):
            assert rep.contains(pt) == want
            assert zonotope_contains_oracle(gens, pt) == want
            checked += 1
    assert checked == 24


# ---------------------------------------------------------------------------
# Dominance certificate.
# ---------------------------------------------------------------------------

def test_certificate_simple_cases():
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    B = np.array([0.5, -1.0])
    assert quotient_feasible(A, B, [((1.0, 0.0), 0.5)])  # one unit of p itself
    assert quotient_feasible(A, B, [((0.5, 0.5), -0.25)])
    assert not quotient_feasible(A, B, [((2.0, 0.0), 0.0)])  # slope too steep
    assert not quotient_feasible(A, B, [((1.0, 0.0), 0.6)])  # bias excess
    assert not quotient_feasible(A, B, [((-0.1, 0.0), -1.0)])
    # two units may not overload one coordinate jointly
    assert not quotient_feasible(
        A, B, [((0.7, 0.0), 0.0), ((0.7, 0.0), 0.0)])


def test_singular_units_rejected():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        quotient_feasible(A, np.zeros(2), [((1.0, 0.0), 0.0)])
    with pytest.raises(ValueError):
        quotient_feasible(np.ones((2, 3)), np.zeros(2), [((1.0, 0.0), 0.0)])


def test_certificate_matches_sampling_oracle():
    rng = np.random.default_rng(11)
    for trial in range(30):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, 5))
        feasible = bool(trial % 2)
        A, B, slopes, biases = certificate_instance(rng, n, m, feasible)
        pairs = list(zip(map(tuple, slopes), biases))
        assert quotient_feasible(A, B, pairs) == feasible
        assert composite_dominated(A, B, slopes, biases, rng,
                                   samples=2000) == feasible


def test_certificate_accepts_composite_argument():
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert quotient_feasible(A, np.zeros(2), two_relu())


# ---------------------------------------------------------------------------
# Analytically solved subproblem.
# ---------------------------------------------------------------------------

def phase2_lp_oracle(c1, c2, A, B, terms):
    """Optimal value by generic LP over mixture rows and free biases."""
    n = A.shape[0]
    nu = terms * n
    rows, rhs = [], []
    for k in range(n):
        row = np.zeros(nu + terms)
        row[k:nu:n] = 1.0
        rows.append(row)
        rhs.append(1.0)
    for i in range(terms):
        row = np.zeros(nu + terms)
        row[i * n:(i + 1) * n] = -B
        row[nu + i] = 1.0
        rows.append(row)
        rhs.append(0.0)
    out = linprog(c=-np.concatenate([(c1 @ A).ravel(), c2]),
                  A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(0.0, None)] * nu + [(None, None)] * terms,
                  method="highs")
    assert out.status == 0
    return -out.fun


def test_phase2_matches_lp_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        terms = int(rng.integers(1, 5))
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        A = q * rng.uniform(0.5, 2.0, size=n)
        B = rng.uniform(-2.0, 2.0, size=n)
        c1 = rng.normal(size=(terms, n)) * 3.0
        c2 = rng.integers(0, 5, size=terms).astype(float)  # zeros included
        slopes, biases = analytic_phase2(c1, c2, A, B, terms)
        value = float((c1 * slopes).sum() + c2 @ biases)
        want = phase2_lp_oracle(c1, c2, A, B, terms)
        assert value == pytest.approx(want, abs=1e-7 * max(1.0, abs(want)))
        assert quotient_feasible(A, B, list(zip(map(tuple, slopes), biases)),
                                 tol=1e-9)


def test_phase2_degenerate_weights():
    A = np.array([[1.0]])
    B = np.array([-2.0])
    slopes, biases = analytic_phase2(np.array([[3.0]]), np.array([0.0]), A, B,
                                     1)
    assert slopes.tolist() == [[1.0]] and biases.tolist() == [-2.0]
    slopes, biases = analytic_phase2(np.array([[-3.0]]), np.array([0.0]), A,
                                     B, 1)
    assert slopes.tolist() == [[0.0]] and biases.tolist() == [0.0]


def test_phase2_validation():
    A = np.eye(2)
    with pytest.raises(ValueError):
        analytic_phase2(np.zeros((1, 2)), np.array([-1.0]), A, np.zeros(2), 1)
    with pytest.raises(ValueError):
        analytic_phase2(np.zeros((2, 2)), np.zeros(2), A, np.zeros(2), 1)


# ---------------------------------------------------------------------------
# Conditional-gradient quotient search.
# ---------------------------------------------------------------------------

def test_fw_config_validation():
    pts = np.zeros((3, 2))
    for kwargs in ({"terms": 0}, {"terms": 1, "step": 0.0},
                   {"terms": 1, "step": 1.0}, {"terms": 1, "iterations": 0}):
        with pytest.raises(ValueError):
            FwConfig(points=pts, **kwargs)
    with pytest.raises(ValueError):
        FwConfig(points=np.zeros((0, 2)), terms=1)


def test_fw_requires_square_independent_units():
    pts = np.zeros((3, 2))
    with pytest.raises(ValueError):
        composite_fw_run(composite([((1.0, 0.0), 0.0)] * 3, 2),
                         FwConfig(points=pts, terms=1))
    with pytest.raises(ValueError):
        composite_fw_run(composite([((1.0, 1.0), 0.0), ((2.0, 2.0), 0.0)], 2),
                         FwConfig(points=pts, terms=1))


def test_fw_warm_start_shape_checked():
    with pytest.raises(ValueError):
        composite_fw_run(two_relu(),
                         FwConfig(points=np.zeros((3, 2)), terms=2,
                                  initial=(np.zeros((1, 2)), np.zeros(1))))


def test_fw_identity_fixed_point():
    pts = np.random.default_rng(0).normal(size=(50, 2))
    cfg = FwConfig(points=pts, terms=2, step=0.2, iterations=30,
                   initial=(np.eye(2), np.zeros(2)))
    run = composite_fw_run(two_relu(), cfg)
    assert np.array_equal(run.slopes, np.eye(2))
    assert np.array_equal(run.biases, np.zeros(2))
    assert len(run.objective) == 31


def test_fw_single_term_positive_quadrant():
    pts = np.abs(np.random.default_rng(1).normal(size=(100, 2))) + 0.1
    run = composite_fw_run(two_relu(),
                           FwConfig(points=pts, terms=1, iterations=50,
                                    seed=0))
    assert run.slopes == pytest.approx(np.array([[1.0, 1.0]]), abs=1e-4)
    assert run.biases == pytest.approx(np.zeros(1))


def test_fw_iterates_stay_certificate_feasible():
    pts = np.random.default_rng(5).normal(size=(80, 3)) * 2.0
    p = composite([((1.0, 0.5, 0.0), 0.5), ((0.0, 1.0, -0.5), -0.25),
                   ((0.25, 0.0, 1.0), 1.0)], 3)
    W, beta = unit_arrays(p)
    full = composite_fw_run(p, FwConfig(points=pts, terms=2, iterations=20,
                                        seed=9))
    for k in (1, 3, 7, 20):
        run = composite_fw_run(p, FwConfig(points=pts, terms=2, iterations=k,
                                           seed=9))
        # deterministic loop: a shorter run is a prefix of the longer one
        assert run.objective == full.objective[:k + 1]
        assert quotient_feasible(W.T, beta,
                                 list(zip(map(tuple, run.slopes),
                                          run.biases)), tol=1e-7)


def test_fw_same_seed_deterministic():
    pts = np.random.default_rng(2).normal(size=(40, 2))
    cfg = FwConfig(points=pts, terms=3, iterations=15, seed=4)
    r1 = composite_fw_run(two_relu(), cfg)
    r2 = composite_fw_run(two_relu(), cfg)
    assert np.array_equal(r1.slopes, r2.slopes)
    assert np.array_equal(r1.biases, r2.biases)
    assert r1.objective == r2.objective


def test_quotient_wrapper_returns_dominated_composite():
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(60, 2)) * 3.0
    p = composite([((1.0, -0.5), 0.5), ((0.25, 1.0), -1.0)], 2)
    q = composite_quotient_fw(p, FwConfig(points=pts, terms=1, seed=2))
    assert isinstance(q, CompositePolynomial) and q.num_units == 1
    probes = rng.normal(size=(500, 2)) * 50.0
    assert (evaluate_composite_many(q, probes)
            <= evaluate_composite_many(p, probes) + 1e-7).all()


# ---------------------------------------------------------------------------
# Sign-threshold quotient for nonnegative weights.
# ---------------------------------------------------------------------------

def test_threshold_rule_golden():
    assert vector_divide_simplified([3.0, 4.0], [1.0, -2.0]).tolist() == [
        3.0, 0.0]
    assert vector_divide_simplified([3.0, 4.0], [-1.0, -2.0]).tolist() == [
        0.0, 0.0]


def test_threshold_negative_weights_rejected():
    with pytest.raises(ValueError):
        vector_divide_simplified([1.0, -0.5], [1.0, 1.0])


def test_threshold_stays_in_box_and_matches_lp():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        w = rng.uniform(0.0, 4.0, size=n)
        s = rng.normal(size=n)
        a = vector_divide_simplified(w, s)
        assert ((0.0 <= a) & (a <= w)).all()
        out = linprog(c=-s, bounds=list(zip(np.zeros(n), w)), method="highs")
        assert out.status == 0
        assert np.array_equal(a, np.where(out.x > 0.5 * w, w, 0.0))
        assert float(s @ a) == pytest.approx(-out.fun, abs=1e-9)


# ---------------------------------------------------------------------------
# Quotient laws of sums and maxima.
# ---------------------------------------------------------------------------

def quarter_grid(lo=-16, hi=16):
    return [(F(t, 4),) for t in range(4 * lo, 4 * hi + 1)]


def test_monomial_shift_identity_exact():
    p1 = polynomial([((0,), 0), ((1,), 0)], 1, True)
    p2 = polynomial([((2,), 0)], 1, True)
    d = polynomial([((0,), 0), ((1,), 0)], 1, True)
    shift = polynomial([((1,), F(1, 2))], 1, True)
    report = check_quotient_laws(p1, p2, d, d, quarter_grid(),
                                 monomial=shift)
    assert report.monomial_shift == 0
    # dual route: the shifted quotient IS the quotient plus the monomial
    q = exact_divide(DivisionProblem(p1, d)).quotient
    q_shift = exact_divide(
        DivisionProblem(tropical_sum(p1, shift), d)).quotient
    assert same_function(q_shift, tropical_sum(q, shift))


def test_shift_must_be_single_term():
    p = polynomial([((0,), 0)], 1, True)
    with pytest.raises(ValueError):
        check_quotient_laws(p, p, p, p, quarter_grid(-2, 2),
                            monomial=polynomial([((0,), 0), ((1,), 0)], 1,
                                                True))


def test_dividend_laws_on_split_quotient_example():
    # the four-term running example split as a max of two sub-polynomials
    p1 = polynomial([((-2,), -1)], 1, True)
    p2 = polynomial([((0,), 1), ((1,), 1), ((3,), -3)], 1, True)
    d = polynomial([((1,), 0), ((2,), -1)], 1, True)
    report = check_quotient_laws(p1, p2, d, d, quarter_grid())
    assert report.max_dividend[0] >= 0
    assert report.sum_dividend[0] >= 0


def test_equalities_when_remainders_vanish():
    d = polynomial([((0,), 0), ((1,), 0)], 1, True)
    s1 = polynomial([((1,), F(-1, 2)), ((0,), 0)], 1, True)
    s2 = polynomial([((2,), -1)], 1, True)
    p1 = tropical_sum(d, s1)
    p2 = tropical_sum(d, s2)
    report = check_quotient_laws(p1, p2, d, d, quarter_grid())
    assert report.remainders_vanish
    assert report.sum_dividend == (0, 0)
    assert report.max_dividend == (0, 0)


def test_random_instances_dividend_laws_hold():
    rng = np.random.default_rng(21)
    grid = quarter_grid(-8, 8)
    done = 0
    while done < 10:
        prob1 = random_problem(rng, 1, 4, 2)
        prob2 = random_problem(rng, 1, 3, 1)
        if prob1.d.num_terms < 2:
            continue
        report = check_quotient_laws(prob1.p, prob2.p, prob1.d, prob2.d, grid)
        assert report.sum_dividend[0] >= 0
        assert report.max_dividend[0] >= 0
        done += 1


def test_divisor_law_counterexamples():
    grid = quarter_grid()
    p = polynomial([((0,), 0), ((1,), 0)], 1, True)
    d_half = polynomial([((0,), F(1, 2)), ((1,), 0)], 1, True)
    # summing the divisor with itself empties the slope constraint set
    report = check_quotient_laws(p, p, d_half, d_half, grid)
    assert report.sum_divisor[0] < 0
    # finite failure: every sub-remainder vanishes yet the law still breaks
    p_wide = polynomial([((0,), 0), ((1,), 0), ((-1,), -10)], 1, True)
    d_unit = polynomial([((0,), 0), ((1,), 0)], 1, True)
    report = check_quotient_laws(p_wide, p_wide, d_unit, d_unit, grid)
    assert report.remainders_vanish
    assert report.sum_divisor[0] <= -10
    # opposite-slope divisors break the max law
    d_mirror = polynomial([((0,), F(1, 2)), ((-1,), 0)], 1, True)
    report = check_quotient_laws(p, p, d_half, d_mirror, grid)
    assert report.max_divisor[0] < 0


def test_divisor_laws_hold_when_constraint_sets_survive():
    # d1 = d2 keeps Q(p, d1 + d2) nontrivial here; both gaps stay >= 0
    p = polynomial([((0,), 0), ((2,), 0)], 1, True)
    d = polynomial([((0,), 0), ((1,), 0)], 1, True)
    report = check_quotient_laws(p, p, d, d, quarter_grid())
    assert report.sum_divisor[0] >= 0
    assert report.max_divisor[0] >= 0
