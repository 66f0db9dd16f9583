"""Division tools for composite max-plus polynomials.

A composite polynomial is a sum of rectified affine units,

    p(x) = sum_nu max(a_nu . x + b_nu, 0),

the shape a one-hidden-layer ReLU network takes after splitting its
output weights by sign.  Its Newton polytope is the Minkowski sum of
the segments [0, a_nu] (a zonotope), kept here as a product of small
factors so membership stays one linear program even though the vertex
count is exponential.

Dividing such a p by zero with a composite quotient is a fitting
problem: when the unit slopes form a basis, q <= p everywhere reduces
to linear certificate inequalities on the mixture coordinates of the
quotient units, and a conditional-gradient loop alternates between
sample activity indicators and a linear subproblem whose optimum has a
closed form.  The loop preserves the certificate (the feasible set is
convex and every update is a convex combination) but is a heuristic:
the monitored sample objective is reported, not guaranteed monotone.

`check_quotient_laws` measures how exact quotients interact with sums
and maxima of dividends and divisors.  The dividend-side laws are
theorems; the divisor-side ones can genuinely fail (combining divisors
can empty the slope constraint set), so the report carries signed gaps
instead of asserting.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DivisionProblem,
    TropicalPolynomial,
    TropicalTerm,
    constant,
    evaluate,
    is_neg_inf,
    polynomial,
    scale_add,
    tropical_max,
    tropical_sum,
)
from .exact import exact_divide
from .linprog import INFEASIBLE, LinearProgram, solve_lp

# Smallest singular value (relative to the largest) accepted as full rank.
RANK_TOL = 1e-8
# Slack allowed when checking the certificate inequalities on floats.
CERT_TOL = 1e-9
# Expansion to simple form doubles the term count per unit.
MAX_EXPAND_UNITS = 16


@dataclass(frozen=True)
class CompositePolynomial:
    """Sum of rectified units max(a_nu . x + b_nu, 0); float scalars."""

    units: tuple[TropicalTerm, ...]
    dim: int

    def __post_init__(self):
        if not self.units:
            raise ValueError("a composite needs at least one unit")
        for u in self.units:
            if len(u.a) != self.dim:
                raise ValueError("unit dimension mismatch")

    @property
    def num_units(self) -> int:
        return len(self.units)

    def __call__(self, x):
        return evaluate_composite(self, x)


def composite(unit_pairs: Iterable[tuple[Sequence, object]],
              dim: int) -> CompositePolynomial:
    """Build a composite polynomial from (slope, bias) pairs."""
    units = tuple(TropicalTerm(tuple(float(c) for c in a), float(b))
                  for a, b in unit_pairs)
    return CompositePolynomial(units, dim)


def unit_arrays(p: CompositePolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Unit slopes as rows (N, dim) and biases (N,) as float arrays."""
    W = np.array([[float(c) for c in u.a] for u in p.units], dtype=float)
    beta = np.array([float(u.b) for u in p.units], dtype=float)
    return W, beta


def evaluate_composite(p: CompositePolynomial, x) -> float:
    """sum_nu max(a_nu . x + b_nu, 0) at one point."""
    W, beta = unit_arrays(p)
    z = W @ np.asarray(x, dtype=float).reshape(p.dim) + beta
    return float(np.maximum(z, 0.0).sum())


def evaluate_composite_many(p: CompositePolynomial,
                            points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over rows of `points` (N, dim)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    W, beta = unit_arrays(p)
    return np.maximum(pts @ W.T + beta, 0.0).sum(axis=1)


def expand(p: CompositePolynomial) -> TropicalPolynomial:
    """Simple (canonical max-of-affine) form of a composite.

    The sum of rectified units is the max over unit subsets of the
    summed affine parts, so the term count is 2^units; refuse blowups.
    """
    if p.num_units > MAX_EXPAND_UNITS:
        raise ValueError("expansion would need 2^units terms; too many units")
    out = constant(0.0, p.dim)
    for u in p.units:
        out = tropical_sum(out, polynomial([([0.0] * p.dim, 0.0), (u.a, u.b)],
                                           p.dim))
    return out


def composite_to_dict(p: CompositePolynomial) -> dict:
    return {"dim": p.dim,
            "units": [{"a": [float(c) for c in u.a], "b": float(u.b)}
                      for u in p.units]}


def composite_from_dict(data: dict) -> CompositePolynomial:
    return composite([(u["a"], u["b"]) for u in data["units"]], data["dim"])


def composite_to_json(p: CompositePolynomial) -> str:
    return json.dumps(composite_to_dict(p))


def composite_from_json(text: str) -> CompositePolynomial:
    return composite_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Newton polytopes of sums and maxima, in product form.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonFactor:
    """One factor {F alpha : A alpha <= beta} of a product description."""

    F: np.ndarray
    A: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class ExtendedNewtonRep:
    """Newton polytope of a combination of parts, one factor per part.

    mode "sum" is the Minkowski sum {sum_nu F_nu alpha_nu}; mode "max"
    is the hull of the union, where weights lambda_nu >= 0 summing to
    one scale each factor's right-hand side.
    """

    factors: tuple[NewtonFactor, ...]
    dim: int
    mode: str = "sum"

    def contains(self, point) -> bool:
        """LP feasibility of one membership query."""
        pt = np.asarray(point, dtype=float).reshape(self.dim)
        widths = [f.F.shape[1] for f in self.factors]
        nf = len(self.factors)
        nv = sum(widths) + (nf if self.mode == "max" else 0)
        eq_extra = 1 if self.mode == "max" else 0
        A = np.zeros((self.dim + eq_extra, nv))
        b = np.concatenate([pt, np.ones(eq_extra)])
        G = np.zeros((sum(f.A.shape[0] for f in self.factors), nv))
        h = np.zeros(G.shape[0])
        col = 0
        row = 0
        for i, f in enumerate(self.factors):
            A[:self.dim, col:col + widths[i]] = f.F
            G[row:row + f.A.shape[0], col:col + widths[i]] = f.A
            if self.mode == "max":
                A[self.dim, sum(widths) + i] = 1.0
                G[row:row + f.A.shape[0], sum(widths) + i] = -f.beta
            else:
                h[row:row + f.A.shape[0]] = f.beta
            col += widths[i]
            row += f.A.shape[0]
        bounds = ([(None, None)] * sum(widths)
                  + [(0.0, None)] * (nf if self.mode == "max" else 0))
        out = solve_lp(LinearProgram(c=np.zeros(nv), G=G, h=h, A=A, b=b,
                                     bounds=bounds))
        return out.status != INFEASIBLE


def minkowski_newton(p: CompositePolynomial,
                     mode: str = "sum") -> ExtendedNewtonRep:
    """Newton polytope of the composite, factor per unit.

    Each unit contributes the segment [0, a_nu] as {alpha a_nu :
    0 <= alpha <= 1}; "sum" combines them into the zonotope of the
    summed units, "max" into the hull of their union.
    """
    if mode not in ("sum", "max"):
        raise ValueError(f"unknown mode {mode!r}")
    factors = tuple(
        NewtonFactor(np.array([[float(c)] for c in u.a]),
                     np.array([[1.0], [-1.0]]),
                     np.array([1.0, 0.0]))
        for u in p.units)
    return ExtendedNewtonRep(factors, p.dim, mode)


# ---------------------------------------------------------------------------
# Budgeted composite quotient of p by zero.
# ---------------------------------------------------------------------------

def _mixture_coordinates(A: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    """Columns u_i solving A u_i = a_hat_i, after a rank check."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("unit slope matrix must be square")
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= RANK_TOL * max(1.0, s[0]):
        raise ValueError("unit slopes are linearly dependent; reduce first")
    return np.linalg.solve(A, np.atleast_2d(slopes).T)


def _candidate_arrays(candidate) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(candidate, CompositePolynomial):
        return unit_arrays(candidate)
    pairs = list(candidate)
    return (np.array([[float(c) for c in a] for a, _ in pairs]),
            np.array([float(b) for _, b in pairs]))


def quotient_feasible(A, B, candidate, tol: float = CERT_TOL) -> bool:
    """Certificate that a candidate composite quotient never exceeds p.

    p has unit slopes in the columns of A (a basis) and biases B.  The
    candidate units (a_hat_i, b_hat_i) satisfy q <= p everywhere exactly
    when, in mixture coordinates u_i = A^{-1} a_hat_i, every u_i is
    nonnegative, the u_i sum to at most one per coordinate, and each
    bias is at most B . u_i.
    """
    slopes, biases = _candidate_arrays(candidate)
    B = np.asarray(B, dtype=float)
    U = _mixture_coordinates(A, slopes)
    return bool((U >= -tol).all()
                and (U.sum(axis=1) <= 1.0 + tol).all()
                and (biases <= B @ U + tol).all())


@dataclass(frozen=True)
class FwConfig:
    """Inputs of the conditional-gradient quotient search.

    points is the (N, dim) sample set and terms the unit budget of the
    quotient.  Each round blends the linear subproblem's optimum into
    the iterate with weight `step`.  `initial` is an optional warm
    start as (slopes, biases); without one the loop starts at a random
    certificate-feasible mixture of the dividend units drawn from
    `seed`.
    """

    points: np.ndarray
    terms: int
    step: float = 0.2
    iterations: int = 50
    initial: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("empty sample set")
        object.__setattr__(self, "points", pts)
        if self.terms < 1:
            raise ValueError("need at least one quotient unit")
        if not 0.0 < self.step < 1.0:
            raise ValueError("step must lie strictly inside (0, 1)")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")


@dataclass(frozen=True)
class FwRun:
    """Final iterate plus the monitored sample objective per iterate."""

    slopes: np.ndarray
    biases: np.ndarray
    objective: tuple[float, ...]


def analytic_phase2(c1, c2, A, B, terms: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form optimum of the certificate-constrained subproblem.

    Maximizes sum_i c1_i . a_hat_i + c2_i b_hat_i over candidates
    satisfying the `quotient_feasible` inequalities.  In mixture
    coordinates the bias bound binds (its weight c2_i is a sample count,
    so nonnegative), leaving per-coordinate problems over u_i >= 0 with
    sum_i u_i <= 1 whose vertices are 0 and the unit vectors: coordinate
    k goes entirely to the unit maximizing gamma[i, k] = (c1_i^T A +
    c2_i B^T)_k when that value is positive, and to zero otherwise.
    """
    c1 = np.atleast_2d(np.asarray(c1, dtype=float))
    c2 = np.asarray(c2, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if c1.shape != (terms, A.shape[0]) or c2.shape != (terms,):
        raise ValueError("objective data shape mismatch")
    if (c2 < 0).any():
        raise ValueError("bias weights must be nonnegative")
    gamma = c1 @ A + np.outer(c2, B)
    U = np.zeros((terms, A.shape[0]))
    cols = np.arange(A.shape[0])
    best = gamma.argmax(axis=0)
    take = gamma[best, cols] > 0.0
    U[best[take], cols[take]] = 1.0
    return U @ A.T, U @ B


def _square_units(p: CompositePolynomial) -> tuple[np.ndarray, np.ndarray]:
    if p.num_units != p.dim:
        raise ValueError("need exactly dim units; reduce the network first")
    W, beta = unit_arrays(p)
    _mixture_coordinates(W.T, np.zeros((1, p.dim)))  # rank check only
    return W.T, beta


def composite_fw_run(p: CompositePolynomial, config: FwConfig) -> FwRun:
    """Conditional-gradient search for a budgeted composite quotient.

    Every iterate is certificate-feasible: the start is, the subproblem
    solutions are vertices of the same feasible set, and each update is
    a convex combination.  The recorded objective sum_j q_t(x_j) is the
    quantity the subproblem linearizes; it is reported per iterate
    (start included) without any monotonicity guarantee.
    """
    A, B = _square_units(p)
    pts = config.points
    if config.initial is not None:
        slopes = np.atleast_2d(np.asarray(config.initial[0], dtype=float))
        biases = np.asarray(config.initial[1], dtype=float)
        if slopes.shape != (config.terms, p.dim) or biases.shape != (config.terms,):
            raise ValueError("warm start shape mismatch")
    else:
        rng = np.random.default_rng(config.seed)
        U = rng.uniform(size=(config.terms, p.dim)) / config.terms
        slopes = U @ A.T
        biases = U @ B
    objective = [float(np.maximum(pts @ slopes.T + biases, 0.0).sum())]
    for _ in range(config.iterations):
        active = (pts @ slopes.T + biases) >= 0.0
        c1 = active.T.astype(float) @ pts
        c2 = active.sum(axis=0).astype(float)
        new_slopes, new_biases = analytic_phase2(c1, c2, A, B, config.terms)
        slopes = (1.0 - config.step) * slopes + config.step * new_slopes
        biases = (1.0 - config.step) * biases + config.step * new_biases
        objective.append(float(np.maximum(pts @ slopes.T + biases, 0.0).sum()))
    return FwRun(slopes, biases, tuple(objective))


def composite_quotient_fw(p: CompositePolynomial,
                          config: FwConfig) -> CompositePolynomial:
    """Budgeted composite quotient of p by zero (largest q <= p, heuristic)."""
    run = composite_fw_run(p, config)
    return composite(zip(map(tuple, run.slopes), run.biases), p.dim)


def vector_divide_simplified(weights, cluster_sums) -> np.ndarray:
    """Per-term box-optimal quotient slopes for nonnegative unit mixtures.

    Each quotient term maximizes s_l . a over the box 0 <= a <= w
    elementwise (bias fixed at zero), so coordinate k takes w_k exactly
    when the cluster sum is positive.
    """
    w = np.asarray(weights, dtype=float)
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    s = np.asarray(cluster_sums, dtype=float)
    return np.where(s > 0.0, w, 0.0)


# ---------------------------------------------------------------------------
# Quotient laws under sums and maxima.
# ---------------------------------------------------------------------------

def _value_gap(lhs, rhs):
    """lhs - rhs with NEG_INF bookkeeping; two NEG_INFs gap zero."""
    if is_neg_inf(lhs) and is_neg_inf(rhs):
        return Fraction(0)
    if is_neg_inf(lhs):
        return float("-inf")
    if is_neg_inf(rhs):
        return float("inf")
    return lhs - rhs


@dataclass(frozen=True)
class QuotientLawReport:
    """Signed (min, max) grid gaps, law left side minus right side.

    sum_dividend: Q(p1+p2, d1) vs Q(p1,d1) + Q(p2,d1) + d1
    max_dividend: Q(p1 v p2, d1) vs Q(p1,d1) v Q(p2,d1)
    sum_divisor:  Q(p1, d1+d2) vs Q(p1,d1) + Q(p1,d2) - p1
    max_divisor:  Q(p1, d1 v d2) vs min(Q(p1,d1), Q(p1,d2))
    monomial_shift: max |gap| of Q(p1+s,d1) against Q(p1,d1)+s and
    against Q(p1,d1-s); None when no monomial was supplied.
    remainders_vanish: both R(p1,d1) and R(p2,d1) are NEG_INF, the
    precondition under which the dividend-side laws turn into equalities.
    """

    sum_dividend: tuple
    max_dividend: tuple
    sum_divisor: tuple
    max_divisor: tuple
    monomial_shift: object
    remainders_vanish: bool


def check_quotient_laws(p1: TropicalPolynomial, p2: TropicalPolynomial,
                        d1: TropicalPolynomial, d2: TropicalPolynomial,
                        grid: Sequence,
                        monomial: TropicalPolynomial | None = None
                        ) -> QuotientLawReport:
    """Measure the quotient laws of sums and maxima on a point grid.

    Inputs must be exact-backend polynomials (each law needs several
    exact divisions).  A negative min means the law fails on this
    instance.  The dividend-side laws always hold (their right sides
    are genuine polynomials below the shifted dividend); the
    divisor-side ones can fail, so callers get gaps rather than
    assertions.
    """
    def quot(p, d):
        return exact_divide(DivisionProblem(p, d)).quotient

    res1 = exact_divide(DivisionProblem(p1, d1))
    res2 = exact_divide(DivisionProblem(p2, d1))
    q1, q2 = res1.quotient, res2.quotient
    q_sum = quot(tropical_sum(p1, p2), d1)
    q_max = quot(tropical_max(p1, p2), d1)
    qd2 = quot(p1, d2)
    q_dsum = quot(p1, tropical_sum(d1, d2))
    q_dmax = quot(p1, tropical_max(d1, d2))
    if monomial is not None:
        if monomial.num_terms != 1:
            raise ValueError("shift must be a single-term polynomial")
        s = monomial.terms[0]
        q_shift = quot(tropical_sum(p1, monomial), d1)
        q_unshift = quot(p1, scale_add(d1, tuple(-c for c in s.a), -s.b))
    gaps: dict[str, list] = {k: [] for k in
                             ("sum_dividend", "max_dividend",
                              "sum_divisor", "max_divisor", "monomial")}
    for x in grid:
        v1, v2 = evaluate(q1, x), evaluate(q2, x)
        vp, vd = evaluate(p1, x), evaluate(d1, x)
        gaps["sum_dividend"].append(
            _value_gap(evaluate(q_sum, x), v1 + v2 + vd))
        gaps["max_dividend"].append(
            _value_gap(evaluate(q_max, x), max(v1, v2)))
        w2 = evaluate(qd2, x)
        gaps["sum_divisor"].append(
            _value_gap(evaluate(q_dsum, x), v1 + w2 - vp))
        gaps["max_divisor"].append(
            _value_gap(evaluate(q_dmax, x), min(v1, w2)))
        if monomial is not None:
            shifted = v1 + evaluate(monomial, x)
            gaps["monomial"].append(abs(_value_gap(evaluate(q_shift, x),
                                                   shifted)))
            gaps["monomial"].append(abs(_value_gap(evaluate(q_unshift, x),
                                                   shifted)))
    span = {k: (min(v), max(v)) for k, v in gaps.items() if v}
    return QuotientLawReport(
        sum_dividend=span["sum_dividend"],
        max_dividend=span["max_dividend"],
        sum_divisor=span["sum_divisor"],
        max_divisor=span["max_divisor"],
        monomial_shift=max(gaps["monomial"]) if monomial is not None else None,
        remainders_vanish=(res1.remainder.is_neg_inf
                           and res2.remainder.is_neg_inf),
    )
