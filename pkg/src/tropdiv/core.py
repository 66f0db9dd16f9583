"""Max-plus (tropical) polynomials: data model, algebra, Newton-polytope queries.

A tropical polynomial is a finite max of affine terms,

    p(x) = max_i (a_i . x + b_i),

stored as an immutable term list.  The empty max is the NEG_INF sentinel
polynomial; NEG_INF is a dedicated singleton, never a stored float -inf.

Two scalar backends share one type: exact `fractions.Fraction` terms for
the polyhedral division pipeline and golden comparisons, plain floats for
the sampling-based algorithms.  The `exact` flag on each polynomial picks
the backend; mixing backends in one operation is an error.

Newton polytope conventions: Newt(p) = conv{a_i}, the extended polytope
lifts each point by its bias, and the extended Newton function
ENF_p(a) = sup{b : (a, b) in ENewt(p)} is the polytope's upper hull,
with ENF_p(a) = NEG_INF outside Newt(p).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .linprog import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from .polyhedral import VRep, as_fraction, hrep_of

# Two float terms are duplicates when all entries agree within this.
DEDUP_TOL = 1e-9
# A term is kept by prune_dominated if it beats the rest by more than this.
DOMINANCE_TOL = 1e-9


class _NegInf:
    """Sentinel for the empty tropical max; orders below every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        return self

    def __rsub__(self, other):
        raise TypeError("cannot subtract NEG_INF from a number")


NEG_INF = _NegInf()


def is_neg_inf(value) -> bool:
    return value is NEG_INF


@dataclass(frozen=True)
class TropicalTerm:
    """One affine term a . x + b; scalars all Fraction or all float."""

    a: tuple
    b: object

    def __post_init__(self):
        for x in self.a:
            if isinstance(x, float) and not math.isfinite(x):
                raise ValueError("non-finite coefficient")
        if isinstance(self.b, float) and not math.isfinite(self.b):
            raise ValueError("non-finite bias")


@dataclass(frozen=True)
class TropicalPolynomial:
    """Immutable term list; empty terms = the NEG_INF polynomial."""

    terms: tuple[TropicalTerm, ...]
    dim: int
    exact: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        for t in self.terms:
            if len(t.a) != self.dim:
                raise ValueError("term dimension mismatch")

    @property
    def is_neg_inf(self) -> bool:
        return not self.terms

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def __call__(self, x):
        return evaluate(self, x)


def polynomial(term_pairs: Iterable[tuple[Sequence, object]], dim: int,
               exact: bool = False) -> TropicalPolynomial:
    """Build a polynomial from (a, b) pairs.

    Terms with b = NEG_INF are absorbed into the max and dropped; if all
    are dropped the result is the NEG_INF polynomial.
    """
    terms = []
    for a, b in term_pairs:
        if is_neg_inf(b):
            continue
        if exact:
            terms.append(TropicalTerm(tuple(as_fraction(x) for x in a),
                                      as_fraction(b)))
        else:
            terms.append(TropicalTerm(tuple(float(x) for x in a), float(b)))
    return TropicalPolynomial(tuple(terms), dim, exact)


def neg_inf_polynomial(dim: int, exact: bool = False) -> TropicalPolynomial:
    return TropicalPolynomial((), dim, exact)


def constant(value, dim: int, exact: bool = False) -> TropicalPolynomial:
    return polynomial([([0] * dim, value)], dim, exact)


def _point(x, p: TropicalPolynomial):
    if np.ndim(x) == 0:
        x = [x]
    if len(x) != p.dim:
        raise ValueError("point dimension mismatch")
    if p.exact:
        return [as_fraction(v) for v in x]
    return [float(v) for v in x]


def evaluate(p: TropicalPolynomial, x):
    """max_i (a_i . x + b_i); the NEG_INF polynomial gives NEG_INF."""
    if p.is_neg_inf:
        return NEG_INF
    pt = _point(x, p)
    return max(sum(c * v for c, v in zip(t.a, pt)) + t.b for t in p.terms)


def evaluate_many(p: TropicalPolynomial, points: np.ndarray) -> np.ndarray:
    """Vectorized float evaluation over rows of `points` (N, dim)."""
    if p.is_neg_inf:
        raise ValueError("cannot batch-evaluate the NEG_INF polynomial")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    A, b = coefficient_arrays(p)
    return (pts @ A.T + b).max(axis=1)


def coefficient_arrays(p: TropicalPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Terms as float arrays (A of shape (m, dim), b of shape (m,))."""
    if p.is_neg_inf:
        raise ValueError("NEG_INF polynomial has no terms")
    A = np.array([[float(x) for x in t.a] for t in p.terms], dtype=float)
    b = np.array([float(t.b) for t in p.terms], dtype=float)
    return A, b


def _same_term(s: TropicalTerm, t: TropicalTerm, exact: bool) -> bool:
    if exact:
        return s.a == t.a and s.b == t.b
    return (all(abs(u - v) <= DEDUP_TOL for u, v in zip(s.a, t.a))
            and abs(s.b - t.b) <= DEDUP_TOL)


def _dedup(terms: Sequence[TropicalTerm], exact: bool):
    kept: list[TropicalTerm] = []
    for t in terms:
        if not any(_same_term(t, u, exact) for u in kept):
            kept.append(t)
    return tuple(kept)


def _check_pair(p1: TropicalPolynomial, p2: TropicalPolynomial):
    if p1.dim != p2.dim:
        raise ValueError("dimension mismatch")
    if p1.exact != p2.exact:
        raise ValueError("mixed exact/float backends")


def tropical_sum(p1: TropicalPolynomial, p2: TropicalPolynomial) -> TropicalPolynomial:
    """Pointwise p1 + p2; terms are all pairwise term sums, deduplicated."""
    _check_pair(p1, p2)
    if p1.is_neg_inf or p2.is_neg_inf:
        return neg_inf_polynomial(p1.dim, p1.exact)
    terms = [TropicalTerm(tuple(x + y for x, y in zip(s.a, t.a)), s.b + t.b)
             for s in p1.terms for t in p2.terms]
    return TropicalPolynomial(_dedup(terms, p1.exact), p1.dim, p1.exact)


def tropical_max(p1: TropicalPolynomial, p2: TropicalPolynomial) -> TropicalPolynomial:
    """Pointwise max; term lists concatenate, duplicates collapse."""
    _check_pair(p1, p2)
    return TropicalPolynomial(_dedup(p1.terms + p2.terms, p1.exact),
                              p1.dim, p1.exact)


def scale_add(p: TropicalPolynomial, a: Sequence, b) -> TropicalPolynomial:
    """Add the monomial a . x + b to p (tropical product by a monomial)."""
    return tropical_sum(p, polynomial([(a, b)], p.dim, p.exact))


def newton_points(p: TropicalPolynomial) -> list[tuple]:
    """Coefficient vectors a_i in term order (hull taken downstream)."""
    if p.is_neg_inf:
        raise ValueError("NEG_INF polynomial has no Newton polytope")
    return [t.a for t in p.terms]


def enewt_points(p: TropicalPolynomial) -> list[tuple]:
    """Lifted points (a_i, b_i) generating the extended Newton polytope."""
    if p.is_neg_inf:
        raise ValueError("NEG_INF polynomial has no Newton polytope")
    return [t.a + (t.b,) for t in p.terms]


def enf_value(p: TropicalPolynomial, a):
    """ENF_p(a) = sup{b : (a, b) in ENewt(p)}; NEG_INF outside Newt(p).

    Exact backend reads the upper hull off the H-representation of
    ENewt(p); float backend solves the convex-combination LP directly.
    """
    if p.is_neg_inf:
        raise ValueError("ENF of the NEG_INF polynomial is undefined")
    pt = _point(a, p)
    if p.exact:
        # Eliminate the lift coordinate: at fixed a the feasible biases
        # form an interval [low, high]; a is in Newt(p) iff the az == 0
        # rows hold and the interval is nonempty, and then ENF(a) = high.
        hull = hrep_of(VRep.make(enewt_points(p), [], p.dim + 1))
        high = None
        low = None
        for row, rhs in hull.rows:
            ax, az = row[:-1], row[-1]
            slack = sum(c * v for c, v in zip(ax, pt))
            if az == 0:
                if slack < rhs:
                    return NEG_INF
            elif az < 0:
                bound = (rhs - slack) / az
                high = bound if high is None or bound < high else high
            else:
                bound = (rhs - slack) / az
                low = bound if low is None or bound > low else low
        assert high is not None  # bounded polytopes have upper rows
        if low is not None and low > high:
            return NEG_INF
        return high
    A, b = coefficient_arrays(p)
    out = solve_lp(LinearProgram(
        c=b,
        A=np.vstack([A.T, np.ones((1, len(b)))]),
        b=np.concatenate([np.asarray(pt, dtype=float), [1.0]]),
        bounds=[(0.0, None)] * len(b),
    ))
    if out.status == INFEASIBLE:
        return NEG_INF
    assert out.status == OPTIMAL
    return out.value


def _dominated_exact(term: TropicalTerm, others: Sequence[TropicalTerm],
                     dim: int) -> bool:
    rest = TropicalPolynomial(tuple(others), dim, exact=True)
    val = enf_value(rest, term.a)
    return not is_neg_inf(val) and val >= term.b


def _dominated_float(term: TropicalTerm, others: Sequence[TropicalTerm],
                     dim: int) -> bool:
    # maximize t s.t. t <= (a_i - a_j).x + (b_i - b_j) for all j != i;
    # the term matters only if it can beat the rest somewhere.
    G = []
    h = []
    for o in others:
        G.append([float(oj - tj) for tj, oj in zip(term.a, o.a)] + [1.0])
        h.append(float(term.b - o.b))
    out = solve_lp(LinearProgram(
        c=[0.0] * dim + [1.0], G=np.array(G), h=np.array(h)))
    if out.status == UNBOUNDED:
        return False
    assert out.status == OPTIMAL  # x = 0 with small t is always feasible
    return out.value <= DOMINANCE_TOL


def prune_dominated(p: TropicalPolynomial) -> TropicalPolynomial:
    """Drop terms that never attain the max.

    The survivors are exactly the vertices of the upper hull of
    ENewt(p), so in the exact backend the pruned, sorted term list is a
    canonical form for the polynomial *function*.
    """
    if p.is_neg_inf or p.num_terms == 1:
        return p
    keep = list(_dedup(p.terms, p.exact))
    i = 0
    while i < len(keep) and len(keep) > 1:
        others = keep[:i] + keep[i + 1:]
        if p.exact:
            drop = _dominated_exact(keep[i], others, p.dim)
        else:
            drop = _dominated_float(keep[i], others, p.dim)
        if drop:
            keep.pop(i)
        else:
            i += 1
    return TropicalPolynomial(tuple(keep), p.dim, p.exact)


def canonical(p: TropicalPolynomial) -> TropicalPolynomial:
    """Pruned term list in sorted order; exact backend only.

    Two exact polynomials define the same function iff their canonical
    forms are equal.
    """
    if not p.exact and not p.is_neg_inf:
        raise ValueError("canonical form requires the exact backend")
    pruned = prune_dominated(p)
    terms = sorted(pruned.terms, key=lambda t: (t.a, t.b))
    return TropicalPolynomial(tuple(terms), p.dim, p.exact)


def same_function(p1: TropicalPolynomial, p2: TropicalPolynomial) -> bool:
    _check_pair(p1, p2)
    return canonical(p1) == canonical(p2)


# ---------------------------------------------------------------------------
# Division bookkeeping.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisionProblem:
    """Dividend p, divisor d, and their difference f(x) = p(x) - d(x)."""

    p: TropicalPolynomial
    d: TropicalPolynomial

    def __post_init__(self):
        _check_pair(self.p, self.d)

    @property
    def dim(self) -> int:
        return self.p.dim

    def f(self, x):
        return evaluate(self.p, x) - evaluate(self.d, x)

    def f_many(self, points: np.ndarray) -> np.ndarray:
        return evaluate_many(self.p, points) - evaluate_many(self.d, points)


@dataclass(frozen=True)
class DivisionResult:
    """Quotient/remainder with the nontrivial/effective diagnosis.

    error_trace carries the per-iteration sample error of the
    approximate algorithm and stays empty in exact mode.
    """

    quotient: TropicalPolynomial
    remainder: TropicalPolynomial
    nontrivial: bool
    effective: bool
    error_trace: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.nontrivial != (not self.quotient.is_neg_inf):
            raise ValueError("nontrivial flag contradicts the quotient")
        if self.effective and not self.nontrivial:
            raise ValueError("an effective division is also nontrivial")


def in_constraint_set(problem: DivisionProblem, a) -> bool:
    """Membership a in C = {c : c + Newt(d) inside Newt(p)}."""
    if problem.p.is_neg_inf or problem.d.is_neg_inf:
        raise ValueError("constraint set needs finite p and d")
    pt = _point(a, problem.p)
    for t in problem.d.terms:
        shifted = [x + y for x, y in zip(pt, t.a)]
        if is_neg_inf(enf_value(problem.p, shifted)):
            return False
    return True


def default_probe_grid(dim: int, radius: float = 8.0, step: float = 0.25):
    """Uniform grid over [-radius, radius]^dim used by lower_bound_l."""
    axis = np.arange(-radius, radius + step / 2, step)
    return [tuple(pt) for pt in product(axis, repeat=dim)]


def lower_bound_l(problem: DivisionProblem, a, probe_grid=None):
    """Estimate of l(a) = inf_x {f(x) - a . x} over a probe grid.

    The infimum is finite exactly when a lies in the constraint set C;
    that membership test is exact, the finite value is a grid minimum.
    """
    if not in_constraint_set(problem, a):
        return NEG_INF
    if probe_grid is None:
        probe_grid = default_probe_grid(problem.dim)
    pt = _point(a, problem.p)
    best = None
    for x in probe_grid:
        xs = _point(x, problem.p)
        val = problem.f(xs) - sum(c * v for c, v in zip(pt, xs))
        if best is None or val < best:
            best = val
    return best


# ---------------------------------------------------------------------------
# JSON interchange.
# ---------------------------------------------------------------------------

def poly_to_dict(p: TropicalPolynomial) -> dict:
    return {
        "dim": p.dim,
        "terms": [{"a": [float(x) for x in t.a], "b": float(t.b)}
                  for t in p.terms],
    }


def poly_from_dict(data: dict, exact: bool = False) -> TropicalPolynomial:
    dim = int(data["dim"])
    pairs = [(t["a"], t["b"]) for t in data["terms"]]
    return polynomial(pairs, dim, exact)


def poly_to_json(p: TropicalPolynomial) -> str:
    return json.dumps(poly_to_dict(p))


def poly_from_json(text: str, exact: bool = False) -> TropicalPolynomial:
    return poly_from_dict(json.loads(text), exact)


def result_to_dict(res: DivisionResult) -> dict:
    return {
        "quotient": poly_to_dict(res.quotient),
        "remainder": poly_to_dict(res.remainder),
        "nontrivial": res.nontrivial,
        "effective": res.effective,
    }


def result_to_json(res: DivisionResult) -> str:
    return json.dumps(result_to_dict(res))
