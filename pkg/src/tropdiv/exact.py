"""Exact max-plus polynomial division over the rationals.

The quotient of p by d is the convex lower envelope of f = p - d.  On
every region where one dividend term and one divisor term dominate
simultaneously f is affine, so the envelope's epigraph is the convex
hull of finitely many polyhedral pieces and its affine components can
be read off an exact H-representation of that hull.  The remainder is
the max of the dividend terms that still poke above d + q, detected at
one relative-interior probe per region: p - r is concave there, so a
zero at the probe forces a zero on the whole region.

Float-backend inputs are rejected rather than silently coerced; the
whole pipeline is exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    NEG_INF,
    DivisionProblem,
    DivisionResult,
    TropicalPolynomial,
    evaluate,
    neg_inf_polynomial,
    polynomial,
)
from .polyhedral import HRep, VRep, hrep_of, vrep_of

Row = tuple[tuple, object]


@dataclass(frozen=True)
class Cell:
    """Closure of the set where dividend term i and divisor term j both
    attain their maxima.

    f is affine on the cell; ``epigraph`` adds the row
    z >= (a_i - a~_j).x + (b_i - b~_j) on top of the lifted cell rows.
    ``interior_point`` is the vertex mean plus the ray sum, which lands
    in the relative interior.
    """

    indices: tuple[int, int]
    polyhedron: HRep
    epigraph: HRep
    interior_point: tuple


def _require_exact(problem: DivisionProblem) -> None:
    if not problem.p.exact:
        raise ValueError("exact division requires exact-backend polynomials")
    if problem.p.is_neg_inf or problem.d.is_neg_inf:
        raise ValueError("exact division requires nonempty term lists")


def _interior_point(gens: VRep) -> tuple:
    if gens.vertices:
        k = Fraction(len(gens.vertices))
        point = [sum(c) / k for c in zip(*gens.vertices)]
    else:
        point = [Fraction(0)] * gens.dim
    for ray in gens.rays:
        point = [c + rc for c, rc in zip(point, ray)]
    return tuple(point)


def _dominance_rows(terms, keep: int) -> Optional[list[Row]]:
    """Rows forcing term ``keep`` to attain the max; None if impossible.

    Terms sharing a slope with ``keep`` but a larger bias make the
    region empty, which surfaces as a contradictory all-zero row.
    """
    winner = terms[keep]
    rows: list[Row] = []
    for k, other in enumerate(terms):
        if k == keep:
            continue
        coeffs = tuple(x - y for x, y in zip(winner.a, other.a))
        rhs = other.b - winner.b
        if all(c == 0 for c in coeffs):
            if rhs > 0:
                return None
            continue
        rows.append((coeffs, rhs))
    return rows


def partition_cells(problem: DivisionProblem) -> list[Cell]:
    """Nonempty dominance regions, one per surviving (i, j) pair.

    The regions cover R^n (every point has maximizing terms) and may
    overlap on their boundaries or be lower-dimensional when a term
    only ties for the max.
    """
    _require_exact(problem)
    n = problem.dim
    divisor_rows = [_dominance_rows(problem.d.terms, j)
                    for j in range(problem.d.num_terms)]
    cells = []
    for i in range(problem.p.num_terms):
        p_rows = _dominance_rows(problem.p.terms, i)
        if p_rows is None:
            continue
        for j, d_rows in enumerate(divisor_rows):
            if d_rows is None:
                continue
            region = HRep.make(p_rows + d_rows, n)
            gens = vrep_of(region)
            if gens.is_empty:
                continue
            slope = tuple(x - y for x, y in
                          zip(problem.p.terms[i].a, problem.d.terms[j].a))
            offset = problem.p.terms[i].b - problem.d.terms[j].b
            epi_rows = [(row + (Fraction(0),), rhs)
                        for row, rhs in region.rows]
            epi_rows.append((tuple(-s for s in slope) + (Fraction(1),),
                             offset))
            cells.append(Cell((i, j), region, HRep.make(epi_rows, n + 1),
                              _interior_point(gens)))
    return cells


def _quotient_from_hull(hull: HRep, dim: int) -> TropicalPolynomial:
    terms = []
    for row, rhs in hull.rows:
        az = row[-1]
        if az > 0:
            terms.append((tuple(-c / az for c in row[:-1]), rhs / az))
    if not terms:
        return neg_inf_polynomial(dim, exact=True)
    return polynomial(terms, dim, exact=True)


def exact_divide(problem: DivisionProblem) -> DivisionResult:
    """Quotient q = max polynomial with q + d <= p and remainder
    r = min polynomial with p = (q + d) v r.

    When no hull row bounds the lift coordinate from below the envelope
    is identically -inf: q is the NEG_INF sentinel and r = p.
    """
    _require_exact(problem)
    n = problem.dim
    cells = partition_cells(problem)
    vertices: list = []
    rays: list = []
    for cell in cells:
        gens = vrep_of(cell.epigraph)
        vertices.extend(gens.vertices)
        rays.extend(gens.rays)
    hull = hrep_of(VRep.make(vertices, rays, n + 1))
    q = _quotient_from_hull(hull, n)
    if q.is_neg_inf:
        return DivisionResult(q, problem.p, nontrivial=False, effective=False)
    exceeding: set[int] = set()
    for cell in cells:
        i = cell.indices[0]
        if i in exceeding:
            continue
        x = cell.interior_point
        if evaluate(problem.p, x) > evaluate(problem.d, x) + evaluate(q, x):
            exceeding.add(i)
    if exceeding:
        r = polynomial([(problem.p.terms[i].a, problem.p.terms[i].b)
                        for i in sorted(exceeding)], n, exact=True)
    else:
        r = neg_inf_polynomial(n, exact=True)
    probes = [cell.interior_point for cell in cells]
    result = DivisionResult(q, r, nontrivial=True,
                            effective=_differs(r, problem.p, probes))
    return result


def _differs(r: TropicalPolynomial, p: TropicalPolynomial,
             probes: Sequence[tuple]) -> bool:
    if r.is_neg_inf:
        return True
    return any(evaluate(r, x) != evaluate(p, x) for x in probes)


def is_nontrivial(result: DivisionResult) -> bool:
    """True when the quotient exists (is not the NEG_INF sentinel)."""
    return not result.quotient.is_neg_inf


def is_effective(result: DivisionResult, problem: DivisionProblem,
                 probe_points: Optional[Sequence[Sequence]] = None) -> bool:
    """True when the remainder differs from the dividend somewhere.

    One probe per dominance region decides this globally: on a region,
    p is affine and r is convex with r <= p, so p - r is concave and
    nonnegative, and vanishing at a relative-interior point forces it
    to vanish on the whole region.
    """
    if result.remainder.is_neg_inf:
        return True
    if probe_points is None:
        probe_points = [c.interior_point for c in partition_cells(problem)]
    return _differs(result.remainder, problem.p, probe_points)
