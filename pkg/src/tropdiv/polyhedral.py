"""Exact polyhedral computations over the rationals.

Converts between the two standard descriptions of a convex polyhedron,

    P = {x : A x >= b}              (H-representation, one row per inequality)
    P = conv(V) + cone(R)           (V-representation, vertices and rays)

using the double description method on the homogenization cone
{(x, t) : A x - b t >= 0, t >= 0}.  All cone arithmetic runs on
`fractions.Fraction`, so conversions are exact and representations can be
compared verbatim after canonical scaling.

Conventions
-----------
* Inequalities are always oriented `a . x >= b`.
* A line (two-sided direction) is stored as a pair of opposite rays.
* The empty polyhedron is the V-representation with no generators; it has
  no H-representation and `hrep_of` rejects it.
* Canonical form: H-rows and rays are scaled so the first nonzero entry
  has absolute value one, then sorted; vertices are sorted unscaled.

Intended problem sizes are small (dimension <= 4, tens of generators), so
clarity is preferred over asymptotics throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .linprog import INFEASIBLE, LinearProgram, solve_lp

Vector = tuple[Fraction, ...]

# Slack below which a point counts as lying on the lower hull of a sample
# cloud.  Only lower_hull_indices is float-based; everything else is exact.
LOWER_HULL_TOL = 1e-9


def as_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, string, or float.

    Floats are read through their shortest repr, so 0.1 becomes 1/10
    rather than the binary expansion of the stored double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    return Fraction(value)


def _vec(values) -> Vector:
    return tuple(as_fraction(v) for v in values)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum(a * b for a, b in zip(u, v))


def _scale_first_nonzero(v: Sequence[Fraction], signed: bool) -> Vector:
    """Divide by the first nonzero entry (its absolute value if signed)."""
    for x in v:
        if x != 0:
            return tuple(y / (abs(x) if signed else x) for y in v)
    return tuple(v)


# ---------------------------------------------------------------------------
# Exact linear algebra on lists of Fractions.
# ---------------------------------------------------------------------------

def _row_reduce(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    mat = [list(r) for r in rows]
    ncols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def _kernel_basis(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Basis of {y : rows . y = 0}, in the canonical RREF parametrization."""
    red, pivots = _row_reduce(rows)
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def _independent_rows(rows: Sequence[Sequence[Fraction]]) -> list[int]:
    """Indices of a maximal independent subset, greedily in given order."""
    echelon: list[list[Fraction]] = []  # kept in reduced form, pivot = 1
    chosen: list[int] = []
    for i, row in enumerate(rows):
        v = list(row)
        for b in echelon:
            pc = next(c for c, x in enumerate(b) if x != 0)
            if v[pc] != 0:
                f = v[pc]
                v = [a - f * x for a, x in zip(v, b)]
        if any(x != 0 for x in v):
            pc = next(c for c, x in enumerate(v) if x != 0)
            v = [x / v[pc] for x in v]
            echelon.append(v)
            chosen.append(i)
    return chosen


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(_independent_rows(rows))


def _invert(rows: Sequence[Sequence[Fraction]]):
    """Exact inverse of a square matrix, or None when singular."""
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)]
           for i, r in enumerate(rows)]
    for c in range(n):
        pr = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if pr is None:
            return None
        aug[c], aug[pr] = aug[pr], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [r[n:] for r in aug]


# ---------------------------------------------------------------------------
# Double description on a pointed cone.
# ---------------------------------------------------------------------------

def _dd_pointed(mat: list[list[Fraction]], k: int) -> list[Vector]:
    """Extreme rays of the pointed cone {u in Q^k : mat . u >= 0}.

    mat must have full column rank k.  Starts from an invertible row
    subset (a simplicial cone) and inserts the remaining rows one at a
    time; adjacency of rays is decided by the algebraic rank test on the
    shared tight rows.
    """
    init = _independent_rows(mat)
    inv = _invert([mat[i] for i in init])
    assert inv is not None
    rays: list[Vector] = []
    tight: list[set[int]] = []
    for j in range(k):
        column = _scale_first_nonzero([inv[r][j] for r in range(k)], signed=True)
        rays.append(column)
        tight.append({init[jj] for jj in range(k) if jj != j})

    processed = set(init)
    for i in range(len(mat)):
        if i in processed:
            continue
        row = mat[i]
        s = [_dot(row, r) for r in rays]
        keep_idx = [t for t, v in enumerate(s) if v >= 0]
        neg_idx = [t for t, v in enumerate(s) if v < 0]
        if not neg_idx:
            for t in keep_idx:
                if s[t] == 0:
                    tight[t].add(i)
            processed.add(i)
            continue
        new_rays = [rays[t] for t in keep_idx]
        new_tight = [tight[t] | ({i} if s[t] == 0 else set())
                     for t in keep_idx]
        for tp in keep_idx:
            if s[tp] == 0:
                continue
            for tn in neg_idx:
                shared = tight[tp] & tight[tn]
                if len(shared) < k - 2:
                    continue
                if _rank([mat[h] for h in shared]) != k - 2:
                    continue
                combo = [s[tp] * a - s[tn] * b
                         for a, b in zip(rays[tn], rays[tp])]
                new_rays.append(_scale_first_nonzero(combo, signed=True))
                new_tight.append(shared | {i})
        rays = new_rays
        tight = new_tight
        processed.add(i)
    return rays


def _cone_generators(mat: list[list[Fraction]], dim: int):
    """Lineality basis and extreme rays of {y in Q^dim : mat . y >= 0}.

    The cone is split as (lineality space) + (pointed cone inside the row
    space of mat); the pointed part is enumerated by _dd_pointed in row
    space coordinates and lifted back.
    """
    rows = [list(r) for r in mat if any(x != 0 for x in r)]
    if not rows:
        unit = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
        return unit, []
    lines = _kernel_basis(rows, dim)
    span = [rows[i] for i in _independent_rows(rows)]  # basis of row space
    k = len(span)
    projected = [[_dot(r, w) for w in span] for r in rows]
    rays_u = _dd_pointed(projected, k)
    rays = []
    for u in rays_u:
        y = [_dot(u, [w[c] for w in span]) for c in range(dim)]
        rays.append(_scale_first_nonzero(y, signed=True))
    lines = [_scale_first_nonzero(l, signed=False) for l in lines]
    return lines, rays


# ---------------------------------------------------------------------------
# Representations.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HRep:
    """Finite system of inequalities A x >= b in canonical form."""

    A: tuple[Vector, ...]
    b: Vector
    dim: int

    def __post_init__(self):
        if len(self.A) != len(self.b):
            raise ValueError("row count mismatch between A and b")
        for row in self.A:
            if len(row) != self.dim:
                raise ValueError("inconsistent column count")
        for row, rhs in zip(self.A, self.b):
            if all(x == 0 for x in row) and rhs > 0:
                raise ValueError("contradictory all-zero row")

    @classmethod
    def make(cls, rows: Iterable[tuple[Sequence, object]], dim: int) -> "HRep":
        """Canonical H-rep from (coefficients, rhs) pairs.

        Scales each row so its first nonzero coefficient is +-1, drops
        trivially satisfied all-zero rows, sorts, and deduplicates.
        """
        canon = set()
        for a, rhs in rows:
            row = _vec(a) + (as_fraction(rhs),)
            if len(row) != dim + 1:
                raise ValueError("inconsistent column count")
            if all(x == 0 for x in row[:dim]):
                if row[dim] > 0:
                    raise ValueError("contradictory all-zero row")
                continue
            canon.add(_scale_first_nonzero(row, signed=True))
        ordered = sorted(canon)
        return cls(A=tuple(r[:dim] for r in ordered),
                   b=tuple(r[dim] for r in ordered),
                   dim=dim)

    @property
    def rows(self) -> tuple[tuple[Vector, Fraction], ...]:
        return tuple(zip(self.A, self.b))

    def contains(self, point: Sequence) -> bool:
        x = _vec(point)
        return all(_dot(a, x) >= b for a, b in self.rows)

    def admits_ray(self, direction: Sequence) -> bool:
        r = _vec(direction)
        return all(_dot(a, r) >= 0 for a in self.A)

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.dim,
            "rows": [{"a": [str(x) for x in a], "b": str(b)}
                     for a, b in self.rows],
        })

    @classmethod
    def from_json(cls, text: str) -> "HRep":
        data = json.loads(text)
        return cls.make(((r["a"], r["b"]) for r in data["rows"]), data["dim"])


@dataclass(frozen=True)
class VRep:
    """Generator description conv(vertices) + cone(rays), canonical form."""

    vertices: tuple[Vector, ...]
    rays: tuple[Vector, ...]
    dim: int

    def __post_init__(self):
        for v in self.vertices + self.rays:
            if len(v) != self.dim:
                raise ValueError("inconsistent coordinate count")
        for r in self.rays:
            if all(x == 0 for x in r):
                raise ValueError("zero ray")
        if self.rays and not self.vertices:
            raise ValueError("rays require a base vertex")

    @classmethod
    def make(cls, vertices: Iterable[Sequence], rays: Iterable[Sequence],
             dim: int) -> "VRep":
        vs = sorted({_vec(v) for v in vertices})
        rs = sorted({_scale_first_nonzero(_vec(r), signed=True) for r in rays})
        return cls(vertices=tuple(vs), rays=tuple(rs), dim=dim)

    @classmethod
    def empty(cls, dim: int) -> "VRep":
        return cls(vertices=(), rays=(), dim=dim)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.dim,
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "rays": [[str(x) for x in r] for r in self.rays],
        })

    @classmethod
    def from_json(cls, text: str) -> "VRep":
        data = json.loads(text)
        return cls.make(data["vertices"], data["rays"], data["dim"])


@dataclass(frozen=True)
class Polyhedron:
    """A polyhedron carrying one or both representations.

    When both are supplied the constructor verifies that they describe
    the same set by mutual containment of generators and rows.
    """

    dim: int
    h: HRep | None = None
    v: VRep | None = None

    def __post_init__(self):
        if self.h is None and self.v is None:
            raise ValueError("need at least one representation")
        for rep in (self.h, self.v):
            if rep is not None and rep.dim != self.dim:
                raise ValueError("dimension mismatch")
        if self.h is not None and self.v is not None:
            if not equal_sets(self.h, self.v):
                raise ValueError("representations describe different sets")

    def hrep(self) -> HRep:
        return self.h if self.h is not None else hrep_of(self.v)

    def vrep(self) -> VRep:
        return self.v if self.v is not None else vrep_of(self.h)


# ---------------------------------------------------------------------------
# Conversions.
# ---------------------------------------------------------------------------

def vrep_of(h: HRep) -> VRep:
    """Generators of {x : A x >= b}; empty VRep when infeasible.

    Works on the homogenization cone {(x, t) : A x - b t >= 0, t >= 0}.
    Lineality directions come out as opposite ray pairs.
    """
    hom = [list(a) + [-b] for a, b in h.rows]
    hom.append([Fraction(0)] * h.dim + [Fraction(1)])
    lines, rays = _cone_generators(hom, h.dim + 1)
    vertices = []
    directions = []
    for r in rays:
        t = r[-1]
        if t > 0:
            vertices.append(tuple(x / t for x in r[:-1]))
        else:
            directions.append(r[:-1])
    for l in lines:
        # Kernel vectors satisfy the t >= 0 row with equality.
        assert l[-1] == 0
        directions.append(l[:-1])
        directions.append(tuple(-x for x in l[:-1]))
    if not vertices:
        return VRep.empty(h.dim)
    return VRep.make(vertices, directions, h.dim)


def hrep_of(v: VRep) -> HRep:
    """Inequality description of conv(vertices) + cone(rays).

    Enumerates the polar of the homogenization cone: its extreme rays are
    the facet normals, its lineality directions give equality pairs.
    """
    if v.is_empty:
        raise ValueError("empty polyhedron has no H-representation")
    gens = [list(x) + [Fraction(1)] for x in v.vertices]
    gens += [list(r) + [Fraction(0)] for r in v.rays]
    lines, rays = _cone_generators(gens, v.dim + 1)
    rows = []
    for w in rays:
        rows.append((w[:-1], -w[-1]))
    for w in lines:
        rows.append((w[:-1], -w[-1]))
        rows.append((tuple(-x for x in w[:-1]), w[-1]))
    kept = []
    for a, b in rows:
        if all(x == 0 for x in a):
            # Polarity guarantees such rows are trivially satisfied.
            assert b <= 0
            continue
        kept.append((a, b))
    return HRep.make(kept, v.dim)


def hull_of_union(parts: Sequence[VRep]) -> VRep:
    """Irredundant generators of the closed convex hull of a union."""
    if not parts:
        raise ValueError("need at least one part")
    dim = parts[0].dim
    if any(p.dim != dim for p in parts):
        raise ValueError("dimension mismatch between parts")
    vertices = [v for p in parts for v in p.vertices]
    rays = [r for p in parts for r in p.rays]
    if not vertices:
        return VRep.empty(dim)
    pooled = VRep.make(vertices, rays, dim)
    return vrep_of(hrep_of(pooled))


def contains_vrep(h: HRep, v: VRep) -> bool:
    """True when every generator of v satisfies every row of h."""
    return (all(h.contains(p) for p in v.vertices)
            and all(h.admits_ray(r) for r in v.rays))


def equal_sets(a: HRep | VRep, b: HRep | VRep) -> bool:
    """Exact set equality, via mutual containment of generators in rows."""
    ha = a if isinstance(a, HRep) else hrep_of(a) if not a.is_empty else None
    hb = b if isinstance(b, HRep) else hrep_of(b) if not b.is_empty else None
    va = a if isinstance(a, VRep) else vrep_of(a)
    vb = b if isinstance(b, VRep) else vrep_of(b)
    if va.is_empty or vb.is_empty:
        return va.is_empty and vb.is_empty
    return contains_vrep(hb, va) and contains_vrep(ha, vb)


# ---------------------------------------------------------------------------
# Lower convex hull of a finite sample cloud.
# ---------------------------------------------------------------------------

def lower_hull_indices(points: Sequence[tuple[Sequence[float], float]]) -> list[int]:
    """Indices of samples on the lower convex hull of {(x_j, f_j)}.

    A point is dropped only if some convex combination of the *other*
    points matches x_j with a combined f-value strictly below f_j (by
    more than LOWER_HULL_TOL); ties stay in, so the result always covers
    the hull of the x_j and constraints at these indices imply the rest.
    """
    if not points:
        raise ValueError("need at least one point")
    xs = np.asarray([np.atleast_1d(np.asarray(p[0], dtype=float))
                     for p in points], dtype=float)
    fs = np.asarray([float(p[1]) for p in points])
    n_pts, dim = xs.shape
    if n_pts == 1:
        return [0]
    kept = []
    for j in range(n_pts):
        others = [i for i in range(n_pts) if i != j]
        A_eq = np.vstack([xs[others].T, np.ones((1, len(others)))])
        b_eq = np.concatenate([xs[j], [1.0]])
        out = solve_lp(LinearProgram(
            c=-fs[others],
            A=A_eq,
            b=b_eq,
            bounds=[(0.0, None)] * len(others),
        ))
        if out.status == INFEASIBLE or -out.value >= fs[j] - LOWER_HULL_TOL:
            kept.append(j)
    return kept
