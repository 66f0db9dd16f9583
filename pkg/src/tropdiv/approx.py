"""Approximate tropical division with a fixed term budget.

The quotient is the largest max-affine function below f = p - d, so a
budgeted approximation alternates two phases over a sample set: assign
each sample to the incumbent term attaining the max there, then refit
each cluster's term by a linear program maximizing the summed fit over
the cluster.  Every term is constrained to lie below f on the
lower-hull samples (which implies below f on all samples) and to keep
its slope in the constraint set C of slopes whose translate of Newt(d)
fits inside Newt(p).  A refit can only raise the summed quotient
values, so the total sample error is nonnegative and non-increasing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DivisionProblem,
    DivisionResult,
    coefficient_arrays,
    evaluate_many,
    neg_inf_polynomial,
    newton_points,
    polynomial,
)
from .linprog import INFEASIBLE, LinearProgram, solve_lp
from .polyhedral import VRep, hull_of_union, lower_hull_indices


class EmptyConstraintSet(Exception):
    """No slope can carry Newt(d) into Newt(p); the division is trivial."""


@dataclass(frozen=True)
class ApproxConfig:
    """Inputs of the alternating scheme.

    terms is the quotient term budget, samples the number of points
    drawn from the sampling distribution ("normal" for standard normal,
    "uniform" for the box [-3, 3]^n).  Each restart reruns the
    alternation from a fresh random initial partition; the best final
    error wins.
    """

    terms: int
    samples: int = 200
    max_iterations: int = 20
    restarts: int = 1
    seed: int = 0
    distribution: str = "normal"

    def __post_init__(self) -> None:
        if self.terms < 1:
            raise ValueError("need at least one quotient term")
        if self.samples < self.terms:
            raise ValueError("need at least as many samples as terms")
        if self.distribution not in ("normal", "uniform"):
            raise ValueError(f"unknown distribution {self.distribution!r}")


@dataclass
class SampleSet:
    """Sample points with f values, lower-hull indices, and clusters."""

    points: np.ndarray
    values: np.ndarray
    lower_hull: tuple[int, ...]
    assignment: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.values)

    def cluster_stats(self, num_clusters: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-cluster coordinate sums s_i and counts N_i."""
        if self.assignment is None:
            raise ValueError("samples have no cluster assignment yet")
        width = max(num_clusters, int(self.assignment.max()) + 1)
        counts = np.bincount(self.assignment, minlength=width)
        sums = np.zeros((width, self.points.shape[1]))
        np.add.at(sums, self.assignment, self.points)
        return sums, counts


@dataclass(frozen=True)
class ConstraintSetC:
    """The slope polytope C = {a : a + Newt(d) inside Newt(p)}.

    Membership of a is witnessed by simplex weights expressing each
    a + divisor slope as a convex combination of the extreme points of
    Newt(p); the same weights appear as auxiliary LP variables in the
    per-cluster fits.
    """

    extreme_points: np.ndarray
    divisor_slopes: np.ndarray

    @property
    def dim(self) -> int:
        return self.extreme_points.shape[1]

    @property
    def num_aux(self) -> int:
        return self.divisor_slopes.shape[0] * self.extreme_points.shape[0]

    def equality_blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows (over variables [a, lam]) forcing a + a~_j into the hull.

        Returns (A, b) with A of shape (m_d*(dim+1), dim + num_aux):
        per divisor slope, dim rows a + a~_j = sum_l e_l lam_{j,l} and
        one row sum_l lam_{j,l} = 1.
        """
        k, n = self.extreme_points.shape
        m_d = self.divisor_slopes.shape[0]
        rows = np.zeros((m_d * (n + 1), n + m_d * k))
        rhs = np.zeros(m_d * (n + 1))
        for j in range(m_d):
            lo = j * (n + 1)
            rows[lo:lo + n, :n] = np.eye(n)
            rows[lo:lo + n, n + j * k:n + (j + 1) * k] = -self.extreme_points.T
            rhs[lo:lo + n] = -self.divisor_slopes[j]
            rows[lo + n, n + j * k:n + (j + 1) * k] = 1.0
            rhs[lo + n] = 1.0
        return rows, rhs

    def contains(self, a) -> bool:
        """Feasibility of a fixed slope (weights-only LP)."""
        a = np.asarray(a, dtype=float)
        rows, rhs = self.equality_blocks()
        shifted = rhs - rows[:, :self.dim] @ a
        out = solve_lp(LinearProgram(
            c=np.zeros(self.num_aux),
            A=rows[:, self.dim:],
            b=shifted,
            bounds=[(0.0, None)] * self.num_aux,
        ))
        return out.status != INFEASIBLE


def build_constraints_C(p, d) -> ConstraintSetC:
    """Constraint set for dividing p by d, from Newt(p)'s extreme points."""
    if p.dim != d.dim:
        raise ValueError("p and d must share the ambient dimension")
    hull = hull_of_union([VRep.make(newton_points(p), [], p.dim)])
    extreme = np.array([[float(c) for c in v] for v in hull.vertices])
    slopes = np.array([[float(c) for c in t.a] for t in d.terms])
    return ConstraintSetC(extreme, slopes)


def make_samples(problem: DivisionProblem, config: ApproxConfig,
                 points=None, rng=None) -> SampleSet:
    """Draw sample points (or adopt given ones) and tag the lower hull."""
    if points is None:
        if rng is None:
            rng = np.random.default_rng(config.seed)
        if config.distribution == "normal":
            points = rng.standard_normal((config.samples, problem.dim))
        else:
            points = rng.uniform(-3.0, 3.0, (config.samples, problem.dim))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = problem.f_many(points)
    hull = tuple(lower_hull_indices(list(zip(points, values))))
    return SampleSet(points, values, hull)


def assign_clusters(samples: SampleSet, slopes, biases) -> np.ndarray:
    """Cluster index per sample: argmax term, ties to the lowest index."""
    slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
    biases = np.asarray(biases, dtype=float)
    return (samples.points @ slopes.T + biases).argmax(axis=1)


def fit_cluster(samples: SampleSet, cluster: int,
                constraints: ConstraintSetC) -> tuple[np.ndarray, float]:
    """LP-optimal minorant term for one cluster.

    Maximizes s_i^T a + N_i b subject to a^T x_j + b <= f(x_j) on the
    lower-hull samples and a in C.
    """
    n = constraints.dim
    sums, counts = samples.cluster_stats(cluster + 1)
    if len(counts) <= cluster or counts[cluster] == 0:
        raise ValueError("cannot fit an empty cluster")
    eq_rows, eq_rhs = constraints.equality_blocks()
    num_aux = constraints.num_aux
    nv = n + 1 + num_aux
    hull = list(samples.lower_hull)
    G = np.zeros((len(hull), nv))
    G[:, :n] = samples.points[hull]
    G[:, n] = 1.0
    A = np.zeros((eq_rows.shape[0], nv))
    A[:, :n] = eq_rows[:, :n]
    A[:, n + 1:] = eq_rows[:, n:]
    c = np.zeros(nv)
    c[:n] = sums[cluster]
    c[n] = counts[cluster]
    out = solve_lp(LinearProgram(
        c=c, G=G, h=samples.values[hull], A=A, b=eq_rhs,
        bounds=[(None, None)] * (n + 1) + [(0.0, None)] * num_aux,
    ))
    if out.status == INFEASIBLE:
        raise EmptyConstraintSet("no slope carries Newt(d) into Newt(p)")
    if not out.optimal:
        raise RuntimeError(f"cluster fit ended {out.status}")
    return out.x[:n].copy(), float(out.x[n])


@dataclass(frozen=True)
class ApproxRun:
    """One restart's fitted terms and per-iteration sample errors."""

    slopes: np.ndarray
    biases: np.ndarray
    trace: tuple[float, ...]

    @property
    def final_error(self) -> float:
        return self.trace[-1]


def _repair_empty(assignment: np.ndarray, num_clusters: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Fill empty clusters by randomly splitting the largest one."""
    assignment = assignment.copy()
    while True:
        counts = np.bincount(assignment, minlength=num_clusters)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return assignment
        members = np.flatnonzero(assignment == counts.argmax())
        moved = members[rng.permutation(members.size)[:members.size // 2]]
        assignment[moved] = empties[0]


def _single_run(samples: SampleSet, constraints: ConstraintSetC,
                config: ApproxConfig, rng: np.random.Generator) -> ApproxRun:
    samples.assignment = rng.integers(0, config.terms, size=len(samples))
    slopes = biases = None
    trace = []
    for _ in range(config.max_iterations):
        samples.assignment = _repair_empty(samples.assignment, config.terms,
                                           rng)
        fits = [fit_cluster(samples, i, constraints)
                for i in range(config.terms)]
        slopes = np.array([f[0] for f in fits])
        biases = np.array([f[1] for f in fits])
        fitted = (samples.points @ slopes.T + biases).max(axis=1)
        trace.append(float(np.sum(samples.values - fitted)))
        refreshed = assign_clusters(samples, slopes, biases)
        if np.array_equal(refreshed, samples.assignment):
            break
        samples.assignment = refreshed
    return ApproxRun(slopes, biases, tuple(trace))


def _sampled_runs(problem: DivisionProblem, config: ApproxConfig,
                  points=None) -> tuple[SampleSet, list[ApproxRun]]:
    rng = np.random.default_rng(config.seed)
    constraints = build_constraints_C(problem.p, problem.d)
    samples = make_samples(problem, config, points=points, rng=rng)
    return samples, [_single_run(samples, constraints, config, rng)
                     for _ in range(config.restarts)]


def approx_runs(problem: DivisionProblem, config: ApproxConfig,
                points=None) -> list[ApproxRun]:
    """All restarts (shared samples, fresh initial partitions)."""
    return _sampled_runs(problem, config, points=points)[1]


def approx_divide(problem: DivisionProblem, config: ApproxConfig,
                  points=None) -> DivisionResult:
    """Best-of-restarts approximate division.

    The remainder collects the dividend terms that still exceed
    d + q somewhere on the samples, so it is itself sample-approximate.
    """
    try:
        samples, runs = _sampled_runs(problem, config, points=points)
    except EmptyConstraintSet:
        return DivisionResult(neg_inf_polynomial(problem.dim), problem.p,
                              nontrivial=False, effective=False)
    best = min(runs, key=lambda run: run.final_error)
    quotient = polynomial(
        [(tuple(a), b) for a, b in zip(best.slopes, best.biases)],
        problem.dim, exact=False)
    cover = (evaluate_many(problem.d, samples.points)
             + evaluate_many(quotient, samples.points))
    A_p, b_p = coefficient_arrays(problem.p)
    term_values = samples.points @ A_p.T + b_p
    exceeding = [i for i in range(len(problem.p.terms))
                 if np.any(term_values[:, i] > cover)]
    if exceeding:
        remainder = polynomial([(problem.p.terms[i].a, problem.p.terms[i].b)
                                for i in exceeding],
                               problem.dim, problem.p.exact)
        r_vals = evaluate_many(remainder, samples.points)
        p_vals = evaluate_many(problem.p, samples.points)
        effective = bool(np.any(r_vals < p_vals))
    else:
        remainder = neg_inf_polynomial(problem.dim)
        effective = True
    return DivisionResult(quotient, remainder, nontrivial=True,
                          effective=effective, error_trace=best.trace)
