"""Compression of one-hidden-layer ReLU networks by polynomial division.

A trained network with a single ReLU hidden layer is, before its final
squashing, a difference of two composite max-plus polynomials plus a
constant: splitting the output weights by sign puts each hidden unit,
scaled by the weight magnitude, on one side.  Compressing the network
means dividing each side by the zero polynomial under a term budget and
keeping the quotients:

* the maxout variant fits a max-of-affine quotient per side by the
  alternating partition/LP scheme, with the slope constrained to the
  zonotope Newton polytope of the side (box weights on the units);
* the ReLU variant fits a composite quotient per side with the
  conditional-gradient loop, so the result is again a small ReLU net;
* the multiclass variant rewrites all class outputs over a shared
  softmax denominator, making every hidden coefficient nonnegative, and
  fits per-class quotients with the sign-threshold rule;
* the multibinary variant runs the maxout division for every class
  pair and keeps a random subset of the quotient polynomials as
  features for a small head network.

Quotient slopes live in the span of the unit slopes, so models store
the coefficients folded back to the input space and never keep the
orthonormal bases used during fitting.  Sigmoid/softmax stay out of the
stored models; evaluation thresholds scalar scores at zero and takes
the argmax of vector scores.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .approx import ApproxRun, SampleSet, _repair_empty, assign_clusters
from .composite import (
    CompositePolynomial,
    FwConfig,
    composite,
    composite_fw_run,
    evaluate_composite_many,
    unit_arrays,
    vector_divide_simplified,
)
from .linprog import LinearProgram, solve_lp
from .polyhedral import lower_hull_indices

ACTIVATIONS = ("relu", "linear")
KINDS = ("maxout-binary", "relu-binary", "multiclass-simplified",
         "multiclass-multibinary")


# ---------------------------------------------------------------------------
# Dense networks.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Layer:
    """One dense layer x -> activation(W x + b)."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.weights, dtype=float))
        b = np.asarray(self.biases, dtype=float).reshape(-1)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)
        if W.shape[0] != b.shape[0]:
            raise ValueError("bias length must match the output width")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass(frozen=True)
class NetworkSpec:
    """Dense feed-forward network; the last layer must stay linear
    (sigmoid/softmax belong to evaluation, not to the stored net)."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.weights.shape[1] != prev.weights.shape[0]:
                raise ValueError("layer dimensions do not compose")
        if self.layers[-1].activation != "linear":
            raise ValueError("the output layer must be linear")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def forward(self, points) -> np.ndarray:
        """Pre-squashing outputs, one row per sample."""
        out = np.atleast_2d(np.asarray(points, dtype=float))
        for layer in self.layers:
            out = out @ layer.weights.T + layer.biases
            if layer.activation == "relu":
                out = np.maximum(out, 0.0)
        return out


def network_to_dict(net: NetworkSpec) -> dict:
    return {"input_dim": net.input_dim,
            "layers": [{"W": layer.weights.tolist(),
                        "b": layer.biases.tolist(),
                        "activation": layer.activation}
                       for layer in net.layers]}


def network_from_dict(data: dict) -> NetworkSpec:
    net = NetworkSpec(tuple(Layer(l["W"], l["b"], l["activation"])
                            for l in data["layers"]))
    if net.input_dim != data["input_dim"]:
        raise ValueError("declared input dimension does not match weights")
    return net


def load_network(path) -> NetworkSpec:
    with open(path, encoding="utf-8") as handle:
        return network_from_dict(json.load(handle))


def save_network(net: NetworkSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(network_to_dict(net), handle)


def _hidden_and_output(net: NetworkSpec) -> tuple[Layer, Layer]:
    if len(net.layers) != 2 or net.layers[0].activation != "relu":
        raise ValueError("expected one ReLU hidden layer plus linear output")
    return net.layers[0], net.layers[1]


# ---------------------------------------------------------------------------
# Tropical representations.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TropicalPair:
    """Scalar network output positive(x) - negative(x) + beta2.

    An absent side is the zero function (all output weights of one
    sign).
    """

    positive: CompositePolynomial | None
    negative: CompositePolynomial | None
    beta2: float
    dim: int

    def values(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(pts), self.beta2)
        if self.positive is not None:
            out = out + evaluate_composite_many(self.positive, pts)
        if self.negative is not None:
            out = out - evaluate_composite_many(self.negative, pts)
        return out


def to_tropical_pair(net: NetworkSpec) -> TropicalPair:
    """Difference-of-composites form of a scalar one-hidden-layer net.

    A hidden unit with output weight w lands on the positive side as
    max(w w_nu . x + w beta_nu, 0) when w > 0 and on the negative side
    with |w| when w < 0; zero-weight units contribute nothing.
    """
    hidden, out = _hidden_and_output(net)
    if out.weights.shape[0] != 1:
        raise ValueError("the pair form needs a single output unit")
    w2 = out.weights[0]

    def side(mask):
        units = [(tuple(abs(w2[nu]) * hidden.weights[nu]),
                  abs(w2[nu]) * hidden.biases[nu])
                 for nu in np.flatnonzero(mask)]
        return composite(units, net.input_dim) if units else None

    return TropicalPair(side(w2 > 0), side(w2 < 0), float(out.biases[0]),
                        net.input_dim)


def binary_reduce(net: NetworkSpec, classes: tuple[int, int]) -> NetworkSpec:
    """Two-class restriction: one output unit scoring class i1 over i2.

    Replaces the K-output layer by the weight/bias difference of the
    chosen classes, so a nonnegative output means the first class
    (label 1 in `evaluate_error`); the softmax posterior ordering of
    the pair is preserved.
    """
    hidden, out = _hidden_and_output(net)
    i1, i2 = classes
    if i1 == i2:
        raise ValueError("need two distinct classes")
    if not (0 <= i1 < out.weights.shape[0] and 0 <= i2 < out.weights.shape[0]):
        raise ValueError("class index out of range")
    new_out = Layer(out.weights[i1] - out.weights[i2],
                    out.biases[i1:i1 + 1] - out.biases[i2:i2 + 1], "linear")
    return NetworkSpec((hidden, new_out))


def multiclass_common_denominator(net: NetworkSpec,
                                  ) -> tuple[list[CompositePolynomial],
                                             np.ndarray, np.ndarray]:
    """Per-class composites over a shared softmax denominator.

    Adding the sum of every class's negative part to each pre-softmax
    output leaves the softmax unchanged and makes all hidden-unit
    coefficients nonnegative: class k weighs unit i by the positive
    part of w2[k, i] plus the negative magnitudes of the other classes.
    Returns (composites over the hidden pre-activation vector, the
    weight matrix (K, M), the class constants).
    """
    hidden, out = _hidden_and_output(net)
    w2 = out.weights
    neg = np.maximum(-w2, 0.0)
    weights = np.maximum(w2, 0.0) + neg.sum(axis=0) - neg
    num_hidden = hidden.weights.shape[0]
    eye = np.eye(num_hidden)
    composites = [composite([(tuple(weights[k, i] * eye[i]), 0.0)
                             for i in range(num_hidden)], num_hidden)
                  for k in range(w2.shape[0])]
    return composites, weights, out.biases.copy()


@dataclass(frozen=True)
class QrReduction:
    """Orthonormal basis of the unit-slope span and the composite
    rewritten in those coordinates: p(x) = reduced(basis^T x)."""

    basis: np.ndarray
    reduced: CompositePolynomial


def qr_reduce(p: CompositePolynomial) -> QrReduction:
    """Express a composite in the coordinates of its slope span.

    Needs at most dim units; the reduced QR of the stacked slope
    columns gives the basis, and the triangular factor's columns are
    the reduced unit slopes.
    """
    if p.num_units > p.dim:
        raise ValueError("more units than dimensions; nothing to reduce")
    W, beta = unit_arrays(p)
    Q, R = np.linalg.qr(W.T)
    reduced = composite([(tuple(R[:, i]), beta[i])
                         for i in range(p.num_units)], p.num_units)
    return QrReduction(Q, reduced)


# ---------------------------------------------------------------------------
# Division of a composite by zero, maxout form.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompressConfig:
    """Inputs shared by the compression routines.

    points are sample rows in the input space of the network piece
    being compressed (callers usually take the first S training
    inputs).  terms is the quotient budget per polynomial; iterations
    and restarts drive the alternating maxout and threshold fits, step
    and fw_iterations the conditional-gradient fit of the ReLU variant.
    """

    points: np.ndarray
    terms: int
    iterations: int = 20
    restarts: int = 1
    seed: int = 0
    step: float = 0.2
    fw_iterations: int = 50

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("empty sample set")
        object.__setattr__(self, "points", pts)
        if self.terms < 1:
            raise ValueError("need at least one quotient term")
        if self.iterations < 1 or self.restarts < 1:
            raise ValueError("iterations and restarts must be positive")
        if not 0.0 < self.step < 1.0:
            raise ValueError("step must lie strictly inside (0, 1)")
        if self.fw_iterations < 1:
            raise ValueError("need at least one conditional-gradient step")


def _zonotope_fit_cluster(samples: SampleSet, cluster: int,
                          generators: np.ndarray) -> tuple[np.ndarray, float]:
    """LP-optimal minorant term for one cluster of a composite dividend.

    Same objective and sample rows as the simple-divisor cluster fit,
    but slope membership in the zonotope Newton polytope is witnessed
    by box weights on the unit generators (the divisor is the zero
    polynomial).  The slope is the weighted generator sum, so the
    weights stand in for it as LP variables: with w in [0, 1]^g the
    term is x -> (generators^T w)^T x + b, which keeps the LP at
    1 + g variables instead of carrying the slope explicitly through
    an equality block.
    """
    num_gen, n = generators.shape
    sums, counts = samples.cluster_stats(cluster + 1)
    if len(counts) <= cluster or counts[cluster] == 0:
        raise ValueError("cannot fit an empty cluster")
    hull = list(samples.lower_hull)
    nv = 1 + num_gen
    G = np.zeros((len(hull), nv))
    G[:, 0] = 1.0
    G[:, 1:] = samples.points[hull] @ generators.T
    c = np.zeros(nv)
    c[0] = counts[cluster]
    c[1:] = generators @ sums[cluster]
    out = solve_lp(LinearProgram(
        c=c, G=G, h=samples.values[hull],
        bounds=[(None, None)] + [(0.0, 1.0)] * num_gen,
    ))
    if not out.optimal:
        raise RuntimeError(f"cluster fit ended {out.status}")
    return generators.T @ out.x[1:], float(out.x[0])


def maxout_quotient(p: CompositePolynomial, config: CompressConfig,
                    rng: np.random.Generator | None = None) -> ApproxRun:
    """Budgeted max-of-affine quotient of a composite by zero.

    Alternates argmax cluster assignment with per-cluster LPs until the
    partition repeats, keeping the best restart by final error.  The
    fitted function never exceeds p at the samples (convexity carries
    the lower-hull constraint rows to every sample point).
    """
    pts = config.points
    if pts.shape[1] != p.dim:
        raise ValueError("sample dimension does not match the polynomial")
    generators, _ = unit_arrays(p)
    values = evaluate_composite_many(p, pts)
    hull = tuple(lower_hull_indices(list(zip(pts, values))))
    if rng is None:
        rng = np.random.default_rng(config.seed)
    best = None
    for _ in range(config.restarts):
        samples = SampleSet(pts, values, hull)
        samples.assignment = rng.integers(0, config.terms, size=len(samples))
        slopes = biases = None
        trace = []
        for _ in range(config.iterations):
            samples.assignment = _repair_empty(samples.assignment,
                                               config.terms, rng)
            fits = [_zonotope_fit_cluster(samples, i, generators)
                    for i in range(config.terms)]
            slopes = np.array([f[0] for f in fits])
            biases = np.array([f[1] for f in fits])
            fitted = (pts @ slopes.T + biases).max(axis=1)
            trace.append(float(np.sum(values - fitted)))
            refreshed = assign_clusters(samples, slopes, biases)
            if np.array_equal(refreshed, samples.assignment):
                break
            samples.assignment = refreshed
        run = ApproxRun(slopes, biases, tuple(trace))
        if best is None or run.final_error < best.final_error:
            best = run
    return best


# ---------------------------------------------------------------------------
# Compressed models.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompressedModel:
    """Compression output with coefficients folded to the input space.

    groups holds one (slopes (m, n), biases (m,)) pair per polynomial:
    positive and negative for the binary kinds, one per class for
    multiclass-simplified, one per kept polynomial for the multibinary
    kind.  class_biases are the per-class constants of the simplified
    kind; head is an optional small network consuming the feature rows
    of `model_features`.
    """

    kind: str
    groups: tuple[tuple[np.ndarray, np.ndarray], ...]
    beta2: float = 0.0
    class_biases: np.ndarray | None = None
    head: NetworkSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind.endswith("-binary") and len(self.groups) != 2:
            raise ValueError("binary models need exactly two polynomials")
        if not self.groups:
            raise ValueError("a model needs at least one polynomial")
        norm = tuple((np.atleast_2d(np.asarray(s, dtype=float)),
                      np.asarray(b, dtype=float).reshape(-1))
                     for s, b in self.groups)
        for s, b in norm:
            if s.shape[0] != b.shape[0]:
                raise ValueError("terms and biases disagree in length")
            if s.shape[1] != norm[0][0].shape[1]:
                raise ValueError("polynomials live in different dimensions")
        object.__setattr__(self, "groups", norm)
        if self.class_biases is not None:
            cb = np.asarray(self.class_biases, dtype=float).reshape(-1)
            if len(cb) != len(norm):
                raise ValueError("need one class constant per polynomial")
            object.__setattr__(self, "class_biases", cb)

    @property
    def input_dim(self) -> int:
        return self.groups[0][0].shape[1]

    @property
    def feature_dim(self) -> int:
        if self.kind == "multiclass-simplified":
            return sum(len(b) for _, b in self.groups)
        if self.kind == "multiclass-multibinary":
            return len(self.groups)
        raise ValueError("binary models expose no feature interface")


def model_features(model: CompressedModel, points) -> np.ndarray:
    """Feature rows consumed by a head network.

    The simplified multiclass kind exposes every affine term value
    (class count times term budget columns); the multibinary kind one
    max per kept polynomial.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if model.kind == "multiclass-simplified":
        return np.hstack([pts @ s.T + b for s, b in model.groups])
    if model.kind == "multiclass-multibinary":
        return np.column_stack([(pts @ s.T + b).max(axis=1)
                                for s, b in model.groups])
    raise ValueError("binary models expose no feature interface")


def attach_head(model: CompressedModel, head: NetworkSpec) -> CompressedModel:
    """Model with a trained head consuming its feature rows."""
    if head.input_dim != model.feature_dim:
        raise ValueError("head input width does not match the features")
    return replace(model, head=head)


def model_scores(model: CompressedModel, points) -> np.ndarray:
    """Pre-squashing scores: a scalar margin for binary kinds, one
    column per class otherwise."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if model.kind.endswith("-binary"):
        (s1, b1), (s2, b2) = model.groups
        z1, z2 = pts @ s1.T + b1, pts @ s2.T + b2
        if model.kind == "maxout-binary":
            return z1.max(axis=1) - z2.max(axis=1) + model.beta2
        return (np.maximum(z1, 0.0).sum(axis=1)
                - np.maximum(z2, 0.0).sum(axis=1) + model.beta2)
    if model.head is not None:
        return model.head.forward(model_features(model, pts))
    if model.kind == "multiclass-multibinary":
        raise ValueError("the multibinary kind needs a head to score classes")
    if model.class_biases is None:
        raise ValueError("headless simplified scoring needs class constants")
    scores = np.column_stack([(pts @ s.T + b).max(axis=1)
                              for s, b in model.groups])
    return scores + model.class_biases


def model_to_dict(model: CompressedModel) -> dict:
    data = {"kind": model.kind, "beta2": model.beta2,
            "groups": [{"slopes": s.tolist(), "biases": b.tolist()}
                       for s, b in model.groups]}
    if model.class_biases is not None:
        data["class_biases"] = model.class_biases.tolist()
    if model.head is not None:
        data["head"] = network_to_dict(model.head)
    return data


def model_from_dict(data: dict) -> CompressedModel:
    biases = data.get("class_biases")
    head = data.get("head")
    return CompressedModel(
        kind=data["kind"],
        groups=tuple((g["slopes"], g["biases"]) for g in data["groups"]),
        beta2=data.get("beta2", 0.0),
        class_biases=None if biases is None else np.asarray(biases, float),
        head=None if head is None else network_from_dict(head))


def model_to_json(model: CompressedModel) -> str:
    return json.dumps(model_to_dict(model))


def model_from_json(text: str) -> CompressedModel:
    return model_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Compression routines.
# ---------------------------------------------------------------------------

def _zero_group(dim: int) -> tuple[np.ndarray, np.ndarray]:
    # quotient of the zero function by zero: the zero polynomial itself
    return np.zeros((1, dim)), np.zeros(1)


def _fit_side_maxout(side: CompositePolynomial | None,
                     config: CompressConfig,
                     rng: np.random.Generator | None = None,
                     ) -> tuple[np.ndarray, np.ndarray]:
    if side is None:
        return _zero_group(config.points.shape[1])
    if side.num_units < side.dim:
        red = qr_reduce(side)
        sub = replace(config, points=config.points @ red.basis)
        run = maxout_quotient(red.reduced, sub, rng)
        return run.slopes @ red.basis.T, run.biases
    run = maxout_quotient(side, config, rng)
    return run.slopes, run.biases


def compress_binary_maxout(pair: TropicalPair,
                           config: CompressConfig) -> CompressedModel:
    """Two-maxout-unit model sigma(q1(x) - q2(x) + beta2).

    Each side of the pair is divided by zero in max-of-affine form
    after rewriting it in its slope-span coordinates; the fitted terms
    come back folded to the input space.  Both quotients stay below
    their sides at every sample point.
    """
    return CompressedModel(
        "maxout-binary",
        (_fit_side_maxout(pair.positive, config),
         _fit_side_maxout(pair.negative, config)),
        beta2=pair.beta2)


def _fit_side_relu(side: CompositePolynomial | None,
                   config: CompressConfig) -> tuple[np.ndarray, np.ndarray]:
    if side is None:
        return _zero_group(config.points.shape[1])
    if side.num_units > side.dim:
        raise ValueError("the composite quotient needs at most dim units")
    red = qr_reduce(side)
    run = composite_fw_run(red.reduced,
                           FwConfig(points=config.points @ red.basis,
                                    terms=config.terms, step=config.step,
                                    iterations=config.fw_iterations,
                                    seed=config.seed))
    return run.slopes @ red.basis.T, run.biases


def compress_binary_relu(pair: TropicalPair,
                         config: CompressConfig) -> CompressedModel:
    """Small ReLU model: composite quotients for both sides.

    The conditional-gradient fit keeps each quotient certificate
    feasible, so the compressed sides never exceed the originals
    anywhere, not only at the samples.
    """
    return CompressedModel(
        "relu-binary",
        (_fit_side_relu(pair.positive, config),
         _fit_side_relu(pair.negative, config)),
        beta2=pair.beta2)


def simplified_vector_quotient(weights: np.ndarray, hidden_points: np.ndarray,
                               terms: int, iterations: int,
                               rng: np.random.Generator,
                               ) -> tuple[np.ndarray, tuple[float, ...]]:
    """Threshold-rule quotient of one nonnegative-coefficient composite.

    hidden_points are pre-activation rows; each round clusters them by
    argmax term and sets every term to the box-LP optimum for its
    cluster sum.  Any slope between zero and the weights elementwise is
    globally below the composite, so no sample constraints are needed.
    """
    weights = np.asarray(weights, dtype=float)
    values = np.maximum(hidden_points, 0.0) @ weights
    samples = SampleSet(hidden_points, values, ())
    samples.assignment = rng.integers(0, terms, size=len(samples))
    slopes = None
    trace = []
    for _ in range(iterations):
        samples.assignment = _repair_empty(samples.assignment, terms, rng)
        sums, _ = samples.cluster_stats(terms)
        slopes = vector_divide_simplified(weights, sums[:terms])
        fitted = (hidden_points @ slopes.T).max(axis=1)
        trace.append(float(np.sum(values - fitted)))
        refreshed = (hidden_points @ slopes.T).argmax(axis=1)
        if np.array_equal(refreshed, samples.assignment):
            break
        samples.assignment = refreshed
    return slopes, tuple(trace)


def compress_multiclass(net: NetworkSpec, config: CompressConfig,
                        jobs: int = 1) -> CompressedModel:
    """Per-class quotient bundle over the shared softmax denominator.

    Each class's nonnegative-coefficient composite is divided by zero
    with the threshold rule; the fitted hidden-space slopes are folded
    through the first layer.  Class fits are independent (per-class
    seeds), so `jobs` only changes the wall clock, never the result.
    Headless models score by max term plus the class constant; attach a
    trained head to score from the feature rows instead.
    """
    hidden, _ = _hidden_and_output(net)
    _, weights, class_biases = multiclass_common_denominator(net)
    Z = config.points @ hidden.weights.T + hidden.biases

    def fit_class(k: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng((config.seed, 0, k))
        best = None
        for _ in range(config.restarts):
            slopes, trace = simplified_vector_quotient(
                weights[k], Z, config.terms, config.iterations, rng)
            if best is None or trace[-1] < best[1][-1]:
                best = (slopes, trace)
        folded = best[0] @ hidden.weights
        return folded, best[0] @ hidden.biases

    indices = range(weights.shape[0])
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = tuple(pool.map(fit_class, indices))
    else:
        groups = tuple(fit_class(k) for k in indices)
    return CompressedModel("multiclass-simplified", groups,
                           class_biases=class_biases)


def compress_multibinary(net: NetworkSpec,
                         pairs: Sequence[tuple[int, int]], subset: int,
                         config: CompressConfig, features: str = "quotient",
                         jobs: int = 1) -> CompressedModel:
    """Random subset of per-pair quotient polynomials as head features.

    Every class pair is reduced to a scalar net, split into its two
    composite sides, and each side divided by zero in maxout form; a
    seeded draw keeps `subset` of the quotients.  features="random"
    replaces them with random direction vectors (the control variant).
    The result needs a head before it can score classes.
    """
    if subset < 1:
        raise ValueError("need at least one feature polynomial")
    if features not in ("quotient", "random"):
        raise ValueError(f"unknown feature variant {features!r}")
    chooser = np.random.default_rng((config.seed, 2))
    if features == "random":
        n = config.points.shape[1]
        groups = tuple((chooser.normal(size=(1, n)) / np.sqrt(n),
                        np.zeros(1)) for _ in range(subset))
        return CompressedModel("multiclass-multibinary", groups)

    def fit_pair(item: tuple[int, tuple[int, int]]):
        index, ids = item
        rng = np.random.default_rng((config.seed, 1, index))
        tp = to_tropical_pair(binary_reduce(net, tuple(ids)))
        return (_fit_side_maxout(tp.positive, config, rng),
                _fit_side_maxout(tp.negative, config, rng))

    work = list(enumerate(pairs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            fitted = list(pool.map(fit_pair, work))
    else:
        fitted = [fit_pair(item) for item in work]
    polys = [group for both in fitted for group in both]
    if subset > len(polys):
        raise ValueError("subset larger than the quotient pool")
    keep = np.sort(chooser.choice(len(polys), size=subset, replace=False))
    return CompressedModel("multiclass-multibinary",
                           tuple(polys[i] for i in keep))


def l1_structured_prune(net: NetworkSpec, keep: int,
                        norm: str = "full") -> NetworkSpec:
    """Baseline: keep the hidden neurons with the largest L1 scores.

    No retraining.  The default score of a neuron is the L1 norm of its
    incoming row, its bias and its outgoing column; norm="incoming"
    scores the incoming row only.
    """
    hidden, out = _hidden_and_output(net)
    total = hidden.weights.shape[0]
    if not 1 <= keep <= total:
        raise ValueError("keep must name between 1 and all hidden neurons")
    if norm not in ("full", "incoming"):
        raise ValueError(f"unknown norm {norm!r}")
    scores = np.abs(hidden.weights).sum(axis=1)
    if norm == "full":
        scores = (scores + np.abs(hidden.biases)
                  + np.abs(out.weights).sum(axis=0))
    idx = np.sort(np.argsort(-scores, kind="stable")[:keep])
    return NetworkSpec((
        Layer(hidden.weights[idx], hidden.biases[idx], "relu"),
        Layer(out.weights[:, idx], out.biases, "linear")))


# ---------------------------------------------------------------------------
# Evaluation and parameter counts.
# ---------------------------------------------------------------------------

def evaluate_error(model, points, labels) -> float:
    """Misclassification rate in [0, 1].

    Scalar scores threshold at zero (label 1 is the nonnegative side);
    vector scores take the argmax against integer labels.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.asarray(labels).reshape(-1).astype(int)
    if isinstance(model, NetworkSpec):
        scores = model.forward(pts)
    elif isinstance(model, CompressedModel):
        scores = model_scores(model, pts)
    else:
        raise TypeError("expected a NetworkSpec or a CompressedModel")
    scores = np.asarray(scores)
    if scores.ndim == 1 or scores.shape[1] == 1:
        predictions = (scores.reshape(-1) >= 0.0).astype(int)
    else:
        predictions = scores.argmax(axis=1)
    if len(predictions) != len(labels):
        raise ValueError("label count does not match the sample count")
    return float(np.mean(predictions != labels))


def _head_params(inputs: int, units: int, classes: int) -> int:
    if units == 0:
        return 0
    return inputs * units + units + units * classes + classes


def _architecture_params(kind: str, n: int, *, hidden: int = 0,
                         terms: int = 0, classes: int = 0,
                         head_units: int = 0, polynomials: int = 0) -> int:
    """Printed-table formulas for the reference architectures.

    original-binary counts a biased hidden layer plus output weights
    and bias; original-dense counts hidden weights plus the output
    layer (the printed totals omit the hidden biases).
    """
    if kind == "original-binary":
        return n * hidden + 2 * hidden + 1
    if kind == "original-dense":
        return n * hidden + hidden + 1
    if kind in ("maxout-binary", "relu-binary"):
        return 2 * terms * (n + 1) + 1
    if kind == "multiclass-simplified":
        return (classes * terms * (n + 1)
                + _head_params(classes * terms, head_units, classes))
    if kind == "multiclass-multibinary":
        return (polynomials * terms * (n + 1)
                + _head_params(polynomials, head_units, classes))
    raise ValueError(f"unknown architecture {kind!r}")


def count_params(model, **dims) -> int:
    """Parameter count of a network, a compressed model, or a named
    architecture given its dimensions (see `_architecture_params`).

    Compressed models count their term matrices, the binary output
    constant and any head; the simplified kind's class constants stay
    outside the total, matching the printed architecture formulas.
    """
    if isinstance(model, NetworkSpec):
        return sum(l.weights.size + l.biases.size for l in model.layers)
    if isinstance(model, CompressedModel):
        total = sum(s.size + b.size for s, b in model.groups)
        if model.kind.endswith("-binary"):
            total += 1
        if model.head is not None:
            total += count_params(model.head)
        return int(total)
    return _architecture_params(model, **dims)
