"""Max-plus polynomial division toolkit.

Core objects: tropical polynomials max_i(a_i . x + b_i) over float or
exact rational coefficients, division problems p = (q + d) v r solved
exactly by polyhedral biconjugation or approximately by an alternating
partition/LP scheme, composite polynomials sum_nu max(a_nu . x + b_nu,
0) with their own quotient machinery, and a compression pipeline that
turns one-hidden-layer ReLU networks into small maxout or ReLU models
through budgeted division.
"""
from .approx import ApproxConfig, ApproxRun, approx_divide, approx_runs
from .composite import (
    CompositePolynomial,
    FwConfig,
    FwRun,
    check_quotient_laws,
    composite,
    composite_from_json,
    composite_fw_run,
    composite_quotient_fw,
    composite_to_json,
    evaluate_composite,
    evaluate_composite_many,
    expand,
    minkowski_newton,
    quotient_feasible,
    unit_arrays,
    vector_divide_simplified,
)
from .compress import (
    CompressConfig,
    CompressedModel,
    Layer,
    NetworkSpec,
    QrReduction,
    TropicalPair,
    attach_head,
    binary_reduce,
    compress_binary_maxout,
    compress_binary_relu,
    compress_multibinary,
    compress_multiclass,
    count_params,
    evaluate_error,
    l1_structured_prune,
    load_network,
    maxout_quotient,
    model_features,
    model_from_json,
    model_scores,
    model_to_json,
    multiclass_common_denominator,
    qr_reduce,
    save_network,
    to_tropical_pair,
)
from .core import (
    NEG_INF,
    DivisionProblem,
    DivisionResult,
    TropicalPolynomial,
    TropicalTerm,
    constant,
    enf_value,
    evaluate,
    evaluate_many,
    is_neg_inf,
    lower_bound_l,
    neg_inf_polynomial,
    poly_from_json,
    poly_to_json,
    polynomial,
    same_function,
    scale_add,
    tropical_max,
    tropical_sum,
)
from .exact import exact_divide
from .polyhedral import HRep, VRep, hull_of_union, hrep_of, vrep_of

__version__ = "0.1.0"
