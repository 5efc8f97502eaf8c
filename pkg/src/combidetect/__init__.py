"""Detection of a mean shift planted on one member of a combinatorial class.

Observations are length-n Gaussian vectors.  The library builds the classes
(disjoint blocks, k-subsets, stars, perfect matchings, spanning trees,
cliques, grid squares), runs the averaging / maximum / likelihood-ratio
tests, Monte Carlos their risks reproducibly, and evaluates the closed-form
thresholds that bracket where detection becomes possible.
"""

from ._version import __version__
from .bounds import (
    BoundReport,
    averaging_threshold,
    clique_bounds,
    dudley_bound,
    evaluate_bound,
    greedy_cover,
    max_test_threshold,
    negass_threshold,
    packing_estimate,
    pairs_risk_lower_bound,
    random_subclass_bound,
    symmetric_threshold,
    type1_bound_threshold,
    universal_threshold,
    vc_cover_bound,
)
from .classes import (
    FAMILIES,
    Cliques,
    DisjointSets,
    ExplicitClass,
    GridSquares,
    KSets,
    PerfectMatchings,
    SetClass,
    SpanningTrees,
    Stars,
    estimate_overlap_mgf,
    estimate_tC,
    exact_overlap_mgf,
    make_class,
    sample_overlap_pair,
)
from .core import (
    DEFAULT_ENUMERATION_CAP,
    AsymmetricClassError,
    CapExceededError,
    DegenerateParameterError,
    DimensionMismatchError,
    IndexSet,
    MTooLargeForClassError,
    Observation,
    ProblemInstance,
    SeededRng,
    canonical_distance,
    gaussian_sample,
    overlap,
)
from .risk import (
    EmaxEstimate,
    MonotonicityReport,
    NonmonotonicityReport,
    RiskCurve,
    RiskEstimate,
    curve_to_csv,
    curve_to_json,
    emax_upper_cap,
    estimate_bayes_risk,
    estimate_bhattacharyya,
    estimate_emax0,
    estimate_risk,
    monotonicity_check,
    nonmonotonicity_demo,
    scan_critical_mu,
)
from .rules import (
    TESTS,
    Decision,
    averaging_test,
    log_likelihood_ratio,
    maximum_test,
    optimal_test,
)

__all__ = [
    "__version__",
    "AsymmetricClassError",
    "BoundReport",
    "CapExceededError",
    "Cliques",
    "DEFAULT_ENUMERATION_CAP",
    "Decision",
    "DegenerateParameterError",
    "DimensionMismatchError",
    "DisjointSets",
    "EmaxEstimate",
    "ExplicitClass",
    "FAMILIES",
    "GridSquares",
    "IndexSet",
    "KSets",
    "MTooLargeForClassError",
    "MonotonicityReport",
    "NonmonotonicityReport",
    "Observation",
    "PerfectMatchings",
    "ProblemInstance",
    "RiskCurve",
    "RiskEstimate",
    "SeededRng",
    "SetClass",
    "SpanningTrees",
    "Stars",
    "TESTS",
    "averaging_test",
    "averaging_threshold",
    "canonical_distance",
    "clique_bounds",
    "curve_to_csv",
    "curve_to_json",
    "dudley_bound",
    "emax_upper_cap",
    "estimate_bayes_risk",
    "estimate_bhattacharyya",
    "estimate_emax0",
    "estimate_overlap_mgf",
    "estimate_risk",
    "estimate_tC",
    "evaluate_bound",
    "exact_overlap_mgf",
    "gaussian_sample",
    "greedy_cover",
    "log_likelihood_ratio",
    "make_class",
    "max_test_threshold",
    "maximum_test",
    "monotonicity_check",
    "negass_threshold",
    "nonmonotonicity_demo",
    "optimal_test",
    "overlap",
    "packing_estimate",
    "pairs_risk_lower_bound",
    "random_subclass_bound",
    "sample_overlap_pair",
    "scan_critical_mu",
    "symmetric_threshold",
    "type1_bound_threshold",
    "universal_threshold",
    "vc_cover_bound",
]
