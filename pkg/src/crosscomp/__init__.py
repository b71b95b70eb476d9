"""Exact combinatorics of r-cross t-intersecting families of weak compositions."""

from .bounds import (
    BoundReport,
    ScanRow,
    binomial,
    empirical_threshold,
    pairwise_combination_holds,
    paper_n0,
    scan_threshold,
    theorem_rhs,
)
from .compositions import (
    Composition,
    CompositionSpace,
    agree_set,
    count_compositions,
    remove_coords,
)
from .families import (
    Family,
    FamilySystem,
    is_cross_t_intersecting,
    make_star,
    project,
    slice_family,
)
from .independence import (
    GuaranteeParams,
    Verdict,
    dichotomy_check,
    greedy_independent,
    guarantee_applies,
    is_independent,
    max_independent,
)
from .search import (
    SearchProblem,
    SearchResult,
    brute_oracle,
    closure_r2,
    compat_set,
    max_product_general,
    max_product_r2,
    verify_extremal,
)

__version__ = "0.1.0"
