"""Finite-dimensional Z2-graded *-algebras, Fermi products and the Klein transformation."""

from .errors import (
    ClosureError,
    FermiKleinError,
    GradingError,
    GradingNotInner,
    InvalidPermutation,
    MembershipError,
    NotEven,
    NotUnitalError,
    RankDeficient,
    ShapeError,
    InputError,
    StateInvalid,
)
from .fermi_tensor import (
    LinearMap,
    ProductAlgebra,
    build_product,
    build_product_n,
    expectation_even_product,
    is_symmetric,
    permutation_action,
    product_state_n,
)
from .graded_core import (
    GradedAlgebra,
    Grading,
    center,
    commutant,
    conditional_expectation_even,
    even_part,
    generated_algebra,
    odd_part,
    validate,
)
from .graded_hilbert import GradedHilbert, combined_grade, fermi_op_product, fermi_vn_product
from .klein import KleinMap, build_klein, klein_iterated, klein_sigma, klein_transpose, verify_klein
from .report import Check, Report
from .states import (
    GnsData,
    StateFunctional,
    check_product_gns_equivalence,
    gns,
    has_central_support,
    is_even,
    product_state_fermi,
)
from .structure import BlockDecomposition, decompose, run_counterexample

__version__ = "0.1.0"

__all__ = [
    "BlockDecomposition",
    "Check",
    "ClosureError",
    "FermiKleinError",
    "GnsData",
    "GradedAlgebra",
    "GradedHilbert",
    "Grading",
    "GradingError",
    "GradingNotInner",
    "InputError",
    "InvalidPermutation",
    "KleinMap",
    "LinearMap",
    "MembershipError",
    "NotEven",
    "NotUnitalError",
    "ProductAlgebra",
    "RankDeficient",
    "Report",
    "ShapeError",
    "StateFunctional",
    "StateInvalid",
    "build_klein",
    "build_product",
    "build_product_n",
    "center",
    "check_product_gns_equivalence",
    "combined_grade",
    "commutant",
    "conditional_expectation_even",
    "decompose",
    "even_part",
    "expectation_even_product",
    "fermi_op_product",
    "fermi_vn_product",
    "generated_algebra",
    "gns",
    "has_central_support",
    "is_even",
    "is_symmetric",
    "klein_iterated",
    "klein_sigma",
    "klein_transpose",
    "odd_part",
    "permutation_action",
    "product_state_fermi",
    "product_state_n",
    "run_counterexample",
    "validate",
    "verify_klein",
]
