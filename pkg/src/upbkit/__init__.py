"""Unextendible product bases, their bound entangled complements and local discrimination."""

__version__ = "0.1.0"

from .bound_entanglement import (
    BipartiteCut,
    DensityMatrix,
    EofEstimate,
    all_cuts,
    all_cuts_ppt,
    complementary_state,
    eof_upper_bound,
    ppt_min_eigenvalue,
    range_has_product_state,
    verify_product_decomposition,
)
from .constructions import (
    Povm,
    ProductBasis,
    ProductState,
    make_bob_povm,
    make_completion_3x5,
    make_pyramid,
    make_pyramid_3x4,
    make_shifts,
    make_tiles,
    make_x_basis,
    shifts_cut_decomposition,
)
from .extendibility import (
    ExtendibilityVerdict,
    OracleResult,
    check_extendible,
    find_extension,
    greedy_maximal_extension,
    min_upb_size,
    product_overlap_min,
)
from .locc import (
    DiscriminationReport,
    Transcript,
    distinguish_2xn,
    run_pyramid34_protocol,
    simulate_measurement,
    verify_completion_orthobasis,
    verify_povm,
)

__all__ = [
    "__version__",
    "BipartiteCut",
    "DensityMatrix",
    "EofEstimate",
    "all_cuts",
    "all_cuts_ppt",
    "complementary_state",
    "eof_upper_bound",
    "ppt_min_eigenvalue",
    "range_has_product_state",
    "verify_product_decomposition",
    "Povm",
    "ProductBasis",
    "ProductState",
    "make_bob_povm",
    "make_completion_3x5",
    "make_pyramid",
    "make_pyramid_3x4",
    "make_shifts",
    "make_tiles",
    "make_x_basis",
    "shifts_cut_decomposition",
    "ExtendibilityVerdict",
    "OracleResult",
    "check_extendible",
    "find_extension",
    "greedy_maximal_extension",
    "min_upb_size",
    "product_overlap_min",
    "DiscriminationReport",
    "Transcript",
    "distinguish_2xn",
    "run_pyramid34_protocol",
    "simulate_measurement",
    "verify_completion_orthobasis",
    "verify_povm",
]
