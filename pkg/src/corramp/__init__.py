"""Deterministic correlation amplifiers, expander rotation maps and outlier detection."""

from .amplifier import (
    AmplifierParams,
    AmplifierSchedule,
    amplified_inner,
    amplify,
    amplify_coord,
    amplify_many,
    complete_schedule,
    derive_schedule,
    phi_interval,
)
from .bounds import DimQuery, existence_dim, explicit_dim, hoeffding_tail, lower_dim
from .detector import (
    DetectorConstants,
    brute_force_pairs,
    derive_params,
    detect_outliers,
    gemm,
)
from .errors import CapacityError, ConvergenceError, FormatError, ParameterError
from .gf2k import FieldSpec, find_irreducible, gf_mul
from .kernels import BACKEND
from .problems import gen_lightbulb, gen_parity, solve_lightbulb, solve_parity
from .rotgraph import (
    base_graph,
    lambda_sequence,
    rvw_family,
    second_eigenvalue,
    square,
    tensor,
    zigzag,
)
from .vecio import read_vectors, write_vectors

__version__ = "0.1.0"

__all__ = [
    "AmplifierParams", "AmplifierSchedule", "amplified_inner", "amplify", "amplify_coord",
    "amplify_many", "complete_schedule", "derive_schedule", "phi_interval",
    "DimQuery", "existence_dim", "explicit_dim", "hoeffding_tail", "lower_dim",
    "DetectorConstants", "brute_force_pairs", "derive_params", "detect_outliers", "gemm",
    "CapacityError", "ConvergenceError", "FormatError", "ParameterError",
    "FieldSpec", "find_irreducible", "gf_mul", "BACKEND",
    "gen_lightbulb", "gen_parity", "solve_lightbulb", "solve_parity",
    "base_graph", "lambda_sequence", "rvw_family", "second_eigenvalue", "square", "tensor", "zigzag",
    "read_vectors", "write_vectors",
]
