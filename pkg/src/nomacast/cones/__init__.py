"""Self-contained conic interior-point solver (zero, orthant, SOC, PSD)."""
from .program import (
    PSD,
    ConeProgram,
    ConeSolution,
    NonNeg,
    ProgramError,
    SecondOrder,
    Status,
    Zero,
    dump_program,
    load_program,
)
from .solver import DEFAULT_OPTIONS, SolverOptions, kkt_residuals, residuals_of, solve

__all__ = [
    "PSD", "ConeProgram", "ConeSolution", "NonNeg", "ProgramError", "SecondOrder",
    "Status", "Zero", "dump_program", "load_program", "DEFAULT_OPTIONS",
    "SolverOptions", "kkt_residuals", "residuals_of", "solve",
]
