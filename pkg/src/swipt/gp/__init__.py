"""Posynomial algebra and a log-space geometric-program solver."""

from .algebra import (Monomial, Posynomial, add, as_posynomial, condense, condense_arrays,
                      evaluate, multiply, power, weights_from_point)
from .solver import GpProblem, GpSolution, GpStatus, solve_gp

__all__ = [
    "Monomial", "Posynomial", "add", "as_posynomial", "condense", "condense_arrays", "evaluate",
    "multiply", "power", "weights_from_point", "GpProblem", "GpSolution", "GpStatus", "solve_gp",
]
