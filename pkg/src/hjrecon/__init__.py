"""Reconstruction of initial data for Hamilton-Jacobi equations.

The package pairs a forward and a backward viscosity solve and asks whether
the backward solve from the terminal data returns the initial data. A
discrete analogue on finite state spaces is in :mod:`hjrecon.mayer`.
"""
from .grid import Grid, GridFunction
from .hamiltonian import HamiltonianSpec, from_name
from .pipeline import ReconstructionReport, bilateral_probe_1d, make_reconstructible, reconstruct, sandwich_check
from .solver import SolveParams, SpaceTimeSolution, comparison_check, solve_backward, solve_forward

__all__ = [
    "Grid", "GridFunction", "HamiltonianSpec", "from_name",
    "ReconstructionReport", "bilateral_probe_1d", "make_reconstructible", "reconstruct", "sandwich_check",
    "SolveParams", "SpaceTimeSolution", "comparison_check", "solve_backward", "solve_forward",
]
__version__ = "0.1.0"
