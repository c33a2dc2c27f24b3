"""Spectral-gap design and ground states for the cylindrically symmetric curl-curl problem."""

__version__ = "0.1.0"

from .spectrum_set import SpectrumSet, minkowski_sum
from .radial import RadialDesign, StepRadialPotential, design_radial, radial_eigenvalue
from .periodic import BandStructure, PiecewisePotential1D, band_edges, first_gap, spectrum_1d
from .assembly import GapCertificate, assemble, design_potential, gap_margin
from .discretization import CylGrid, DiscreteOperator, Field, assemble_L, eigs_lowest
from .groundstate import GroundStateResult, Problem, solve_defocusing, solve_focusing

__all__ = [
    "SpectrumSet", "minkowski_sum",
    "RadialDesign", "StepRadialPotential", "design_radial", "radial_eigenvalue",
    "BandStructure", "PiecewisePotential1D", "band_edges", "first_gap", "spectrum_1d",
    "GapCertificate", "assemble", "design_potential", "gap_margin",
    "CylGrid", "DiscreteOperator", "Field", "assemble_L", "eigs_lowest",
    "GroundStateResult", "Problem", "solve_defocusing", "solve_focusing",
]
