"""Finite-rank vessels for Sturm-Liouville, KdV and NLS, with a Gelfand-Levitan cross-check."""

from .measures import SpectralMeasure, kernel_F, kernel_f, sqrt_node
from .vessel import FiniteVessel, SLVessel, VesselParams

__all__ = ["SpectralMeasure", "kernel_f", "kernel_F", "sqrt_node", "FiniteVessel", "SLVessel", "VesselParams"]
