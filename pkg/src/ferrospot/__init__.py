"""Localized ferrofluid surface patterns near a Hamiltonian-Hopf point."""

from __future__ import annotations

__version__ = "0.1.0"

from .coeffs import NormalFormCoeffs, classify_region, compute_coeffs
from .envelope import default_canonical, rescale
from .profiles import PatternKind, PatternRequest, build_profile
from .spectrum import FerrofluidParams, real_spectrum, solve_hopf_wavenumber

__all__ = [
    "FerrofluidParams",
    "NormalFormCoeffs",
    "PatternKind",
    "PatternRequest",
    "build_profile",
    "classify_region",
    "compute_coeffs",
    "default_canonical",
    "real_spectrum",
    "rescale",
    "solve_hopf_wavenumber",
    "__version__",
]
