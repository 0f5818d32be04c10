"""Spectral and transport numerics for discrete Schrodinger operators on
lattice domains: solution growth over expanding cubes, Borel-transform
scaling of spectral measures, and time-averaged transport moments, with a
zoo of concrete models (free lattice, spiral corridor, decaying random
potentials, linear-ramp envelope)."""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
