"""Hofstadter-butterfly simulation on frequency-modulated zigzag qubit chains.

Subpackages by role:
  numerics      eigensolver / Bessel / FFT primitives
  model         zigzag and Harper lattices, exact spectra
  modulation    drive schedules and effective couplings
  dynamics      unitary / Lindblad / trajectory propagation
  spectroscopy  time traces -> spectra -> peaks
  sweep         flux sweeps, datasets, CSV + manifest output
  cli           `hofsim` command line front end
"""

__version__ = "0.1.0"

from .backend import BACKEND

__all__ = ["BACKEND", "__version__"]
