"""Steklov eigenfunction laboratory: spectra, frequency functions, nodal counts."""

from . import errors, frequency, geometry, lab, nodal, steklov  # noqa: F401

__all__ = ["errors", "geometry", "steklov", "frequency", "nodal", "lab"]
__version__ = "0.1.0"
