"""Decoherence of composite particles from gravitational time dilation.

Submodules: ``geometry`` (proper time), ``internal`` (clock spectra),
``coherence`` (visibility), ``dynamics`` (joint evolution) and
``scenario``/``cli`` (batch runs).
"""

from .geometry import NATURAL, SI, Constants
from .internal import InternalSpectrum

__version__ = "0.1.0"

__all__ = ["Constants", "SI", "NATURAL", "InternalSpectrum", "__version__"]
