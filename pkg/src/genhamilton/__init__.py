"""Dissipative and heat-exchange mechanics, non-Hermitian wavepacket
propagation and temperature-corrected spectra, with their checking suites."""

__version__ = "0.1.0"

from .errors import ConfigError, PropagationError

__all__ = ["ConfigError", "PropagationError", "__version__"]
