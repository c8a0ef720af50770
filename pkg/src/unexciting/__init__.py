"""Unexciting frequency protocols for the parametric oscillator and their scattering duals."""
__version__ = "0.1.0"
