"""Beamforming optimization for NOMA-assisted multi-region geocast."""
__version__ = "0.1.0"
