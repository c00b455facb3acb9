"""Restoration of frequency-resolved THz amplitude cubes: PCA decomposition,
self-supervised denoise/deblur networks and reconstruction."""
__version__ = "0.1.0"
