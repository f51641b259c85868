"""Focal length estimation from small pan and tilt rotations of a camera."""

__version__ = "0.1.0"
