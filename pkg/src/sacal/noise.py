"""Angular and pixel noise models for the sensitivity studies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import ImagePoint, RotationAngle
from .scene import SEED_MASK

MAX_SIGMA_PIXEL = 3.0


def default_offsets() -> tuple[float, ...]:
    """0 and +/-0.01 .. +/-0.2 degrees in 0.01 steps, ascending."""
    steps = [round(0.01 * k, 2) for k in range(1, 21)]
    return tuple([-s for s in reversed(steps)] + [0.0] + steps)


@dataclass(frozen=True)
class AngularNoiseSpec:
    offsets_deg: tuple[float, ...] = default_offsets()

    def __post_init__(self):
        offsets = tuple(float(o) for o in self.offsets_deg)
        if not offsets:
            raise DomainError("angular noise grid is empty")
        if not all(math.isfinite(o) for o in offsets):
            raise DomainError("angular offsets must be finite")
        object.__setattr__(self, "offsets_deg", offsets)


@dataclass(frozen=True)
class PixelNoiseSpec:
    """Zero-mean Gaussian pixel noise; ``sigma_pixel`` is a standard deviation."""

    sigma_pixel: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.sigma_pixel) or self.sigma_pixel < 0:
            raise DomainError(f"sigma_pixel must be >= 0, got {self.sigma_pixel!r}")


def perturb_angle(true_angle: RotationAngle, offset_deg: float) -> RotationAngle:
    """The angle reported to the estimator when the true one is off by ``offset_deg``.

    Only the angle changes; correspondences generated at the true angle are
    left untouched by callers.
    """
    return RotationAngle(true_angle.degrees + offset_deg, true_angle.axis)


def perturb_points(pts, spec: PixelNoiseSpec):
    """Add i.i.d. N(0, sigma^2) offsets to both coordinates of every point.

    Accepts an ``(N, 2)`` array or a list of :class:`ImagePoint` and returns the
    same kind. ``sigma_pixel == 0`` returns the input values unchanged.
    """
    as_points = isinstance(pts, (list, tuple)) and (not pts or isinstance(pts[0], ImagePoint))
    arr = (
        np.array([[p.v, p.u] for p in pts], dtype=float).reshape(-1, 2)
        if as_points
        else np.array(pts, dtype=float)
    )
    if spec.sigma_pixel > 0:
        rng = np.random.default_rng(int(spec.seed) & SEED_MASK)
        arr = arr + rng.normal(0.0, spec.sigma_pixel, size=arr.shape)
    if as_points:
        return [ImagePoint(float(a), float(b)) for a, b in arr]
    return arr
