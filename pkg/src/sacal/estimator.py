"""Closed-form focal length estimators from one point correspondence.

After a pure pan the horizontal focal length follows from a single match::

    f_v ~= (v' - r11*v - (1 - r11)*c_v) / r31

and after a pure tilt the vertical one::

    f_u ~= (r22*u - u' + (1 - r22)*c_u) / r32

with ``r_ij`` read from :func:`sacal.geometry.rotation_matrix`. Under that
convention the tilt formula comes out negative for a positive focal length, so
estimates carry the raw signed value and expose ``magnitude`` separately; all
comparisons against ground truth use the magnitude.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateRotation, DomainError, NoCorrespondences
from .geometry import Axis, ImagePoint, RotationAngle, rotation_matrix

#: Smallest usable ``|r31|`` / ``|r32|``: sin(0.01 deg).
EPSILON_R = math.sin(math.radians(0.01))

#: Denominators smaller than this in :func:`rate_of_change` count as zero.
RATIO_EPS = 1e-12


class FocalAxis(enum.Enum):
    V = "v"
    U = "u"


class Aggregation(enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"


@dataclass(frozen=True)
class Correspondence:
    reference: ImagePoint
    transformed: ImagePoint

    def __post_init__(self):
        coords = (*self.reference, *self.transformed)
        if not all(math.isfinite(c) for c in coords):
            raise DomainError(f"correspondence coordinates must be finite, got {coords}")

    @classmethod
    def from_coords(cls, v: float, u: float, v_prime: float, u_prime: float) -> Correspondence:
        return cls(ImagePoint(v, u), ImagePoint(v_prime, u_prime))


@dataclass(frozen=True)
class FocalEstimate:
    value: float
    axis: FocalAxis
    n_points: int = 1

    def __post_init__(self):
        if self.n_points < 1:
            raise DomainError("n_points must be >= 1")

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class RateOfChangeDiagnostic:
    """Ratio ``(c - x) / (c - x')`` along the axis a rotation should leave alone.

    Close to 1 when the single-axis assumption behind the estimators holds.
    """

    ratio: float

    @property
    def deviation(self) -> float:
        return abs(self.ratio - 1.0)


def _checked_entries(angle: RotationAngle, axis: Axis) -> tuple[float, float]:
    """Return ``(diag, off)``: (r11, r31) for a pan, (r22, r32) for a tilt."""
    if angle.axis is not axis:
        raise DomainError(f"expected a {axis.value} angle, got {angle.axis.value}")
    R = rotation_matrix(angle)
    diag, off = (R.r(1, 1), R.r(3, 1)) if axis is Axis.PAN else (R.r(2, 2), R.r(3, 2))
    if abs(off) < EPSILON_R:
        raise DegenerateRotation(angle.degrees, axis.value)
    return diag, off


def fv_from_arrays(v, v_prime, pan: RotationAngle, c_v: float) -> np.ndarray:
    """Per-point f_v estimates for arrays of reference/transformed ``v``."""
    r11, r31 = _checked_entries(pan, Axis.PAN)
    v = np.asarray(v, dtype=float)
    return (np.asarray(v_prime, dtype=float) - r11 * v - (1.0 - r11) * c_v) / r31


def fu_from_arrays(u, u_prime, tilt: RotationAngle, c_u: float) -> np.ndarray:
    """Per-point f_u estimates (signed) for arrays of reference/transformed ``u``."""
    r22, r32 = _checked_entries(tilt, Axis.TILT)
    u = np.asarray(u, dtype=float)
    return (r22 * u - np.asarray(u_prime, dtype=float) + (1.0 - r22) * c_u) / r32


def estimate_fv(c: Correspondence, pan: RotationAngle, c_v: float) -> FocalEstimate:
    """Horizontal focal length from one correspondence across a pan.

    Raises:
        DegenerateRotation: if ``|r31| < EPSILON_R`` (pan too close to zero).
    """
    value = fv_from_arrays(c.reference.v, c.transformed.v, pan, c_v)
    return FocalEstimate(float(value), FocalAxis.V, 1)


def estimate_fu(c: Correspondence, tilt: RotationAngle, c_u: float) -> FocalEstimate:
    """Vertical focal length from one correspondence across a tilt.

    The returned ``value`` is signed as the formula produces it; use
    ``magnitude`` for comparison with a ground truth.
    """
    value = fu_from_arrays(c.reference.u, c.transformed.u, tilt, c_u)
    return FocalEstimate(float(value), FocalAxis.U, 1)


def aggregate_values(values, strategy: Aggregation | str = Aggregation.MEAN) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise NoCorrespondences("cannot aggregate an empty set of estimates")
    if Aggregation(strategy) is Aggregation.MEDIAN:
        return float(np.median(values))
    return float(np.mean(values))


def aggregate(
    estimates: Sequence[FocalEstimate], strategy: Aggregation | str = Aggregation.MEAN
) -> FocalEstimate:
    """Combine per-point estimates on one axis (signed mean by default)."""
    if not estimates:
        raise NoCorrespondences("cannot aggregate an empty list of estimates")
    axes = {e.axis for e in estimates}
    if len(axes) > 1:
        raise DomainError("cannot aggregate estimates from different axes")
    value = aggregate_values([e.value for e in estimates], strategy)
    return FocalEstimate(value, estimates[0].axis, len(estimates))


def center_index(reference_points, center: ImagePoint) -> int:
    """Index of the ``(N, 2)`` reference row closest to ``center``; first wins ties."""
    pts = np.asarray(reference_points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise NoCorrespondences("no correspondences to select from")
    d = np.hypot(pts[:, 0] - center.v, pts[:, 1] - center.u)
    return int(np.argmin(d))


def select_center_correspondence(
    cs: Sequence[Correspondence], center: ImagePoint
) -> Correspondence:
    """The correspondence whose reference point is nearest the image center.

    Points near the center suffer least from lens distortion. Ties go to the
    earliest entry.
    """
    if not cs:
        raise NoCorrespondences("no correspondences to select from")
    return cs[center_index([tuple(c.reference) for c in cs], center)]


def rate_of_change(
    c: Correspondence, axis: Axis | str, principal_point: ImagePoint
) -> RateOfChangeDiagnostic:
    """Ratio along the coordinate the rotation should preserve.

    For a pan that is ``(u0 - u) / (u0 - u')``; for a tilt ``(v0 - v) / (v0 - v')``.
    """
    axis = Axis.parse(axis)
    if axis is Axis.PAN:
        c0, x, x_new = principal_point.u, c.reference.u, c.transformed.u
    else:
        c0, x, x_new = principal_point.v, c.reference.v, c.transformed.v
    den = c0 - x_new
    if abs(den) < RATIO_EPS:
        raise ZeroDivisionError("transformed point lies on the principal axis line")
    if x == x_new:
        return RateOfChangeDiagnostic(1.0)
    return RateOfChangeDiagnostic((c0 - x) / den)
