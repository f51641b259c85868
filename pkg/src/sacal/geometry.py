"""Pinhole camera model, single-axis rotations and the rotation homography.

Image coordinates are ordered ``(v, u)``: ``v`` is the horizontal pixel axis
(column) and ``u`` the vertical one (row). A pan rotates the camera about its
Y axis and mostly moves pixels along ``v``; a tilt rotates about X and mostly
moves them along ``u``.

Rotation matrices follow::

    R_y(t) = [[ cos t, 0, sin t],      R_x(t) = [[1,     0,      0],
              [     0, 1,     0],                [0, cos t, -sin t],
              [-sin t, 0, cos t]]                [0, sin t,  cos t]]

and a camera rotated by ``R`` sees the reference pixel ``p`` at
``K @ R.T @ inv(K) @ p``. With ``r_ij`` read from ``R`` itself (not from its
transpose) the pan transfer reduces to :func:`pan_transfer`, which the test
suite checks against the full homography.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError, PointAtInfinity

#: Homogeneous third components smaller than this are treated as zero.
INFINITY_EPS = 1e-12

MAX_ABS_DEGREES = 90.0


class Axis(enum.Enum):
    PAN = "pan"    # about the camera Y axis
    TILT = "tilt"  # about the camera X axis

    @classmethod
    def parse(cls, text: str | Axis) -> Axis:
        if isinstance(text, Axis):
            return text
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError(f"unknown rotation axis {text!r}; expected 'pan' or 'tilt'") from None


@dataclass(frozen=True)
class ImageSize:
    width: int
    height: int

    def __post_init__(self):
        for name in ("width", "height"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value <= 0:
                raise DomainError(f"image {name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def center(self) -> ImagePoint:
        """Image center ``(width/2, height/2)`` in ``(v, u)`` order."""
        return ImagePoint(self.width / 2.0, self.height / 2.0)

    def contains(self, p: ImagePoint) -> bool:
        return 0.0 <= p.v < self.width and 0.0 <= p.u < self.height


@dataclass(frozen=True)
class ImagePoint:
    v: float
    u: float

    def __iter__(self) -> Iterator[float]:
        yield self.v
        yield self.u

    def homogeneous(self) -> HomogeneousImagePoint:
        return HomogeneousImagePoint(self.v, self.u, 1.0)


@dataclass(frozen=True)
class HomogeneousImagePoint:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if self.x1 == 0 and self.x2 == 0 and self.x3 == 0:
            raise DomainError("homogeneous point cannot be (0, 0, 0)")

    def dehomogenize(self) -> ImagePoint:
        if abs(self.x3) < INFINITY_EPS:
            raise PointAtInfinity(f"third homogeneous component {self.x3!r} is ~0")
        return ImagePoint(self.x1 / self.x3, self.x2 / self.x3)


@dataclass(frozen=True)
class WorldPoint:
    X: float
    Y: float
    Z: float


@dataclass(frozen=True)
class CameraIntrinsics:
    """Zero-skew pinhole intrinsics; focal lengths and principal point in pixels."""

    f_v: float
    f_u: float
    c_v: float
    c_u: float

    def __post_init__(self):
        for name in ("f_v", "f_u", "c_v", "c_u"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.f_v <= 0 or self.f_u <= 0:
            raise DomainError(f"focal lengths must be positive, got f_v={self.f_v}, f_u={self.f_u}")

    @classmethod
    def centered(cls, f_v: float, f_u: float, size: ImageSize) -> CameraIntrinsics:
        """Intrinsics with the principal point at the image center."""
        c = size.center
        return cls(f_v=f_v, f_u=f_u, c_v=c.v, c_u=c.u)

    @property
    def principal_point(self) -> ImagePoint:
        return ImagePoint(self.c_v, self.c_u)

    @property
    def K(self) -> np.ndarray:
        return np.array(
            [[self.f_v, 0.0, self.c_v], [0.0, self.f_u, self.c_u], [0.0, 0.0, 1.0]]
        )

    @property
    def K_inv(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.f_v, 0.0, -self.c_v / self.f_v],
                [0.0, 1.0 / self.f_u, -self.c_u / self.f_u],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class RotationAngle:
    """Signed single-axis rotation in degrees."""

    degrees: float
    axis: Axis

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis.parse(self.axis))
        if not math.isfinite(self.degrees) or abs(self.degrees) >= MAX_ABS_DEGREES:
            raise DomainError(
                f"|{self.axis.value} angle| must be below {MAX_ABS_DEGREES} deg, got {self.degrees!r}"
            )

    @classmethod
    def pan(cls, degrees: float) -> RotationAngle:
        return cls(degrees, Axis.PAN)

    @classmethod
    def tilt(cls, degrees: float) -> RotationAngle:
        return cls(degrees, Axis.TILT)

    @property
    def radians(self) -> float:
        return math.radians(self.degrees)


class RotationMatrix3:
    """Immutable 3x3 rotation matrix with 1-based ``r(i, j)`` access."""

    __slots__ = ("_m",)

    def __init__(self, m):
        arr = np.array(m, dtype=float)
        if arr.shape != (3, 3):
            raise DomainError(f"rotation matrix must be 3x3, got shape {arr.shape}")
        arr.setflags(write=False)
        self._m = arr

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def T(self) -> RotationMatrix3:
        return RotationMatrix3(self._m.T)

    def r(self, i: int, j: int) -> float:
        if not (1 <= i <= 3 and 1 <= j <= 3):
            raise IndexError(f"r({i}, {j}) out of range; indices are 1-based")
        return float(self._m[i - 1, j - 1])

    def __array__(self, dtype=None, copy=None):
        return self._m.astype(dtype) if dtype is not None else self._m.copy()

    def __matmul__(self, other):
        if isinstance(other, RotationMatrix3):
            return RotationMatrix3(self._m @ other._m)
        return self._m @ np.asarray(other)

    def __eq__(self, other):
        return isinstance(other, RotationMatrix3) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"RotationMatrix3({self._m.tolist()!r})"


def axis_rotation(axis: Axis | str, degrees: float) -> RotationMatrix3:
    """Rotation about the camera Y (pan) or X (tilt) axis, any angle."""
    axis = Axis.parse(axis)
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    if axis is Axis.PAN:
        m = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    else:
        m = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    return RotationMatrix3(m)


def rotation_matrix(angle: RotationAngle) -> RotationMatrix3:
    """``R_y`` for a pan, ``R_x`` for a tilt.

    Raises:
        DomainError: if ``|angle.degrees| >= 90``.
    """
    if abs(angle.degrees) >= MAX_ABS_DEGREES:
        raise DomainError(f"|angle| must be below {MAX_ABS_DEGREES} deg")
    return axis_rotation(angle.axis, angle.degrees)


def project(point: WorldPoint, K: CameraIntrinsics) -> ImagePoint:
    """Project a camera-frame point: ``v = f_v X/Z + c_v``, ``u = f_u Y/Z + c_u``."""
    if not point.Z > 0:
        raise DomainError(f"point must lie in front of the camera (Z > 0), got Z={point.Z!r}")
    return ImagePoint(K.f_v * point.X / point.Z + K.c_v, K.f_u * point.Y / point.Z + K.c_u)


def project_array(points: np.ndarray, K: CameraIntrinsics) -> np.ndarray:
    """Vectorised :func:`project` for an ``(N, 3)`` array.

    Rows with ``Z <= 0`` come back as NaN rather than raising.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    Z = pts[:, 2]
    out = np.full((pts.shape[0], 2), np.nan)
    front = Z > 0
    out[front, 0] = K.f_v * pts[front, 0] / Z[front] + K.c_v
    out[front, 1] = K.f_u * pts[front, 1] / Z[front] + K.c_u
    return out


def inter_image_homography(K: CameraIntrinsics, R: RotationMatrix3) -> np.ndarray:
    """``H = K R^T K^-1``, the map from reference pixels to rotated-view pixels."""
    return K.K @ R.matrix.T @ K.K_inv


def map_point(H: np.ndarray, p: ImagePoint) -> ImagePoint:
    x = np.asarray(H, dtype=float) @ np.array([p.v, p.u, 1.0])
    if abs(x[2]) < INFINITY_EPS:
        raise PointAtInfinity(f"point {tuple(p)} maps to infinity (w={x[2]!r})")
    return ImagePoint(float(x[0] / x[2]), float(x[1] / x[2]))


def map_points(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply ``H`` to an ``(N, 2)`` array of ``(v, u)`` rows."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x = np.column_stack([pts, np.ones(len(pts))]) @ np.asarray(H, dtype=float).T
    if np.any(np.abs(x[:, 2]) < INFINITY_EPS):
        raise PointAtInfinity("at least one point maps to infinity")
    return x[:, :2] / x[:, 2:3]


def pan_transfer(K: CameraIntrinsics, R: RotationMatrix3, p: ImagePoint) -> ImagePoint:
    """Closed-form image of ``p`` after a pure pan, with ``r_ij`` read from ``R``.

    Equivalent to ``map_point(inter_image_homography(K, R), p)`` when ``R`` is a
    rotation about Y.
    """
    dv = p.v - K.c_v
    den = R.r(1, 3) * dv / K.f_v + R.r(3, 3)
    if abs(den) < INFINITY_EPS:
        raise PointAtInfinity(f"point {tuple(p)} maps to infinity under the pan")
    v_new = (R.r(1, 1) * dv + R.r(3, 1) * K.f_v) / den + K.c_v
    u_new = K.c_u - (K.c_u - p.u) / den
    return ImagePoint(v_new, u_new)


def tilt_transfer(K: CameraIntrinsics, R: RotationMatrix3, p: ImagePoint) -> ImagePoint:
    """Mirror of :func:`pan_transfer` for a rotation about X."""
    du = p.u - K.c_u
    den = R.r(2, 3) * du / K.f_u + R.r(3, 3)
    if abs(den) < INFINITY_EPS:
        raise PointAtInfinity(f"point {tuple(p)} maps to infinity under the tilt")
    u_new = (R.r(2, 2) * du + R.r(3, 2) * K.f_u) / den + K.c_u
    v_new = K.c_v - (K.c_v - p.v) / den
    return ImagePoint(v_new, u_new)
