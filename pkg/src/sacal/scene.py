"""Deterministic synthetic scenes and before/after rotation view pairs.

Random numbers come from numpy's PCG64 (``numpy.random.default_rng``). Run
``r`` of an experiment seeded with ``master_seed`` uses ``master_seed ^ r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .estimator import Correspondence
from .geometry import (
    CameraIntrinsics,
    ImagePoint,
    ImageSize,
    RotationAngle,
    WorldPoint,
    project_array,
    rotation_matrix,
)

DEFAULT_DEPTH_RANGE = (5.0, 15.0)
SEED_MASK = (1 << 64) - 1


def run_seed(master_seed: int, run_index: int) -> int:
    """Seed of the per-run substream."""
    return (int(master_seed) ^ int(run_index)) & SEED_MASK


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScenePointCloud:
    """``(N, 3)`` camera-frame points, all in front of the camera."""

    points: np.ndarray
    seed: int

    def __post_init__(self):
        pts = _readonly(np.asarray(self.points, dtype=float).reshape(-1, 3))
        if np.any(pts[:, 2] <= 0):
            raise DomainError("every scene point needs Z > 0")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def world_points(self) -> list[WorldPoint]:
        return [WorldPoint(*map(float, p)) for p in self.points]


@dataclass(frozen=True, eq=False)
class ViewPair:
    """Projections of a cloud before and after one rotation, index-aligned.

    ``reference_view`` and ``rotated_view`` are ``(N, 2)`` arrays of ``(v, u)``;
    rows of points behind the camera hold NaN.
    """

    reference_view: np.ndarray
    rotated_view: np.ndarray
    rotation: RotationAngle
    visible_mask: np.ndarray
    _corr: list = field(default=None, init=False, repr=False)

    @property
    def visible_reference(self) -> np.ndarray:
        return self.reference_view[self.visible_mask]

    @property
    def visible_rotated(self) -> np.ndarray:
        return self.rotated_view[self.visible_mask]

    @property
    def correspondences(self) -> list[Correspondence]:
        if self._corr is None:
            corr = [
                Correspondence(ImagePoint(*map(float, a)), ImagePoint(*map(float, b)))
                for a, b in zip(self.visible_reference, self.visible_rotated)
            ]
            object.__setattr__(self, "_corr", corr)
        return self._corr


def generate_points(
    n: int,
    depth_range: tuple[float, float],
    fov_fill: float,
    K: CameraIntrinsics,
    size: ImageSize,
    seed: int,
) -> ScenePointCloud:
    """Sample ``n`` points whose reference projections cover the central image box.

    Depth is uniform on ``depth_range``; the pixel ``(v, u)`` is uniform over a
    box centered on the principal point spanning ``fov_fill`` of the image
    width and height. Each pixel is back-projected to its sampled depth.
    """
    z_min, z_max = map(float, depth_range)
    problems = []
    if int(n) != n or n < 1:
        problems.append(f"n must be a positive integer, got {n!r}")
    if not 0 < z_min < z_max:
        problems.append(f"depth range must satisfy 0 < z_min < z_max, got {depth_range!r}")
    if not 0 < fov_fill <= 1:
        problems.append(f"fov_fill must be in (0, 1], got {fov_fill!r}")
    if problems:
        raise DomainError("; ".join(problems))

    rng = np.random.default_rng(int(seed) & SEED_MASK)
    n = int(n)
    Z = rng.uniform(z_min, z_max, n)
    half_w = 0.5 * fov_fill * size.width
    half_h = 0.5 * fov_fill * size.height
    v = K.c_v + rng.uniform(-half_w, half_w, n)
    u = K.c_u + rng.uniform(-half_h, half_h, n)
    X = (v - K.c_v) * Z / K.f_v
    Y = (u - K.c_u) * Z / K.f_u
    return ScenePointCloud(np.column_stack([X, Y, Z]), int(seed))


def in_bounds(pts: np.ndarray, size: ImageSize) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    with np.errstate(invalid="ignore"):
        return (
            (pts[:, 0] >= 0) & (pts[:, 0] < size.width) & (pts[:, 1] >= 0) & (pts[:, 1] < size.height)
        )


def synthesize_pair(
    cloud: ScenePointCloud, K: CameraIntrinsics, rot: RotationAngle, size: ImageSize
) -> ViewPair:
    """Project the cloud before and after rotating the camera by ``rot``.

    The rotated camera sees world point ``X`` at ``R^T X``. A point is visible
    when both depths are positive and both projections land inside the image.
    """
    R = rotation_matrix(rot).matrix
    pts = cloud.points
    rotated_pts = pts @ R  # row-wise R^T X
    ref = project_array(pts, K)
    rot_view = project_array(rotated_pts, K)
    visible = (pts[:, 2] > 0) & (rotated_pts[:, 2] > 0) & in_bounds(ref, size) & in_bounds(rot_view, size)
    visible.setflags(write=False)
    return ViewPair(_readonly(ref), _readonly(rot_view), rot, visible)


def structured_cloud(
    K: CameraIntrinsics,
    size: ImageSize,
    nx: int = 20,
    ny: int = 15,
    fov_fill: float = 0.05,
    depth: float = 10.0,
    relief: float = 0.3,
) -> ScenePointCloud:
    """Fixed, seed-free grid surface standing in for a clustered object.

    An ``nx`` by ``ny`` grid covering ``fov_fill`` of the image is placed on a
    gently curved sheet ``depth +/- relief`` away.
    """
    gv = np.linspace(-0.5, 0.5, nx) * fov_fill * size.width
    gu = np.linspace(-0.5, 0.5, ny) * fov_fill * size.height
    dv, du = np.meshgrid(gv, gu)
    dv, du = dv.ravel(), du.ravel()
    rr = (dv / max(abs(gv).max(), 1e-12)) ** 2 + (du / max(abs(gu).max(), 1e-12)) ** 2
    Z = depth - relief * (1.0 - 0.5 * rr)
    X = dv * Z / K.f_v
    Y = du * Z / K.f_u
    return ScenePointCloud(np.column_stack([X, Y, Z]), 0)
