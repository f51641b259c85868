"""Monte Carlo harness and sensitivity sweeps.

Every experiment walks runs ``0 .. n_runs-1``; run ``r`` draws its scene from
seed ``master_seed ^ r`` and its pixel noise from seeds derived from
``(master_seed, r, axis, view, sigma index)``. Results therefore depend only
on indices, never on evaluation order.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateRotation, DomainError, NoCorrespondences
from .estimator import (
    EPSILON_R,
    Aggregation,
    FocalAxis,
    FocalEstimate,
    aggregate_values,
    center_index,
    fu_from_arrays,
    fv_from_arrays,
)
from .geometry import Axis, CameraIntrinsics, ImageSize, RotationAngle
from .noise import MAX_SIGMA_PIXEL, AngularNoiseSpec, PixelNoiseSpec, perturb_angle, perturb_points
from .scene import (
    DEFAULT_DEPTH_RANGE,
    SEED_MASK,
    ScenePointCloud,
    generate_points,
    run_seed,
    structured_cloud,
    synthesize_pair,
)

AXIS_OF = {Axis.PAN: FocalAxis.V, Axis.TILT: FocalAxis.U}


class Selection(enum.Enum):
    ALL = "all"
    CENTER = "center"


class SceneKind(enum.Enum):
    RANDOM = "random"
    STRUCTURED = "structured"


def _is_count(x) -> bool:
    return not isinstance(x, bool) and isinstance(x, (int, np.integer)) and x >= 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by every experiment.

    ``fov_fill`` defaults to 0.05: the all-points mean carries a bias of about
    ``f * E[((v - c_v)/f)^2]`` (the single-axis approximation degrades away
    from the center column), so a narrow central box is what keeps the
    Monte Carlo mean within a pixel of the truth.
    """

    f_true: float = 772.55
    image_size: ImageSize = ImageSize(800, 600)
    n_points: int = 500
    n_runs: int = 1000
    pan_deg: float = 1.0
    tilt_deg: float = -1.0
    sweep_grid: tuple[float, ...] = ()
    base_angles: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0)
    master_seed: int = 0
    aggregation: Aggregation = Aggregation.MEAN
    selection: Selection = Selection.ALL
    depth_range: tuple[float, float] = DEFAULT_DEPTH_RANGE
    fov_fill: float = 0.05
    scene: SceneKind = SceneKind.RANDOM

    def __post_init__(self):
        problems = []
        for name, kind in (
            ("aggregation", Aggregation),
            ("selection", Selection),
            ("scene", SceneKind),
        ):
            try:
                object.__setattr__(self, name, kind(getattr(self, name)))
            except ValueError:
                choices = ", ".join(k.value for k in kind)
                problems.append(f"{name}: {getattr(self, name)!r} is not one of {choices}")
        object.__setattr__(self, "sweep_grid", tuple(float(x) for x in self.sweep_grid))
        object.__setattr__(self, "base_angles", tuple(float(x) for x in self.base_angles))
        object.__setattr__(self, "depth_range", tuple(float(x) for x in self.depth_range))

        if not (math.isfinite(self.f_true) and self.f_true > 0):
            problems.append(f"f_true: must be positive, got {self.f_true!r}")
        if not isinstance(self.image_size, ImageSize):
            problems.append("image_size: must be an ImageSize")
        for name in ("n_points", "n_runs"):
            if not _is_count(getattr(self, name)):
                problems.append(f"{name}: must be an integer >= 1, got {getattr(self, name)!r}")
        for name in ("pan_deg", "tilt_deg"):
            val = getattr(self, name)
            if not (math.isfinite(val) and abs(val) < 90):
                problems.append(f"{name}: must satisfy |angle| < 90, got {val!r}")
        for name in ("sweep_grid", "base_angles"):
            if not all(math.isfinite(x) for x in getattr(self, name)):
                problems.append(f"{name}: values must be finite")
        if any(abs(a) >= 90 for a in self.base_angles):
            problems.append("base_angles: every |angle| must be < 90")
        if not self.base_angles:
            problems.append("base_angles: must not be empty")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, (int, np.integer)) or not (
            0 <= self.master_seed <= SEED_MASK
        ):
            problems.append(f"master_seed: must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if len(self.depth_range) != 2 or not 0 < self.depth_range[0] < self.depth_range[1]:
            problems.append(f"depth_range: need 0 < z_min < z_max, got {self.depth_range!r}")
        if not 0 < self.fov_fill <= 1:
            problems.append(f"fov_fill: must be in (0, 1], got {self.fov_fill!r}")
        if problems:
            raise ConfigError(problems)

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.centered(self.f_true, self.f_true, self.image_size)

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if isinstance(val, enum.Enum):
                val = val.value
            elif isinstance(val, ImageSize):
                val = {"width": val.width, "height": val.height}
            elif isinstance(val, tuple):
                val = list(val)
            d[f.name] = val
        return d


@dataclass(frozen=True)
class AxisStats:
    """Per-run estimates for one axis of one experiment cell, with summary statistics.

    ``mean`` and ``sd`` are over per-run magnitudes (``sd`` uses ``ddof=1``, 0
    for a single run) and ``error = |mean - f_true|``.
    """

    axis: FocalAxis
    f_true: float
    per_run_estimates: tuple[FocalEstimate, ...]
    base_angle: float = math.nan
    offset: float = 0.0
    sigma: float = 0.0
    degenerate: bool = False
    mean: float = field(init=False)
    sd: float = field(init=False)
    error: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "per_run_estimates", tuple(self.per_run_estimates))
        mags = self.magnitudes
        if len(mags) == 0:
            mean = sd = error = math.nan
        else:
            mean = float(np.mean(mags))
            sd = float(np.std(mags, ddof=1)) if len(mags) > 1 else 0.0
            error = abs(mean - self.f_true)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sd", sd)
        object.__setattr__(self, "error", error)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.array([e.magnitude for e in self.per_run_estimates], dtype=float)

    @property
    def signed_errors(self) -> np.ndarray:
        """Per-run ``magnitude - f_true``."""
        return self.magnitudes - self.f_true

    @property
    def abs_errors(self) -> np.ndarray:
        return np.abs(self.signed_errors)


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    fv: AxisStats
    fu: AxisStats

    def axis(self, axis: FocalAxis | str) -> AxisStats:
        return self.fv if FocalAxis(axis) is FocalAxis.V else self.fu


@dataclass(frozen=True)
class AngularNoiseResult:
    cells: tuple[AxisStats, ...]
    slopes: dict  # (FocalAxis, base_angle) -> OLS slope of error vs |offset|

    def slope(self, axis: FocalAxis | str, base_angle: float) -> float:
        return self.slopes[(FocalAxis(axis), float(base_angle))]


# -- internals ---------------------------------------------------------------


def _cloud(cfg: ExperimentConfig, run: int) -> ScenePointCloud:
    K = cfg.intrinsics
    if cfg.scene is SceneKind.STRUCTURED:
        return structured_cloud(K, cfg.image_size, fov_fill=cfg.fov_fill)
    return generate_points(
        cfg.n_points, cfg.depth_range, cfg.fov_fill, K, cfg.image_size, run_seed(cfg.master_seed, run)
    )


def _noise_seed(master_seed: int, run: int, axis: Axis, view: int, sigma_index: int) -> int:
    axis_tag = 0 if axis is Axis.PAN else 1
    ss = np.random.SeedSequence([int(master_seed), int(run), axis_tag, view, sigma_index])
    return int(ss.generate_state(1, np.uint64)[0])


def _visible(cloud, cfg: ExperimentConfig, angle: RotationAngle) -> tuple[np.ndarray, np.ndarray]:
    pair = synthesize_pair(cloud, cfg.intrinsics, angle, cfg.image_size)
    ref, rot = pair.visible_reference, pair.visible_rotated
    if len(ref) == 0:
        raise NoCorrespondences(f"no scene point visible in both views for {angle}")
    return ref, rot


def _estimate(ref, rot, angle: RotationAngle, cfg: ExperimentConfig) -> FocalEstimate:
    K = cfg.intrinsics
    if cfg.selection is Selection.CENTER:
        i = center_index(ref, K.principal_point)
        ref, rot = ref[i : i + 1], rot[i : i + 1]
    if angle.axis is Axis.PAN:
        values = fv_from_arrays(ref[:, 0], rot[:, 0], angle, K.c_v)
    else:
        values = fu_from_arrays(ref[:, 1], rot[:, 1], angle, K.c_u)
    return FocalEstimate(aggregate_values(values, cfg.aggregation), AXIS_OF[angle.axis], len(values))


def _noisy(ref, rot, cfg: ExperimentConfig, run: int, axis: Axis, sigma: float, sigma_index: int):
    if sigma == 0:
        return ref, rot
    seeds = [_noise_seed(cfg.master_seed, run, axis, view, sigma_index) for view in (0, 1)]
    return (
        perturb_points(ref, PixelNoiseSpec(sigma, seeds[0])),
        perturb_points(rot, PixelNoiseSpec(sigma, seeds[1])),
    )


def _is_degenerate(degrees: float) -> bool:
    return abs(math.sin(math.radians(degrees))) < EPSILON_R


# -- experiments -------------------------------------------------------------


def monte_carlo(cfg: ExperimentConfig) -> ExperimentReport:
    """Repeat pan and tilt estimation on ``n_runs`` fresh scenes.

    Raises:
        DegenerateRotation: if the configured pan or tilt angle is degenerate.
    """
    pan = RotationAngle.pan(cfg.pan_deg)
    tilt = RotationAngle.tilt(cfg.tilt_deg)
    for angle in (pan, tilt):
        if _is_degenerate(angle.degrees):
            raise DegenerateRotation(angle.degrees, angle.axis.value)
    fv, fu = [], []
    for run in range(cfg.n_runs):
        cloud = _cloud(cfg, run)
        fv.append(_estimate(*_visible(cloud, cfg, pan), pan, cfg))
        fu.append(_estimate(*_visible(cloud, cfg, tilt), tilt, cfg))
    return ExperimentReport(
        cfg,
        AxisStats(FocalAxis.V, cfg.f_true, fv, base_angle=cfg.pan_deg),
        AxisStats(FocalAxis.U, cfg.f_true, fu, base_angle=cfg.tilt_deg),
    )


def _sweep(
    cfg: ExperimentConfig,
    base_angles: Sequence[float],
    offsets: Sequence[float] = (0.0,),
    sigmas: Sequence[float] = (0.0,),
) -> list[AxisStats]:
    """Shared loop: every (axis, base, offset, sigma) cell over all runs.

    Scenes and view pairs are built once per (run, axis, base) and reused
    across offsets and sigmas, so correspondences stay fixed while only the
    reported angle or the pixel noise changes.
    """
    keys = [
        (axis, float(b), float(o), float(s), si)
        for axis in (Axis.PAN, Axis.TILT)
        for b in base_angles
        for o in offsets
        for si, s in enumerate(sigmas)
    ]
    results: dict = {k: [] for k in keys}
    degenerate = {k for k in keys if _is_degenerate(k[1] + k[2])}
    if any(abs(k[1] + k[2]) >= 90 for k in keys):
        raise DomainError("base angle plus offset must stay within (-90, 90) degrees")

    for run in range(cfg.n_runs):
        cloud = _cloud(cfg, run)
        for axis in (Axis.PAN, Axis.TILT):
            for b in base_angles:
                b = float(b)
                if _is_degenerate(b):
                    continue
                true_angle = RotationAngle(b, axis)
                ref, rot = _visible(cloud, cfg, true_angle)
                for si, s in enumerate(sigmas):
                    nref, nrot = _noisy(ref, rot, cfg, run, axis, float(s), si)
                    for o in offsets:
                        key = (axis, b, float(o), float(s), si)
                        if key in degenerate:
                            continue
                        told = perturb_angle(true_angle, float(o))
                        results[key].append(_estimate(nref, nrot, told, cfg))

    cells = []
    for key in keys:
        axis, b, o, s, _ = key
        cells.append(
            AxisStats(
                AXIS_OF[axis],
                cfg.f_true,
                results[key],
                base_angle=b,
                offset=o,
                sigma=s,
                degenerate=key in degenerate or _is_degenerate(b),
            )
        )
    return cells


def angle_sweep(cfg: ExperimentConfig, angles: Sequence[float]) -> list[AxisStats]:
    """Noise-free cells for each angle, used as the pan and as the tilt angle.

    Degenerate angles produce cells flagged ``degenerate`` with no estimates.
    """
    if not angles:
        raise DomainError("angle sweep needs at least one angle")
    return _sweep(cfg, angles)


def angular_noise_sweep(
    cfg: ExperimentConfig, noise: AngularNoiseSpec, base_angles: Sequence[float]
) -> AngularNoiseResult:
    """Estimate with angles off by each offset while correspondences stay fixed.

    For every (axis, base) the OLS slope of cell ``error`` against ``|offset|``
    is reported; degenerate cells are left out of the fit.
    """
    if not base_angles:
        raise DomainError("angular noise sweep needs at least one base angle")
    cells = _sweep(cfg, base_angles, offsets=noise.offsets_deg)
    slopes = {}
    for axis in (FocalAxis.V, FocalAxis.U):
        for b in base_angles:
            sel = [
                c for c in cells
                if c.axis is axis and c.base_angle == float(b) and not c.degenerate
            ]
            x = np.array([abs(c.offset) for c in sel])
            y = np.array([c.error for c in sel])
            if len(np.unique(x)) < 2:
                slopes[(axis, float(b))] = math.nan
            else:
                slopes[(axis, float(b))] = float(np.polyfit(x, y, 1)[0])
    return AngularNoiseResult(tuple(cells), slopes)


def pixel_noise_sweep(
    cfg: ExperimentConfig, sigmas: Sequence[float], base_angles: Sequence[float]
) -> list[AxisStats]:
    """Cells for each (axis, base angle, sigma) with Gaussian noise on both views."""
    if not sigmas or not base_angles:
        raise DomainError("pixel noise sweep needs sigmas and base angles")
    bad = [s for s in sigmas if not 0 <= s <= MAX_SIGMA_PIXEL]
    if bad:
        raise DomainError(f"sigmas must lie in [0, {MAX_SIGMA_PIXEL}], got {bad}")
    return _sweep(cfg, base_angles, sigmas=sigmas)


def percent_error(estimate_magnitude: float, ground_truth: float) -> float:
    """``100 * |estimate - truth| / truth``."""
    if not ground_truth > 0:
        raise DomainError(f"ground truth must be positive, got {ground_truth!r}")
    return 100.0 * abs(estimate_magnitude - ground_truth) / ground_truth
