"""Correspondence files, flat key=value configs and report serialisation.

A correspondence file is CSV preceded by ``#`` header lines::

    # width=800
    # height=600
    # axis=pan
    # degrees=1.0
    v,u,v_prime,u_prime
    400.0,300.0,413.4845...,300.0

Reals are written with ``repr`` so every value survives a round trip.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError, ParseError
from .estimator import Correspondence
from .geometry import Axis, ImageSize
from .scene import ViewPair

COLUMNS = ("v", "u", "v_prime", "u_prime")
HEADER_KEYS = ("width", "height", "axis", "degrees")


@dataclass(frozen=True)
class CorrespondenceFile:
    size: ImageSize
    axis: Axis
    degrees: float
    correspondences: tuple[Correspondence, ...]


def fmt(x) -> str:
    """Round-trip decimal text for reals; plain ``str`` for everything else."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_correspondence_file(
    path, correspondences: Iterable[Correspondence], size: ImageSize, axis: Axis | str, degrees: float
) -> Path:
    axis = Axis.parse(axis)
    lines = [
        f"# width={size.width}",
        f"# height={size.height}",
        f"# axis={axis.value}",
        f"# degrees={fmt(float(degrees))}",
        ",".join(COLUMNS),
    ]
    for c in correspondences:
        vals = (c.reference.v, c.reference.u, c.transformed.v, c.transformed.u)
        lines.append(",".join(fmt(float(x)) for x in vals))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def export_view_pair(pair: ViewPair, size: ImageSize, path) -> Path:
    """Write the visible correspondences of ``pair`` as a correspondence file."""
    return write_correspondence_file(
        path, pair.correspondences, size, pair.rotation.axis, pair.rotation.degrees
    )


def read_correspondence_file(path) -> CorrespondenceFile:
    """Parse a correspondence file.

    Raises:
        ParseError: with the offending line number on any malformed content.
    """
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror or exc}", path) from None

    header: dict[str, tuple[str, int]] = {}
    rows: list[Correspondence] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if rows:
                raise ParseError("header line after data rows", path, lineno)
            body = line[1:].strip()
            if not body:
                continue
            if "=" not in body:
                raise ParseError(f"header line must be '# key=value', got {raw!r}", path, lineno)
            key, value = (s.strip() for s in body.split("=", 1))
            key = key.lower()
            if key not in HEADER_KEYS:
                raise ParseError(f"unknown header key {key!r}", path, lineno)
            header[key] = (value, lineno)
            continue
        fields = [f.strip() for f in line.split(",")]
        if [f.lower() for f in fields] == list(COLUMNS):
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 comma-separated values, got {len(fields)}", path, lineno)
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"non-numeric value in {raw!r}", path, lineno) from None
        if not all(math.isfinite(x) for x in vals):
            raise ParseError("coordinates must be finite", path, lineno)
        rows.append(Correspondence.from_coords(*vals))

    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ParseError(f"missing header keys: {', '.join(missing)}", path)
    if not rows:
        raise ParseError("no correspondence rows", path)

    def _header(key, conv):
        value, lineno = header[key]
        try:
            return conv(value)
        except (ValueError, DomainError) as exc:
            raise ParseError(f"bad {key} value {value!r}: {exc}", path, lineno) from None

    try:
        size = ImageSize(_header("width", int), _header("height", int))
    except DomainError as exc:
        raise ParseError(str(exc), path) from None
    axis = _header("axis", Axis.parse)
    degrees = _header("degrees", float)
    if not math.isfinite(degrees):
        raise ParseError("degrees must be finite", path, header["degrees"][1])
    return CorrespondenceFile(size, axis, degrees, tuple(rows))


# -- configs -----------------------------------------------------------------

_FLOAT_KEYS = ("f_true", "pan_deg", "tilt_deg", "fov_fill", "depth_min", "depth_max")
_INT_KEYS = ("width", "height", "n_points", "n_runs", "master_seed")
_LIST_KEYS = ("sweep_grid", "base_angles")
_ENUM_KEYS = ("aggregation", "selection", "scene")
CONFIG_KEYS = _FLOAT_KEYS + _INT_KEYS + _LIST_KEYS + _ENUM_KEYS


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Split flat ``key=value`` text into a dict; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", source, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", source, lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", source, lineno)
        out[key] = value
    return out


def config_from_mapping(raw: Mapping[str, str], overrides: Mapping | None = None):
    """Build an :class:`~sacal.experiments.ExperimentConfig`, collecting every problem.

    Raises:
        ConfigError: listing all unknown keys, unparsable values and failed
            range checks at once.
    """
    from .experiments import ExperimentConfig

    problems: list[str] = []
    kwargs: dict = {}
    for key in raw:
        if key not in CONFIG_KEYS:
            problems.append(f"{key}: unknown key")
    for key in _FLOAT_KEYS:
        if key in raw:
            try:
                kwargs[key] = float(raw[key])
            except ValueError:
                problems.append(f"{key}: not a number: {raw[key]!r}")
    for key in _INT_KEYS:
        if key in raw:
            try:
                kwargs[key] = int(raw[key])
            except ValueError:
                problems.append(f"{key}: not an integer: {raw[key]!r}")
    for key in _LIST_KEYS:
        if key in raw:
            try:
                kwargs[key] = tuple(float(x) for x in raw[key].split(",") if x.strip())
            except ValueError:
                problems.append(f"{key}: not a comma-separated list of numbers: {raw[key]!r}")
    for key in _ENUM_KEYS:
        if key in raw:
            kwargs[key] = raw[key].strip().lower()
    kwargs.update(overrides or {})

    width = kwargs.pop("width", 800)
    height = kwargs.pop("height", 600)
    try:
        kwargs["image_size"] = ImageSize(width, height)
    except DomainError as exc:
        problems.append(f"width/height: {exc}")
        kwargs["image_size"] = ImageSize(800, 600)  # keep validating the rest
    if "depth_min" in kwargs or "depth_max" in kwargs:
        kwargs["depth_range"] = (kwargs.pop("depth_min", 5.0), kwargs.pop("depth_max", 15.0))

    try:
        cfg = ExperimentConfig(**kwargs)
    except ConfigError as exc:
        problems.extend(exc.problems)
        cfg = None
    if problems:
        raise ConfigError(problems)
    return cfg


def resolve_config_path(name) -> Path:
    """A path on disk, falling back to a config bundled with the package."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("sacal") / "configs" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise ParseError("config file not found", str(name))


def read_config(path, overrides: Mapping | None = None):
    path = resolve_config_path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}", str(path)) from None
    return config_from_mapping(parse_config_text(text, str(path)), overrides)


def config_to_text(cfg) -> str:
    d = cfg.to_dict()
    size = d.pop("image_size")
    lo, hi = d.pop("depth_range")
    d.update(width=size["width"], height=size["height"], depth_min=lo, depth_max=hi)
    lines = []
    for key in CONFIG_KEYS:
        val = d[key]
        if isinstance(val, list):
            val = ",".join(fmt(float(x)) for x in val)
        lines.append(f"{key} = {fmt(val)}")
    return "\n".join(lines) + "\n"


# -- tables ------------------------------------------------------------------


def rows_to_csv(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> Path:
    path = Path(path)
    path.write_text(rows_to_csv(rows, columns), encoding="utf-8")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, os.PathLike):
        return os.fspath(obj)
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path
