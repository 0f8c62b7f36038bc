"""Trajectory ingestion, validation, scaling, and smoothing.

The canonical on-disk format is a long CSV with header ``frame,id,x,y``;
a wide layout with header ``frame,x_<id>,y_<id>,...`` is also read and
written.  In memory a :class:`TrajectorySet` stores one row per frame and
one ``(x, y)`` column pair per particle.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import signal
from .errors import ConfigurationError, DataError, ShapeError

__all__ = [
    "TrajectorySet",
    "ScaleParams",
    "load_trajectories",
    "save_trajectories",
    "minmax_scale",
    "inverse_scale",
    "smooth_trajectories",
    "load_scaler",
    "save_scaler",
]


@dataclass
class TrajectorySet:
    """Positions of k particles over T frames.

    Attributes
    ----------
    features : (T, 2k) float array
        Row per frame, columns ``x_1, y_1, x_2, y_2, ...``.
    dt : float
        Sampling interval (metadata; defaults to 1 frame).
    particle_ids : list[str]
        One id per particle, in column order.
    frames : (T,) int array
        Frame labels, ascending.
    """

    features: np.ndarray
    dt: float = 1.0
    particle_ids: list[str] = field(default_factory=list)
    frames: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        if f.ndim != 2 or f.shape[1] == 0 or f.shape[1] % 2:
            raise ShapeError(f"features must have shape (T, 2k) with k >= 1, got {f.shape}")
        if not np.isfinite(f).all():
            raise DataError("features contain non-finite values")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        self.features = f
        if not self.particle_ids:
            self.particle_ids = [str(i + 1) for i in range(f.shape[1] // 2)]
        elif len(self.particle_ids) != f.shape[1] // 2:
            raise ShapeError(
                f"{len(self.particle_ids)} particle ids for {f.shape[1] // 2} column pairs"
            )
        self.particle_ids = [str(p) for p in self.particle_ids]
        if self.frames is None:
            self.frames = np.arange(f.shape[0])
        else:
            self.frames = np.asarray(self.frames, dtype=np.int64)
            if self.frames.shape != (f.shape[0],):
                raise ShapeError(
                    f"frames must have shape ({f.shape[0]},), got {self.frames.shape}"
                )

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]

    @property
    def n_particles(self) -> int:
        return self.features.shape[1] // 2

    def positions_at(self, t: int) -> np.ndarray:
        """Positions at frame index ``t`` as an (k, 2) array."""
        return self.features[t].reshape(-1, 2)


@dataclass(frozen=True)
class ScaleParams:
    """Per-column minima and maxima recorded by :func:`minmax_scale`."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.max, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise ShapeError(f"min/max length mismatch: {lo.shape} vs {hi.shape}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)


def minmax_scale(features: np.ndarray) -> tuple[np.ndarray, ScaleParams]:
    """Scale each column to [0, 1] by its own range.

    A constant column maps to all zeros (its recorded min equals its max);
    :func:`inverse_scale` then restores the constant exactly.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got shape {f.shape}")
    lo = f.min(axis=0)
    hi = f.max(axis=0)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (f - lo) / safe
    return scaled, ScaleParams(lo, hi)


def inverse_scale(scaled: np.ndarray, params: ScaleParams) -> np.ndarray:
    """Undo :func:`minmax_scale`: ``x * (max - min) + min`` per column."""
    s = np.asarray(scaled, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] != params.min.size:
        raise ShapeError(
            f"scaled data has shape {s.shape} but scaler covers {params.min.size} columns"
        )
    return s * (params.max - params.min) + params.min


def smooth_trajectories(traj: TrajectorySet, config: signal.SgConfig) -> TrajectorySet:
    """Savitzky-Golay-filter every coordinate column; returns a new set."""
    smoothed = np.column_stack(
        [signal.sg_filter(traj.features[:, j], config) for j in range(traj.features.shape[1])]
    )
    return TrajectorySet(smoothed, dt=traj.dt, particle_ids=list(traj.particle_ids),
                         frames=traj.frames.copy())


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}: column '{column}' is not numeric: {text!r}") from None
    if not np.isfinite(value):
        raise DataError(f"row {row}: column '{column}' is not finite: {text!r}")
    return value


def _parse_int(text: str, row: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"row {row}: column '{column}' is not an integer: {text!r}") from None


def _read_long(rows: list[list[str]], path: str, dt: float) -> TrajectorySet:
    ids: list[str] = []
    data: dict[tuple[int, str], tuple[float, float]] = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise DataError(f"{path}: row {lineno}: expected 4 fields, got {len(row)}")
        frame = _parse_int(row[0], lineno, "frame")
        pid = row[1].strip()
        if not pid:
            raise DataError(f"{path}: row {lineno}: empty particle id")
        x = _parse_float(row[2], lineno, "x")
        y = _parse_float(row[3], lineno, "y")
        key = (frame, pid)
        if key in data:
            raise DataError(f"{path}: duplicate entry for id {pid!r} at frame {frame}")
        if pid not in ids:
            ids.append(pid)
        data[key] = (x, y)
    if not data:
        raise DataError(f"{path}: no data rows")
    frames = sorted({frame for frame, _ in data})
    features = np.empty((len(frames), 2 * len(ids)), dtype=np.float64)
    for t, frame in enumerate(frames):
        for j, pid in enumerate(ids):
            try:
                x, y = data[(frame, pid)]
            except KeyError:
                raise DataError(
                    f"{path}: id {pid!r} missing at frame {frame} (incomplete frame/id grid)"
                ) from None
            features[t, 2 * j] = x
            features[t, 2 * j + 1] = y
    return TrajectorySet(features, dt=dt, particle_ids=ids, frames=np.asarray(frames))


def _read_wide(header: list[str], rows: list[list[str]], path: str, dt: float) -> TrajectorySet:
    ids: list[str] = []
    for j in range(1, len(header), 2):
        cx = header[j]
        cy = header[j + 1] if j + 1 < len(header) else ""
        if not cx.startswith("x_") or not cy.startswith("y_") or cx[2:] != cy[2:] or not cx[2:]:
            raise DataError(
                f"{path}: wide header must pair columns as x_<id>,y_<id>; "
                f"got {cx!r},{cy!r}"
            )
        ids.append(cx[2:])
    if not ids:
        raise DataError(f"{path}: wide header has no coordinate columns")
    frames = []
    features = np.empty((len(rows), 2 * len(ids)), dtype=np.float64)
    seen: set[int] = set()
    for t, (lineno, row) in enumerate(((i, r) for i, r in enumerate(rows, start=2))):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        frame = _parse_int(row[0], lineno, "frame")
        if frame in seen:
            raise DataError(f"{path}: duplicate frame {frame}")
        seen.add(frame)
        frames.append(frame)
        for j, name in enumerate(header[1:], start=1):
            features[t, j - 1] = _parse_float(row[j], lineno, name)
    if not frames:
        raise DataError(f"{path}: no data rows")
    order = np.argsort(np.asarray(frames), kind="stable")
    return TrajectorySet(
        features[order], dt=dt, particle_ids=ids, frames=np.asarray(frames)[order]
    )


def load_trajectories(path: str, fmt: str = "auto", dt: float = 1.0) -> TrajectorySet:
    """Read a trajectory CSV.

    Parameters
    ----------
    path : str
        CSV file with a header row.
    fmt : {"auto", "long", "wide"}
        ``long`` expects ``frame,id,x,y``; ``wide`` expects
        ``frame,x_<id>,y_<id>,...``; ``auto`` picks by the header.
    dt : float
        Sampling interval to attach to the result.
    """
    if fmt not in ("auto", "long", "wide"):
        raise ConfigurationError(f"unknown format {fmt!r}; expected auto, long, or wide")
    if not os.path.exists(path):
        raise DataError(f"trajectory file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    is_long = header == ["frame", "id", "x", "y"]
    is_wide = len(header) >= 3 and header[0] == "frame" and header[1].startswith("x_")
    if fmt == "auto":
        fmt = "long" if is_long else "wide" if is_wide else ""
        if not fmt:
            raise DataError(
                f"{path}: header {header!r} matches neither long (frame,id,x,y) "
                f"nor wide (frame,x_<id>,y_<id>,...) layout"
            )
    if fmt == "long":
        if not is_long:
            raise DataError(f"{path}: expected long header frame,id,x,y, got {header!r}")
        return _read_long(rows, path, dt)
    if not is_wide:
        raise DataError(f"{path}: expected wide header frame,x_<id>,y_<id>,..., got {header!r}")
    return _read_wide(header, rows, path, dt)


def save_trajectories(traj: TrajectorySet, path: str, fmt: str = "long") -> None:
    """Write a trajectory CSV in ``long`` (canonical) or ``wide`` layout.

    Floats are written with ``repr`` so a load/save round trip is exact.
    """
    if fmt not in ("long", "wide"):
        raise ConfigurationError(f"unknown format {fmt!r}; expected long or wide")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fmt == "long":
            writer.writerow(["frame", "id", "x", "y"])
            for t, frame in enumerate(traj.frames):
                for j, pid in enumerate(traj.particle_ids):
                    writer.writerow([
                        int(frame), pid,
                        repr(float(traj.features[t, 2 * j])),
                        repr(float(traj.features[t, 2 * j + 1])),
                    ])
        else:
            header = ["frame"]
            for pid in traj.particle_ids:
                header += [f"x_{pid}", f"y_{pid}"]
            writer.writerow(header)
            for t, frame in enumerate(traj.frames):
                writer.writerow(
                    [int(frame)] + [repr(float(v)) for v in traj.features[t]]
                )


def save_scaler(params: ScaleParams, path: str) -> None:
    """Write scaler parameters as JSON ``{"min": [...], "max": [...]}``."""
    with open(path, "w") as fh:
        json.dump({"min": params.min.tolist(), "max": params.max.tolist()}, fh, indent=2)
        fh.write("\n")


def load_scaler(path: str) -> ScaleParams:
    """Read scaler parameters written by :func:`save_scaler`."""
    if not os.path.exists(path):
        raise DataError(f"scaler file not found: {path}")
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(obj, dict) or "min" not in obj or "max" not in obj:
        raise DataError(f"{path}: expected JSON object with 'min' and 'max' arrays")
    return ScaleParams(np.asarray(obj["min"]), np.asarray(obj["max"]))
