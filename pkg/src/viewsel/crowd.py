"""Synthetic crowds, ground-plane density rasters, and coverage accounting."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import GroundGrid


class UndefinedCoverRateError(ValueError):
    """Cover rate requested over frames containing no people at all."""


@dataclass(frozen=True)
class Person:
    position: tuple[float, float]


@dataclass(frozen=True)
class CrowdFrame:
    """All person ground positions at one synchronized timestamp."""

    frame_id: int
    persons: list[Person]

    def positions(self) -> np.ndarray:
        if not self.persons:
            return np.zeros((0, 2))
        return np.array([p.position for p in self.persons])


@dataclass(frozen=True)
class DensityMap:
    """Nonnegative crowd density raster aligned to a GroundGrid."""

    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)
        if (self.values < 0).any():
            raise ValueError("density values must be nonnegative")

    @property
    def total(self) -> float:
        return float(self.values.sum())


def generate_crowd_trace(grid: GroundGrid, n_frames: int,
                         count_range: tuple[int, int], clustering: float,
                         seed: int) -> list[CrowdFrame]:
    """Synthesize a deterministic trace of crowd frames.

    clustering=0 places people uniformly over the grid extent; as clustering
    approaches 1, an increasing fraction of each frame concentrates around a
    few Gaussian cluster centers. Positions are clamped into the grid extent.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    lo, hi = count_range
    if lo < 0 or hi < lo:
        raise ValueError(f"bad count_range {count_range}")
    if not (0.0 <= clustering <= 1.0):
        raise ValueError("clustering must be in [0, 1]")
    rng = np.random.default_rng(seed)
    ox, oy = grid.origin
    ex, ey = grid.extent_m
    # keep clamped points strictly inside the extent
    pad = 1e-9 * max(ex, ey, 1.0)
    frames = []
    for fid in range(n_frames):
        n = int(rng.integers(lo, hi + 1))
        n_clustered = int(round(clustering * n))
        pts = []
        if n - n_clustered > 0:
            u = rng.uniform([ox, oy], [ox + ex, oy + ey],
                            size=(n - n_clustered, 2))
            pts.append(u)
        if n_clustered > 0:
            n_centers = int(rng.integers(2, 5))
            centers = rng.uniform([ox + 0.1 * ex, oy + 0.1 * ey],
                                  [ox + 0.9 * ex, oy + 0.9 * ey],
                                  size=(n_centers, 2))
            # heterogeneous cluster sizes so crowd mass is unevenly spread
            weights = rng.dirichlet(np.full(n_centers, 0.7))
            assign = rng.choice(n_centers, size=n_clustered, p=weights)
            spread = 0.06 * min(ex, ey)
            c = centers[assign] + rng.normal(0.0, spread, size=(n_clustered, 2))
            pts.append(c)
        if pts:
            xy = np.concatenate(pts)
            xy[:, 0] = np.clip(xy[:, 0], ox + pad, ox + ex - pad)
            xy[:, 1] = np.clip(xy[:, 1], oy + pad, oy + ey - pad)
        else:
            xy = np.zeros((0, 2))
        frames.append(CrowdFrame(
            frame_id=fid,
            persons=[Person(position=(float(x), float(y))) for x, y in xy]))
    return frames


def rasterize_density(frame: CrowdFrame, grid: GroundGrid,
                      kernel_sigma_cells: float,
                      mask: np.ndarray | None = None) -> DensityMap:
    """Rasterize a frame as a sum of per-person Gaussian kernels.

    Each person contributes an isotropic Gaussian truncated at 4 sigma and
    renormalized to unit mass over its in-bounds window, so the unmasked map
    sums to the person count. The optional mask zeroes cells afterwards
    without renormalizing, so boundary-straddling people keep partial mass.
    """
    if kernel_sigma_cells <= 0:
        raise ValueError("kernel_sigma_cells must be positive")
    h, w = grid.shape
    values = np.zeros((h, w))
    ox, oy = grid.origin
    cs = grid.cell_size_m
    radius = int(math.ceil(4.0 * kernel_sigma_cells))
    inv_two_sigma2 = 1.0 / (2.0 * kernel_sigma_cells ** 2)
    for person in frame.persons:
        px = (person.position[0] - ox) / cs - 0.5  # in cell-center units
        py = (person.position[1] - oy) / cs - 0.5
        j0, i0 = int(round(px)), int(round(py))
        i_lo, i_hi = max(i0 - radius, 0), min(i0 + radius, h - 1)
        j_lo, j_hi = max(j0 - radius, 0), min(j0 + radius, w - 1)
        if i_lo > i_hi or j_lo > j_hi:
            continue
        ii = np.arange(i_lo, i_hi + 1)
        jj = np.arange(j_lo, j_hi + 1)
        d2 = ((ii - py) ** 2)[:, None] + ((jj - px) ** 2)[None, :]
        kern = np.exp(-d2 * inv_two_sigma2)
        kern[d2 > (4.0 * kernel_sigma_cells) ** 2] = 0.0
        s = kern.sum()
        if s > 0:
            values[i_lo:i_hi + 1, j_lo:j_hi + 1] += kern / s
    if mask is not None:
        if mask.shape != grid.shape:
            raise ValueError("mask shape does not match grid")
        values[~mask] = 0.0
    return DensityMap(values=values)


def visible_persons(frame: CrowdFrame, visibility: np.ndarray,
                    grid: GroundGrid) -> list[Person]:
    """People whose containing grid cell is visible (boundary clamps in-bounds)."""
    if visibility.shape != grid.shape:
        raise ValueError("visibility shape does not match grid")
    out = []
    for person in frame.persons:
        i, j = grid.world_to_cell(*person.position)
        if visibility[i, j]:
            out.append(person)
    return out


def cover_rate(frames: list[CrowdFrame], visibility: np.ndarray,
               grid: GroundGrid) -> float:
    """Fraction of all people across frames lying inside the visible region."""
    covered = 0
    total = 0
    for frame in frames:
        total += len(frame.persons)
        covered += len(visible_persons(frame, visibility, grid))
    if total == 0:
        raise UndefinedCoverRateError("no persons in any frame")
    return covered / total


# --- trace I/O -------------------------------------------------------------

def trace_to_csv(frames: list[CrowdFrame], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame_id", "person_idx", "x_m", "y_m"])
        for frame in frames:
            for idx, person in enumerate(frame.persons):
                writer.writerow([frame.frame_id, idx,
                                 repr(person.position[0]),
                                 repr(person.position[1])])


def trace_from_csv(path) -> list[CrowdFrame]:
    by_frame: dict[int, list[Person]] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            fid = int(row["frame_id"])
            by_frame.setdefault(fid, []).append(
                Person(position=(float(row["x_m"]), float(row["y_m"]))))
    return [CrowdFrame(frame_id=fid, persons=by_frame[fid])
            for fid in sorted(by_frame)]


def trace_to_json(frames: list[CrowdFrame]) -> list:
    return [{"frame_id": f.frame_id,
             "persons": [[p.position[0], p.position[1]] for p in f.persons]}
            for f in frames]


def trace_from_json(data: list) -> list[CrowdFrame]:
    return [CrowdFrame(frame_id=int(f["frame_id"]),
                       persons=[Person(position=(float(x), float(y)))
                                for x, y in f["persons"]])
            for f in data]
