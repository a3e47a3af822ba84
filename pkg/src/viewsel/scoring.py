"""View-selection scores: geometric terms and their prediction-driven variants.

The combined geometric score multiplies three factors: the visible-area
ratio, the mean inverse camera distance over the scored region, and an
exponential view-diversity penalty. The active variants swap the scored
region for the binarized prediction, and optionally weight the distance
field by the predicted density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crowd import DensityMap
from .geometry import (CameraPose, DegenerateAxisError, FovFootprint,
                       GroundGrid, Scene, combined_visibility,
                       ground_axis_and_position)

DEFAULT_LAMBDA = 0.1
DEFAULT_EPSILON = 1e-10

ALL_TERMS = ("sc", "ad", "vd")


class EmptyRegionError(ValueError):
    """A mean over the scored region was requested but the region is empty."""


@dataclass(frozen=True)
class ScoreBreakdown:
    s_sc: float
    s_ad: float
    s_vd: float
    total: float
    variant: str  # "geometric" | "mask" | "density"

    def to_dict(self) -> dict:
        return {"s_sc": self.s_sc, "s_ad": self.s_ad, "s_vd": self.s_vd,
                "total": self.total, "variant": self.variant}


def score_scene_coverage(visible: np.ndarray, grid: GroundGrid) -> float:
    """Visible-cell fraction of the full scene area."""
    if visible.shape != grid.shape:
        raise ValueError("visible mask does not match grid")
    return float(visible.sum()) / grid.n_cells


def _distance_to(camera: CameraPose, grid: GroundGrid) -> np.ndarray:
    """Metric distance from each cell center to the camera's ground position,
    floored at half a cell to guard the inverse-distance singularity."""
    X, Y = grid.cell_centers()
    cx, cy = camera.ground_position
    return np.maximum(np.hypot(X - cx, Y - cy), grid.cell_size_m / 2.0)


def inverse_distance_field(selected: list[CameraPose],
                           footprints: list[FovFootprint],
                           grid: GroundGrid) -> np.ndarray:
    """Per-cell sum of inverse camera distances, each camera contributing
    only inside its own footprint."""
    if not selected:
        raise ValueError("selected must be nonempty")
    if len(selected) != len(footprints):
        raise ValueError("one footprint per selected camera required")
    field = np.zeros(grid.shape)
    for cam, fp in zip(selected, footprints):
        field += fp.mask / _distance_to(cam, grid)
    return field


def density_weighted_field(selected: list[CameraPose],
                           footprints: list[FovFootprint],
                           grid: GroundGrid,
                           density: DensityMap) -> np.ndarray:
    """Inverse-distance field with each contribution weighted by the
    predicted density at the cell."""
    if density.values.shape != grid.shape:
        raise ValueError("density does not match grid")
    field = np.zeros(grid.shape)
    for cam, fp in zip(selected, footprints):
        field += fp.mask * density.values / _distance_to(cam, grid)
    return field


def score_average_distance(field: np.ndarray, visible: np.ndarray) -> float:
    """Mean of the distance field over the visible region."""
    n = int(visible.sum())
    if n == 0:
        raise EmptyRegionError("cannot average over an empty region")
    return float(field[visible].sum()) / n


def score_view_diversity(selected: list[CameraPose], lam: float = DEFAULT_LAMBDA,
                         eps: float = DEFAULT_EPSILON) -> float:
    """exp(-lam * sum over pairs of axis-dot / (camera distance + eps)).

    Straight-down cameras have no ground axis; any pair involving one
    contributes a zero dot product.
    """
    if not selected:
        raise ValueError("selected must be nonempty")
    if lam <= 0 or eps <= 0:
        raise ValueError("lam and eps must be positive")
    axes = []
    positions = []
    for cam in selected:
        try:
            axis, pos = ground_axis_and_position(cam)
        except DegenerateAxisError:
            axis, pos = None, np.array(cam.ground_position)
        axes.append(axis)
        positions.append(pos)
    acc = 0.0
    for i in range(len(selected)):
        for j in range(i + 1, len(selected)):
            if axes[i] is None or axes[j] is None:
                continue
            dot = float(axes[i] @ axes[j])
            dist = float(np.linalg.norm(positions[i] - positions[j]))
            acc += dot / (dist + eps)
    return float(np.exp(-lam * acc))


def _footprints_for(selected: list[CameraPose], scene: Scene) -> list[FovFootprint]:
    return [scene.footprint(cam.id) for cam in selected]


def _combine(region: np.ndarray, field: np.ndarray, s_vd: float,
             grid: GroundGrid, variant: str,
             terms: tuple[str, ...]) -> ScoreBreakdown:
    n_region = int(region.sum())
    s_sc = n_region / grid.n_cells
    s_ad = float(field[region].sum()) / n_region if n_region else 0.0
    total = 1.0
    if "sc" in terms:
        total *= s_sc
    if "ad" in terms:
        total *= s_ad
    if "vd" in terms:
        total *= s_vd
    if n_region == 0:
        total = 0.0
    return ScoreBreakdown(s_sc=s_sc, s_ad=s_ad, s_vd=s_vd, total=total,
                          variant=variant)


def score_geometric(selected: list[CameraPose], scene: Scene,
                    lam: float = DEFAULT_LAMBDA, eps: float = DEFAULT_EPSILON,
                    terms: tuple[str, ...] = ALL_TERMS) -> ScoreBreakdown:
    """Combined geometric score over the selected views' FOV union."""
    if not selected:
        raise ValueError("selected must be nonempty")
    footprints = _footprints_for(selected, scene)
    region = combined_visibility(footprints, scene.grid)
    field = inverse_distance_field(selected, footprints, scene.grid)
    s_vd = score_view_diversity(selected, lam, eps)
    return _combine(region, field, s_vd, scene.grid, "geometric", terms)


def binarize_density(density: DensityMap, sigma_mode) -> np.ndarray:
    """Threshold a density map into a crowd-region mask (strict inequality).

    sigma_mode "mean" uses the mean of the map; a float is an absolute
    threshold. An all-zero map under "mean" yields the all-false mask.
    """
    if sigma_mode == "mean":
        threshold = float(density.values.mean())
    else:
        threshold = float(sigma_mode)
    return density.values > threshold


def score_mask(selected: list[CameraPose], scene: Scene,
               prediction: DensityMap, sigma_mode="mean",
               lam: float = DEFAULT_LAMBDA, eps: float = DEFAULT_EPSILON,
               terms: tuple[str, ...] = ALL_TERMS) -> ScoreBreakdown:
    """Geometric score with the binarized prediction as the scored region."""
    if not selected:
        raise ValueError("selected must be nonempty")
    if prediction.values.shape != scene.grid.shape:
        raise ValueError("prediction does not match scene grid")
    footprints = _footprints_for(selected, scene)
    region = binarize_density(prediction, sigma_mode)
    field = inverse_distance_field(selected, footprints, scene.grid)
    s_vd = score_view_diversity(selected, lam, eps)
    return _combine(region, field, s_vd, scene.grid, "mask", terms)


def score_density(selected: list[CameraPose], scene: Scene,
                  prediction: DensityMap, sigma_mode="mean",
                  lam: float = DEFAULT_LAMBDA, eps: float = DEFAULT_EPSILON,
                  terms: tuple[str, ...] = ALL_TERMS) -> ScoreBreakdown:
    """Mask-region score with density-weighted inverse camera distances."""
    if not selected:
        raise ValueError("selected must be nonempty")
    if prediction.values.shape != scene.grid.shape:
        raise ValueError("prediction does not match scene grid")
    footprints = _footprints_for(selected, scene)
    region = binarize_density(prediction, sigma_mode)
    field = density_weighted_field(selected, footprints, scene.grid, prediction)
    s_vd = score_view_diversity(selected, lam, eps)
    return _combine(region, field, s_vd, scene.grid, "density", terms)
