"""Pseudo-supervision pairs mixing selected and unselected views.

Two kinds exist: view-selection-stage pairs (selected group plus one random
unselected view, supervised inside the selected group's FOV union) and
model-training-stage pairs (one selected plus K-1 unselected views,
supervised inside the intersection of the selected union and the pseudo
inputs' union).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crowd import CrowdFrame, DensityMap, rasterize_density, visible_persons
from .geometry import Scene
from .selection import SelectionState

STAGE_VIEWSEL = "viewsel"
STAGE_MODELTRAIN = "modeltrain"
STAGE_REAL = "real"


@dataclass(frozen=True)
class PseudoPair:
    input_view_ids: tuple[str, ...]
    gt_density: DensityMap
    loss_mask: np.ndarray
    stage: str

    def __post_init__(self):
        self.loss_mask.setflags(write=False)
        if (self.gt_density.values[~self.loss_mask] != 0.0).any():
            raise ValueError("gt_density must be zero outside loss_mask")

    def manifest_entry(self) -> dict:
        return {"input_view_ids": list(self.input_view_ids),
                "stage": self.stage,
                "gt_sum": self.gt_density.total}


def _selected_gt(state: SelectionState, scene: Scene, frame: CrowdFrame,
                 kernel_sigma_cells: float,
                 loss_mask: np.ndarray) -> DensityMap:
    vis = visible_persons(frame, state.combined_mask, scene.grid)
    return rasterize_density(CrowdFrame(frame_id=frame.frame_id, persons=vis),
                             scene.grid, kernel_sigma_cells, mask=loss_mask)


def make_viewsel_pair(state: SelectionState, scene: Scene, frame: CrowdFrame,
                      rng: np.random.Generator,
                      kernel_sigma_cells: float = 1.0,
                      exclude: set[str] | None = None) -> PseudoPair:
    """Selected group plus one random unselected view; GT is the selected
    group's covered-crowd density, masked by the group's FOV union."""
    unselected = sorted(set(scene.camera_ids) - set(state.selected))
    if not unselected:
        raise ValueError("no unselected cameras available")
    pool = [c for c in unselected if not exclude or c not in exclude] or unselected
    extra = pool[int(rng.integers(len(pool)))]
    loss_mask = state.combined_mask
    gt = _selected_gt(state, scene, frame, kernel_sigma_cells, loss_mask)
    return PseudoPair(input_view_ids=tuple(state.selected) + (extra,),
                      gt_density=gt, loss_mask=loss_mask, stage=STAGE_VIEWSEL)


def make_modeltrain_pair(state: SelectionState, scene: Scene,
                         frame: CrowdFrame, rng: np.random.Generator,
                         kernel_sigma_cells: float = 1.0,
                         exclude: set[str] | None = None) -> PseudoPair:
    """One random selected view plus K-1 random unselected views; GT is the
    K-selected-view density, masked by the intersection of the selected FOV
    union and the pseudo inputs' FOV union."""
    k = len(state.selected)
    unselected = sorted(set(scene.camera_ids) - set(state.selected))
    if len(unselected) < k - 1:
        raise ValueError(f"need {k - 1} unselected cameras, have {len(unselected)}")
    kept = state.selected[int(rng.integers(k))]
    pool = [c for c in unselected if not exclude or c not in exclude]
    if len(pool) < k - 1:
        pool = unselected
    picks = [pool[i] for i in rng.choice(len(pool), size=k - 1, replace=False)]
    inputs = (kept,) + tuple(picks)
    pseudo_union = scene.visibility_of(list(inputs))
    loss_mask = state.combined_mask & pseudo_union
    gt = _selected_gt(state, scene, frame, kernel_sigma_cells, loss_mask)
    return PseudoPair(input_view_ids=inputs, gt_density=gt,
                      loss_mask=loss_mask, stage=STAGE_MODELTRAIN)


def make_training_batch(state: SelectionState, scene: Scene,
                        frames: list[CrowdFrame], rng: np.random.Generator,
                        ratio: tuple[int, int] = (1, 1),
                        kernel_sigma_cells: float = 1.0) -> list[PseudoPair]:
    """Interleave real labeled pairs and model-training pseudo pairs at the
    given real:pseudo ratio, per frame. Unselected views already used for
    pseudo inputs in this batch are avoided until the pool is exhausted."""
    n_real, n_pseudo = ratio
    if n_real < 0 or n_pseudo < 0:
        raise ValueError("ratio parts must be nonnegative")
    batch: list[PseudoPair] = []
    used: set[str] = set()
    n_unselected = len(scene.camera_ids) - len(state.selected)
    for frame in frames:
        for _ in range(n_real):
            gt = _selected_gt(state, scene, frame, kernel_sigma_cells,
                              state.combined_mask)
            batch.append(PseudoPair(input_view_ids=tuple(state.selected),
                                    gt_density=gt,
                                    loss_mask=state.combined_mask,
                                    stage=STAGE_REAL))
        for _ in range(n_pseudo):
            if n_unselected - len(used) < len(state.selected) - 1:
                used = set()
            pair = make_modeltrain_pair(state, scene, frame, rng,
                                        kernel_sigma_cells, exclude=used)
            used.update(set(pair.input_view_ids) - set(state.selected))
            batch.append(pair)
    return batch
