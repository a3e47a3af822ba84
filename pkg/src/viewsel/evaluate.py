"""End-to-end evaluation against scene-level ground truth.

Whatever views were selected, evaluation always compares predictions to the
ground truth built from ALL people in the scene, never to the selected-view
ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crowd import CrowdFrame, cover_rate
from .geometry import Scene
from .metrics import (CountingReport, LocalizationReport, counting_metrics,
                      extract_peaks, localization_metrics, match_points)
from .predictor import PredictorConfig, noisy_predict
from .selection import SelectionState


@dataclass(frozen=True)
class EvalReport:
    counting: CountingReport
    localization: LocalizationReport
    cover_rate: float

    def to_dict(self) -> dict:
        return {"counting": self.counting.to_dict(),
                "localization": self.localization.to_dict(),
                "cover_rate": self.cover_rate}


def evaluate(scene: Scene, trace: list[CrowdFrame], state: SelectionState,
             predictor: PredictorConfig, threshold_m: float = 0.5,
             peak_min_value: float = 0.05,
             nms_radius_cells: float = 2.0) -> EvalReport:
    """Counting and localization metrics of the predictor under the selected
    views, against scene-level GT, accumulated over all trace frames."""
    pred_counts, gt_counts = [], []
    tp_matches: list[tuple[int, int, float]] = []
    fp_total = fn_total = gt_total = 0
    for frame in trace:
        pred = noisy_predict(frame, state.combined_mask, scene, predictor,
                             selected_ids=list(state.selected))
        pred_counts.append(pred.total)
        gt_counts.append(float(len(frame.persons)))
        peaks = extract_peaks(pred, scene.grid, peak_min_value,
                              nms_radius_cells)
        gt_pts = [p.position for p in frame.persons]
        matches, fp, fn = match_points(peaks, gt_pts, threshold_m)
        tp_matches.extend(matches)
        fp_total += len(fp)
        fn_total += len(fn)
        gt_total += len(gt_pts)
    cr = cover_rate(trace, state.combined_mask, scene.grid)
    counting = counting_metrics(pred_counts, gt_counts, cover_rate=cr)
    localization = localization_metrics(tp_matches, fp_total, fn_total,
                                        gt_total, threshold_m)
    return EvalReport(counting=counting, localization=localization,
                      cover_rate=cr)
