"""View selection strategies: frame selection, greedy view addition, the
independent and active pipelines, random baselines, and a brute-force oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .crowd import CrowdFrame, DensityMap, cover_rate, rasterize_density, \
    visible_persons
from .geometry import Scene
from .predictor import PredictorConfig, calibrate, noisy_predict, oracle_predict
from .scoring import (ALL_TERMS, DEFAULT_EPSILON, DEFAULT_LAMBDA,
                      ScoreBreakdown, score_density, score_geometric,
                      score_mask)

STRATEGIES = ("geometric", "mask", "density", "random")
PSEUDO_STAGES = ("none", "viewsel", "modeltrain", "both")


@dataclass(frozen=True)
class SelectionConfig:
    k_max: int = 5
    n_frames: int = 20
    strategy: str = "geometric"
    tau: float = 20.0  # training-gate threshold on the simulated MAE
    lam: float = DEFAULT_LAMBDA
    epsilon: float = DEFAULT_EPSILON
    sigma_mode: "str | float" = "mean"
    seed: int = 0
    epochs: int = 40
    terms: tuple[str, ...] = ALL_TERMS
    pseudo_stages: str = "both"
    pseudo_credit: float = 0.25

    def __post_init__(self):
        if self.k_max < 1 or self.n_frames < 1:
            raise ValueError("k_max and n_frames must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.pseudo_stages not in PSEUDO_STAGES:
            raise ValueError(f"unknown pseudo_stages {self.pseudo_stages!r}")

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "n_frames": self.n_frames,
                "strategy": self.strategy, "tau": self.tau, "lam": self.lam,
                "epsilon": self.epsilon, "sigma_mode": self.sigma_mode,
                "seed": self.seed, "epochs": self.epochs,
                "terms": list(self.terms),
                "pseudo_stages": self.pseudo_stages,
                "pseudo_credit": self.pseudo_credit}

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionConfig":
        d = dict(d)
        d["terms"] = tuple(d.get("terms", ALL_TERMS))
        return cls(**d)


@dataclass(frozen=True)
class SelectionState:
    """Ordered selected-view group with its cached combined visibility."""

    scene_id: str
    selected: tuple[str, ...]
    combined_mask: np.ndarray
    history: tuple[tuple[str, ScoreBreakdown | None], ...] = ()
    non_converged: bool = False

    def __post_init__(self):
        self.combined_mask.setflags(write=False)
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected views must be unique")

    def to_dict(self) -> dict:
        return {"scene_id": self.scene_id, "selected": list(self.selected),
                "non_converged": self.non_converged,
                "history": [
                    {"added_id": cid,
                     "score": None if sb is None else sb.to_dict()}
                    for cid, sb in self.history]}


@dataclass(frozen=True)
class LabeledDataset:
    """Manifest of labeled (frame, view) pairs plus selected-view GT rasters."""

    frame_ids: tuple[int, ...]
    camera_ids: tuple[str, ...]
    gt_density: dict[int, DensityMap] = field(default_factory=dict)

    @property
    def pairs(self) -> list[tuple[int, str]]:
        return [(f, c) for f in self.frame_ids for c in self.camera_ids]

    @property
    def budget_images(self) -> int:
        return len(self.frame_ids) * len(self.camera_ids)

    def manifest(self) -> dict:
        return {"frame_ids": list(self.frame_ids),
                "camera_ids": list(self.camera_ids),
                "pairs": [[f, c] for f, c in self.pairs],
                "budget_images": self.budget_images}


def _initial_state(scene: Scene, first_id: str) -> SelectionState:
    return SelectionState(scene_id="scene",
                          selected=(first_id,),
                          combined_mask=scene.visibility_of([first_id]),
                          history=((first_id, None),))


def _largest_fov_camera(scene: Scene) -> str:
    return min(scene.camera_ids,
               key=lambda cid: (-scene.footprint(cid).area_cells, cid))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; an all-zero vector is treated as maximally similar
    so undefined candidates fall back to frame-id order."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 1.0
    return float(u @ v) / (nu * nv)


def select_frames(scene: Scene, trace: list[CrowdFrame], predict_fn,
                  f: int) -> list[int]:
    """Pick f frame ids: first the frame with the largest predicted count in
    the widest camera's footprint, then greedily the frame least similar
    (by max cosine over already-selected) in that camera's density features.

    predict_fn(frame, visibility) -> DensityMap.
    """
    if f > len(trace):
        raise ValueError(f"cannot select {f} frames from {len(trace)}")
    if not trace:
        raise ValueError("trace is empty")
    v_max = _largest_fov_camera(scene)
    fov = scene.footprint(v_max).mask
    features = {}
    for frame in trace:
        pred = predict_fn(frame, fov)
        features[frame.frame_id] = pred.values[fov].ravel()
    ids = sorted(features)
    first = min(ids, key=lambda fid: (-features[fid].sum(), fid))
    chosen = [first]
    remaining = [fid for fid in ids if fid != first]
    while len(chosen) < f:
        best = min(remaining,
                   key=lambda fid: (max(_cosine(features[fid], features[c])
                                        for c in chosen), fid))
        chosen.append(best)
        remaining.remove(best)
    return chosen


def select_first_view(scene: Scene, frames: list[CrowdFrame], predict_fn,
                      mode: str) -> str:
    """First view by footprint area ("largest_fov") or by predicted crowd
    count summed over the selected frames ("largest_predicted_count")."""
    if mode == "largest_fov":
        return _largest_fov_camera(scene)
    if mode == "largest_predicted_count":
        def total_count(cid: str) -> float:
            fov = scene.footprint(cid).mask
            return sum(predict_fn(frame, fov).total for frame in frames)
        return min(scene.camera_ids, key=lambda cid: (-total_count(cid), cid))
    raise ValueError(f"unknown first-view mode {mode!r}")


def add_view(scene: Scene, state: SelectionState,
             score_fn) -> SelectionState:
    """One round of greedy view addition: score every unselected candidate
    together with the current group, append the argmax (ties by camera id).

    score_fn(candidate_ids: list[str]) -> ScoreBreakdown.
    """
    unselected = [cid for cid in scene.camera_ids if cid not in state.selected]
    if not unselected:
        raise ValueError("no unselected cameras remain")
    best_id, best_score = None, None
    for cid in sorted(unselected):
        sb = score_fn(list(state.selected) + [cid])
        if best_score is None or sb.total > best_score.total:
            best_id, best_score = cid, sb
    selected = state.selected + (best_id,)
    return replace(state, selected=selected,
                   combined_mask=scene.visibility_of(list(selected)),
                   history=state.history + ((best_id, best_score),))


def _frames_by_id(trace: list[CrowdFrame], ids: list[int]) -> list[CrowdFrame]:
    by_id = {f.frame_id: f for f in trace}
    return [by_id[i] for i in ids]


def _build_dataset(scene: Scene, frames: list[CrowdFrame],
                   state: SelectionState,
                   kernel_sigma_cells: float) -> LabeledDataset:
    gt = {}
    for frame in frames:
        vis = visible_persons(frame, state.combined_mask, scene.grid)
        gt[frame.frame_id] = rasterize_density(
            CrowdFrame(frame_id=frame.frame_id, persons=vis),
            scene.grid, kernel_sigma_cells, mask=state.combined_mask)
    return LabeledDataset(frame_ids=tuple(f.frame_id for f in frames),
                          camera_ids=tuple(state.selected), gt_density=gt)


def mean_prediction(scene: Scene, frames: list[CrowdFrame],
                    visibility: np.ndarray,
                    predictor: PredictorConfig,
                    selected_ids: list[str] | None = None) -> DensityMap:
    """Per-frame noisy predictions for the current selected views, averaged
    into the single map consumed by the active scores."""
    acc = np.zeros(scene.grid.shape)
    for frame in frames:
        acc += noisy_predict(frame, visibility, scene, predictor,
                             selected_ids=selected_ids).values
    return DensityMap(values=acc / max(len(frames), 1))


def view_person_credit(scene: Scene, frames: list[CrowdFrame],
                       camera_id: str) -> float:
    """Mean fraction of a frame's people visible in one camera's footprint.

    Labeling a view-frame supervises only the people it shows, so training
    credit is weighted by covered-person fraction rather than counted as a
    flat image.
    """
    fov = scene.footprint(camera_id).mask
    fracs = []
    for frame in frames:
        n = len(frame.persons)
        if n:
            fracs.append(len(visible_persons(frame, fov, scene.grid)) / n)
    return float(np.mean(fracs)) if fracs else 0.0


def _epoch_credit(scene: Scene, frames: list[CrowdFrame],
                  selected: tuple[str, ...], config: SelectionConfig,
                  stage: str) -> float:
    """Per-epoch calibration credit in effective view-frames: labeled views
    weighted by person coverage, plus fractional pseudo-label credit from
    the unselected views the enabled pseudo stage mixes in."""
    f = len(frames)
    credit = f * sum(view_person_credit(scene, frames, cid) for cid in selected)
    unselected = [cid for cid in scene.camera_ids if cid not in selected]
    if unselected and stage != "off":
        mean_unsel = float(np.mean(
            [view_person_credit(scene, frames, cid) for cid in unselected]))
        if stage == "viewsel":
            n_pseudo_views = 1.0  # selected group plus one unselected view
        else:
            n_pseudo_views = float(len(selected) - 1)  # 1 selected + K-1 others
        credit += config.pseudo_credit * f * n_pseudo_views * mean_unsel
    return credit


def run_ivs(scene: Scene, trace: list[CrowdFrame], config: SelectionConfig,
            predictor: PredictorConfig | None = None
            ) -> tuple[SelectionState, LabeledDataset]:
    """Independent pipeline: geometry-only greedy selection, then labeling."""
    if config.strategy != "geometric":
        raise ValueError("run_ivs requires the geometric strategy")
    predictor = predictor or PredictorConfig()
    sigma = predictor.kernel_sigma_cells

    def predict(frame, vis):
        return oracle_predict(frame, vis, scene, sigma)

    frame_ids = select_frames(scene, trace, predict, config.n_frames)
    frames = _frames_by_id(trace, frame_ids)
    first = select_first_view(scene, frames, predict, "largest_fov")
    state = _initial_state(scene, first)
    k = min(config.k_max, len(scene.cameras))
    while len(state.selected) < k:
        state = add_view(
            scene, state,
            lambda ids: score_geometric([scene.camera(c) for c in ids], scene,
                                        config.lam, config.epsilon,
                                        config.terms))
    dataset = _build_dataset(scene, frames, state, sigma)
    return state, dataset


def run_avs(scene: Scene, trace: list[CrowdFrame], config: SelectionConfig,
            predictor: PredictorConfig
            ) -> tuple[SelectionState, LabeledDataset, PredictorConfig]:
    """Active loop: interleave simulated training with score-driven view
    addition, gated by the training metric passing tau.

    Each epoch credits the predictor with the currently labeled view-frames
    (plus fractional pseudo-label credit when enabled); a view is added when
    the simulated MAE drops below tau and the budget K is not yet reached.
    Non-convergence within the epoch budget sets the non_converged flag.
    """
    if config.strategy not in ("mask", "density"):
        raise ValueError("run_avs requires the mask or density strategy")
    score_one = score_mask if config.strategy == "mask" else score_density

    def predict(frame, vis):
        return noisy_predict(frame, vis, scene, predictor)

    frame_ids = select_frames(scene, trace, predict, config.n_frames)
    frames = _frames_by_id(trace, frame_ids)
    first = select_first_view(scene, frames, predict, "largest_predicted_count")
    state = _initial_state(scene, first)
    k = min(config.k_max, len(scene.cameras))
    pseudo_viewsel = config.pseudo_stages in ("viewsel", "both")
    pseudo_modeltrain = config.pseudo_stages in ("modeltrain", "both")

    for _ in range(config.epochs):
        if pseudo_viewsel and len(state.selected) < k:
            stage = "viewsel"
        elif pseudo_modeltrain and len(state.selected) >= k:
            stage = "modeltrain"
        else:
            stage = "off"
        credit = _epoch_credit(scene, frames, state.selected, config, stage)
        predictor, metric = calibrate(predictor, credit, scene=scene,
                                      frames=frames,
                                      visibility=state.combined_mask,
                                      selected_ids=list(state.selected))
        if metric is not None and metric <= config.tau \
                and len(state.selected) < k:
            m_avg = mean_prediction(scene, frames, state.combined_mask,
                                    predictor, list(state.selected))
            state = add_view(
                scene, state,
                lambda ids: score_one([scene.camera(c) for c in ids], scene,
                                      m_avg, config.sigma_mode, config.lam,
                                      config.epsilon, config.terms))
    if len(state.selected) < k:
        state = replace(state, non_converged=True)
    # once the budget is reached the downstream model is trained again on
    # the labeled views, so the active pipeline ends with a full training pass
    for _ in range(config.epochs):
        credit = _epoch_credit(scene, frames, state.selected, config,
                               "modeltrain" if pseudo_modeltrain else "off")
        predictor, _ = calibrate(predictor, credit, scene=scene, frames=frames,
                                 visibility=state.combined_mask,
                                 selected_ids=list(state.selected))
    dataset = _build_dataset(scene, frames, state, predictor.kernel_sigma_cells)
    return state, dataset, predictor


def train_after_selection(scene: Scene, frames: list[CrowdFrame],
                          state: SelectionState, config: SelectionConfig,
                          predictor: PredictorConfig
                          ) -> PredictorConfig:
    """Simulated post-selection training for the independent and random
    pipelines: repeated calibration on the labeled budget, with pseudo-label
    credit when the modeltrain stage is enabled."""
    pseudo = config.pseudo_stages in ("modeltrain", "both")
    for _ in range(config.epochs):
        credit = _epoch_credit(scene, frames, state.selected, config,
                               "modeltrain" if pseudo else "off")
        predictor, _ = calibrate(predictor, credit, scene=scene, frames=frames,
                                 visibility=state.combined_mask,
                                 selected_ids=list(state.selected))
    return predictor


def random_select(scene: Scene, k: int, seed: int,
                  mode: str = "at_once") -> SelectionState:
    """Uniform random baseline; "at_once" samples a k-subset directly,
    "one_by_one" draws views sequentially (same law, different draw path)."""
    if k > len(scene.cameras):
        raise ValueError("k exceeds camera count")
    rng = np.random.default_rng(seed)
    ids = sorted(scene.camera_ids)
    if mode == "at_once":
        chosen = list(rng.choice(ids, size=k, replace=False))
    elif mode == "one_by_one":
        chosen = []
        pool = list(ids)
        for _ in range(k):
            pick = pool[int(rng.integers(len(pool)))]
            chosen.append(pick)
            pool.remove(pick)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    chosen = [str(c) for c in chosen]
    history = tuple((cid, None) for cid in chosen)
    return SelectionState(scene_id="scene", selected=tuple(chosen),
                          combined_mask=scene.visibility_of(chosen),
                          history=history)


def brute_force_best(scene: Scene, trace: list[CrowdFrame], k: int,
                     objective: str = "cover_rate",
                     lam: float = DEFAULT_LAMBDA,
                     eps: float = DEFAULT_EPSILON,
                     budget: int = 50_000) -> tuple[tuple[str, ...], float]:
    """Exhaustive maximization over all k-subsets (ties by lexicographic id)."""
    n = len(scene.cameras)
    n_subsets = 1
    for i in range(k):
        n_subsets = n_subsets * (n - i) // (i + 1)
    if n_subsets > budget:
        raise ValueError(f"{n_subsets} subsets exceed budget {budget}")
    ids = sorted(scene.camera_ids)
    best_set, best_val = None, -np.inf
    for subset in itertools.combinations(ids, k):
        if objective == "cover_rate":
            val = cover_rate(trace, scene.visibility_of(list(subset)),
                             scene.grid)
        elif objective == "geometric_score":
            val = score_geometric([scene.camera(c) for c in subset], scene,
                                  lam, eps).total
        else:
            raise ValueError(f"unknown objective {objective!r}")
        if val > best_val:
            best_set, best_val = subset, val
    return best_set, float(best_val)
