"""Synthetic scene generation: candidate camera rosters on a ground grid."""

from __future__ import annotations

import math

import numpy as np

from .geometry import CameraPose, GroundGrid, Scene


def generate_scene(n_cameras: int, grid: GroundGrid, seed: int,
                   height_range: tuple[float, float] = (4.0, 9.0),
                   hfov_range: tuple[float, float] = (math.radians(55),
                                                      math.radians(95)),
                   vfov_range: tuple[float, float] = (math.radians(40),
                                                      math.radians(60)),
                   range_frac: tuple[float, float] = (0.35, 0.65),
                   twin_fraction: float = 0.0) -> Scene:
    """Place candidate cameras around the scene perimeter, aimed at random
    interior targets, with randomized height, FOV, and range cap. Ranges are
    fractions of the grid diagonal, deliberately short of full coverage so
    that selection has something to trade off.

    twin_fraction > 0 replaces that fraction of the roster (the last cameras)
    with near-duplicates of earlier ones: same aim and optics, position nudged
    by ~1 m. Twins stress diversity-aware selection, since a twin pair adds
    almost no new coverage."""
    if n_cameras < 1:
        raise ValueError("need at least one camera")
    if not (0.0 <= twin_fraction < 1.0):
        raise ValueError("twin_fraction must be in [0, 1)")
    rng = np.random.default_rng(seed)
    ox, oy = grid.origin
    ex, ey = grid.extent_m
    diag = math.hypot(ex, ey)
    cameras = []
    width = len(str(max(n_cameras - 1, 1)))
    for idx in range(n_cameras):
        # perimeter position: walk the boundary by a randomized arc length
        t = (idx + rng.uniform(0.0, 0.8)) / n_cameras * 2.0 * (ex + ey)
        if t < ex:
            x, y = ox + t, oy
        elif t < ex + ey:
            x, y = ox + ex, oy + (t - ex)
        elif t < 2 * ex + ey:
            x, y = ox + ex - (t - ex - ey), oy + ey
        else:
            x, y = ox, oy + ey - (t - 2 * ex - ey)
        target = rng.uniform([ox + 0.15 * ex, oy + 0.15 * ey],
                             [ox + 0.85 * ex, oy + 0.85 * ey])
        z = rng.uniform(*height_range)
        yaw = math.atan2(target[1] - y, target[0] - x)
        ground_dist = math.hypot(target[0] - x, target[1] - y)
        pitch = -math.atan2(z, max(ground_dist, 1e-6)) \
            + rng.uniform(-0.05, 0.05)
        pitch = min(max(pitch, -1.45), -0.05)
        cameras.append(CameraPose(
            id=f"cam{idx:0{width}d}",
            position_3d=(float(x), float(y), float(z)),
            yaw=float(yaw), pitch=float(pitch),
            horizontal_fov_rad=float(rng.uniform(*hfov_range)),
            vertical_fov_rad=float(rng.uniform(*vfov_range)),
            max_range_m=float(diag * rng.uniform(*range_frac))))
    n_twins = int(twin_fraction * n_cameras)
    for k in range(n_twins):
        idx = n_cameras - n_twins + k
        src = cameras[int(rng.integers(idx))]
        dx, dy = rng.uniform(-1.0, 1.0, size=2)
        x, y, z = src.position_3d
        cameras[idx] = CameraPose(
            id=cameras[idx].id,
            position_3d=(x + float(dx), y + float(dy), z),
            yaw=src.yaw, pitch=src.pitch,
            horizontal_fov_rad=src.horizontal_fov_rad,
            vertical_fov_rad=src.vertical_fov_rad,
            max_range_m=src.max_range_m)
    return Scene(grid=grid, cameras=cameras)
