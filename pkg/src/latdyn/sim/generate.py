"""Dataset assembly: simulate, render, split, optionally thin to irregular grids.

Mechanical and wave systems draw independent initial conditions per
trajectory. The reaction-diffusion and cylinder-flow systems run once for a
long time and are chopped into trajectories of consecutive samples, matching
how their datasets are built.
"""

from dataclasses import replace

import numpy as np

from ..data import Dataset, Trajectory, make_irregular, split_dataset
from .config import SimConfig, StateTrajectory
from .render import field_bounds, render_frames

CHOPPED_SYSTEMS = ("reaction_diffusion", "lbm_cylinder")


def _state_trajectories(cfg: SimConfig, n_trajectories, seed):
    from . import simulate

    if cfg.system in CHOPPED_SYSTEMS:
        total = n_trajectories * cfg.n_frames
        long_cfg = replace(
            cfg, n_frames=total, duration=cfg.duration * n_trajectories, seed=seed
        )
        long_run = simulate(long_cfg)
        out = []
        for i in range(n_trajectories):
            states = long_run.states[i * cfg.n_frames : (i + 1) * cfg.n_frames]
            out.append(StateTrajectory(cfg.frame_times, states, system=cfg.system))
        return out
    return [
        simulate(replace(cfg, seed=seed * 100_003 + i)) for i in range(n_trajectories)
    ]


def build_dataset(cfg: SimConfig, n_trajectories, ratios=(0.8, 0.1, 0.1), seed=0,
                  irregular_keep=None, meta=None):
    """Simulate and render ``n_trajectories`` trajectories into a Dataset.

    Field systems are normalized with dataset-level bounds so all
    trajectories share one intensity scale (recorded in the metadata).
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    states = _state_trajectories(cfg, n_trajectories, seed)
    bounds = None
    if states[0].states.ndim == 4:  # field systems: (T, C, H, W) values
        bounds = field_bounds(states)
    trajs = []
    for i, st in enumerate(states):
        traj = Trajectory(i, st.times, render_frames(st, cfg, bounds=bounds))
        if irregular_keep is not None:
            traj = make_irregular(traj, irregular_keep, seed=seed * 7919 + i)
        trajs.append(traj)
    split = split_dataset(n_trajectories, ratios, seed=seed)
    info = {
        "system": cfg.system,
        "grid": list(cfg.grid),
        "n_frames": cfg.n_frames,
        "duration": cfg.duration,
        "seed": seed,
        "intervention": dict(cfg.intervention),
        "irregular_keep": irregular_keep,
        "bounds": None if bounds is None else [float(b) for b in bounds],
    }
    info.update(meta or {})
    return Dataset(trajs, split=split, meta=info)
