from .config import SYSTEMS, SimConfig, StateTrajectory
from .integrators import integrate_frames, rk4_step
from .lbm import lbm_setup, macroscopic, simulate_lbm_cylinder
from .mechanical import (
    double_pendulum_energy,
    pendulum_energy,
    simulate_double_pendulum,
    simulate_pendulum,
)
from .reaction_diffusion import (
    simulate_lambda_omega_cell,
    simulate_reaction_diffusion,
    spiral_initial_condition,
)
from .render import disk, field_bounds, render_frames
from .wave import leapfrog_energy_series, simulate_wave2d

from .generate import build_dataset  # noqa: E402  (needs simulate below at call time)

_SIMULATORS = {
    "pendulum": simulate_pendulum,
    "double_pendulum": simulate_double_pendulum,
    "reaction_diffusion": simulate_reaction_diffusion,
    "wave2d": simulate_wave2d,
    "lbm_cylinder": simulate_lbm_cylinder,
}


def simulate(cfg: SimConfig) -> StateTrajectory:
    """Run the configured system's simulator."""
    return _SIMULATORS[cfg.system](cfg)


__all__ = [
    "SYSTEMS",
    "SimConfig",
    "StateTrajectory",
    "simulate",
    "rk4_step",
    "integrate_frames",
    "simulate_pendulum",
    "simulate_double_pendulum",
    "simulate_reaction_diffusion",
    "simulate_lambda_omega_cell",
    "simulate_wave2d",
    "simulate_lbm_cylinder",
    "pendulum_energy",
    "double_pendulum_energy",
    "leapfrog_energy_series",
    "spiral_initial_condition",
    "lbm_setup",
    "macroscopic",
    "render_frames",
    "field_bounds",
    "disk",
    "build_dataset",
]
