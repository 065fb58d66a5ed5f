"""Single and double pendulum simulators with energy oracles."""

import numpy as np

from .config import SimConfig, StateTrajectory
from .integrators import integrate_frames

G_STANDARD = 9.81


def _pendulum_omega_sq(intervention):
    g = intervention.get("gravity", G_STANDARD)
    length = intervention.get("length", 1.0)
    # normalized so the default system is d2z/dt2 = -sin(z)
    return g / (G_STANDARD * length)


def simulate_pendulum(cfg: SimConfig, initial=None) -> StateTrajectory:
    """Nonlinear pendulum; state per frame is (angle, angular velocity)."""
    omega_sq = _pendulum_omega_sq(cfg.intervention)

    def deriv(t, s):
        return np.array([s[1], -omega_sq * np.sin(s[0])])

    if initial is None:
        rng = np.random.default_rng(cfg.seed)
        initial = np.array([rng.uniform(0, 2 * np.pi), rng.uniform(-np.pi / 2, np.pi / 2)])
    states = integrate_frames(deriv, initial, cfg.frame_times, cfg.dt_internal)
    return StateTrajectory(cfg.frame_times, states, system="pendulum")


def pendulum_energy(states, intervention=None):
    """0.5 v^2 - omega^2 cos(z), constant along exact trajectories."""
    omega_sq = _pendulum_omega_sq(intervention or {})
    z, v = states[..., 0], states[..., 1]
    return 0.5 * v * v - omega_sq * np.cos(z)


def _double_params(intervention):
    iv = intervention or {}
    return (
        iv.get("mass1", 1.0),
        iv.get("mass2", 1.0),
        iv.get("length1", 1.0),
        iv.get("length2", 1.0),
        iv.get("gravity", G_STANDARD),
    )


def double_pendulum_deriv(t, s, params):
    m1, m2, l1, l2, g = params
    z1, z2, v1, v2 = s
    delta = z1 - z2
    den = 2 * m1 + m2 - m2 * np.cos(2 * z1 - 2 * z2)
    a1 = (
        -g * (2 * m1 + m2) * np.sin(z1)
        - m2 * g * np.sin(z1 - 2 * z2)
        - 2 * np.sin(delta) * m2 * (v2 * v2 * l2 + v1 * v1 * l1 * np.cos(delta))
    ) / (l1 * den)
    a2 = (
        2
        * np.sin(delta)
        * (v1 * v1 * l1 * (m1 + m2) + g * (m1 + m2) * np.cos(z1) + v2 * v2 * l2 * m2 * np.cos(delta))
    ) / (l2 * den)
    return np.array([v1, v2, a1, a2])


def simulate_double_pendulum(cfg: SimConfig, initial=None) -> StateTrajectory:
    """Planar double pendulum; state per frame is (z1, z2, v1, v2)."""
    params = _double_params(cfg.intervention)

    if initial is None:
        rng = np.random.default_rng(cfg.seed)
        initial = np.array(
            [
                rng.uniform(0, 2 * np.pi),
                rng.uniform(0, 2 * np.pi),
                rng.uniform(-np.pi / 2, np.pi / 2),
                rng.uniform(-np.pi / 2, np.pi / 2),
            ]
        )
    states = integrate_frames(
        lambda t, s: double_pendulum_deriv(t, s, params), initial, cfg.frame_times, cfg.dt_internal
    )
    return StateTrajectory(cfg.frame_times, states, system="double_pendulum")


def double_pendulum_energy(states, intervention=None):
    """Total mechanical energy of the two point masses."""
    m1, m2, l1, l2, g = _double_params(intervention)
    z1, z2, v1, v2 = states[..., 0], states[..., 1], states[..., 2], states[..., 3]
    kin = (
        0.5 * (m1 + m2) * l1 * l1 * v1 * v1
        + 0.5 * m2 * l2 * l2 * v2 * v2
        + m2 * l1 * l2 * v1 * v2 * np.cos(z1 - z2)
    )
    pot = -(m1 + m2) * g * l1 * np.cos(z1) - m2 * g * l2 * np.cos(z2)
    return kin + pot
