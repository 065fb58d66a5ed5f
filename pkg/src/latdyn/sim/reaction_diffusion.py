"""Lambda-omega reaction-diffusion system (spiral wave) on [-10, 10]^2."""

import numpy as np

from .config import SimConfig, StateTrajectory
from .integrators import rk4_step

DOMAIN = 10.0


def _laplacian_neumann(field, dx):
    """5-point Laplacian with zero-flux boundaries (edge padding)."""
    p = np.pad(field, 1, mode="edge")
    return (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4 * field) / (dx * dx)


def spiral_initial_condition(h, w):
    x = np.linspace(-DOMAIN, DOMAIN, w)
    y = np.linspace(-DOMAIN, DOMAIN, h)
    xx, yy = np.meshgrid(x, y)
    r = np.sqrt(xx * xx + yy * yy)
    theta = np.angle(xx + 1j * yy)
    return np.tanh(r * np.cos(theta - r)), np.tanh(r * np.sin(theta - r))


def simulate_lambda_omega_cell(u0, v0, duration, dt, beta=1.0):
    """Diffusion-free single-cell reaction ODE; returns (times, u, v) arrays.

    In polar form the reaction obeys dr/dt = (1 - r^2) r, so the unit circle
    is a limit cycle; used as the integrator accuracy oracle.
    """

    def deriv(t, s):
        u, v = s
        rsq = u * u + v * v
        return np.array([(1 - rsq) * u + beta * rsq * v, -beta * rsq * u + (1 - rsq) * v])

    n = int(round(duration / dt))
    times = np.arange(n + 1) * dt
    out = np.empty((n + 1, 2))
    out[0] = (u0, v0)
    state = out[0]
    for i in range(n):
        state = rk4_step(deriv, state, times[i], dt)
        out[i + 1] = state
    return times, out[:, 0], out[:, 1]


def simulate_reaction_diffusion(cfg: SimConfig, initial=None) -> StateTrajectory:
    """Integrate the lambda-omega PDE; state per frame is (2,H,W) = (u, v)."""
    h, w = cfg.grid
    d1 = cfg.intervention.get("d1", 0.1)
    d2 = cfg.intervention.get("d2", 0.1)
    beta = cfg.intervention.get("beta", 1.0)
    dx = 2 * DOMAIN / max(w - 1, 1)
    dmax = max(d1, d2)
    if h > 1 and dmax > 0 and cfg.dt_internal > dx * dx / (4 * dmax):
        raise ValueError(
            f"CFL violation: dt_internal={cfg.dt_internal} exceeds {dx * dx / (4 * dmax):.4g} "
            f"for grid spacing {dx:.4g}"
        )

    if initial is None:
        u, v = spiral_initial_condition(h, w)
    else:
        u, v = np.array(initial[0], dtype=np.float64), np.array(initial[1], dtype=np.float64)

    def deriv(t, s):
        u, v = s
        rsq = u * u + v * v
        du = (1 - rsq) * u + beta * rsq * v
        dv = -beta * rsq * u + (1 - rsq) * v
        if u.size > 1:
            du = du + d1 * _laplacian_neumann(u, dx)
            dv = dv + d2 * _laplacian_neumann(v, dx)
        return np.stack([du, dv])

    state = np.stack([u, v])
    states = [state]
    for a, b in zip(cfg.frame_times[:-1], cfg.frame_times[1:]):
        span = b - a
        nsub = max(1, int(np.ceil(span / cfg.dt_internal - 1e-12)))
        hstep = span / nsub
        t = a
        for _ in range(nsub):
            state = rk4_step(deriv, state, t, hstep)
            t += hstep
        states.append(state)
    return StateTrajectory(cfg.frame_times, np.stack(states), system="reaction_diffusion")
