import numpy as np


def rk4_step(deriv, state, t, dt):
    """Classical 4th-order Runge-Kutta update for dy/dt = deriv(t, y)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    state = np.asarray(state, dtype=np.float64)
    k1 = np.asarray(deriv(t, state))
    k2 = np.asarray(deriv(t + dt / 2, state + dt / 2 * k1))
    k3 = np.asarray(deriv(t + dt / 2, state + dt / 2 * k2))
    k4 = np.asarray(deriv(t + dt, state + dt * k3))
    out = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite state after RK4 step at t={t}")
    return out


def integrate_frames(deriv, state0, frame_times, dt_internal):
    """Integrate and record the state at each frame time (first frame = state0)."""
    states = [np.asarray(state0, dtype=np.float64)]
    state = states[0]
    for a, b in zip(frame_times[:-1], frame_times[1:]):
        span = b - a
        nsub = max(1, int(np.ceil(span / dt_internal - 1e-12)))
        h = span / nsub
        t = a
        for _ in range(nsub):
            state = rk4_step(deriv, state, t, h)
            t += h
        states.append(state)
    return np.stack(states)
