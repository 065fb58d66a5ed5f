from dataclasses import dataclass, field

SYSTEMS = ("pendulum", "double_pendulum", "reaction_diffusion", "wave2d", "lbm_cylinder")
_ALLOWED_RES = (32, 64, 128)


@dataclass
class SimConfig:
    """Configuration for one simulated system.

    ``intervention`` overrides physical constants (e.g. gravity, mass,
    length, reynolds, cylinder_offset_x/y, wave_speed) to generate data
    from a modified system.
    """

    system: str = "pendulum"
    grid: tuple = (32, 32)
    duration: float = 3.0
    n_frames: int = 60
    dt_internal: float = 1e-3
    seed: int = 0
    intervention: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}; valid: {', '.join(SYSTEMS)}")
        if self.n_frames < 2:
            raise ValueError("n_frames must be >= 2")
        if self.dt_internal > self.duration / self.n_frames + 1e-12:
            raise ValueError("dt_internal must not exceed the frame interval")
        h, w = self.grid
        if h not in _ALLOWED_RES or w not in _ALLOWED_RES:
            raise ValueError(f"grid extents must be in {_ALLOWED_RES}, got {self.grid}")

    @property
    def frame_dt(self):
        return self.duration / self.n_frames

    @property
    def frame_times(self):
        import numpy as np

        return np.arange(self.n_frames) * self.frame_dt


@dataclass
class StateTrajectory:
    """Ground-truth states at the sampled frame times."""

    times: "object"  # (T,) float64, strictly increasing
    states: "object"  # (T, ...) per-system state values
    system: str = ""

    def __post_init__(self):
        import numpy as np

        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must align")
        if len(self.times) > 1 and not (np.diff(self.times) > 0).all():
            raise ValueError("times must be strictly increasing")
