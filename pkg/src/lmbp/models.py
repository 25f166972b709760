"""Statistical models: nearly-constant-velocity motion, range-bearing sensor,
polar-uniform clutter, and the measurement-driven birth proposal.

All models are read-only parameter bundles; every sampling method takes an
explicit `numpy.random.Generator` so parallel callers own independent streams.
State arrays are `(..., 4)` with layout [x1, x2, v1, v2] and unit time step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rfs import Measurement, ParticleSet, PoissonPhd, STATE_DIM


def wrap_angle(theta):
    """Wrap angles to [-pi, pi)."""
    return np.mod(np.asarray(theta) + np.pi, 2.0 * np.pi) - np.pi


def _ncv_transition() -> np.ndarray:
    return np.array([
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _ncv_noise_input() -> np.ndarray:
    return np.array([
        [0.5, 0.0],
        [0.0, 0.5],
        [1.0, 0.0],
        [0.0, 1.0],
    ])


@dataclass(frozen=True)
class MotionModel:
    """Nearly-constant-velocity motion with white acceleration noise.

    x_k = A x_{k-1} + W u_k,  u_k ~ N(0, sigma_u^2 I_2).
    """

    A: np.ndarray = field(default_factory=_ncv_transition)
    W: np.ndarray = field(default_factory=_ncv_noise_input)
    sigma_u: float = 0.01
    p_survival: float = 0.99

    def __post_init__(self):
        if self.sigma_u < 0:
            raise ValueError("sigma_u must be nonnegative")
        if not 0.0 <= self.p_survival <= 1.0:
            raise ValueError("p_survival must be in [0, 1]")

    def survival_prob(self, states: np.ndarray) -> np.ndarray:
        """Survival probability per state; constant by default, overridable."""
        states = np.asarray(states, dtype=float)
        return np.full(states.shape[:-1], self.p_survival)

    def transition_sample(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Advance states one step through the noisy transition kernel."""
        states = np.asarray(states, dtype=float)
        out = states @ self.A.T
        if self.sigma_u > 0:
            noise = rng.normal(0.0, self.sigma_u, states.shape[:-1] + (2,))
            out = out + noise @ self.W.T
        return out


@dataclass(frozen=True)
class SensorModel:
    """Range-bearing sensor with distance-dependent detection probability.

    Detection probability is pd_max * exp(-d^2 / pd_scale^2) with d the
    distance from the sensor to the object position; the likelihood is the
    product of independent range and (wrapped) bearing Gaussians.
    """

    position: np.ndarray = field(default_factory=lambda: np.array([0.0, -50.0]))
    max_range: float = 300.0
    sigma_range: float = 2.0
    sigma_bearing: float = np.deg2rad(1.0)
    pd_max: float = 0.7
    pd_scale: float = 450.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(2))
        for name in ("max_range", "sigma_range", "sigma_bearing", "pd_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.pd_max <= 1.0:
            raise ValueError("pd_max must be in (0, 1]")

    def range_bearing(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """True (range, bearing) of states as seen from the sensor."""
        states = np.asarray(states, dtype=float)
        dx = states[..., 0] - self.position[0]
        dy = states[..., 1] - self.position[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)

    def detection_prob(self, states: np.ndarray) -> np.ndarray:
        rho, _ = self.range_bearing(states)
        return self.pd_max * np.exp(-(rho ** 2) / self.pd_scale ** 2)

    def likelihood(self, z: Measurement, states: np.ndarray) -> np.ndarray:
        """Measurement density f(z | x) evaluated per state."""
        rho, theta = self.range_bearing(states)
        dr = (z.range - rho) / self.sigma_range
        db = wrap_angle(z.bearing - theta) / self.sigma_bearing
        norm = 1.0 / (2.0 * np.pi * self.sigma_range * self.sigma_bearing)
        return norm * np.exp(-0.5 * (dr ** 2 + db ** 2))

    def likelihood_table(self, frame: Sequence[Measurement], states: np.ndarray) -> np.ndarray:
        """(M, N) table of f(z_m | x_n) for a whole frame; one pass over states."""
        states = np.asarray(states, dtype=float)
        rho, theta = self.range_bearing(states)
        if len(frame) == 0:
            return np.empty((0,) + rho.shape)
        zr = np.array([z.range for z in frame])[:, None]
        zb = wrap_angle(np.array([z.bearing for z in frame]))[:, None]
        dr = (zr - rho[None, :]) / self.sigma_range
        db = zb - theta[None, :]
        # residual lies in (-2pi, 2pi); branchless wrap to [-pi, pi)
        db = np.where(db >= np.pi, db - 2.0 * np.pi, db)
        db = np.where(db < -np.pi, db + 2.0 * np.pi, db)
        db /= self.sigma_bearing
        quad = dr * dr
        quad += db * db
        quad *= -0.5
        np.exp(quad, out=quad)
        quad *= 1.0 / (2.0 * np.pi * self.sigma_range * self.sigma_bearing)
        return quad

    def sample_measurement(self, state: np.ndarray, rng: np.random.Generator) -> Measurement:
        """Noisy measurement of one state; range clamped to [0, max_range]."""
        rho, theta = self.range_bearing(np.asarray(state, dtype=float))
        r = float(rho + rng.normal(0.0, self.sigma_range))
        b = float(wrap_angle(theta + rng.normal(0.0, self.sigma_bearing)))
        return Measurement(min(max(r, 0.0), self.max_range), b)


@dataclass(frozen=True)
class ClutterModel:
    """Poisson clutter, uniform in (range, bearing) over the sensor disk."""

    mean_count: float = 100.0
    max_range: float = 300.0

    def __post_init__(self):
        if self.mean_count < 0:
            raise ValueError("mean_count must be nonnegative")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    @property
    def density(self) -> float:
        return 1.0 / (self.max_range * 2.0 * np.pi)

    def intensity(self, z: Measurement) -> float:
        """Clutter intensity at a measurement; zero outside the sensor disk."""
        if 0.0 <= z.range <= self.max_range:
            return self.mean_count * self.density
        return 0.0

    def sample(self, rng: np.random.Generator) -> list[Measurement]:
        count = rng.poisson(self.mean_count)
        ranges = rng.uniform(0.0, self.max_range, count)
        bearings = rng.uniform(-np.pi, np.pi, count)
        return [Measurement(float(r), float(b)) for r, b in zip(ranges, bearings)]


def uniform_disk_positions(center: np.ndarray, radius: float, count: int,
                           rng: np.random.Generator) -> np.ndarray:
    """`count` positions uniform in area over a disk."""
    r = radius * np.sqrt(rng.random(count))
    ang = rng.uniform(-np.pi, np.pi, count)
    return np.asarray(center) + np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)


@dataclass(frozen=True)
class BirthModel:
    """Measurement-driven birth intensity for newborn unlabeled objects.

    Each birth particle picks one of the previous frame's measurements,
    inverts the range-bearing map at a noise-perturbed copy of it, draws a
    zero-mean Gaussian velocity, and advances one step through the motion
    kernel. With no previous measurements the positions fall back to uniform
    over the sensor disk. Total weight is always `mean_births`.
    """

    mean_births: float = 0.1
    velocity_sigma: float = 0.5
    particle_budget: int = 5000

    def __post_init__(self):
        if self.mean_births < 0:
            raise ValueError("mean_births must be nonnegative")
        if self.particle_budget <= 0:
            raise ValueError("particle_budget must be positive")

    def sample_phd(self, prev_measurements: Sequence[Measurement], motion: MotionModel,
                   sensor: SensorModel, rng: np.random.Generator) -> PoissonPhd:
        n = self.particle_budget
        states = np.empty((n, STATE_DIM))
        if len(prev_measurements) > 0:
            pick = rng.integers(0, len(prev_measurements), n)
            zr = np.array([z.range for z in prev_measurements])[pick]
            zb = np.array([z.bearing for z in prev_measurements])[pick]
            r = zr + rng.normal(0.0, sensor.sigma_range, n)
            b = zb + rng.normal(0.0, sensor.sigma_bearing, n)
            states[:, 0] = sensor.position[0] + r * np.cos(b)
            states[:, 1] = sensor.position[1] + r * np.sin(b)
            states[:, 2:] = rng.normal(0.0, self.velocity_sigma, (n, 2))
            states = motion.transition_sample(states, rng)
        else:
            states[:, :2] = uniform_disk_positions(sensor.position, sensor.max_range, n, rng)
            states[:, 2:] = rng.normal(0.0, self.velocity_sigma, (n, 2))
        weights = np.full(n, self.mean_births / n)
        return PoissonPhd(ParticleSet(states, weights))


@dataclass(frozen=True)
class Models:
    """The four model ingredients the filter recursion needs."""

    motion: MotionModel
    sensor: SensorModel
    clutter: ClutterModel
    birth: BirthModel
