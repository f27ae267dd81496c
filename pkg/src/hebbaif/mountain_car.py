"""
Self-contained two-action Mountain Car and observation normalization.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

LEFT, RIGHT = 0, 1
ACTIONS = (LEFT, RIGHT)


class EpisodeFinishedError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvConfig:
    force: float = 0.001
    gravity: float = 0.0025
    min_position: float = -1.2
    max_position: float = 0.6
    max_speed: float = 0.07
    goal_position: float = 0.5
    start_low: float = -0.6
    start_high: float = -0.4
    max_steps: int = 200


@dataclass(frozen=True)
class CarState:
    position: float
    velocity: float
    t: int = 0
    done: bool = False

    @property
    def obs(self) -> np.ndarray:
        return np.array([self.position, self.velocity])


def reset(rng: np.random.Generator, config: EnvConfig = EnvConfig()) -> CarState:
    return CarState(float(rng.uniform(config.start_low, config.start_high)), 0.0, 0)


def step(state: CarState, action: int, config: EnvConfig = EnvConfig(),
         direction: Optional[float] = None):
    """Advance one time step.

    ``direction`` overrides the push of ``action`` (-1 for LEFT, +1 for RIGHT);
    passing 0 gives the unforced car.
    Returns ``(next_state, done, success)``.
    """
    if state.done or state.t >= config.max_steps:
        raise EpisodeFinishedError("cannot step a finished episode")
    if direction is None:
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        direction = 1.0 if action == RIGHT else -1.0
    x, v = state.position, state.velocity
    v += direction * config.force - config.gravity * np.cos(3.0 * x)
    v = float(np.clip(v, -config.max_speed, config.max_speed))
    x = float(np.clip(x + v, config.min_position, config.max_position))
    if x == config.min_position and v < 0:
        v = 0.0
    t = state.t + 1
    success = x >= config.goal_position
    done = success or t >= config.max_steps
    return CarState(x, v, t, done), done, success


class MountainCar:
    """Stateful wrapper with an optional trajectory log."""

    def __init__(self, rng: np.random.Generator, config: EnvConfig = EnvConfig(),
                 record: bool = False):
        self.rng = rng
        self.config = config
        self.record = record
        self.trajectory: list[tuple] = []
        self.state: Optional[CarState] = None

    def reset(self) -> np.ndarray:
        self.state = reset(self.rng, self.config)
        self.trajectory = []
        return self.state.obs

    def step(self, action: int):
        self.state, done, success = step(self.state, action, self.config)
        if self.record:
            s = self.state
            self.trajectory.append((s.t, s.position, s.velocity, action, done))
        return self.state.obs, done, success

    def dump_trajectory(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "x", "v", "action", "done"])
            writer.writerows(self.trajectory)


@dataclass(frozen=True)
class ObsNormalizer:
    mu_x: float
    sigma_x: float
    mu_v: float
    sigma_v: float

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_v > 0):
            raise ValueError("normalizer standard deviations must be positive")

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu_x, self.mu_v])

    @property
    def std(self) -> np.ndarray:
        return np.array([self.sigma_x, self.sigma_v])

    @classmethod
    def from_samples(cls, samples, floor: float = 1e-6) -> "ObsNormalizer":
        samples = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
        mu = samples.mean(axis=0)
        sigma = np.maximum(samples.std(axis=0), floor)
        return cls(float(mu[0]), float(sigma[0]), float(mu[1]), float(sigma[1]))


def normalize(obs, norm: ObsNormalizer) -> np.ndarray:
    return (np.asarray(obs, dtype=np.float64) - norm.mean) / norm.std


def denormalize(z, norm: ObsNormalizer) -> np.ndarray:
    return np.asarray(z, dtype=np.float64) * norm.std + norm.mean


def fit_normalizer(rng: np.random.Generator, n_episodes: int = 10,
                   config: EnvConfig = EnvConfig()) -> ObsNormalizer:
    """Estimate position/velocity statistics from uniform-random-action episodes."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    samples = []
    for _ in range(n_episodes):
        state = reset(rng, config)
        samples.append(state.obs)
        done = False
        while not done:
            state, done, _ = step(state, int(rng.integers(2)), config)
            samples.append(state.obs)
    return ObsNormalizer.from_samples(samples)


def with_max_steps(config: EnvConfig, max_steps: int) -> EnvConfig:
    return replace(config, max_steps=max_steps)
