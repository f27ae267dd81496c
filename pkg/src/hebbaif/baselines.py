"""
Comparators for the Hebbian agent: tabular Q-learning on a uniform grid and
the episode-replay training mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mountain_car import EnvConfig, reset, step


@dataclass(frozen=True)
class QConfig:
    pos_bins: int = 20
    vel_bins: int = 20
    lr_start: float = 0.1
    lr_end: float = 0.01
    gamma: float = 0.99
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_fraction: float = 0.5
    episodes: int = 5000

    def __post_init__(self):
        if self.pos_bins < 1 or self.vel_bins < 1:
            raise ValueError("bin counts must be positive")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")

    def learning_rate(self, episode: int) -> float:
        """Linear decay from ``lr_start`` to ``lr_end`` across the budget."""
        frac = episode / max(self.episodes - 1, 1)
        return self.lr_start + (self.lr_end - self.lr_start) * frac

    def epsilon(self, episode: int) -> float:
        """Linear decay over the first ``eps_fraction`` of the budget, then flat."""
        span = max(self.eps_fraction * self.episodes, 1.0)
        frac = min(episode / span, 1.0)
        return self.eps_start + (self.eps_end - self.eps_start) * frac


@dataclass
class QTable:
    values: np.ndarray
    lr: float = 0.1
    gamma: float = 0.99

    @classmethod
    def zeros(cls, cfg: QConfig = QConfig(), n_actions: int = 2) -> "QTable":
        return cls(np.zeros((cfg.pos_bins, cfg.vel_bins, n_actions)), cfg.lr_start, cfg.gamma)


def discretize(obs, bins=(20, 20), env_config: EnvConfig = EnvConfig()) -> tuple[int, int]:
    """Uniform grid cell of ``(x, v)``; out-of-range values land in the edge bins."""
    x, v = float(obs[0]), float(obs[1])
    lo = (env_config.min_position, -env_config.max_speed)
    hi = (env_config.max_position, env_config.max_speed)
    cell = []
    for value, n, a, b in zip((x, v), bins, lo, hi):
        i = math.floor((value - a) / (b - a) * n)
        cell.append(min(max(i, 0), n - 1))
    return cell[0], cell[1]


def q_update(table: QTable, s, a: int, r: float, s_next, done: bool) -> QTable:
    """One temporal-difference step toward ``r + gamma * max Q(s', .)``, in place."""
    q = table.values
    bootstrap = 0.0 if done else table.gamma * float(q[s_next].max())
    q[s][a] += table.lr * (r + bootstrap - q[s][a])
    return table


def greedy(values: np.ndarray, rng: np.random.Generator) -> int:
    """Argmax with random tie-breaking."""
    best = np.flatnonzero(values == values.max())
    return int(best[0] if best.size == 1 else rng.choice(best))


def q_episode(table: QTable, epsilon: float, rng: np.random.Generator,
              cfg: QConfig = QConfig(), env_config: EnvConfig = EnvConfig()) -> tuple[bool, int]:
    """One epsilon-greedy learning episode; reward -1 per step, 0 on the goal step."""
    bins = (cfg.pos_bins, cfg.vel_bins)
    state = reset(rng, env_config)
    s = discretize(state.obs, bins, env_config)
    done = success = False
    while not done:
        if rng.random() < epsilon:
            a = int(rng.integers(2))
        else:
            a = greedy(table.values[s], rng)
        state, done, success = step(state, a, env_config)
        s_next = discretize(state.obs, bins, env_config)
        # a timeout is not terminal for the value target, only reaching the goal is
        q_update(table, s, a, 0.0 if success else -1.0, s_next, success)
        s = s_next
    return success, state.t


def run_q_learning(cfg: QConfig, seed, env_config: EnvConfig = EnvConfig()):
    """Train one Q-table; returns per-episode ``(successes, steps)`` lists."""
    rng = np.random.default_rng(seed)
    table = QTable.zeros(cfg)
    successes, steps = [], []
    for ep in range(cfg.episodes):
        table.lr = cfg.learning_rate(ep)
        ok, n = q_episode(table, cfg.epsilon(ep), rng, cfg, env_config)
        successes.append(ok)
        steps.append(n)
    return successes, steps


@dataclass
class ReplayBuffer:
    """Append-only store of ``(observations, actions)`` episode records."""

    episodes: list = field(default_factory=list)

    def append(self, observations, actions) -> None:
        self.episodes.append((tuple(map(tuple, np.asarray(observations, dtype=float))),
                              tuple(int(a) for a in actions)))

    def __len__(self) -> int:
        return len(self.episodes)

    def sample(self, rng: np.random.Generator):
        return self.episodes[int(rng.integers(len(self.episodes)))]


def replay_train(agent, buffer: ReplayBuffer, rng: np.random.Generator):
    """Replay one uniformly drawn stored episode through the agent's learning path.

    Nothing happens while the buffer is empty.
    """
    if len(buffer):
        observations, actions = buffer.sample(rng)
        agent.replay_episode([np.array(o) for o in observations], list(actions))
    return agent
