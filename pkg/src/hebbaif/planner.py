"""
Policy selection by an expected-free-energy surrogate.

Random action sequences are rolled out through a frozen transition network.
Each rollout is scored by its summed squared distance to the goal state, and
among the policies whose distance series varies at least ``t_v`` the closest
one is chosen.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import N_ACTIONS, FrozenPredictor, TransitionNet


@dataclass
class PlannerConfig:
    n_policies: int = 100
    horizon: int = 200
    repeat: int = 10
    beta: float = 0.5

    def __post_init__(self):
        if self.n_policies < 1 or self.repeat < 1 or self.horizon < 0:
            raise ValueError("n_policies and repeat must be positive, horizon non-negative")
        if self.horizon % self.repeat:
            raise ValueError(f"horizon {self.horizon} is not divisible by repeat {self.repeat}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass
class Policy:
    actions: np.ndarray
    repeat: int = 10

    def expanded(self) -> np.ndarray:
        """Per-time-step action ids."""
        return np.repeat(np.asarray(self.actions), self.repeat)

    @property
    def horizon(self) -> int:
        return len(self.actions) * self.repeat


@dataclass
class EFEScore:
    goal_term: float
    variance: float


def sample_policies(rng: np.random.Generator, cfg: PlannerConfig,
                    n_actions: int = N_ACTIONS) -> list[Policy]:
    blocks = cfg.horizon // cfg.repeat
    table = rng.integers(n_actions, size=(cfg.n_policies, blocks))
    return [Policy(row, cfg.repeat) for row in table]


def rollout(trans, seed_states, seed_actions, policies) -> np.ndarray:
    """Open-loop latent trajectories, shape ``(n_policies, horizon, state_dim)``.

    ``seed_states`` holds the ``l_buf`` most recent states and ``seed_actions``
    the ``l_buf`` actions that preceded each of them. At every step the oldest
    action is dropped, the policy's action appended, the next state predicted,
    and the state window slid forward. ``policies`` may be a single ``Policy``.
    """
    predictor = trans if isinstance(trans, FrozenPredictor) else FrozenPredictor(trans)
    net: TransitionNet = predictor.net
    single = isinstance(policies, Policy)
    if single:
        policies = [policies]
    plan = np.array([p.expanded() for p in policies], dtype=int).reshape(len(policies), -1)
    n, horizon = plan.shape
    states = np.repeat(np.asarray(seed_states, dtype=np.float64)[None], n, axis=0)
    actions = np.repeat(np.asarray(seed_actions, dtype=np.float64)[None], n, axis=0)
    trace = np.zeros((n, horizon, net.state_dim))
    eye = np.eye(net.n_actions)
    for k in range(horizon):
        actions = np.concatenate([actions[:, 1:], eye[plan[:, k]][:, None]], axis=1)
        nxt = predictor.predict(states, actions)
        trace[:, k] = nxt
        states = np.concatenate([states[:, 1:], nxt[:, None]], axis=1)
    return trace[0] if single else trace


def distances(trace, s_star) -> np.ndarray:
    trace = np.asarray(trace, dtype=np.float64)
    return ((trace - np.asarray(s_star)) ** 2).sum(axis=-1)


def score(trace, s_star) -> EFEScore:
    """Goal term (sum of squared distances) and population variance of the distances."""
    d = distances(trace, s_star)
    if d.size == 0:
        raise ValueError("cannot score an empty rollout")
    return EFEScore(float(d.sum()), float(d.var()))


def score_batch(traces, s_star):
    """Vectorized ``score`` over a batch of traces; returns (goal_terms, variances)."""
    d = distances(traces, s_star)
    if d.shape[-1] == 0:
        raise ValueError("cannot score an empty rollout")
    return d.sum(axis=-1), d.var(axis=-1)


def adaptive_threshold(variances: Sequence[float], beta: float) -> float:
    v = np.asarray(variances, dtype=np.float64)
    if v.size == 0:
        raise ValueError("need at least one variance")
    return float(beta * 0.5 * (v.max() + v.min()))


def select_index(goal_terms, variances, t_v: float) -> int:
    """Index of the smallest goal term among policies with variance >= ``t_v``.

    Ties go to the lowest index. If nothing is feasible (only possible for
    ``beta > 1``) the unconstrained minimum is returned.
    """
    g = np.asarray(goal_terms, dtype=np.float64)
    feasible = np.asarray(variances, dtype=np.float64) >= t_v
    if not feasible.any():
        feasible[:] = True
    return int(np.argmin(np.where(feasible, g, np.inf)))


def select_policy(scores: Sequence[tuple], t_v: float) -> Policy:
    """Pick from ``(policy, EFEScore)`` pairs; see ``select_index``."""
    if not scores:
        raise ValueError("no policies to select from")
    g = [s.goal_term for _, s in scores]
    v = [s.variance for _, s in scores]
    return scores[select_index(g, v, t_v)][0]
