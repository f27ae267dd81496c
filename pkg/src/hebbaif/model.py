"""
Generative model built from two Hebbian ensembles.

``PosteriorNet`` maps an (observation, action) pair to a latent state on the
alpha-sphere. ``TransitionNet`` is auto-regressive: it codes a window of the
last ``l_buf + 1`` latent states and ``l_buf`` actions, and predicts the newest
state by coding the window with that slot hidden and re-projecting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .hebbian import (
    CodingConfig,
    Dictionary,
    ShapeError,
    auto_step_size,
    code,
    ista_gram,
    reconstruct,
)

N_ACTIONS = 2


class BufferError(ValueError):
    """Raised when a lag window does not hold the required history."""


def encode_action(action: Optional[int], n_actions: int = N_ACTIONS) -> np.ndarray:
    """Unit one-hot vector; ``None`` (no action yet) encodes as zeros."""
    enc = np.zeros(n_actions)
    if action is not None:
        enc[action] = 1.0
    return enc


def normalize_state(s, alpha: Optional[float]) -> np.ndarray:
    """Rescale to norm ``alpha``; the zero vector (or zero rows of a batch) stays zero.

    ``alpha=None`` disables homeostasis and returns ``s`` unchanged.
    """
    s = np.asarray(s, dtype=np.float64)
    if alpha is None:
        return s
    norm = np.linalg.norm(s, axis=-1, keepdims=True)
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, alpha * s / safe, 0.0)


@dataclass
class LagWindow:
    """``l_buf + 1`` states and ``l_buf`` actions, both oldest first."""

    states: list
    actions: list

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.ravel(s) for s in self.states]
                              + [np.ravel(a) for a in self.actions])


@dataclass
class GoalSpec:
    """Observation template whose ``free_dims`` are swept over ``grid``.

    ``goal_obs`` holds the (normalized) goal values at the fixed entries; values
    at ``free_dims`` are overwritten during the sweep.
    """

    goal_obs: np.ndarray
    free_dims: Sequence[int]
    grid: Sequence[float]
    actions: Sequence[int] = (0, 1)


class PosteriorNet:
    def __init__(self, obs_dim: int, code_dim: int, cfg: CodingConfig,
                 rng: np.random.Generator, alpha: float = 5.0,
                 n_actions: int = N_ACTIONS, init_std: float = 0.01):
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.alpha = alpha
        self.cfg = cfg
        self.dict = Dictionary.random(obs_dim + n_actions, code_dim, rng, init_std)

    @property
    def code_dim(self) -> int:
        return self.dict.code_dim

    def _input(self, obs, action_enc) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        action_enc = np.asarray(action_enc, dtype=np.float64)
        if obs.shape[-1] != self.obs_dim or action_enc.shape[-1] != self.n_actions:
            raise ShapeError("observation/action sizes do not match the posterior")
        return np.concatenate([obs, action_enc], axis=-1)

    def infer(self, obs, action_enc) -> np.ndarray:
        """Latent state of an (observation, encoded action) pair; batches allowed."""
        c = code(self.dict, self._input(obs, action_enc), self.cfg)
        return normalize_state(c, self.alpha)

    def learn(self, obs, action_enc, s, v=None) -> None:
        """Standard plus top-down Hebbian update against target ``[obs, action]``.

        Both rank-1 terms are computed from the pre-update weights.
        """
        target = self._input(obs, action_enc)
        w = self.dict.weights
        s = np.asarray(s, dtype=np.float64)
        delta = np.outer(w @ s - target, s)
        if v is not None:
            v = np.asarray(v, dtype=np.float64)
            delta += np.outer(w @ v - target, v)
        w -= self.cfg.eta_d * delta

    def estimate_goal_state(self, goal: GoalSpec) -> np.ndarray:
        """Average posterior state over the swept free dimensions and all actions."""
        if len(goal.grid) == 0 or len(goal.actions) == 0:
            raise ValueError("goal grid and action set must be non-empty")
        base = np.asarray(goal.goal_obs, dtype=np.float64)
        obs, acts = [], []
        for value in goal.grid:
            o = base.copy()
            o[list(goal.free_dims)] = value
            for a in goal.actions:
                obs.append(o)
                acts.append(encode_action(a, self.n_actions))
        states = self.infer(np.array(obs), np.array(acts))
        return normalize_state(states.mean(axis=0), self.alpha)


class TransitionNet:
    def __init__(self, state_dim: int, code_dim: int, l_buf: int, cfg: CodingConfig,
                 rng: np.random.Generator, alpha: float = 5.0,
                 n_actions: int = N_ACTIONS, init_std: float = 0.01):
        if l_buf < 1:
            raise ValueError("l_buf must be >= 1")
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.l_buf = l_buf
        self.alpha = alpha
        self.cfg = cfg
        self.dict = Dictionary.random(self.window_dim, code_dim, rng, init_std)
        self.last_code: Optional[np.ndarray] = None

    @property
    def window_dim(self) -> int:
        return (self.l_buf + 1) * self.state_dim + self.l_buf * self.n_actions

    @property
    def next_slot(self) -> slice:
        """Entries of the newest state inside a flattened window."""
        end = (self.l_buf + 1) * self.state_dim
        return slice(end - self.state_dim, end)

    @property
    def known_mask(self) -> np.ndarray:
        mask = np.ones(self.window_dim, dtype=bool)
        mask[self.next_slot] = False
        return mask

    def _flatten(self, window) -> np.ndarray:
        if isinstance(window, LagWindow):
            if len(window.states) != self.l_buf + 1 or len(window.actions) != self.l_buf:
                raise BufferError(
                    f"window needs {self.l_buf + 1} states and {self.l_buf} actions, got "
                    f"{len(window.states)} and {len(window.actions)}")
            window = window.flatten()
        window = np.asarray(window, dtype=np.float64)
        if window.shape != (self.window_dim,):
            raise BufferError(f"flattened window must have length {self.window_dim}")
        return window

    def learn(self, window) -> np.ndarray:
        """Code the full window, take one Hebbian step, return the code."""
        x = self._flatten(window)
        c = code(self.dict, x, self.cfg)
        w = self.dict.weights
        w -= self.cfg.eta_d * np.outer(w @ c - x, c)
        self.last_code = c
        return c

    def topdown_target(self, c=None) -> np.ndarray:
        """Re-projected newest-state slot of ``c`` (default: the last learned code)."""
        if c is None:
            c = self.last_code
        if c is None:
            return np.zeros(self.state_dim)
        v = self.dict.weights[self.next_slot] @ np.asarray(c, dtype=np.float64)
        return normalize_state(v, self.alpha)

    def known_vector(self, lag_states, lag_actions) -> np.ndarray:
        """Flatten history into the window layout minus the newest-state slot.

        Accepts single histories (``(l_buf, dim)``) or batches (``(batch, l_buf, dim)``).
        """
        lag_states = np.asarray(lag_states, dtype=np.float64)
        lag_actions = np.asarray(lag_actions, dtype=np.float64)
        if lag_states.shape[-2:] != (self.l_buf, self.state_dim) or \
                lag_actions.shape[-2:] != (self.l_buf, self.n_actions):
            raise BufferError(
                f"need {self.l_buf} states of size {self.state_dim} and "
                f"{self.l_buf} actions of size {self.n_actions}")
        lead = lag_states.shape[:-2]
        return np.concatenate([lag_states.reshape(lead + (-1,)),
                               lag_actions.reshape(lead + (-1,))], axis=-1)

    def predict_next(self, lag_states, lag_actions) -> np.ndarray:
        """Predicted newest state from ``l_buf`` past states and actions."""
        return self.predictor().predict(lag_states, lag_actions)

    def predictor(self) -> "FrozenPredictor":
        return FrozenPredictor(self)


class FrozenPredictor:
    """Masked next-state prediction against a snapshot of the transition weights.

    The Gram matrix of the observed rows and the coding rate are computed once,
    so repeated (batched) predictions during rollouts stay cheap.
    """

    def __init__(self, net: TransitionNet):
        self.net = net
        w = net.dict.weights
        known = w[net.known_mask].copy()
        self.known_weights = known
        self.next_weights = w[net.next_slot].copy()
        self.gram = known.T @ known
        eta = net.cfg.eta_c
        if eta != "auto":
            self.step = float(eta)
        elif np.any(known):
            self.step = auto_step_size(known)
        else:
            # all-zero dictionary: every code, hence every prediction, is zero
            self.step = 0.0

    def predict(self, lag_states, lag_actions) -> np.ndarray:
        net = self.net
        x = net.known_vector(lag_states, lag_actions)
        c = ista_gram(self.gram, x @ self.known_weights, net.cfg.lam, self.step,
                      net.cfg.n_iters)
        return normalize_state(c @ self.next_weights.T, net.alpha)


def reconstruction_error(net: TransitionNet, window) -> float:
    x = net._flatten(window)
    c = code(net.dict, x, net.cfg)
    r = reconstruct(net.dict, c) - x
    return float(r @ r)
