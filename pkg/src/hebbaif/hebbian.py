"""
Sparse coding and local Hebbian dictionary learning.

A Hebbian ensemble holds a dictionary ``weights`` of shape (input_dim, code_dim).
Given an input ``o`` it infers a sparse code ``c`` by proximal-gradient descent
(ISTA) on

    ||weights @ c - o||^2 + lam * ||c||_1

starting from ``c = 0``, and learns the dictionary with the rank-1 rule

    weights <- weights - eta_d * (weights @ c - o) c^T

which only uses the layer's input, output and reconstruction.

All functions accept either a single vector of shape (n,) or a batch of shape
(batch, n); batched codes are returned with the same leading axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

StepSize = Union[float, str]

POWER_ITERS = 50
POWER_TOL = 1e-6


class ShapeError(ValueError):
    """Raised when array dimensions are inconsistent with a dictionary."""


class InputError(ValueError):
    """Raised for non-finite or degenerate coding inputs."""


class StepSizeError(ValueError):
    """Raised when no step size can be derived from a dictionary."""


@dataclass
class CodingConfig:
    """Hyper-parameters of one Hebbian ensemble.

    ``eta_c="auto"`` selects ``auto_step_size`` of the dictionary at coding time.
    """

    lam: float = 0.0
    eta_c: StepSize = "auto"
    n_iters: int = 100
    eta_d: float = 1e-4

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError(f"n_iters must be >= 1, got {self.n_iters}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.eta_d < 0:
            # eta_d == 0 is allowed: it freezes learning
            raise ValueError(f"eta_d must be >= 0, got {self.eta_d}")
        if self.eta_c != "auto" and not float(self.eta_c) > 0:
            raise ValueError(f"eta_c must be positive or 'auto', got {self.eta_c}")


class Dictionary:
    """Dense weight matrix of one Hebbian ensemble, shape (input_dim, code_dim)."""

    def __init__(self, weights):
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise InputError("weights must be finite")
        self.weights = weights

    @classmethod
    def random(cls, input_dim: int, code_dim: int, rng: np.random.Generator,
               std: float = 0.01) -> "Dictionary":
        return cls(rng.normal(0.0, std, size=(input_dim, code_dim)))

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def code_dim(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "Dictionary":
        return Dictionary(self.weights.copy())

    def checksum(self) -> str:
        import hashlib

        return hashlib.sha256(np.ascontiguousarray(self.weights).tobytes()).hexdigest()

    def save(self, path) -> None:
        """Write as text: a ``rows cols`` header then row-major values."""
        path = Path(path)
        with path.open("w") as f:
            f.write(f"{self.input_dim} {self.code_dim}\n")
            np.savetxt(f, self.weights, fmt="%.17g")

    @classmethod
    def load(cls, path) -> "Dictionary":
        with Path(path).open() as f:
            rows, cols = (int(tok) for tok in f.readline().split())
            values = np.loadtxt(f, ndmin=2)
        return cls(values.reshape(rows, cols))

    def __repr__(self) -> str:
        return f"Dictionary(input_dim={self.input_dim}, code_dim={self.code_dim})"


def _as_weights(dictionary) -> np.ndarray:
    if isinstance(dictionary, Dictionary):
        return dictionary.weights
    return np.asarray(dictionary, dtype=np.float64)


def soft_threshold(c, theta: float) -> np.ndarray:
    """Elementwise ``sign(c) * max(0, |c| - theta)``."""
    c = np.asarray(c, dtype=np.float64)
    return np.sign(c) * np.maximum(np.abs(c) - theta, 0.0)


def largest_singular_value(weights: np.ndarray, n_iters: int = POWER_ITERS,
                           tol: float = POWER_TOL) -> float:
    """Power-iteration estimate of the spectral norm of ``weights``."""
    weights = np.asarray(weights, dtype=np.float64)
    # iterate on the smaller Gram matrix
    a = weights if weights.shape[0] >= weights.shape[1] else weights.T
    v = np.random.default_rng(0).standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    sigma_sq = 0.0
    for _ in range(n_iters):
        w = a.T @ (a @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        new_sigma_sq = float(v @ w)
        v = w / norm_w
        if abs(new_sigma_sq - sigma_sq) <= tol * new_sigma_sq:
            sigma_sq = new_sigma_sq
            break
        sigma_sq = new_sigma_sq
    return float(np.sqrt(max(sigma_sq, 0.0)))


def auto_step_size(dictionary) -> float:
    """Coding rate ``0.5 / sigma_max(weights)**2``.

    This is the reciprocal Lipschitz constant of the gradient
    ``2 weights^T (weights c - o)``, so every coding iteration is a descent step.
    """
    sigma = largest_singular_value(_as_weights(dictionary))
    if not sigma > 0.0:
        raise StepSizeError("cannot derive a coding rate from a zero dictionary")
    return 0.5 / sigma**2


def _resolve_step(weights: np.ndarray, eta_c: StepSize) -> float:
    if eta_c == "auto":
        return auto_step_size(weights)
    return float(eta_c)


def ista_gram(gram: np.ndarray, correlation: np.ndarray, lam: float, step: float,
              n_iters: int) -> np.ndarray:
    """ISTA from zero given ``gram = W^T W`` and ``correlation = o @ W`` (batched rows).

    Same iterates as ``code`` on the underlying dictionary; useful when the
    dictionary is frozen and many inputs are coded against it.
    """
    correlation = np.asarray(correlation, dtype=np.float64)
    theta = step * lam
    # u = c (I - 2 step G) + 2 step b ; soft(u) = u - clip(u, -theta, theta)
    transfer = np.eye(gram.shape[0]) - 2.0 * step * gram
    drive = 2.0 * step * correlation
    c = np.zeros_like(drive)
    clipped = np.empty_like(drive)
    for _ in range(n_iters):
        u = c @ transfer
        u += drive
        np.clip(u, -theta, theta, out=clipped)
        u -= clipped
        c = u
    return c


def _ista(weights: np.ndarray, targets: np.ndarray, lam: float, step: float,
          n_iters: int) -> np.ndarray:
    c = np.zeros(targets.shape[:-1] + (weights.shape[1],))
    theta = step * lam
    two_step = 2.0 * step
    for _ in range(n_iters):
        u = c - two_step * ((c @ weights.T - targets) @ weights)
        c = np.sign(u) * np.maximum(np.abs(u) - theta, 0.0)
    return c


def _check_input(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != weights.shape[0]:
        raise ShapeError(
            f"input of shape {x.shape} does not match dictionary input_dim {weights.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InputError("input contains non-finite values")
    return x


def code(dictionary, x, cfg: CodingConfig) -> np.ndarray:
    """Infer the sparse code of ``x`` with ``cfg.n_iters`` ISTA iterations from zero.

    The dictionary is not modified.
    """
    weights = _as_weights(dictionary)
    x = _check_input(weights, x)
    step = _resolve_step(weights, cfg.eta_c)
    return _ista(weights, x, cfg.lam, step, cfg.n_iters)


def coding_path(dictionary, x, cfg: CodingConfig):
    """Yield every iterate of ``code``; the last one equals ``code(dictionary, x, cfg)``."""
    weights = _as_weights(dictionary)
    x = _check_input(weights, x)
    step = _resolve_step(weights, cfg.eta_c)
    c = np.zeros(x.shape[:-1] + (weights.shape[1],))
    for _ in range(cfg.n_iters):
        u = c - 2.0 * step * ((c @ weights.T - x) @ weights)
        c = np.sign(u) * np.maximum(np.abs(u) - step * cfg.lam, 0.0)
        yield c


def code_masked(dictionary, partial_input, mask, cfg: CodingConfig) -> np.ndarray:
    """Code only the observed entries of ``partial_input``.

    Rows where ``mask`` is False do not enter the residual; their values in
    ``partial_input`` are ignored (they may be NaN).
    """
    weights = _as_weights(dictionary)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (weights.shape[0],):
        raise ShapeError(f"mask of shape {mask.shape} does not match input_dim {weights.shape[0]}")
    if not mask.any():
        raise InputError("mask selects no input entries")
    partial_input = np.asarray(partial_input, dtype=np.float64)
    if partial_input.shape[-1] != weights.shape[0]:
        raise ShapeError(
            f"input of shape {partial_input.shape} does not match input_dim {weights.shape[0]}")
    sub = weights[mask]
    return code(sub, partial_input[..., mask], cfg)


def reconstruct(dictionary, c) -> np.ndarray:
    """Return ``weights @ c`` (batched rows supported)."""
    weights = _as_weights(dictionary)
    c = np.asarray(c, dtype=np.float64)
    if c.shape[-1] != weights.shape[1]:
        raise ShapeError(f"code of shape {c.shape} does not match code_dim {weights.shape[1]}")
    return c @ weights.T


def hebbian_step(dictionary: Dictionary, c, x, eta_d: float) -> Dictionary:
    """Apply ``weights -= eta_d * (weights @ c - x) c^T`` in place and return the dictionary."""
    weights = dictionary.weights
    c = np.asarray(c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if c.shape != (weights.shape[1],) or x.shape != (weights.shape[0],):
        raise ShapeError(
            f"code {c.shape} / input {x.shape} inconsistent with weights {weights.shape}")
    residual = weights @ c - x
    weights -= eta_d * np.outer(residual, c)
    return dictionary


def objective(dictionary, c, x, lam: float) -> float:
    """Sparse-coding energy ``||W c - x||^2 + lam ||c||_1``."""
    weights = _as_weights(dictionary)
    r = weights @ np.asarray(c) - np.asarray(x)
    return float(r @ r + lam * np.abs(c).sum())
