"""
Experiment configuration and its flat ``key = value`` file format.

Lines look like ``lambda_p = 1e-4``; ``#`` starts a comment and blank lines are
ignored. Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class ExperimentConfig:
    m_q: int = 8
    m_p: int = 64
    lambda_q: float = 1e-5
    lambda_p: float = 1e-4
    l_buf: int = 20
    eta_d: float = 1e-4
    decay: float = 0.8
    alpha: float = 5.0
    beta: float = 0.5
    n_policies: int = 100
    horizon: int = 200
    repeat: int = 10
    episodes: int = 35
    seeds: int = 10
    ma_window: int = 5
    coding_iters: int = 100
    init_std: float = 0.01
    normalizer_episodes: int = 10
    goal_grid_points: int = 21
    goal_grid_span: float = 2.0
    replan: bool = False
    pad_windows: bool = True
    plan_steps: int = 0
    replay: bool = False
    learn: bool = True

    def __post_init__(self):
        positive = ("m_q", "m_p", "l_buf", "alpha", "n_policies", "repeat", "seeds",
                    "ma_window", "coding_iters", "init_std", "normalizer_episodes",
                    "goal_grid_points")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("lambda_q", "lambda_p", "eta_d", "horizon", "episodes", "plan_steps"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if self.horizon % self.repeat:
            raise ValueError("horizon must be divisible by repeat")
        if 0 < self.episodes < self.ma_window:
            raise ValueError("episodes must be at least ma_window")

    def with_updates(self, **updates) -> "ExperimentConfig":
        return replace(self, **{k: coerce(k, v) for k, v in updates.items()})

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def coerce(key: str, value):
    if key not in FIELD_TYPES:
        raise KeyError(f"unknown config key {key!r}")
    kind = FIELD_TYPES[key]
    if not isinstance(value, str):
        return value
    if kind == "bool":
        lowered = value.strip().lower()
        if lowered not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"{key} expects a boolean, got {value!r}")
        return lowered in ("true", "1", "yes")
    if kind == "int":
        return int(float(value)) if "e" in value.lower() else int(value)
    return float(value)


def parse_assignments(lines) -> dict:
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = coerce(key, value)
    return out


def load_config(path, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    return replace(base, **parse_assignments(Path(path).read_text().splitlines()))
