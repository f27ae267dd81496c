"""
Seeded experiment runs, success-curve aggregation, sweeps and checkpoints.

Every run draws its random streams from a ``numpy.random.SeedSequence``, so a
(config, seed) pair fully determines the result. Independent runs can be
spread over worker processes; set ``HEBBAIF_WORKERS`` to choose how many.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .agent import HebbianAIFAgent, plan_and_act
from .baselines import QConfig, ReplayBuffer, replay_train, run_q_learning
from .config import ExperimentConfig, parse_assignments
from .mountain_car import EnvConfig, MountainCar, ObsNormalizer, fit_normalizer

CURVE_COLUMNS = ("episode", "ma_mean", "ma_std", "raw_success_rate")
CHECKPOINT_VERSION = 1
WORKERS_ENV = "HEBBAIF_WORKERS"


@dataclass
class RunResult:
    seed: object
    successes: list = field(default_factory=list)
    steps: list = field(default_factory=list)


@dataclass
class CurveStats:
    """Per-episode moving-average success, mean and std over runs."""

    ma_mean: np.ndarray
    ma_std: np.ndarray
    raw_success_rate: np.ndarray
    window: int = 5

    def final_mean(self, last: int = 5) -> float:
        """Mean of the averaged curve over its last ``last`` episodes."""
        if len(self.ma_mean) == 0:
            return float("nan")
        return float(np.mean(self.ma_mean[-last:]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CURVE_COLUMNS)
            for i, row in enumerate(zip(self.ma_mean, self.ma_std, self.raw_success_rate), 1):
                writer.writerow([i, *(repr(float(x)) for x in row)])


def read_curve_csv(path) -> CurveStats:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    col = lambda name: np.array([float(r[name]) for r in rows])
    return CurveStats(col("ma_mean"), col("ma_std"), col("raw_success_rate"))


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean; the first entries average over what is available."""
    values = np.asarray(values, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(1, len(values) + 1)
    start = np.maximum(idx - window, 0)
    return (csum[idx] - csum[start]) / (idx - start)


def aggregate(results: Sequence[RunResult], window: int = 5) -> CurveStats:
    if not results:
        raise ValueError("cannot aggregate an empty list of runs")
    lengths = {len(r.successes) for r in results}
    if len(lengths) != 1:
        raise ValueError(f"runs have different lengths: {sorted(lengths)}")
    raw = np.array([np.asarray(r.successes, dtype=np.float64) for r in results])
    ma = np.array([moving_average(row, window) for row in raw])
    return CurveStats(ma.mean(axis=0), ma.std(axis=0), raw.mean(axis=0), window)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def build_agent(cfg: ExperimentConfig, seed, env_config: EnvConfig = EnvConfig()):
    """Agent, environment and the remaining planner and replay generators of one run."""
    rng_norm, rng_agent, rng_env, rng_plan, rng_replay = (
        np.random.default_rng(s) for s in _seed_sequence(seed).spawn(5))
    norm = fit_normalizer(rng_norm, cfg.normalizer_episodes, env_config)
    agent = HebbianAIFAgent(cfg, norm, rng_agent, env_config)
    env = MountainCar(rng_env, env_config)
    return agent, env, rng_plan, rng_replay


def run_experiment(cfg: ExperimentConfig, seed, env_config: EnvConfig = EnvConfig(),
                   return_agent: bool = False):
    """Sequential learning episodes of one seeded run.

    With ``cfg.replay`` each real episode is stored and followed by the replay
    of one uniformly drawn stored episode.
    """
    agent, env, rng_plan, rng_replay = build_agent(cfg, seed, env_config)
    result = RunResult(seed)
    buffer = ReplayBuffer()
    for _ in range(cfg.episodes):
        outcome = plan_and_act(agent, env, rng_plan)
        result.successes.append(bool(outcome.success))
        result.steps.append(outcome.steps)
        if cfg.replay:
            buffer.append(outcome.observations, outcome.actions)
            replay_train(agent, buffer, rng_replay)
    return (result, agent) if return_agent else result


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, jobs):
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def run_seeds(cfg: ExperimentConfig, master_seed: int = 0, stream: Sequence[int] = (),
              return_agents: bool = False):
    """``cfg.seeds`` independent runs with streams derived from ``(master_seed, *stream, i)``.

    With ``return_agents`` the trained agents are returned alongside the results.
    """
    seeds = [np.random.SeedSequence([master_seed, *stream, i]) for i in range(cfg.seeds)]
    runs = _map(run_experiment, [(cfg, s, EnvConfig(), return_agents) for s in seeds])
    if return_agents:
        return [r for r, _ in runs], [a for _, a in runs]
    return runs


@dataclass
class SweepSpec:
    parameter: str
    values: Sequence
    base: ExperimentConfig = field(default_factory=ExperimentConfig)

    def __post_init__(self):
        if self.parameter not in ExperimentConfig.__dataclass_fields__:
            raise KeyError(f"unknown sweep parameter {self.parameter!r}")

    def configs(self) -> list[ExperimentConfig]:
        return [self.base.with_updates(**{self.parameter: v}) for v in self.values]


def sweep(spec: SweepSpec, master_seed: int = 0) -> list[tuple[object, CurveStats]]:
    """One aggregated curve per value; value ``k`` uses streams of ``(master_seed, k)``."""
    out = []
    for k, (value, cfg) in enumerate(zip(spec.values, spec.configs())):
        results = run_seeds(cfg, master_seed, stream=(k,))
        out.append((value, aggregate(results, cfg.ma_window)))
    return out


def q_learning_curves(cfg: QConfig, n_seeds: int, master_seed: int = 0,
                      window: int = 5) -> CurveStats:
    seeds = [np.random.SeedSequence([master_seed, i]) for i in range(n_seeds)]
    runs = _map(run_q_learning, [(cfg, s) for s in seeds])
    results = [RunResult(s, list(ok), list(n)) for s, (ok, n) in zip(seeds, runs)]
    return aggregate(results, window)


def save_checkpoint(path, agent: HebbianAIFAgent) -> None:
    norm = agent.normalizer
    with open(path, "wb") as f:
        np.savez(f, version=CHECKPOINT_VERSION, config=agent.cfg.to_text(),
                 posterior=agent.posterior.dict.weights,
                 transition=agent.transition.dict.weights, eta_d=agent.eta_d,
                 normalizer=np.array([norm.mu_x, norm.sigma_x, norm.mu_v, norm.sigma_v]))


def load_checkpoint(path, env_config: EnvConfig = EnvConfig()) -> HebbianAIFAgent:
    """Rebuild an agent with the stored weights, learning rate and normalizer."""
    with np.load(path) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        cfg = ExperimentConfig(**parse_assignments(str(data["config"]).splitlines()))
        norm = ObsNormalizer(*map(float, data["normalizer"]))
        agent = HebbianAIFAgent(cfg, norm, np.random.default_rng(0), env_config)
        agent.posterior.dict.weights[...] = data["posterior"]
        agent.transition.dict.weights[...] = data["transition"]
        agent.set_learning_rate(float(data["eta_d"]))
    return agent


def write_runs_csv(path, results: Sequence[RunResult]) -> None:
    """Raw per-run outcomes, one row per (run, episode)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["run", "episode", "success", "steps"])
        for i, r in enumerate(results):
            for ep, (ok, n) in enumerate(zip(r.successes, r.steps), 1):
                writer.writerow([i, ep, int(ok), n])


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
