"""
Hebbian active-inference agent and its receding-horizon episode loop.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import planner
from .config import ExperimentConfig
from .hebbian import CodingConfig
from .model import GoalSpec, LagWindow, PosteriorNet, TransitionNet, encode_action
from .mountain_car import EnvConfig, MountainCar, ObsNormalizer, normalize


@dataclass
class EpisodeOutcome:
    success: bool
    steps: int
    decisions: int
    actions: list = field(default_factory=list)
    observations: list = field(default_factory=list)


def mountain_car_goal(norm: ObsNormalizer, cfg: ExperimentConfig,
                      env_config: EnvConfig = EnvConfig()) -> GoalSpec:
    goal_x = (env_config.goal_position - norm.mu_x) / norm.sigma_x
    grid = np.linspace(-cfg.goal_grid_span, cfg.goal_grid_span, cfg.goal_grid_points)
    return GoalSpec(np.array([goal_x, 0.0]), free_dims=[1], grid=grid)


class HebbianAIFAgent:
    """Posterior and transition ensembles plus the real lag history of one episode."""

    def __init__(self, cfg: ExperimentConfig, normalizer: ObsNormalizer,
                 rng: np.random.Generator, env_config: EnvConfig = EnvConfig()):
        self.cfg = cfg
        self.normalizer = normalizer
        self.eta_d = cfg.eta_d
        self.posterior = PosteriorNet(
            2, cfg.m_q, CodingConfig(cfg.lambda_q, "auto", cfg.coding_iters, cfg.eta_d),
            rng, cfg.alpha, init_std=cfg.init_std)
        self.transition = TransitionNet(
            cfg.m_q, cfg.m_p, cfg.l_buf,
            CodingConfig(cfg.lambda_p, "auto", cfg.coding_iters, cfg.eta_d),
            rng, cfg.alpha, init_std=cfg.init_std)
        self.goal = mountain_car_goal(normalizer, cfg, env_config)
        self.planner_cfg = planner.PlannerConfig(cfg.n_policies, cfg.horizon, cfg.repeat,
                                                 cfg.beta)
        self.reset_history()

    def set_learning_rate(self, eta_d: float) -> None:
        self.eta_d = eta_d
        self.posterior.cfg.eta_d = eta_d
        self.transition.cfg.eta_d = eta_d

    def decay_learning_rate(self) -> None:
        self.set_learning_rate(self.eta_d * self.cfg.decay)

    def reset_history(self) -> None:
        self.states: deque = deque(maxlen=self.cfg.l_buf + 1)
        self.actions: deque = deque(maxlen=self.cfg.l_buf)
        self.prev_action: Optional[int] = None

    def perceive(self, raw_obs, learn: bool = True) -> np.ndarray:
        """Infer the latent state of ``raw_obs`` and learn from the real transition.

        The posterior sees the current observation with the most recently
        executed action (zeros before the first action).
        """
        obs = normalize(raw_obs, self.normalizer)
        act = encode_action(self.prev_action)
        s = self.posterior.infer(obs, act)
        if self.prev_action is not None:
            self.actions.append(act)
        self.states.append(s)
        if learn:
            v = None
            full = len(self.states) == self.cfg.l_buf + 1
            if full or (self.cfg.pad_windows and self.actions):
                self.transition.learn(self.padded_window())
                v = self.transition.topdown_target()
            self.posterior.learn(obs, act, s, v)
        return s

    def act(self, action: int) -> None:
        self.prev_action = action

    def padded_window(self) -> LagWindow:
        """Current lag window, front-padded like ``seed_window`` while history is short."""
        l_buf = self.cfg.l_buf
        states = list(self.states)
        actions = list(self.actions)
        states = [states[0]] * (l_buf + 1 - len(states)) + states
        actions = [np.zeros(2)] * (l_buf - len(actions)) + actions
        return LagWindow(states, actions)

    def seed_window(self):
        """Most recent ``l_buf`` states and actions, front-padded for short histories."""
        l_buf = self.cfg.l_buf
        states = list(self.states)[-l_buf:]
        states = [states[0]] * (l_buf - len(states)) + states
        actions = list(self.actions)[-l_buf:]
        actions = [np.zeros(2)] * (l_buf - len(actions)) + actions
        return np.array(states), np.array(actions)

    def plan(self, rng: np.random.Generator) -> int:
        """First action of the selected policy."""
        return int(self.select(rng).actions[0])

    def plan_sequence(self, rng: np.random.Generator) -> np.ndarray:
        """Per-step actions of the selected policy."""
        policy = self.select(rng)
        if policy.horizon == 0:
            return np.array([int(rng.integers(2))] * self.cfg.repeat)
        return policy.expanded()

    def select(self, rng: np.random.Generator) -> planner.Policy:
        """Sample policies, roll them out, score them and return the winner."""
        policies = planner.sample_policies(rng, self.planner_cfg)
        s_star = self.posterior.estimate_goal_state(self.goal)
        seed_states, seed_actions = self.seed_window()
        traces = planner.rollout(self.transition, seed_states, seed_actions, policies)
        goal_terms, variances = planner.score_batch(traces, s_star)
        t_v = planner.adaptive_threshold(variances, self.planner_cfg.beta)
        return policies[planner.select_index(goal_terms, variances, t_v)]

    def replay_episode(self, observations, actions) -> None:
        """Feed a stored observation/action stream through the learning path."""
        self.reset_history()
        for i, obs in enumerate(observations):
            self.perceive(obs, learn=True)
            if i < len(actions):
                self.act(actions[i])
        self.reset_history()


def plan_and_act(agent: HebbianAIFAgent, env: MountainCar, rng: np.random.Generator,
                 learn: Optional[bool] = None) -> EpisodeOutcome:
    """Run one episode, learning from every real transition.

    With ``cfg.replan`` the agent re-plans at every ``repeat`` boundary and
    executes only the first action of the winner; otherwise the first
    ``plan_steps`` actions of the selected policy (all of them when 0) are
    executed open loop before planning again. On success the learning
    rate is decayed.
    """
    learn = agent.cfg.learn if learn is None else learn
    repeat = agent.cfg.repeat
    obs = env.reset()
    agent.reset_history()
    agent.perceive(obs, learn)
    outcome = EpisodeOutcome(False, 0, 0, observations=[obs])
    plan: list = []
    done = False
    while not done:
        if agent.cfg.replan and outcome.steps % repeat == 0:
            plan = [agent.plan(rng)] * repeat
            outcome.decisions += 1
        elif not plan:
            plan = list(agent.plan_sequence(rng))[:agent.cfg.plan_steps or None]
            outcome.decisions += 1
        action = plan.pop(0)
        agent.act(action)
        obs, done, success = env.step(action)
        outcome.steps += 1
        outcome.actions.append(action)
        outcome.observations.append(obs)
        agent.perceive(obs, learn)
        outcome.success = success
    if outcome.success and learn:
        agent.decay_learning_rate()
    return outcome
