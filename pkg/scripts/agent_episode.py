"""One agent, a handful of Mountain Car episodes, and a look at its plan."""
import numpy as np

from hebbaif import planner
from hebbaif.agent import plan_and_act
from hebbaif.config import ExperimentConfig
from hebbaif.harness import build_agent

# a smaller transition net keeps this quick
cfg = ExperimentConfig(m_p=64, episodes=10)
agent, env, rng_plan, _ = build_agent(cfg, seed=3)
norm = agent.normalizer
print("normalizer mean", norm.mean, "std", norm.std)
print("goal position in normalized units", agent.goal.goal_obs[0])

for episode in range(cfg.episodes):
    outcome = plan_and_act(agent, env, rng_plan)
    xs = np.array(outcome.observations)[:, 0]
    print(f"episode {episode:2d}  success={outcome.success!s:5}  steps={outcome.steps:3d}  "
          f"max x={xs.max():+.3f}  eta_d={agent.eta_d:.2e}")

# score a fresh batch of policies from a new start
obs = env.reset()
agent.reset_history()
agent.perceive(obs, learn=False)
policies = planner.sample_policies(rng_plan, agent.planner_cfg)
seed_states, seed_actions = agent.seed_window()
traces = planner.rollout(agent.transition, seed_states, seed_actions, policies)
s_star = agent.posterior.estimate_goal_state(agent.goal)
goal_terms, variances = planner.score_batch(traces, s_star)
t_v = planner.adaptive_threshold(variances, cfg.beta)
best = planner.select_index(goal_terms, variances, t_v)
print("feasible policies", int(np.sum(variances >= t_v)), "of", len(policies))
print("selected policy", best, "actions", policies[best].actions)
print("start observation", obs)
