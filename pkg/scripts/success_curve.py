"""Success curves of a reduced experiment next to tabular Q-learning."""
import numpy as np

from hebbaif.baselines import QConfig
from hebbaif.config import ExperimentConfig
from hebbaif.harness import aggregate, q_learning_curves, run_seeds

cfg = ExperimentConfig(seeds=3, episodes=20)
results = run_seeds(cfg, master_seed=0)
stats = aggregate(results, cfg.ma_window)
for r in results:
    print("".join("X" if ok else "." for ok in r.successes))
print("agent moving average:", np.round(stats.ma_mean, 2))

q = q_learning_curves(QConfig(episodes=2000), n_seeds=3)
for ep in (35, 500, 1000, 1500, 2000):
    print(f"Q-learning moving average at episode {ep}: {q.ma_mean[ep - 1]:.2f}")
