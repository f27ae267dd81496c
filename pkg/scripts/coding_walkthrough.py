"""Sparse coding and Hebbian dictionary learning on a toy problem."""
import numpy as np

from hebbaif.hebbian import (CodingConfig, Dictionary, auto_step_size, code, code_masked,
                             coding_path, hebbian_step, objective, reconstruct)

rng = np.random.default_rng(0)

# identity dictionary: the code is the soft-thresholded input
c = code(np.eye(2), np.array([1.0, 0.1]), CodingConfig(lam=0.4))
print("identity code", c)

# a random dictionary and the objective along the coding iterations
W = rng.normal(size=(6, 12))
x = rng.normal(size=6)
cfg = CodingConfig(lam=0.1)
print("auto step", auto_step_size(W))
values = [objective(W, ci, x, cfg.lam) for ci in coding_path(W, x, cfg)]
print("objective at iterations 1, 10, 100:", values[0], values[9], values[-1])

# masked coding reads the code from a subset of rows only
mask = np.array([True, True, False, True, False, True])
c_masked = code_masked(W, np.where(mask, x, np.nan), mask, cfg)
print("hidden rows, true vs reconstructed:", x[~mask], reconstruct(W, c_masked)[~mask])

# learn a dictionary for data generated by 2-sparse combinations of 16 atoms
atoms = rng.normal(size=(8, 16))
atoms /= np.linalg.norm(atoms, axis=0)
data = np.zeros((3000, 8))
for row in data:
    idx = rng.choice(16, 2, replace=False)
    row[:] = atoms[:, idx] @ rng.uniform(0.5, 1.5, 2)

learner = Dictionary.random(8, 16, rng, std=0.1)
cfg = CodingConfig(lam=0.01, n_iters=50)


def mean_error(d):
    codes = code(d, data[:200], cfg)
    return float(np.mean(np.sum((reconstruct(d, codes) - data[:200]) ** 2, axis=1)))


print("reconstruction error before", mean_error(learner))
for x in data:
    hebbian_step(learner, code(learner, x, cfg), x, eta_d=0.05)
print("reconstruction error after ", mean_error(learner))
