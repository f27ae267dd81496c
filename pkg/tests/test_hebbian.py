import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hebbaif.hebbian import (
    CodingConfig,
    Dictionary,
    InputError,
    ShapeError,
    StepSizeError,
    auto_step_size,
    code,
    code_masked,
    coding_path,
    hebbian_step,
    ista_gram,
    objective,
    reconstruct,
    soft_threshold,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def fista_reference(W, x, lam, n_iters=100_000):
    """Accelerated proximal gradient on ||Wc - x||^2 + lam ||c||_1, step from a dense SVD."""
    L = 2 * np.linalg.norm(W, 2) ** 2
    c = np.zeros(W.shape[1])
    z = c.copy()
    t = 1.0
    for _ in range(n_iters):
        g = 2 * W.T @ (W @ z - x)
        u = z - g / L
        c_new = np.sign(u) * np.maximum(np.abs(u) - lam / L, 0)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        z = c_new + (t - 1) / t_new * (c_new - c)
        c, t = c_new, t_new
    return c


@pytest.mark.property
@pytest.mark.parametrize("value, theta, expected", [(0.5, 0.2, 0.3), (-0.1, 0.2, 0.0), (0.0, 0.7, 0.0),
                                                    (-0.5, 0.2, -0.3)])
def test_soft_threshold_values(value, theta, expected):
    assert soft_threshold(np.array([value]), theta)[0] == pytest.approx(expected, abs=1e-15)


@pytest.mark.property
@given(arrays(np.float64, 7, elements=finite), arrays(np.float64, 7, elements=finite),
       st.floats(0, 100))
def test_soft_threshold_properties(a, b, theta):
    pa, pb = soft_threshold(a, theta), soft_threshold(b, theta)
    assert pa.shape == a.shape
    assert np.all(np.abs(pa) <= np.abs(a))
    assert np.all((np.sign(pa) == np.sign(a)) | (pa == 0))
    assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-9


@pytest.mark.property
def test_identity_dictionary_closed_form():
    c = code(np.eye(2), np.array([1.0, 0.1]), CodingConfig(lam=0.4))
    # argmin ||c - o||^2 + lam |c|_1 = soft_threshold(o, lam / 2)
    np.testing.assert_allclose(c, [0.8, 0.0], atol=1e-6)


@pytest.mark.property
@pytest.mark.parametrize("seed", range(5))
def test_identity_closed_form_random(seed):
    rng = np.random.default_rng(seed)
    o = rng.normal(size=6)
    lam = rng.uniform(0, 1)
    c = code(np.eye(6), o, CodingConfig(lam=lam))
    np.testing.assert_allclose(c, soft_threshold(o, lam / 2), atol=1e-6)


def test_zero_input_gives_zero_code():
    rng = np.random.default_rng(1)
    W = rng.normal(size=(5, 9))
    assert np.all(code(W, np.zeros(5), CodingConfig(lam=0.1)) == 0)


@pytest.mark.parametrize("seed", range(3))
def test_converged_code_matches_reference_solver(seed):
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(6, 12))
    x = rng.normal(size=6)
    c = code(W, x, CodingConfig(lam=0.1, n_iters=100_000))
    ref = fista_reference(W, x, 0.1)
    assert abs(objective(W, c, x, 0.1) - objective(W, ref, x, 0.1)) <= 1e-6


def test_code_does_not_modify_dictionary():
    rng = np.random.default_rng(2)
    d = Dictionary(rng.normal(size=(4, 6)))
    before = d.weights.copy()
    code(d, rng.normal(size=4), CodingConfig(lam=0.1))
    np.testing.assert_array_equal(d.weights, before)


def test_code_errors():
    W = np.eye(3)
    with pytest.raises(ShapeError):
        code(W, np.ones(4), CodingConfig())
    with pytest.raises(InputError):
        code(W, np.array([1.0, np.nan, 0.0]), CodingConfig())


def test_code_batch_matches_single():
    rng = np.random.default_rng(3)
    W = rng.normal(size=(5, 7))
    X = rng.normal(size=(4, 5))
    cfg = CodingConfig(lam=0.05)
    batch = code(W, X, cfg)
    for row, x in zip(batch, X):
        np.testing.assert_allclose(row, code(W, x, cfg), rtol=1e-12, atol=1e-12)


@pytest.mark.property
def test_monotone_descent_with_auto_step():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        n, m = rng.integers(2, 16, size=2)
        W = rng.normal(size=(n, m)) * rng.uniform(0.01, 3)
        x = rng.normal(size=n) * rng.uniform(0.1, 5)
        lam = rng.uniform(0, 1)
        cfg = CodingConfig(lam=lam)
        prev = objective(W, np.zeros(m), x, lam)
        for c in coding_path(W, x, cfg):
            cur = objective(W, c, x, lam)
            assert cur <= prev * (1 + 1e-12) + 1e-15
            prev = cur
        np.testing.assert_array_equal(c, code(W, x, cfg))


LAMBDAS = (0.0, 0.01, 0.1, 0.5, 1.0, 3.0)


def _nonzeros(W, x, step, n_iters=100):
    return [np.count_nonzero(code(W, x, CodingConfig(lam=lam, eta_c=step, n_iters=n_iters)))
            for lam in LAMBDAS]


def test_sparsity_monotone_in_lambda_orthonormal():
    rng = np.random.default_rng(6)
    for _ in range(50):
        Q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
        W = Q[:, :8] * rng.uniform(0.5, 3)
        x = rng.normal(size=12)
        counts = _nonzeros(W, x, auto_step_size(W))
        assert counts == sorted(counts, reverse=True)


def test_sparsity_monotone_in_lambda_first_iterate():
    rng = np.random.default_rng(7)
    for _ in range(50):
        W = rng.normal(size=(8, 16))
        x = rng.normal(size=8)
        counts = _nonzeros(W, x, auto_step_size(W), n_iters=1)
        assert counts == sorted(counts, reverse=True)


def test_sparsity_not_monotone_for_general_dictionaries():
    # the lasso support is not nested in lambda once columns are correlated
    rng = np.random.default_rng(6)
    found = False
    for _ in range(50):
        W = rng.normal(size=(8, 16))
        x = rng.normal(size=8)
        counts = _nonzeros(W, x, auto_step_size(W))
        found |= counts != sorted(counts, reverse=True)
    assert found


@pytest.mark.parametrize("weights, expected", [(np.eye(3), 0.5), (2 * np.eye(3), 0.125)])
def test_auto_step_size_exact(weights, expected):
    assert auto_step_size(weights) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("shape", [(6, 12), (12, 6), (30, 20), (4, 4)])
def test_auto_step_size_matches_svd(shape):
    rng = np.random.default_rng(sum(shape))
    W = rng.normal(size=shape)
    sigma = np.linalg.svd(W, compute_uv=False)[0]
    assert auto_step_size(W) == pytest.approx(0.5 / sigma**2, rel=1e-4)


def test_auto_step_size_zero_matrix():
    with pytest.raises(StepSizeError):
        auto_step_size(np.zeros((3, 3)))


@pytest.mark.property
def test_masked_full_mask_equals_code():
    rng = np.random.default_rng(7)
    W = rng.normal(size=(5, 8))
    x = rng.normal(size=5)
    cfg = CodingConfig(lam=0.05)
    np.testing.assert_array_equal(code_masked(W, x, np.ones(5, bool), cfg), code(W, x, cfg))


def test_masked_single_observed_row():
    W = np.array([[1.0], [1.0]])
    c = code_masked(W, np.array([0.6, np.nan]), np.array([True, False]), CodingConfig(lam=1e-12))
    assert c[0] == pytest.approx(0.6, abs=1e-9)
    assert reconstruct(W, c)[1] == pytest.approx(0.6, abs=1e-9)


@pytest.mark.property
@pytest.mark.parametrize("seed", range(5))
def test_masked_matches_zeroed_residual(seed):
    # independent route: residual rows outside the mask are multiplied by zero
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(9, 12))
    x = rng.normal(size=9)
    mask = rng.random(9) < 0.6
    mask[0] = True
    lam = 0.1
    Wm = W[mask]
    step = 0.5 / np.linalg.svd(Wm, compute_uv=False)[0] ** 2
    c = np.zeros(12)
    for _ in range(100):
        r = (W @ c - np.where(mask, x, 0.0)) * mask
        c = soft_threshold(c - 2 * step * W.T @ r, step * lam)
    got = code_masked(W, x, mask, CodingConfig(lam=lam, eta_c=step))
    np.testing.assert_allclose(got, c, rtol=1e-8, atol=1e-10)


def test_masked_all_false():
    with pytest.raises(InputError):
        code_masked(np.eye(2), np.zeros(2), np.zeros(2, bool), CodingConfig())


def test_ista_gram_matches_code():
    rng = np.random.default_rng(8)
    W = rng.normal(size=(10, 14))
    X = rng.normal(size=(3, 10))
    cfg = CodingConfig(lam=0.2)
    step = auto_step_size(W)
    np.testing.assert_allclose(ista_gram(W.T @ W, X @ W, cfg.lam, step, cfg.n_iters),
                               code(W, X, cfg), rtol=1e-9, atol=1e-11)


@pytest.mark.parametrize("weights, c, expected", [
    (np.eye(2), [1.0, 2.0], [1.0, 2.0]),
    ([[1.0, 2.0], [3.0, 4.0]], [1.0, 1.0], [3.0, 7.0]),
    ([[1.0, 2.0], [3.0, 4.0]], [0.0, 0.0], [0.0, 0.0]),
])
def test_reconstruct(weights, c, expected):
    np.testing.assert_array_equal(reconstruct(weights, np.array(c)), expected)


def test_reconstruct_shape_error():
    with pytest.raises(ShapeError):
        reconstruct(np.eye(2), np.ones(3))


def test_hebbian_step_scalar():
    d = hebbian_step(Dictionary([[1.0]]), np.array([1.0]), np.array([2.0]), 0.1)
    assert d.weights[0, 0] == pytest.approx(1.1, abs=1e-15)


def test_hebbian_step_zero_code_is_noop():
    rng = np.random.default_rng(9)
    d = Dictionary(rng.normal(size=(3, 4)))
    before = d.weights.copy()
    hebbian_step(d, np.zeros(4), rng.normal(size=3), 0.5)
    np.testing.assert_array_equal(d.weights, before)


@pytest.mark.property
def test_hebbian_step_is_negative_gradient():
    rng = np.random.default_rng(10)
    W = rng.normal(size=(4, 8))
    c = rng.normal(size=8)
    x = rng.normal(size=4)
    eta = 0.01

    def loss(flat):
        r = flat.reshape(4, 8) @ c - x
        return 0.5 * r @ r

    h = 1e-6
    grad = np.zeros(W.size)
    for i in range(W.size):
        e = np.zeros(W.size)
        e[i] = h
        grad[i] = (loss(W.ravel() + e) - loss(W.ravel() - e)) / (2 * h)
    d = hebbian_step(Dictionary(W.copy()), c, x, eta)
    increment = (d.weights - W).ravel()
    expected = -eta * grad
    assert np.linalg.norm(increment - expected) / np.linalg.norm(expected) <= 1e-5


def test_hebbian_step_shape_error():
    with pytest.raises(ShapeError):
        hebbian_step(Dictionary(np.eye(2)), np.ones(3), np.ones(2), 0.1)


def test_dictionary_init_statistics():
    d = Dictionary.random(200, 300, np.random.default_rng(11))
    assert d.weights.shape == (200, 300)
    assert abs(d.weights.mean()) < 1e-3
    assert d.weights.std() == pytest.approx(0.01, rel=0.02)


def test_dictionary_roundtrip(tmp_path):
    d = Dictionary(np.random.default_rng(12).normal(size=(3, 5)))
    d.save(tmp_path / "d.txt")
    loaded = Dictionary.load(tmp_path / "d.txt")
    np.testing.assert_array_equal(loaded.weights, d.weights)
    assert (tmp_path / "d.txt").read_text().splitlines()[0] == "3 5"


@pytest.mark.synthetic
def test_dictionary_learning_on_planted_data():
    rng = np.random.default_rng(13)
    true = rng.normal(size=(8, 16))
    true /= np.linalg.norm(true, axis=0)
    d = Dictionary.random(8, 16, rng, std=0.1)
    cfg = CodingConfig(lam=0.01, n_iters=100)

    def sample():
        c = np.zeros(16)
        idx = rng.choice(16, 2, replace=False)
        c[idx] = rng.normal(size=2)
        return true @ c

    probe = np.array([sample() for _ in range(200)])

    def mean_error():
        C = code(d, probe, cfg)
        return np.mean(np.sum((C @ d.weights.T - probe) ** 2, axis=1))

    initial = mean_error()
    for _ in range(5000):
        x = sample()
        hebbian_step(d, code(d, x, cfg), x, 0.05)
    assert mean_error() < 0.1 * initial
