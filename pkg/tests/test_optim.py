import numpy as np
import pytest

from spheredisp.geometry import geodesic_distance, log_map, sample_uniform, tangent_project
from spheredisp.optim import (
    NonTangentGradientError,
    OptimizerState,
    ProjectionAtOriginError,
    step,
    step_projected_adam,
    step_radam,
    step_rsgd,
)
from spheredisp.regularizers import GradientBatch, grad_lloyd, loss_lloyd
from spheredisp.rng import stream


def circle_point(theta):
    return np.array([[np.cos(theta), np.sin(theta)]])


def rotation_field(X):
    """Unit tangent field pointing counter-clockwise on the circle."""
    return np.stack([-X[:, 1], X[:, 0]], axis=1)


def loglog_slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


@pytest.mark.parametrize("method", ["rsgd", "radam", "projected-adam"])
def test_zero_gradient_is_fixed_point(method, config):
    state = OptimizerState(method=method, lr=0.1)
    Y = step(config, GradientBatch.full(np.zeros_like(config)), state)
    assert np.array_equal(Y, config) or np.allclose(Y, config, atol=1e-15)
    assert state.step_count == 1


def test_radam_step_count_advances_on_zero_gradient(config):
    state = OptimizerState(method="radam")
    X = config
    for _ in range(5):
        X = step_radam(X, GradientBatch.full(np.zeros_like(X)), state)
    assert state.step_count == 5
    assert np.allclose(X, config, atol=1e-15)


@pytest.mark.parametrize("fn", [step_rsgd, step_radam])
def test_non_tangent_gradient_rejected(fn, config):
    with pytest.raises(NonTangentGradientError):
        fn(config, GradientBatch.full(config.copy()), OptimizerState())


def test_untouched_indices_unchanged_rsgd(config, rng):
    g = tangent_project(config[[2, 5]], rng.normal(size=(2, config.shape[1])))
    Y = step_rsgd(config, GradientBatch(np.array([2, 5]), g), OptimizerState(method="rsgd", lr=0.1))
    others = np.setdiff1d(np.arange(len(config)), [2, 5])
    assert np.array_equal(Y[others], config[others])
    assert not np.allclose(Y[[2, 5]], config[[2, 5]])


def test_projected_adam_origin_error():
    X = np.array([[1.0, 0.0]])
    with pytest.raises(ProjectionAtOriginError):
        step_projected_adam(X, GradientBatch.full(np.array([[1.0, 0.0]])), OptimizerState(method="projected-adam", lr=1.0, eps=1e-300))


@pytest.mark.parametrize("kwargs", [{"method": "sgd"}, {"lr": 0.0}, {"betas": (1.0, 0.9)}, {"retraction": "cayley"}])
def test_state_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerState(**kwargs)


@pytest.mark.parametrize("retraction", ["exp", "proj"])
def test_one_dimensional_convergence_is_monotone(retraction):
    target = circle_point(2.0)
    X = circle_point(-0.5)
    state = OptimizerState(method="rsgd", lr=0.2, retraction=retraction)
    dist = [geodesic_distance(X[0], target[0])]
    for _ in range(200):
        # grad of 0.5 d(x, target)^2 is -Log_x(target)
        X = step_rsgd(X, GradientBatch.full(-log_map(X, target)), state)
        dist.append(geodesic_distance(X[0], target[0]))
    d = np.diff(dist)
    assert np.all(d[:80] < 0)
    # below ~1e-11 the step falls under the retraction's zero-vector cutoff
    assert np.all(d <= 0)
    assert dist[-1] < 1e-10


def test_exp_and_proj_agree_to_second_order(rng):
    X = sample_uniform(20, 6, rng)
    g = tangent_project(X, rng.normal(size=X.shape))
    lrs = np.array([1e-1, 5e-2, 2.5e-2, 1.25e-2])
    gaps = []
    for lr in lrs:
        a = step_rsgd(X, GradientBatch.full(g), OptimizerState(method="rsgd", lr=lr, retraction="exp"))
        b = step_rsgd(X, GradientBatch.full(g), OptimizerState(method="rsgd", lr=lr, retraction="proj"))
        gaps.append(np.max(geodesic_distance(a, b)))
    # the gap is at least second order (it is in fact third order)
    assert loglog_slope(lrs, gaps) >= 1.9


def test_adam_effective_step_approaches_lr():
    lr = 1e-3
    X = circle_point(0.3)
    state = OptimizerState(method="radam", lr=lr)
    moves = []
    for _ in range(300):
        Y = step_radam(X, GradientBatch.full(rotation_field(X)), state)
        moves.append(geodesic_distance(X[0], Y[0]))
        X = Y
    assert moves[-1] == pytest.approx(lr, rel=1e-4)


def test_projected_adam_matches_radam_proj_to_second_order(rng):
    X0 = sample_uniform(15, 5, rng)
    G = [tangent_project(X0, rng.normal(size=X0.shape)) for _ in range(3)]
    lrs = np.array([4e-2, 2e-2, 1e-2, 5e-3])
    gaps = []
    for lr in lrs:
        # coordinate-wise second moments on both sides so the preconditioners coincide
        sa = OptimizerState(method="radam", lr=lr, retraction="proj", per_coordinate=True)
        sb = OptimizerState(method="projected-adam", lr=lr)
        A = B = X0
        for g in G:
            A = step_radam(A, GradientBatch.full(tangent_project(A, g)), sa)
            B = step_projected_adam(B, GradientBatch.full(tangent_project(B, g)), sb)
        gaps.append(np.max(geodesic_distance(A, B)))
    assert loglog_slope(lrs, gaps) >= 1.9
    assert gaps[-1] < lrs[-1] * 1e-1


@pytest.mark.parametrize("method", ["rsgd", "radam", "projected-adam"])
def test_unit_norm_invariant(method):
    rng = stream(4, "unit", method)
    X = sample_uniform(30, 8, rng)
    state = OptimizerState(method=method, lr=0.05)
    for _ in range(50):
        g = rng.normal(size=X.shape)
        if method != "projected-adam":
            g = tangent_project(X, g)
        X = step(X, GradientBatch.full(g), state)
        assert np.max(np.abs(np.linalg.norm(X, axis=1) - 1)) <= 1e-9


@pytest.mark.parametrize("per_coordinate", [False, True])
def test_radam_first_moment_stays_tangent(per_coordinate):
    rng = stream(5, "m1")
    X = sample_uniform(25, 6, rng)
    state = OptimizerState(method="radam", lr=0.05, per_coordinate=per_coordinate)
    for _ in range(20):
        X = step_radam(X, GradientBatch.full(tangent_project(X, rng.normal(size=X.shape))), state)
        assert np.max(np.abs(np.sum(state.m1 * X, axis=1))) <= 1e-12
        assert np.all(state.m2 >= 0)
    assert state.m2.shape == (X.shape if per_coordinate else (X.shape[0], 1))


def test_radam_minibatch_leaves_momentum_running(rng):
    X = sample_uniform(6, 4, rng)
    state = OptimizerState(method="radam", lr=0.01)
    X = step_radam(X, GradientBatch.full(tangent_project(X, rng.normal(size=X.shape))), state)
    Y = step_radam(X, GradientBatch(np.array([0]), tangent_project(X[:1], rng.normal(size=(1, 4)))), state)
    # points outside the batch keep moving on their first moment
    assert not np.allclose(Y[1:], X[1:])


def test_rsgd_lloyd_decreasing_schedule_decreases_loss():
    n, m, seeds = 20, 3, 10
    pool = sample_uniform(20000, m, stream(0, "lloyd-pool"))
    checkpoints = list(range(0, 301, 30))
    curves = []
    for seed in range(seeds):
        rng = stream(seed, "lloyd-run")
        X = sample_uniform(n, m, rng)
        state = OptimizerState(method="rsgd", lr=1.0)
        curve = []
        for t in range(checkpoints[-1] + 1):
            if t in checkpoints:
                curve.append(loss_lloyd(X, pool))
            # sum lr = inf, sum lr^2 < inf
            state.lr = 2.0 * n / (t + 10)
            batch = pool[rng.choice(pool.shape[0], 500, replace=False)]
            X = step_rsgd(X, grad_lloyd(X, batch), state)
        curves.append(curve)
    mean = np.mean(curves, axis=0)
    assert np.all(np.diff(mean) <= 0)
    assert mean[-1] < mean[0]


@pytest.mark.parametrize("method", ["rsgd", "radam", "projected-adam"])
def test_deterministic_trajectories(method):
    def run():
        rng = stream(9, "det", method)
        X = sample_uniform(40, 5, rng)
        state = OptimizerState(method=method, lr=0.02)
        for _ in range(30):
            X = step(X, GradientBatch.full(tangent_project(X, rng.normal(size=X.shape))), state)
        return X

    assert np.array_equal(run(), run())
