import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hintbandit.environment import (
    BanditInstance, Environment, RegretLedger, instantaneous_regret, regret_sandwich_bounds,
)
from hintbandit.errors import BudgetError, DomainError
from hintbandit.rng import RandomSource


def env_for(theta, sigma=0.0, horizon=10, hints=(), seed=0):
    return Environment(BanditInstance(np.array(theta, float), sigma), horizon,
                       RandomSource(seed), hints)


def test_pull_examples_noiseless():
    env = env_for([0.6, 0.8])
    assert env.pull([0.6, 0.8]) == pytest.approx(1.0)
    assert env.ledger.cum_regret == pytest.approx(0.0)
    env = env_for([1.0, 0.0])
    assert env.pull([0.0, 1.0]) == 0.0
    assert env.ledger.cum_regret == pytest.approx(1.0)
    env = env_for([0.6, 0.8])
    assert env.pull([1.0, 0.0]) == pytest.approx(0.6)
    assert env.ledger.cum_regret == pytest.approx(0.4)


def test_pull_errors():
    env = env_for([1.0, 0.0], horizon=1)
    with pytest.raises(DomainError):
        env.pull([1.0, 0.1])
    env.pull([1.0, 0.0])
    with pytest.raises(BudgetError):
        env.pull([1.0, 0.0])


def test_ball_slack():
    env = env_for([1.0, 0.0])
    env.pull([1.0 + 1e-13, 0.0])
    with pytest.raises(DomainError):
        env.pull([1.0 + 1e-9, 0.0])


def test_instance_validation():
    with pytest.raises(DomainError):
        BanditInstance(np.zeros(3))
    with pytest.raises(DomainError):
        BanditInstance(np.ones(3), noise_sigma=-1.0)
    inst = BanditInstance(np.array([0.0, 2.0]))
    with pytest.raises(ValueError):
        inst.theta_star[0] = 1.0


def test_instantaneous_regret_examples():
    inst = BanditInstance(np.array([0.3, -0.4]))
    assert instantaneous_regret(inst, inst.optimal_action) == pytest.approx(0.0, abs=1e-15)
    assert instantaneous_regret(inst, -inst.optimal_action) == pytest.approx(1.0)


def test_sandwich_examples():
    inst = BanditInstance(np.array([1.0, 0.0]))
    assert regret_sandwich_bounds(inst, inst.optimal_action) == (0.0, 0.0)
    lo, hi = regret_sandwich_bounds(inst, np.array([0.0, 1.0]))
    assert (lo, hi) == (0.5, 3.0)
    assert lo <= instantaneous_regret(inst, [0.0, 1.0]) <= hi


def test_sandwich_precondition():
    inst = BanditInstance(np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        regret_sandwich_bounds(inst, np.array([-0.8, 0.6]))
    with pytest.raises(DomainError):
        regret_sandwich_bounds(inst, np.array([0.5, 0.0]))


def test_sandwich_random_pairs():
    rng = RandomSource(11)
    checked = 0
    while checked < 1000:
        d = 2 + int(rng.integers(8))
        theta = rng.standard_normal(d) * rng.uniform()
        a = rng.standard_normal(d)
        a /= np.linalg.norm(a)
        inst = BanditInstance(theta)
        if inst.mean_reward(a) < -inst.theta_norm / 2:
            continue
        lo, hi = regret_sandwich_bounds(inst, a)
        r = instantaneous_regret(inst, a)
        assert lo - 1e-12 <= r <= hi + 1e-12
        checked += 1


def test_ledger_identity_and_monotonicity():
    rng = RandomSource(4)
    theta = np.array([0.2, -0.5, 0.4])
    hints = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.6, 0.8])]
    env = env_for(theta, sigma=1.0, horizon=500, hints=hints, seed=2)
    prev = 0.0
    for _ in range(500):
        a = rng.standard_normal(3)
        a /= max(1.0, np.linalg.norm(a))
        env.pull(a)
        assert env.ledger.cum_regret >= prev - 1e-15
        prev = env.ledger.cum_regret
    assert env.ledger.decomposition_error() <= 1e-9 * 500


def test_noise_is_gaussian_and_seeded():
    a = env_for([1.0, 0.0], sigma=2.0, horizon=5000, seed=9)
    b = env_for([1.0, 0.0], sigma=2.0, horizon=5000, seed=9)
    ra = np.array([a.pull([0.0, 1.0]) for _ in range(5000)])
    rb = np.array([b.pull([0.0, 1.0]) for _ in range(5000)])
    np.testing.assert_array_equal(ra, rb)
    assert abs(ra.std() - 2.0) < 0.1


def test_noise_mgf():
    env = env_for([1.0, 0.0], sigma=1.0, horizon=100_000, seed=21)
    xi = np.array([env.pull([0.0, 1.0]) for _ in range(100_000)])
    for lam in (-1.0, -0.5, 0.5, 1.0):
        assert np.mean(np.exp(lam * xi)) <= math.exp(lam**2 / 2) * 1.05


def test_ledger_csv():
    led = RegretLedger(np.array([0.1]))
    led.record(0.5, np.array([0.9]), 0.5)
    led.snapshot("norm")
    assert led.csv_header() == ["run_id", "seed", "t", "cum_regret", "cum_hint_regret_h0", "phase"]
    rows = list(led.csv_rows(0, 7))
    assert rows == [[0, 7, 1, "0.5", "0.4", "norm"]]


@settings(max_examples=100)
@given(st.integers(0, 2**32), st.integers(1, 200))
def test_noiseless_pull_is_pure(seed, t):
    rng = RandomSource(seed)
    theta = rng.standard_normal(3)
    env1 = env_for(theta, 0.0, t, seed=seed)
    env2 = env_for(theta, 0.0, t, seed=seed + 1)
    for _ in range(t):
        a = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        assert env1.pull(a) == env2.pull(a)
