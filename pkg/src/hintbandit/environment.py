"""The hidden bandit instance and its regret bookkeeping.

Policies only ever see the rewards returned by :meth:`Environment.pull`.
The ledger is read by the harness.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import vecmath
from .errors import BudgetError, DomainError

_NOISE_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """Reward parameter theta* and noise scale of a linear bandit."""

    theta_star: np.ndarray
    noise_sigma: float = 1.0

    def __post_init__(self):
        theta = vecmath.as_vector(self.theta_star).copy()
        theta.setflags(write=False)
        object.__setattr__(self, "theta_star", theta)
        if theta.size < 1:
            raise DomainError("theta_star must be nonempty")
        if not np.all(np.isfinite(theta)) or not np.any(theta):
            raise DomainError("theta_star must be finite and nonzero")
        if self.noise_sigma < 0:
            raise DomainError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @property
    def dimension(self):
        return self.theta_star.size

    @property
    def theta_norm(self):
        return vecmath.norm(self.theta_star)

    @property
    def optimal_action(self):
        return self.theta_star / self.theta_norm

    def mean_reward(self, action):
        return float(np.dot(self.theta_star, action))


def instantaneous_regret(instance, action):
    """||theta*|| - <theta*, action>, the gap to the optimal action."""
    return instance.theta_norm - instance.mean_reward(action)


def regret_sandwich_bounds(instance, action):
    """Lower and upper bounds on the regret of a unit action.

    (1/2) ||P_perp_a theta*||^2 / ||theta*|| <= regret <= 3 (same). Valid for
    unit actions with <a, theta*> >= -||theta*|| / 2.
    """
    a = vecmath.as_vector(action)
    if abs(vecmath.norm(a) - 1.0) > vecmath.UNIT_TOL:
        raise DomainError("sandwich bounds need a unit-norm action")
    tn = instance.theta_norm
    if instance.mean_reward(a) < -tn / 2.0:
        raise DomainError("sandwich bounds need <a, theta*> >= -||theta*|| / 2")
    perp = vecmath.project_orth(instance.theta_star, a)
    q = float(np.dot(perp, perp)) / tn
    return 0.5 * q, 3.0 * q


@dataclass
class RegretLedger:
    """Cumulative pseudo-regret and hint-based regret, one column per hint."""

    hint_gaps: np.ndarray
    t: int = 0
    cum_regret: float = 0.0
    cum_hint_regret: np.ndarray = None
    trace: list = field(default_factory=list)

    def __post_init__(self):
        self.hint_gaps = np.asarray(self.hint_gaps, dtype=float)
        if self.cum_hint_regret is None:
            self.cum_hint_regret = np.zeros(self.hint_gaps.size)

    def record(self, regret, hint_values, action_value):
        self.t += 1
        self.cum_regret += regret
        # hint_values[j] = <theta*, h_j>; hint regret of this round is h_j - a.
        self.cum_hint_regret += hint_values - action_value

    def snapshot(self, phase=""):
        self.trace.append((self.t, self.cum_regret, tuple(self.cum_hint_regret), phase))

    def decomposition_error(self):
        """Largest |Reg(t) - t r(a*, h) - Reg_h(t)| over registered hints."""
        if self.hint_gaps.size == 0:
            return 0.0
        resid = self.cum_regret - (self.t * self.hint_gaps + self.cum_hint_regret)
        return float(np.max(np.abs(resid)))

    def csv_header(self):
        cols = ["run_id", "seed", "t", "cum_regret"]
        cols += [f"cum_hint_regret_h{j}" for j in range(self.hint_gaps.size)]
        return cols + ["phase"]

    def csv_rows(self, run_id, seed):
        for t, reg, hint_regs, phase in self.trace:
            yield [run_id, seed, t, repr(float(reg))] + [repr(float(x)) for x in hint_regs] + [
                phase
            ]


class Environment:
    """One simulation run: draws rewards and charges regret to the ledger.

    Args:
        instance: the hidden :class:`BanditInstance`.
        horizon: number of pulls allowed; one more raises :class:`BudgetError`.
        rng: :class:`~hintbandit.rng.RandomSource` for the reward noise.
        hints: hints whose hint-based regret is tracked.
    """

    def __init__(self, instance, horizon, rng, hints=()):
        self.instance = instance
        self.horizon = int(horizon)
        self._rng = rng
        self._theta = instance.theta_star
        self._theta_norm = instance.theta_norm
        self._sigma = float(instance.noise_sigma)
        hints = [vecmath.check_in_ball(h) for h in hints]
        for h in hints:
            if h.size != instance.dimension:
                raise DomainError("hint dimension does not match the instance")
        self._hint_values = np.array([float(np.dot(self._theta, h)) for h in hints])
        self.ledger = RegretLedger(self._theta_norm - self._hint_values)
        self._noise = np.empty(0)
        self._noise_pos = 0

    @property
    def dimension(self):
        return self.instance.dimension

    @property
    def rounds_left(self):
        return self.horizon - self.ledger.t

    def _next_noise(self):
        if self._noise_pos >= self._noise.size:
            self._noise = self._rng.standard_normal(_NOISE_BLOCK)
            self._noise_pos = 0
        g = self._noise[self._noise_pos]
        self._noise_pos += 1
        return g

    def pull(self, action):
        """Play ``action`` and return its noisy reward."""
        if self.ledger.t >= self.horizon:
            raise BudgetError(f"horizon of {self.horizon} rounds exhausted")
        a = np.asarray(action, dtype=float)
        if a.shape != self._theta.shape:
            raise DomainError(f"action shape {a.shape} != {self._theta.shape}")
        if float(np.dot(a, a)) > (1.0 + vecmath.BALL_SLACK) ** 2:
            raise DomainError(f"action has norm {math.sqrt(float(np.dot(a, a))):.15g} > 1")
        mean = float(np.dot(self._theta, a))
        self.ledger.record(self._theta_norm - mean, self._hint_values, mean)
        if self._sigma == 0.0:
            return mean
        return mean + self._sigma * self._next_noise()
