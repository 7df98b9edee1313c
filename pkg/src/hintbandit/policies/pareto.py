"""Hint-exploiting policies for a single hint.

Both policies run three phases: estimate ||theta*|| with the zero reference
action, estimate ||P_perp_h theta*|| for h and -h while selecting the sign
positively correlated with theta*, then hand the estimated hint regret to
:class:`~hintbandit.policies.switch.Switch`.
"""

import math

import numpy as np

from .. import vecmath
from ..concentration import ConfidenceInterval, anytime_hoeffding_width, intervals_disjoint
from ..errors import DomainError
from ..estimator import EstimateNormHP
from .base import Policy
from .baselines import oful_factory
from .switch import Switch
from .two_arm import HintFavoringTwoArm

# Worst-case regret scale, calibrated against OFUL: the 95th percentile of its
# regret at d in {8, 16}, T = 2^16 over 20 seeds, divided by d ln(T) sqrt(T).
DEFAULT_W = 0.193
# Ratio 0.06 / (2 * 5^2) between the squared estimates and a lower bound on r_h.
HINT_REGRET_FACTOR = 0.06 / (2 * 5**2)


def _unit_hint(hint):
    h = vecmath.as_vector(hint).astype(float)
    if abs(vecmath.norm(h) - 1.0) > vecmath.UNIT_TOL:
        raise DomainError(f"hint must have unit norm, got {vecmath.norm(h):.15g}")
    if h.size < 2:
        raise DomainError("hint-exploiting policies need dimension >= 2")
    return h


class _HintPolicy(Policy):
    """Shared phase-1 logic and bookkeeping."""

    def __init__(self, hint, horizon, delta_prob, rng, fallback_factory, hp_k, norm_estimate):
        super().__init__()
        self.hint = _unit_hint(hint)
        self.d = self.hint.size
        self.horizon = int(horizon)
        if self.horizon < 1:
            raise DomainError("horizon must be >= 1")
        if not 0.0 < delta_prob < 1.0:
            raise DomainError(f"delta_prob must lie in (0, 1), got {delta_prob}")
        self.delta_prob = delta_prob
        self.rng = rng
        self.fallback_factory = fallback_factory or oful_factory(delta_prob)
        self.hp_k = hp_k
        self.r = norm_estimate
        self.r_perp = None
        self.chosen_sign = None
        self.switch = None

    def _estimate_theta_norm(self):
        self.phase = "norm"
        if self.r is None:
            c0 = EstimateNormHP(
                np.zeros(self.d), 1.0, self.delta_prob / 4, self.rng.child(1), k=self.hp_k
            )
            r = None
            while r is None:
                r = yield from c0.steps()
            self.r = r
            self._event(phase="orth", r=r)
        return self.r

    def _commit(self, signs, r_hat, regret_bound):
        sign = signs[int(self.rng.child(5).integers(len(signs)))]
        self.chosen_sign = sign
        fallback = self.fallback_factory(self.d, self.horizon - self.rounds, self.rng.child(4))
        self.switch = Switch(sign * self.hint, r_hat, self.horizon, regret_bound, fallback)
        self.phase = self.switch.phase
        self._event(
            phase=self.phase, r_perp=self.r_perp, r_hat=r_hat, sign=sign,
            plays_hint=self.switch.plays_hint,
        )
        yield from self.delegate(self.switch)


class ParetoBandit(_HintPolicy):
    """Hint-exploiting policy with O(sqrt T) hint-based regret.

    Args:
        hint: unit-norm hint.
        horizon: total number of rounds T.
        delta_prob: failure probability.
        W: worst-case regret scale of the fallback, R_LB = W d ln(T) sqrt(T).
        rng: :class:`~hintbandit.rng.RandomSource` for perturbations and choices.
        fallback_factory: ``(dimension, horizon, rng) -> Policy``; OFUL by default.
        hp_k: inner-estimator count for every EstimateNormHP (the delta-derived default if None).
        norm_estimate: skip the ||theta*|| phase and use this value instead.
    """

    def __init__(self, hint, horizon, delta_prob=0.1, W=DEFAULT_W, rng=None,
                 fallback_factory=None, hp_k=None, norm_estimate=None):
        super().__init__(hint, horizon, delta_prob, rng, fallback_factory, hp_k, norm_estimate)
        self.W = float(W)

    def exit_threshold(self):
        T = self.horizon
        return 10.0 * self.W * self.d * math.log(T) / math.sqrt(T)

    def regret_bound(self):
        T = self.horizon
        return self.W * self.d * math.log(T) * math.sqrt(T)

    def _play(self):
        r = yield from self._estimate_theta_norm()
        self.phase = "orth"
        T = self.horizon
        self.perturbation = 1.0 / (math.sqrt(r) * T**0.25)
        arms = {
            +1: EstimateNormHP(self.hint, self.perturbation, self.delta_prob / 4,
                               self.rng.child(2), k=self.hp_k),
            -1: EstimateNormHP(-self.hint, self.perturbation, self.delta_prob / 4,
                               self.rng.child(3), k=self.hp_k),
        }
        self.arms = arms
        active = [+1, -1]
        threshold = self.exit_threshold()
        while True:
            for sign in active:
                yield from arms[sign].steps()
            if len(active) == 2:
                ys = {s: self._hint_interval(arms[s]) for s in active}
                if intervals_disjoint(ys[+1], ys[-1]):
                    loser = +1 if ys[+1].center < ys[-1].center else -1
                    active.remove(loser)
                    self._event(phase="orth", eliminated=loser)
            r_perp = None
            for sign in active:
                est = arms[sign].estimate
                if est is not None and HINT_REGRET_FACTOR * est**2 / r >= threshold:
                    r_perp = est
                    break
            if r_perp is None and len(active) == 1:
                r_perp = arms[active[0]].estimate
            if r_perp is not None:
                break
        self.r_perp = r_perp
        self.surviving = list(active)
        yield from self._commit(active, HINT_REGRET_FACTOR * r_perp**2 / r, self.regret_bound())

    def _hint_interval(self, hp):
        n = hp.hint_count
        return ConfidenceInterval(hp.hint_mean, anytime_hoeffding_width(n, 1.0, self.delta_prob))


class FrontierBandit(_HintPolicy):
    """Trades hint-based regret O(G log T) against worst-case O(d T log T / G).

    Phase 2 schedules the h / -h estimators with a hint-favoring two-arm
    bandit; see :class:`~hintbandit.policies.two_arm.HintFavoringTwoArm`.
    """

    def __init__(self, hint, horizon, G, delta_prob=0.1, c0=4.0, c1=1.0, rng=None,
                 fallback_factory=None, hp_k=None, norm_estimate=None):
        super().__init__(hint, horizon, delta_prob, rng, fallback_factory, hp_k, norm_estimate)
        if not G > 0:
            raise DomainError(f"G must be positive, got {G}")
        if G > math.sqrt(self.horizon) * (1.0 + 1e-12):
            raise DomainError(f"G = {G} exceeds sqrt(T) = {math.sqrt(self.horizon)}")
        if not c0 > c1:
            raise DomainError(f"need c0 > c1, got c0={c0}, c1={c1}")
        self.G = float(G)
        self.c0 = float(c0)
        self.c1 = float(c1)

    def _play(self):
        r = yield from self._estimate_theta_norm()
        self.phase = "orth"
        T, G, d = self.horizon, self.G, self.d
        self.perturbation = math.sqrt(G) / math.sqrt(r * T)
        arms = [
            EstimateNormHP(self.hint, self.perturbation, self.delta_prob / 4,
                           self.rng.child(2), k=self.hp_k),
            EstimateNormHP(-self.hint, self.perturbation, self.delta_prob / 4,
                           self.rng.child(3), k=self.hp_k),
        ]
        self.arms = arms
        sched = HintFavoringTwoArm(G, T, self.delta_prob)
        self.scheduler = sched
        threshold = self.c0 * d * math.log(T) / G
        while True:
            arm = sched.next_arm()
            yield from arms[arm].steps()
            for y in arms[arm].last_hint_rewards:
                sched.record(arm, y)
            before = sched.eliminated
            sched.step_done()
            if sched.eliminated is not None and before is None:
                self._event(phase="orth", eliminated=(+1, -1)[sched.eliminated])
            alive = sched.surviving
            r_perp = None
            for a in alive:
                est = arms[a].estimate
                if est is not None and est**2 / r >= threshold:
                    r_perp = est
                    break
            if r_perp is None and len(alive) == 1:
                r_perp = arms[alive[0]].estimate
            if r_perp is not None:
                break
        self.r_perp = r_perp
        signs = [(+1, -1)[a] for a in alive]
        self.surviving = signs
        yield from self._commit(signs, r_perp**2 / r, self.c1 * d * math.log(T) * T / G)
