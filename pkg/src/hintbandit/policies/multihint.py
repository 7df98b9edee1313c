"""Tournament over several hints followed by the single-hint policy."""

import math

import numpy as np

from .. import vecmath
from ..concentration import anytime_hoeffding_width
from ..errors import DomainError
from ..estimator import EstimateNormHP
from .base import Policy
from .pareto import DEFAULT_W, ParetoBandit
from .baselines import oful_factory


def with_negations(hints):
    """``hints`` followed by their negations."""
    hs = [vecmath.as_vector(h).astype(float) for h in hints]
    return hs + [-h for h in hs]


def check_negation_closed(hints, tol=1e-9):
    for i, h in enumerate(hints):
        if not any(vecmath.norm(h + g) <= tol for g in hints):
            raise DomainError(f"hint set is not closed under negation: -hints[{i}] missing")


class MultiHintBandit(Policy):
    """Eliminates hints in a round-robin tournament, then runs ParetoBandit.

    Args:
        hints: unit hints, closed under negation (see :func:`with_negations`).
            ``m`` is the number of +-pairs.
        horizon: total number of rounds T.
        delta_prob: failure probability.
        B: exploration ratio; the tournament lasts at most T / (m B) passes.
            Defaults to ceil(m^(1/3)).
        W: worst-case regret scale passed to ParetoBandit.
        c0: constant of the large-regret removal test.
        rng: :class:`~hintbandit.rng.RandomSource`.
        fallback_factory: fallback for the final Switch.
        hp_k: inner-estimator count override for every EstimateNormHP.
    """

    def __init__(self, hints, horizon, delta_prob=0.1, B=None, W=DEFAULT_W, c0=4.0, rng=None,
                 fallback_factory=None, hp_k=None):
        super().__init__()
        hints = [vecmath.as_vector(h).astype(float) for h in hints]
        if len(hints) < 2:
            raise DomainError("need at least one hint and its negation")
        for h in hints:
            if abs(vecmath.norm(h) - 1.0) > vecmath.UNIT_TOL:
                raise DomainError("every hint must have unit norm")
            if h.size != hints[0].size:
                raise DomainError("hints must share one dimension")
        check_negation_closed(hints)
        self.hints = hints
        self.d = hints[0].size
        self.m = len(hints) // 2
        self.horizon = int(horizon)
        self.delta_prob = delta_prob
        self.B = math.ceil(self.m ** (1.0 / 3.0) - 1e-12) if B is None else int(B)
        self.W = float(W)
        self.c0 = float(c0)
        self.rng = rng
        self.fallback_factory = fallback_factory or oful_factory(delta_prob)
        self.hp_k = hp_k
        self.perturbation = math.sqrt(self.m) / self.horizon**0.25
        self.r = None
        self.r_perp = None
        self.chosen_hint = None
        self.single = None
        self.tournament_passes = 0

    def _play(self):
        T, m = self.horizon, self.m
        self.phase = "norm"
        c0 = EstimateNormHP(np.zeros(self.d), 1.0, self.delta_prob / 4, self.rng.child(1),
                            k=self.hp_k)
        r = None
        while r is None:
            r = yield from c0.steps()
        self.r = r
        self._event(phase="tournament", r=r)
        self.phase = "tournament"
        inst = [
            EstimateNormHP(h, self.perturbation, self.delta_prob / (4 * m),
                           self.rng.child(100 + i), k=self.hp_k)
            for i, h in enumerate(self.hints)
        ]
        self.instances = inst
        active = list(range(len(inst)))
        max_passes = T / (m * self.B)
        removal = self.c0 * self.W * self.d * math.log(T) / math.sqrt(T)
        while self.tournament_passes < max_passes and len(active) > 1:
            for i in active:
                yield from inst[i].steps()
            self.tournament_passes += 1
            centers = np.array([inst[i].hint_mean for i in active])
            widths = np.array([
                anytime_hoeffding_width(inst[i].hint_count, 1.0, self.delta_prob, 40.0 * m)
                for i in active
            ])
            lowers, uppers = centers - widths, centers + widths
            keep = []
            for j, i in enumerate(active):
                others = np.delete(lowers, j)
                if others.size and uppers[j] <= others.max():
                    self._event(phase="tournament", eliminated=i)
                else:
                    keep.append(i)
            active = keep
            for i in list(active):
                est = inst[i].estimate
                if len(active) > 1 and est is not None and est**2 / r >= removal:
                    active.remove(i)
                    self._event(phase="tournament", removed=i, r_perp=est)
        self.surviving = list(active)
        pick = active[int(self.rng.child(6).integers(len(active)))]
        self.chosen_hint = pick
        self._event(phase="norm", chosen_hint=pick)
        self.single = ParetoBandit(
            self.hints[pick], T, self.delta_prob, self.W, self.rng.child(7),
            self.fallback_factory, self.hp_k, norm_estimate=r,
        )
        yield from self.delegate(self.single, track=True)
