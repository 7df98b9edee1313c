"""Commit to the hint or hand over to a hint-agnostic fallback."""

from .. import vecmath
from .base import Policy


class Switch(Policy):
    """Plays ``hint`` forever iff ``r_hat * horizon <= regret_bound``.

    The branch is fixed at construction and costs no pulls. Otherwise every
    round is delegated to ``fallback``.
    """

    def __init__(self, hint, r_hat, horizon, regret_bound, fallback):
        super().__init__()
        self.hint = vecmath.check_in_ball(hint).copy()
        self.r_hat = float(r_hat)
        self.horizon = horizon
        self.regret_bound = float(regret_bound)
        self.plays_hint = self.r_hat * horizon <= self.regret_bound
        self.fallback = fallback
        self.phase = "switch-hint" if self.plays_hint else "switch-fallback"

    def _play(self):
        if self.plays_hint:
            while True:
                yield self.hint
        else:
            yield from self.delegate(self.fallback)
