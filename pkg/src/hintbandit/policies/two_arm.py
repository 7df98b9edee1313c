"""A two-arm scheduler that favors a designated hint arm.

Arm 0 is the hint arm. Arm 1 is explored on a budget that grows linearly
in time, reaching ``G ln T`` pulls by the horizon, so the regret against
arm 0 stays O(G log T). Either arm is dropped for good once time-uniform
confidence intervals separate them; after that the survivor is pulled
every time.
"""

import math

from ..concentration import ConfidenceInterval, anytime_hoeffding_width, intervals_disjoint


class HintFavoringTwoArm:
    """Scheduler with ``next_arm()`` / ``record(arm, reward)``.

    Args:
        G: target hint-based regret scale.
        horizon: total number of scheduler pulls expected.
        delta_prob: confidence level of the elimination test.
        sigma: sub-Gaussian scale of the rewards.
    """

    def __init__(self, G, horizon, delta_prob=0.1, sigma=1.0):
        if G <= 0:
            raise ValueError(f"G must be positive, got {G}")
        self.G = float(G)
        self.horizon = int(horizon)
        self.delta_prob = delta_prob
        self.sigma = sigma
        self.counts = [0, 0]
        self.sums = [0.0, 0.0]
        self.eliminated = None
        self.pulls = 0

    @property
    def surviving(self):
        return [a for a in (0, 1) if a != self.eliminated]

    def explore_budget(self):
        """Arm-1 pulls allowed after ``self.pulls`` scheduler steps."""
        return self.G * math.log(max(self.horizon, 2)) * self.pulls / self.horizon

    def next_arm(self):
        if self.eliminated is not None:
            return 1 - self.eliminated
        if self.counts[0] == 0:
            return 0
        if self.counts[1] == 0:
            return 1
        return 1 if self.counts[1] < self.explore_budget() else 0

    def interval(self, arm):
        n = self.counts[arm]
        if n == 0:
            return ConfidenceInterval(0.0, math.inf)
        return ConfidenceInterval(
            self.sums[arm] / n, anytime_hoeffding_width(n, self.sigma, self.delta_prob)
        )

    def record(self, arm, reward):
        self.counts[arm] += 1
        self.sums[arm] += reward

    def step_done(self):
        """Close one scheduler pull and run the elimination test."""
        self.pulls += 1
        if self.eliminated is None and min(self.counts) > 0:
            i0, i1 = self.interval(0), self.interval(1)
            if intervals_disjoint(i0, i1):
                self.eliminated = 0 if i0.center < i1.center else 1
