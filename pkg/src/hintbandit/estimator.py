"""Low-regret estimation of ||P_perp_h theta*||.

:class:`EstimateNorm` alternates between the reference action ``h`` and a
fixed perturbation of it, and stops once the mean reward difference clears
twice its confidence width. :class:`EstimateNormHP` runs ``k`` independent
copies and reports the median of the first ~2/3 that stop.

Both expose their update as a generator (``steps``) that yields actions and
receives rewards, so policies can interleave them with other play, and as a
callback-driven method (``play_and_update``) for direct use.
"""

import csv
import io
import math

import numpy as np

from . import vecmath
from .concentration import estimator_width
from .errors import DomainError, StateError

# Fraction of inner estimators that must return before the median is emitted.
RETURN_FRACTION = 0.67
# Default inner-estimator count k = ceil(K_SCALE * ln(1/delta)).
K_SCALE = 560.0


def drive(steps, pull):
    """Run a step generator to completion, answering each action with ``pull``."""
    try:
        action = next(steps)
        while True:
            action = steps.send(pull(action))
    except StopIteration as stop:
        return stop.value


class EstimateNorm:
    """Constant-probability estimator of ||P_perp_h theta*||.

    Args:
        h: reference action, zero or unit norm.
        delta: perturbation magnitude; E||p||^2 = delta^2.
        rng: source for the one-time draw of the perturbation.
        keep_trace: record ``(n, xbar, b_n, returned)`` after every update.
    """

    def __init__(self, h, delta, rng, keep_trace=False):
        h = vecmath.as_vector(h)
        if not vecmath.hint_norm_is_valid(h):
            raise DomainError(f"reference action must have norm 0 or 1, got {vecmath.norm(h)}")
        if not delta > 0:
            raise DomainError(f"delta must be > 0, got {delta}")
        self.h = h
        self.delta = float(delta)
        self.d_eff = vecmath.effective_dim(h)
        self.p = vecmath.sample_projected_gaussian(h, self.delta**2, rng)
        self.p.setflags(write=False)
        self.h_norm_sq = float(np.dot(h, h))
        self.p_norm_sq = float(np.dot(self.p, self.p))
        self.scale = math.sqrt(self.h_norm_sq + self.p_norm_sq)
        if self.scale == 0.0:
            raise DomainError("perturbation collapsed to zero; cannot probe")
        self.probe = vecmath.perturb(h, self.p)
        self.n = 0
        self.y_sum = 0.0
        self.z_sum = 0.0
        self.last_y = None
        self.estimate = None
        self.trace = [] if keep_trace else None

    @property
    def returned(self):
        return self.estimate is not None

    @property
    def ybar(self):
        return self.y_sum / self.n if self.n else 0.0

    @property
    def zbar(self):
        return self.z_sum / self.n if self.n else 0.0

    @property
    def xbar(self):
        return self.zbar * self.scale - self.ybar

    def width(self, n=None):
        return estimator_width(self.n if n is None else n, self.h_norm_sq, self.p_norm_sq)

    def steps(self):
        """One update: yields ``h`` then the perturbed action; returns the estimate or None."""
        if self.returned:
            raise StateError("estimator already returned its estimate")
        y = yield self.h
        z = yield self.probe
        return self._update(y, z)

    def play_and_update(self, pull):
        return drive(self.steps(), pull)

    def _update(self, y, z):
        self.n += 1
        self.y_sum += y
        self.z_sum += z
        self.last_y = y
        xbar = self.xbar
        b = self.width()
        hit = abs(xbar) >= 2.0 * b
        if self.trace is not None:
            self.trace.append((self.n, xbar, b, hit))
        if hit:
            self.estimate = math.sqrt(self.d_eff) / self.delta * abs(xbar)
            return self.estimate
        return None

    def trace_csv(self):
        """The recorded trace as CSV text with columns n, xbar, b_n, returned."""
        if self.trace is None:
            raise StateError("estimator was built without keep_trace")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "xbar", "b_n", "returned"])
        for n, xbar, b, hit in self.trace:
            w.writerow([n, repr(float(xbar)), repr(float(b)), int(hit)])
        return buf.getvalue()


def hp_instance_count(delta_prob, k_scale=K_SCALE):
    """k = ceil(k_scale * ln(1/delta_prob)), at least 1."""
    if not 0.0 < delta_prob < 1.0:
        raise DomainError(f"delta_prob must lie in (0, 1), got {delta_prob}")
    return max(1, math.ceil(k_scale * math.log(1.0 / delta_prob)))


def return_threshold(k):
    return math.ceil(RETURN_FRACTION * k)


def lower_median(values):
    s = sorted(values)
    return float(s[(len(s) - 1) // 2])


class EstimateNormHP:
    """Median-of-estimates amplification of :class:`EstimateNorm`.

    Args:
        h: reference action, zero or unit norm.
        delta: perturbation magnitude of every inner estimator.
        delta_prob: failure probability; sets ``k`` unless ``k`` is given.
        rng: parent stream; inner estimator ``i`` uses ``rng.child(i)``.
        k: explicit number of inner estimators, overriding the default.

    Once ``ceil(0.67 k)`` inner estimators have returned, every further update
    plays ``h`` once and returns the (unchanged) median.
    """

    def __init__(self, h, delta, delta_prob, rng, k=None, keep_trace=False):
        if not 0.0 < delta_prob < 1.0:
            raise DomainError(f"delta_prob must lie in (0, 1), got {delta_prob}")
        self.k = hp_instance_count(delta_prob) if k is None else int(k)
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {k}")
        self.h = vecmath.as_vector(h)
        self.delta = float(delta)
        self.threshold = return_threshold(self.k)
        self.inner = [EstimateNorm(h, delta, rng.child(i), keep_trace) for i in range(self.k)]
        self.active = list(range(self.k))
        self.returned_values = []
        self.estimate = None
        self.updates = 0
        self.hint_count = 0
        self.hint_sum = 0.0
        self.last_hint_rewards = []

    @property
    def committed(self):
        return self.estimate is not None

    @property
    def hint_mean(self):
        return self.hint_sum / self.hint_count if self.hint_count else 0.0

    def steps(self):
        """One update; returns the median once committed, else None."""
        self.updates += 1
        self.last_hint_rewards = []
        if len(self.returned_values) >= self.threshold:
            y = yield self.h
            self._record_hint(y)
        else:
            still_active = []
            for i in self.active:
                inner = self.inner[i]
                r = yield from inner.steps()
                self._record_hint(inner.last_y)
                if r is None:
                    still_active.append(i)
                else:
                    self.returned_values.append(r)
            self.active = still_active
        if len(self.returned_values) >= self.threshold:
            if self.estimate is None:
                self.estimate = lower_median(self.returned_values)
            return self.estimate
        return None

    def play_and_update(self, pull):
        return drive(self.steps(), pull)

    def _record_hint(self, y):
        self.hint_count += 1
        self.hint_sum += y
        self.last_hint_rewards.append(y)

    def pulls_per_update(self):
        return 1 if len(self.returned_values) >= self.threshold else 2 * len(self.active)


# ---------------------------------------------------------------------------
# Fast simulation of the stopping rule.
#
# Against a Gaussian linear environment the paired difference
# x_i = scale * z_i - y_i is i.i.d. N(c, sigma^2 (1 + ||h||^2 + ||p||^2)) with
# c = <theta*, p>, so the estimator's stopping time depends only on the random
# walk S_n = sum x_i. The walk is advanced in blocks whose endpoints are drawn
# exactly; a block is expanded into its individual steps (an exact discrete
# Gaussian bridge) unless a Brownian-bridge bound shows that a crossing inside
# it has probability below BRIDGE_SKIP_PROB.
# ---------------------------------------------------------------------------

BRIDGE_SKIP_PROB = 1e-13
_MIN_BLOCK = 64
_EXPAND_MAX = 4096


def _stop_boundary(n, k_const):
    """|S_n| must reach 2 n b_n = 2 sqrt(n k ln(40 ln 2n))."""
    return 2.0 * np.sqrt(n * k_const * np.log(40.0 * np.log(2.0 * n)))


def _first_crossing(gen, n0, s0, n1, s1, drift, sd, k_const):
    """First boundary crossing of a walk pinned at (n0, s0) and (n1, s1), or None."""
    var = sd * sd
    stack = [(n0, s0, n1, s1)]
    while stack:
        a, sa, b, sb = stack.pop()
        length = b - a
        if sd > 0.0 and abs(sb) < _stop_boundary(b, k_const):
            # The boundary is increasing, so a crossing inside the segment
            # means the bridge reached +-lvl.
            lvl = _stop_boundary(a + 1, k_const)
            v = length * var
            up = math.exp(-2.0 * max(lvl - sa, 0.0) * max(lvl - sb, 0.0) / v)
            dn = math.exp(-2.0 * max(lvl + sa, 0.0) * max(lvl + sb, 0.0) / v)
            if up + dn < BRIDGE_SKIP_PROB:
                continue
        if length <= _EXPAND_MAX:
            steps = drift + sd * gen.standard_normal(length)
            # Conditioning i.i.d. Gaussian steps on their sum.
            steps += (sb - sa - steps.sum()) / length
            path = sa + np.cumsum(steps)
            ns = a + np.arange(1, length + 1)
            hit = np.nonzero(np.abs(path) >= _stop_boundary(ns, k_const))[0]
            if hit.size:
                i = int(hit[0])
                return a + i + 1, float(path[i])
            continue
        m = length // 2
        mid = sa + (sb - sa) * m / length
        if sd > 0.0:
            mid += sd * math.sqrt(m * (length - m) / length) * gen.standard_normal()
        stack.append((a + m, mid, b, sb))
        stack.append((a, sa, a + m, mid))
    return None


def simulate_return_time(drift, var, k_const, rng, max_updates=10**12):
    """Sample the first n with |S_n / n| >= 2 b_n for a Gaussian walk.

    Args:
        drift: mean of one paired difference, <theta*, p>.
        var: variance of one paired difference.
        k_const: 3 (1 + ||h||^2 + ||p||^2), the width's variance proxy.
        rng: :class:`~hintbandit.rng.RandomSource`.
        max_updates: give up after this many updates.

    Returns:
        ``(n, S_n)`` at the stopping time, or ``(None, S_last)`` if the walk
        did not stop within ``max_updates``.
    """
    gen = rng.generator
    sd = math.sqrt(var)
    n = 0
    s = 0.0
    while n < max_updates:
        dist = _stop_boundary(n + 1, k_const) - abs(s)
        if sd > 0.0:
            blk = max(_MIN_BLOCK, int((dist / (8.0 * sd)) ** 2))
        else:
            blk = max(_MIN_BLOCK, n)
        blk = int(min(blk, max_updates - n))
        end = s + blk * drift
        if sd > 0.0:
            end += sd * math.sqrt(blk) * gen.standard_normal()
        hit = _first_crossing(gen, n, s, n + blk, end, drift, sd, k_const)
        if hit is not None:
            return hit
        n += blk
        s = end
    return None, s


def simulate_estimate_norm(instance, h, delta, rng, max_updates=10**12):
    """Draw one EstimateNorm run against ``instance`` via the random-walk shortcut.

    The perturbation is drawn from ``rng`` exactly as :class:`EstimateNorm`
    draws it; the walk uses ``rng.child(1)``.

    Returns:
        ``(estimate, n)``; both None when the run did not stop.
    """
    est = EstimateNorm(h, delta, rng)
    drift = float(np.dot(instance.theta_star, est.p))
    k_const = 3.0 * (1.0 + est.h_norm_sq + est.p_norm_sq)
    var = instance.noise_sigma**2 * (1.0 + est.h_norm_sq + est.p_norm_sq)
    n, s = simulate_return_time(drift, var, k_const, rng.child(1), max_updates)
    if n is None:
        return None, None
    return math.sqrt(est.d_eff) / est.delta * abs(s / n), n


def simulate_estimate_norm_hp(instance, h, delta, rng, k, max_updates=10**12):
    """Draw one EstimateNormHP run (commit time and median) via the shortcut.

    Inner estimator ``i`` uses ``rng.child(i)``. All inner estimators advance
    together, so the HP commits at the ``ceil(0.67 k)``-th smallest inner
    return time and its median covers every inner run that stopped by then.

    Returns:
        ``(median, updates)``; both None when fewer than ``ceil(0.67 k)``
        inner runs stopped within ``max_updates``.
    """
    results = [simulate_estimate_norm(instance, h, delta, rng.child(i), max_updates) for i in range(k)]
    done = sorted((n, r) for r, n in results if n is not None)
    need = return_threshold(k)
    if len(done) < need:
        return None, None
    commit = done[need - 1][0]
    values = [r for n, r in done if n <= commit]
    return lower_median(values), commit
