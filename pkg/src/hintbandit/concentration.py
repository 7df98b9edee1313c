"""Confidence widths and tail-bound predicates.

Every width used by an estimator or an elimination test lives here so the
constants are defined once.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as _std_normal

from .errors import DomainError

# Constant inside the iterated logarithm of the elimination widths.
ELIMINATION_LOG_SCALE = 40.0
# Constant of the plain time-uniform Hoeffding bound.
HOEFFDING_LOG_SCALE = 4.0


@dataclass(frozen=True)
class ConfidenceInterval:
    """Open interval (center - half_width, center + half_width)."""

    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width >= 0:
            raise DomainError(f"half_width must be >= 0, got {self.half_width}")

    @property
    def lower(self):
        return self.center - self.half_width

    @property
    def upper(self):
        return self.center + self.half_width

    def contains(self, x):
        return abs(x - self.center) < self.half_width

    def intersects(self, other):
        return abs(self.center - other.center) < self.half_width + other.half_width


def intervals_disjoint(a, b):
    """True iff the open intervals do not intersect (touching counts as disjoint)."""
    return not a.intersects(b)


def estimator_width(n, h_norm_sq, p_norm_sq):
    """Width b_n of the norm estimator after ``n`` paired pulls.

    sqrt(3 (1 + ||h||^2 + ||p||^2) ln(40 ln(2n)) / n). The variance proxy
    1 + ||h||^2 + ||p||^2 is that of one paired difference under unit noise.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    k = 3.0 * (1.0 + h_norm_sq + p_norm_sq)
    return math.sqrt(k * math.log(ELIMINATION_LOG_SCALE * math.log(2.0 * n)) / n)


def anytime_hoeffding_width(n, sigma=1.0, delta=0.1, log_scale=ELIMINATION_LOG_SCALE):
    """Time-uniform deviation bound for the mean of ``n`` sigma-sub-Gaussian draws.

    sigma * sqrt(3 ln(log_scale * ln(2n) / delta) / n). With ``log_scale=4``
    this is the plain time-uniform Hoeffding bound; the default 40 is the
    variant used by the sign-elimination tests, and the multi-hint tournament
    passes ``40 * m``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    return sigma * math.sqrt(3.0 * math.log(log_scale * math.log(2.0 * n) / delta) / n)


def anytime_hoeffding_widths(ns, sigma=1.0, delta=0.1, log_scale=ELIMINATION_LOG_SCALE):
    """Vectorized :func:`anytime_hoeffding_width` over an array of counts."""
    ns = np.asarray(ns, dtype=float)
    if np.any(ns < 1):
        raise DomainError("all counts must be >= 1")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return sigma * np.sqrt(3.0 * np.log(log_scale * np.log(2.0 * ns) / delta) / ns)


def gaussian_norm_bounds(d, delta, v_norm_sq=1.0):
    """Thresholds of the four tail events for G ~ N(0, I/d) and a fixed v.

    Returns a dict with ``norm_sq_upper``, ``norm_sq_lower`` (bounds on
    ||G||^2) and ``proj_sq_upper``, ``proj_sq_lower`` (bounds on <v, G>^2).
    Each event holds with probability at least 1 - delta.
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    log_inv = math.log(1.0 / delta)
    q_hi = _std_normal.ppf(1.0 - delta / 2.0)
    q_lo = _std_normal.ppf(0.5 + delta / 2.0)
    return {
        "norm_sq_upper": 1.0 + 2.0 * math.sqrt(log_inv / d) + 2.0 * log_inv / d,
        "norm_sq_lower": 1.0 - 2.0 * math.sqrt(log_inv / d),
        "proj_sq_upper": 2.0 * v_norm_sq / d
        * min(q_hi**2, 0.5 + log_inv + math.sqrt(log_inv)),
        "proj_sq_lower": v_norm_sq / d * max(q_lo**2, 1.0 - 2.0 * math.sqrt(log_inv)),
    }


def gaussian_tail_events(g, v, delta):
    """Evaluate the four tail events on samples.

    ``g`` has shape (d,) or (n, d) and is assumed drawn from N(0, I/d).
    Returns a (4,) or (n, 4) boolean array in the order
    (norm upper, norm lower, projection upper, projection lower).
    """
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    d = g.shape[-1]
    b = gaussian_norm_bounds(d, delta, float(np.dot(v, v)))
    nsq = np.sum(g * g, axis=-1)
    psq = (g @ v) ** 2
    return np.stack(
        [
            nsq <= b["norm_sq_upper"],
            nsq >= b["norm_sq_lower"],
            psq <= b["proj_sq_upper"],
            psq >= b["proj_sq_lower"],
        ],
        axis=-1,
    )
