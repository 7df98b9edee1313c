"""Hint-agnostic and hint-only baselines."""

import math

import numpy as np

from .. import vecmath
from .base import Policy


class PlayHint(Policy):
    """Plays the hint in every round."""

    phase = "hint"

    def __init__(self, hint):
        super().__init__()
        self.hint = vecmath.check_in_ball(hint).copy()

    def _play(self):
        while True:
            yield self.hint


def optimistic_ball_action(theta_hat, V, beta):
    """argmax over the unit ball of <theta_hat, a> + beta ||a||_{V^-1}.

    The optimum equals max ||theta|| over the ellipsoid
    (theta - theta_hat)^T V (theta - theta_hat) <= beta^2, attained at
    a = theta~ / ||theta~||. With V = U diag(lam) U^T and c = U^T theta_hat the
    maximizer is theta~ = theta_hat + U (c / (mu lam - 1)), where the dual
    multiplier mu > 1 / lam_min solves psi(mu) = beta for
    psi(mu)^2 = sum lam c^2 / (mu lam - 1)^2. 1 / psi is concave in mu, so
    Newton started left of the root increases monotonically to it.
    """
    lam, U = np.linalg.eigh(V)
    c = U.T @ theta_hat
    w = lam * c * c
    mu_pole = 1.0 / lam[0]
    inv_beta = 1.0 / beta

    def inv_psi(mu):
        r = 1.0 / (mu * lam - 1.0)
        q2 = float(np.dot(w, r * r))
        return (1.0 / math.sqrt(q2) if q2 > 0 else math.inf), q2, r

    mu = mu_pole * (1.0 + 1e-10)
    f, q2, r = inv_psi(mu)
    if f - inv_beta > 0:
        # Root lies within 1e-10 of the pole (theta_hat nearly orthogonal to
        # the least-explored direction): treat as the hard case.
        mu = mu_pole
        near = lam * mu_pole - 1.0 <= 1e-10
        dev = np.zeros_like(c)
        dev[~near] = c[~near] / (lam[~near] * mu_pole - 1.0)
        resid = max(beta * beta - float(np.dot(lam[~near], dev[~near] ** 2)), 0.0)
        dev[0] = math.copysign(math.sqrt(resid / lam[0]), c[0] if c[0] else 1.0)
        theta = U @ (c + dev)
        return theta / vecmath.norm(theta)
    for _ in range(100):
        # d(1/psi)/dmu = sum(w lam r^3) / psi^3
        q3 = float(np.dot(w * lam, r * r * r))
        step = (f - inv_beta) / (q3 * f**3)
        mu -= step
        f, q2, r = inv_psi(mu)
        if abs(f - inv_beta) <= 1e-13 * inv_beta or abs(step) <= 1e-15 * mu:
            break
    theta = U @ (c + c * r)
    return theta / vecmath.norm(theta)


class OFUL(Policy):
    """Optimism in the face of uncertainty over the unit ball.

    Ridge estimate with regularizer ``ridge`` and confidence radius
    beta_t = sqrt(ridge) S + R sqrt(2 ln(1/delta) + d ln(1 + t / (ridge d)))
    where t counts past observations, S bounds ||theta*|| and R is the
    sub-Gaussian scale of the reward noise (1 in every experiment).
    """

    phase = "oful"

    def __init__(self, dimension, horizon=None, delta_prob=0.1, ridge=1.0, norm_bound=1.0,
                 noise_scale=1.0):
        super().__init__()
        self.d = int(dimension)
        self.horizon = horizon
        self.delta_prob = delta_prob
        self.ridge = ridge
        self.norm_bound = norm_bound
        self.noise_scale = noise_scale
        self.V = ridge * np.eye(self.d)
        self.b = np.zeros(self.d)
        self.theta_hat = np.zeros(self.d)

    def beta(self, t):
        return math.sqrt(self.ridge) * self.norm_bound + self.noise_scale * math.sqrt(
            2.0 * math.log(1.0 / self.delta_prob)
            + self.d * math.log(1.0 + t / (self.ridge * self.d))
        )

    def _play(self):
        t = 0
        while True:
            self.theta_hat = np.linalg.solve(self.V, self.b)
            a = optimistic_ball_action(self.theta_hat, self.V, self.beta(t))
            y = yield a
            self.V += np.outer(a, a)
            self.b += y * a
            t += 1


def oful_factory(delta_prob=0.1, ridge=1.0, norm_bound=1.0):
    """Fallback factory building :class:`OFUL` for ``(dimension, horizon, rng)``."""

    def make(dimension, horizon, rng=None):
        return OFUL(dimension, horizon, delta_prob=delta_prob, ridge=ridge, norm_bound=norm_bound)

    return make
