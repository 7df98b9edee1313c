"""Vector primitives on the closed unit ball.

Projections onto a direction and its orthogonal complement, hint
perturbation, and the projected Gaussian used to draw perturbations.
All vectors are 1-d float numpy arrays.
"""

import math

import numpy as np

from .errors import DomainError

# Absolute slack allowed on the unit-ball constraint.
BALL_SLACK = 1e-12
# Tolerance used when checking that a hint has norm 0 or 1.
UNIT_TOL = 1e-9
ORTHO_TOL = 1e-10


def as_vector(x):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DomainError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def norm(v):
    return math.sqrt(float(np.dot(v, v)))


def in_ball(a, slack=BALL_SLACK):
    return float(np.dot(a, a)) <= (1.0 + slack) ** 2


def check_in_ball(a):
    a = as_vector(a)
    if not in_ball(a):
        raise DomainError(f"action has norm {norm(a):.15g} > 1")
    return a


def is_zero(h):
    return not np.any(h)


def hint_norm_is_valid(h):
    """True when ``h`` is the zero vector or a unit vector."""
    return is_zero(h) or abs(norm(h) - 1.0) <= UNIT_TOL


def effective_dim(h):
    """Number of free coordinates of a perturbation of ``h``.

    ``d`` for the zero hint and ``d - 1`` otherwise. Every caller that needs
    this convention goes through here.
    """
    h = as_vector(h)
    return h.size - (0 if is_zero(h) else 1)


def project_onto(u, v):
    """Projection of ``u`` onto span(v): <u,v> v / ||v||^2."""
    u, v = as_vector(u), as_vector(v)
    vv = float(np.dot(v, v))
    if vv == 0.0:
        raise DomainError("cannot project onto the zero vector")
    return (float(np.dot(u, v)) / vv) * v


def project_orth(u, v):
    """Projection of ``u`` onto the orthogonal complement of ``v``."""
    u = as_vector(u)
    return u - project_onto(u, v)


def perturb(h, p):
    """The unit action (h + p) / sqrt(||h||^2 + ||p||^2).

    ``h`` must be zero or unit norm and ``p`` orthogonal to it. The result is
    explicitly renormalized so it has unit norm to machine precision.
    """
    h, p = as_vector(h), as_vector(p)
    if h.shape != p.shape:
        raise DomainError(f"shape mismatch {h.shape} vs {p.shape}")
    if not hint_norm_is_valid(h):
        raise DomainError(f"hint must have norm 0 or 1, got {norm(h):.15g}")
    p_norm = norm(p)
    if abs(float(np.dot(p, h))) > ORTHO_TOL * max(1.0, p_norm):
        raise DomainError("perturbation is not orthogonal to the hint")
    s = h + p
    s_norm = norm(s)
    if s_norm == 0.0:
        raise DomainError("zero hint with zero perturbation has no direction")
    return s / s_norm


def sample_projected_gaussian(h, variance_scale, rng):
    """Draw P_perp_h g with g ~ N(0, variance_scale / d' * I).

    ``variance_scale`` is the expected squared norm of the result (Delta^2).
    For ``h = 0`` the projector is the identity and ``d' = d``.
    """
    h = as_vector(h)
    if variance_scale < 0:
        raise DomainError(f"variance_scale must be >= 0, got {variance_scale}")
    d_eff = effective_dim(h)
    if variance_scale == 0 or d_eff == 0:
        return np.zeros_like(h)
    g = rng.standard_normal(h.size) * math.sqrt(variance_scale / d_eff)
    if is_zero(h):
        return g
    return project_orth(g, h)


def orthonormal_basis(first, rng):
    """Orthonormal basis of R^d whose first vector is ``first`` (normalized).

    Remaining vectors come from Gram-Schmidt on Gaussian draws.
    """
    first = as_vector(first)
    d = first.size
    n0 = norm(first)
    if n0 == 0.0:
        raise DomainError("basis seed vector must be nonzero")
    basis = [first / n0]
    while len(basis) < d:
        v = rng.standard_normal(d)
        for b in basis:
            v = v - np.dot(v, b) * b
        nv = norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.array(basis)


def random_unit_orthogonal(v, rng):
    """A uniformly random unit vector orthogonal to ``v``."""
    v = as_vector(v)
    while True:
        u = project_orth(rng.standard_normal(v.size), v)
        nu = norm(u)
        if nu > 1e-8:
            return u / nu
