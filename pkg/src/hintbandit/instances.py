"""Bandit instances and hints for experiments.

Random well-conditioned instances, hints of prescribed quality and the
adversarial families used to probe the hint/worst-case regret frontier.
Families that are axis-aligned "without loss of generality" are built in an
orthonormal basis whose first axis is the hint.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import vecmath
from .environment import BanditInstance, instantaneous_regret
from .errors import ConfigError, DomainError

# Constants of the near-hint family guarantees.
NEAR_HINT_MAX_DELTA = 0.25
NEAR_HINT_ACTION_FACTOR = 4.0
NEAR_HINT_REGRET_FACTOR = 972.0


def _unit(h, name="h"):
    h = vecmath.as_vector(h).astype(float)
    if abs(vecmath.norm(h) - 1.0) > vecmath.UNIT_TOL:
        raise DomainError(f"{name} must have unit norm, got {vecmath.norm(h):.15g}")
    return h


def random_unit_instance(d, rng, norm=1.0, noise_sigma=1.0):
    """theta* uniform on the sphere of radius ``norm``."""
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if not 0.0 < norm <= 1.0:
        raise DomainError(f"norm must lie in (0, 1], got {norm}")
    while True:
        g = rng.standard_normal(d)
        n = vecmath.norm(g)
        if n > 1e-12:
            return BanditInstance(norm * g / n, noise_sigma)


def pareto_family_delta(d, rho, hint_regret):
    """Perturbation size sqrt((d - 1) rho / (2 R_h)) of the frontier family."""
    if hint_regret <= 0:
        raise DomainError("hint_regret must be positive")
    return math.sqrt((d - 1) * rho / (2.0 * hint_regret))


def gen_pareto_family(h, rho, Delta, rng, noise_sigma=1.0):
    """The family {rho h} and {rho h +- Delta e_i : i = 2..d}.

    ``e_2..e_d`` complete ``h`` to a random orthonormal basis drawn from
    ``rng``. Returns ``2(d-1) + 1`` instances: the center first, then
    ``+e_2, -e_2, +e_3, -e_3, ...``. With ``Delta = 0`` every member equals
    the center.
    """
    h = _unit(h)
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if Delta < 0:
        raise DomainError(f"Delta must be >= 0, got {Delta}")
    if rho**2 + Delta**2 > 1.0 + 1e-12:
        raise DomainError(f"rho^2 + Delta^2 = {rho**2 + Delta**2:.6g} exceeds 1")
    basis = vecmath.orthonormal_basis(h, rng)
    center = rho * h
    family = [BanditInstance(center, noise_sigma)]
    for e in basis[1:]:
        family.append(BanditInstance(center + Delta * e, noise_sigma))
        family.append(BanditInstance(center - Delta * e, noise_sigma))
    return family


def gen_cube_family(theta, Delta, d, signs, noise_sigma=1.0):
    """Instance (theta, s_1 Delta/sqrt(d), ..., s_d Delta/sqrt(d)) in dimension d + 1."""
    signs = list(signs)
    if len(signs) != d:
        raise DomainError(f"need {d} signs, got {len(signs)}")
    if any(s not in (1, -1) for s in signs):
        raise DomainError("signs must be +1 or -1")
    if theta**2 + Delta**2 > 1.0 + 1e-12:
        raise DomainError(f"theta^2 + Delta^2 = {theta**2 + Delta**2:.6g} exceeds 1")
    coords = np.concatenate([[float(theta)], np.asarray(signs, float) * Delta / math.sqrt(d)])
    return BanditInstance(coords, noise_sigma)


def near_hint_delta(d, T):
    """Radius sqrt(d / (2^8 sqrt(T))) of the near-hint family."""
    return math.sqrt(d / (2.0**8 * math.sqrt(T)))


def gen_near_hint(h, Delta, rng, noise_sigma=1.0):
    """theta* = h/2 + v with v uniform in the ball of radius ``Delta``.

    The output has the dimension of ``h``; for a family parametrized by ``d``
    pass a hint in dimension ``d + 1``. The generated instance is checked to
    satisfy ||a* - h|| <= 4 Delta and r(a*, h) <= 972 Delta^2.
    """
    h = _unit(h)
    if not 0.0 <= Delta <= NEAR_HINT_MAX_DELTA:
        raise DomainError(f"Delta must lie in [0, 1/4], got {Delta}")
    d = h.size
    v = np.zeros(d)
    if Delta > 0:
        g = rng.standard_normal(d)
        v = g / vecmath.norm(g) * Delta * rng.uniform() ** (1.0 / d)
    inst = BanditInstance(0.5 * h + v, noise_sigma)
    gap = vecmath.norm(inst.optimal_action - h)
    assert gap <= NEAR_HINT_ACTION_FACTOR * Delta + 1e-12, gap
    assert instantaneous_regret(inst, h) <= NEAR_HINT_REGRET_FACTOR * Delta**2 + 1e-12
    return inst


def gen_hint_of_quality(instance, target, rng):
    """Unit hint whose instantaneous regret equals ``target``.

    Rotates a* by the angle with ||theta*|| (1 - cos angle) = target inside a
    random plane containing a*.
    """
    tn = instance.theta_norm
    if not 0.0 <= target <= 2.0 * tn:
        raise DomainError(f"target must lie in [0, {2 * tn:.6g}], got {target}")
    a = instance.optimal_action
    c = min(1.0, max(-1.0, 1.0 - target / tn))
    if instance.dimension == 1:
        if c not in (1.0, -1.0):
            raise DomainError("in dimension 1 only targets 0 and 2||theta*|| exist")
        return a * c
    u = vecmath.random_unit_orthogonal(a, rng)
    h = c * a + math.sqrt(max(0.0, 1.0 - c * c)) * u
    return h / vecmath.norm(h)


INSTANCE_KINDS = ("random_unit", "scaled", "pareto_family", "cube_family", "near_hint")


@dataclass
class InstanceSpec:
    """Serializable description of how to build an instance.

    ``params`` by kind:
        random_unit: none.
        scaled: ``norm``.
        pareto_family: ``rho``, ``Delta`` (or ``hint_regret``), ``index``
            (0 is the center, 2i-1 / 2i are +- the i-th orthogonal axis).
        cube_family: ``theta``, ``Delta``, ``signs``; ``dimension`` is
            ``len(signs) + 1``.
        near_hint: ``Delta`` (or ``horizon``, giving the family radius).

    Families centered on a hint use ``reference``, the first coordinate axis.
    """

    kind: str
    dimension: int
    params: dict = field(default_factory=dict)
    noise_sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise ConfigError("instance.kind", f"unknown kind {self.kind!r}")
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ConfigError("instance.dimension", "must be a positive integer")
        if not self.noise_sigma >= 0:
            raise ConfigError("instance.noise_sigma", "must be >= 0")
        p = self.params
        need = {
            "scaled": ["norm"],
            "pareto_family": ["rho"],
            "cube_family": ["theta", "Delta", "signs"],
        }.get(self.kind, [])
        for key in need:
            if key not in p:
                raise ConfigError(f"instance.params.{key}", "missing")
        if self.kind == "pareto_family":
            if ("Delta" in p) == ("hint_regret" in p):
                raise ConfigError("instance.params", "give exactly one of Delta, hint_regret")
            idx = p.get("index", 0)
            if not 0 <= idx <= 2 * (self.dimension - 1):
                raise ConfigError("instance.params.index", f"out of range: {idx}")
        if self.kind == "cube_family" and len(p["signs"]) + 1 != self.dimension:
            raise ConfigError("instance.params.signs", "need dimension - 1 signs")
        if self.kind == "near_hint" and ("Delta" in p) == ("horizon" in p):
            raise ConfigError("instance.params", "give exactly one of Delta, horizon")

    @property
    def reference(self):
        e = np.zeros(self.dimension)
        e[0] = 1.0
        return e

    def build(self, rng):
        d, p, s = self.dimension, self.params, self.noise_sigma
        if self.kind == "random_unit":
            return random_unit_instance(d, rng, 1.0, s)
        if self.kind == "scaled":
            return random_unit_instance(d, rng, float(p["norm"]), s)
        if self.kind == "pareto_family":
            rho = float(p["rho"])
            delta = p.get("Delta")
            if delta is None:
                delta = pareto_family_delta(d, rho, float(p["hint_regret"]))
            family = gen_pareto_family(self.reference, rho, float(delta), rng, s)
            return family[int(p.get("index", 0))]
        if self.kind == "cube_family":
            return gen_cube_family(float(p["theta"]), float(p["Delta"]), d - 1, p["signs"], s)
        delta = p.get("Delta")
        if delta is None:
            delta = near_hint_delta(d - 1, int(p["horizon"]))
        return gen_near_hint(self.reference, float(delta), rng, s)

    def to_dict(self):
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "params": dict(self.params),
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("instance", "must be a mapping")
        unknown = set(data) - {"kind", "dimension", "params", "noise_sigma"}
        if unknown:
            raise ConfigError(f"instance.{sorted(unknown)[0]}", "unknown field")
        for key in ("kind", "dimension"):
            if key not in data:
                raise ConfigError(f"instance.{key}", "missing")
        params = data.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("instance.params", "must be a mapping")
        return cls(data["kind"], data["dimension"], dict(params),
                   float(data.get("noise_sigma", 1.0)))
