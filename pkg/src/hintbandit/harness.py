"""Declarative Monte Carlo experiments.

An :class:`ExperimentConfig` names an instance recipe, a hint recipe, a
policy, a horizon and a seed set. :func:`run_experiment` plays one
independent replication per seed and folds them, in seed order, into a
:class:`RunSummary`. Each replication derives its streams from its seed
alone, so serial and parallel execution give identical results.

Quantiles use the nearest-rank rule: the q-quantile of n sorted values is
the value at 1-based rank ceil(q n) (rank 1 for q = 0). The median is
therefore the lower median for even n.
"""

import copy
import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__, vecmath
from .environment import Environment
from .errors import ConfigError
from .estimator import EstimateNormHP
from .instances import InstanceSpec, gen_hint_of_quality
from .policies import (
    DEFAULT_W, OFUL, FrontierBandit, MultiHintBandit, ParetoBandit, PlayHint, Switch,
    oful_factory, with_negations,
)
from .rng import RandomSource

CSV_SCHEMA_VERSION = 1
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

HINT_KINDS = ("perfect", "negated", "quality", "explicit", "reference", "multi")
POLICY_PARAMS = {
    "pareto_bandit": {"W", "delta_prob", "hp_k"},
    "frontier": {"G", "c0", "c1", "delta_prob", "hp_k"},
    "multi_hint": {"B", "W", "c0", "delta_prob", "hp_k"},
    "oful": {"ridge", "delta_prob", "noise_scale"},
    "play_hint": set(),
    "switch": {"r_hat", "R_LB", "delta_prob"},
}
# Stream ids under each replication's seed.
STREAM_INSTANCE, STREAM_HINT, STREAM_NOISE, STREAM_POLICY = 0, 1, 2, 3


def nearest_rank(values, q):
    """Nearest-rank q-quantile of ``values``."""
    s = sorted(values)
    if not s:
        return math.nan
    rank = max(1, math.ceil(q * len(s)))
    return s[rank - 1]


def _number(value, path, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


@dataclass
class ExperimentConfig:
    """One experiment.

    Attributes:
        instance: :class:`~hintbandit.instances.InstanceSpec`.
        hint: ``{"kind": ...}`` with kind one of perfect, negated, reference,
            quality (``target``), explicit (``vector``) or multi (``m``,
            ``include_good``, ``bad_quality``).
        policy: ``{"kind": ..., **params}``; see ``POLICY_PARAMS``.
        horizon: number of rounds T.
        seeds: explicit list of seeds.
        record_every: trace granularity in rounds.
    """

    instance: InstanceSpec
    hint: dict
    policy: dict
    horizon: int
    seeds: list
    record_every: int = 64

    def __post_init__(self):
        self.validate()

    def validate(self):
        T = _number(self.horizon, "horizon", positive=True, integer=True)
        self.horizon = T
        _number(self.record_every, "record_every", positive=True, integer=True)
        if not self.seeds:
            raise ConfigError("seeds", "need at least one seed")
        for i, s in enumerate(self.seeds):
            if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2**64:
                raise ConfigError(f"seeds[{i}]", f"invalid seed {s!r}")
        d = self.instance.dimension

        h = self.hint
        if not isinstance(h, dict) or h.get("kind") not in HINT_KINDS:
            raise ConfigError("hint.kind", f"must be one of {', '.join(HINT_KINDS)}")
        if h["kind"] == "quality":
            t = _number(h.get("target"), "hint.target")
            if t < 0:
                raise ConfigError("hint.target", "must be >= 0")
        if h["kind"] == "explicit":
            v = h.get("vector")
            if not isinstance(v, list) or len(v) != d:
                raise ConfigError("hint.vector", f"need a list of {d} numbers")
            vec = np.array([_number(x, "hint.vector") for x in v])
            if abs(vecmath.norm(vec) - 1.0) > 1e-9:
                raise ConfigError("hint.vector", "must have unit norm")
        if h["kind"] == "multi":
            _number(h.get("m"), "hint.m", positive=True, integer=True)
            _number(h.get("bad_quality", 0.3), "hint.bad_quality")

        p = self.policy
        kind = p.get("kind") if isinstance(p, dict) else None
        if kind not in POLICY_PARAMS:
            raise ConfigError("policy.kind", f"must be one of {', '.join(POLICY_PARAMS)}")
        for key in p:
            if key != "kind" and key not in POLICY_PARAMS[kind]:
                raise ConfigError(f"policy.{key}", f"not a parameter of {kind}")
        if "delta_prob" in p:
            dp = _number(p["delta_prob"], "policy.delta_prob")
            if not 0 < dp < 1:
                raise ConfigError("policy.delta_prob", "must lie in (0, 1)")
        if "noise_scale" in p and _number(p["noise_scale"], "policy.noise_scale") < 0:
            raise ConfigError("policy.noise_scale", "must be >= 0")
        for key in ("W", "ridge", "c0", "c1", "R_LB"):
            if key in p:
                _number(p[key], f"policy.{key}", positive=True)
        for key in ("hp_k", "B"):
            if key in p and p[key] is not None:
                _number(p[key], f"policy.{key}", positive=True, integer=True)
        if kind == "frontier":
            G = _number(p.get("G"), "policy.G", positive=True)
            if G > math.sqrt(T) * (1 + 1e-12):
                raise ConfigError("policy.G", f"G = {G} exceeds sqrt(T) = {math.sqrt(T):.6g}")
            if p.get("c0", 4.0) <= p.get("c1", 1.0):
                raise ConfigError("policy.c0", "need c0 > c1")
        if kind == "switch":
            if _number(p.get("r_hat"), "policy.r_hat") < 0:
                raise ConfigError("policy.r_hat", "must be >= 0")
            _number(p.get("R_LB"), "policy.R_LB", positive=True)
        multi = h["kind"] == "multi"
        if kind == "multi_hint" and not multi:
            raise ConfigError("hint.kind", "multi_hint needs a multi hint")
        if multi and kind != "multi_hint":
            raise ConfigError("hint.kind", f"{kind} takes a single hint")
        if kind in ("pareto_bandit", "frontier", "multi_hint") and d < 2:
            raise ConfigError("instance.dimension", f"{kind} needs dimension >= 2")

    def to_dict(self):
        return {
            "instance": self.instance.to_dict(),
            "hint": copy.deepcopy(self.hint),
            "policy": copy.deepcopy(self.policy),
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "record_every": self.record_every,
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("", "config must be a mapping")
        known = {"instance", "hint", "policy", "horizon", "seeds", "record_every"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        for key in ("instance", "hint", "policy", "horizon", "seeds"):
            if key not in data:
                raise ConfigError(key, "missing")
        return cls(
            instance=InstanceSpec.from_dict(data["instance"]),
            hint=copy.deepcopy(data["hint"]),
            policy=copy.deepcopy(data["policy"]),
            horizon=data["horizon"],
            seeds=parse_seeds(data["seeds"]),
            record_every=data.get("record_every", 64),
        )

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_yaml(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("", f"invalid YAML: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
        return cls.from_yaml(text)

    def config_hash(self):
        """sha256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_changes(self, **changes):
        data = self.to_dict()
        for key, value in changes.items():
            data[key] = value
        return ExperimentConfig.from_dict(data)


def parse_seeds(spec):
    """A list of seeds, or ``{"base_seed": b, "n_reps": n}`` meaning b, b+1, ..., b+n-1."""
    if isinstance(spec, list):
        return list(spec)
    if isinstance(spec, dict):
        if set(spec) != {"base_seed", "n_reps"}:
            raise ConfigError("seeds", "expected keys base_seed and n_reps")
        b = _number(spec["base_seed"], "seeds.base_seed", integer=True)
        n = _number(spec["n_reps"], "seeds.n_reps", positive=True, integer=True)
        return list(range(b, b + n))
    raise ConfigError("seeds", "must be a list or a mapping")


def build_hints(cfg, instance, rng):
    """Hint vectors of a replication; ``multi`` gives the m base hints."""
    h = cfg.hint
    kind = h["kind"]
    a = instance.optimal_action
    if kind == "perfect":
        return [a.copy()]
    if kind == "negated":
        return [-a]
    if kind == "reference":
        return [cfg.instance.reference]
    if kind == "explicit":
        v = np.array(h["vector"], dtype=float)
        return [v / vecmath.norm(v)]
    if kind == "quality":
        return [gen_hint_of_quality(instance, float(h["target"]), rng.child(0))]
    m = int(h["m"])
    bad = float(h.get("bad_quality", 0.3))
    include_good = h.get("include_good", True)
    hints = [a.copy()] if include_good else []
    i = 1
    while len(hints) < m:
        hints.append(gen_hint_of_quality(instance, bad, rng.child(i)))
        i += 1
    return hints


def build_policy(cfg, hints, rng, dimension):
    p = cfg.policy
    kind = p["kind"]
    T = cfg.horizon
    dp = float(p.get("delta_prob", 0.1))
    hp_k = p.get("hp_k")
    fallback = oful_factory(dp)
    if kind == "oful":
        return OFUL(dimension, T, dp, float(p.get("ridge", 1.0)),
                    noise_scale=float(p.get("noise_scale", 1.0)))
    if kind == "play_hint":
        return PlayHint(hints[0])
    if kind == "switch":
        return Switch(hints[0], float(p["r_hat"]), T, float(p["R_LB"]),
                      fallback(dimension, T, rng.child(4)))
    if kind == "pareto_bandit":
        return ParetoBandit(hints[0], T, dp, float(p.get("W", DEFAULT_W)), rng, hp_k=hp_k)
    if kind == "frontier":
        return FrontierBandit(hints[0], T, float(p["G"]), dp, float(p.get("c0", 4.0)),
                              float(p.get("c1", 1.0)), rng, hp_k=hp_k)
    return MultiHintBandit(with_negations(hints), T, dp, p.get("B"),
                           float(p.get("W", DEFAULT_W)), float(p.get("c0", 4.0)), rng, hp_k=hp_k)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def run_replication(cfg, seed):
    """Play one seeded replication; never raises.

    Returns a dict with final regrets, estimator outputs, events, the
    down-sampled trace and, on failure, the error message.
    """
    root = RandomSource(seed)
    out = {"seed": seed, "status": "ok", "error": None, "trace": [], "events": []}
    ledger = None
    try:
        instance = cfg.instance.build(root.child(STREAM_INSTANCE))
        hints = build_hints(cfg, instance, root.child(STREAM_HINT))
        env = Environment(instance, cfg.horizon, root.child(STREAM_NOISE), hints)
        ledger = env.ledger
        policy = build_policy(cfg, hints, root.child(STREAM_POLICY), instance.dimension)
        every = cfg.record_every
        for t in range(1, cfg.horizon + 1):
            policy.observe(env.pull(policy.next_action()))
            if t % every == 0 or t == cfg.horizon:
                ledger.snapshot(policy.phase)
        out["events"] = _jsonable(policy.events)
        out["r"] = getattr(policy, "r", None)
        out["r_perp"] = getattr(policy, "r_perp", None)
        out["theta_norm"] = instance.theta_norm
        out["hint_gaps"] = [float(g) for g in ledger.hint_gaps]
    except Exception as exc:  # noqa: BLE001 - recorded per seed
        out["status"] = "failed"
        out["error"] = f"{type(exc).__name__}: {exc}"
    if ledger is not None:
        out["rounds"] = ledger.t
        out["cum_regret"] = float(ledger.cum_regret)
        out["cum_hint_regret"] = [float(x) for x in ledger.cum_hint_regret]
        out["decomposition_error"] = ledger.decomposition_error()
        out["trace"] = list(ledger.trace)
        out["n_hints"] = int(ledger.hint_gaps.size)
    return _jsonable(out)


def _replication_job(args):
    data, seed = args
    return run_replication(ExperimentConfig.from_dict(data), seed)


@dataclass
class RunSummary:
    config: ExperimentConfig
    runs: list
    config_hash: str = ""
    quantiles: dict = field(default_factory=dict)

    @property
    def ok_runs(self):
        return [r for r in self.runs if r["status"] == "ok"]

    @property
    def failed(self):
        return [r["seed"] for r in self.runs if r["status"] != "ok"]

    def final_regrets(self):
        return [r["cum_regret"] for r in self.ok_runs]

    def final_hint_regrets(self, column=0):
        return [r["cum_hint_regret"][column] for r in self.ok_runs]

    def median_regret(self):
        return nearest_rank(self.final_regrets(), 0.5)

    def median_hint_regret(self, column=0):
        return nearest_rank(self.final_hint_regrets(column), 0.5)

    def max_decomposition_error(self):
        errs = [r["decomposition_error"] for r in self.runs if "decomposition_error" in r]
        return max(errs) if errs else 0.0

    def phase_statistics(self):
        """Per phase label: nearest-rank median round at which it was entered."""
        firsts = {}
        for r in self.ok_runs:
            seen = {}
            for ev in r["events"]:
                seen.setdefault(ev.get("phase"), ev["round"])
            for ph, rnd in seen.items():
                firsts.setdefault(ph, []).append(rnd)
        return {
            str(ph): {"count": len(v), "median_round": nearest_rank(v, 0.5)}
            for ph, v in sorted(firsts.items(), key=lambda kv: str(kv[0]))
        }

    def to_dict(self):
        per_seed = [
            {k: r.get(k) for k in (
                "seed", "status", "error", "rounds", "cum_regret", "cum_hint_regret",
                "decomposition_error", "r", "r_perp", "theta_norm", "hint_gaps", "events",
            ) if k in r}
            for r in self.runs
        ]
        return {
            "config_hash": self.config_hash,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "n_runs": len(self.runs),
            "failed_seeds": self.failed,
            "quantile_rule": "nearest-rank",
            "quantiles": self.quantiles,
            "phase_statistics": self.phase_statistics(),
            "per_seed": per_seed,
        }

    def csv_text(self):
        """Trace CSV: run_id, seed, t, cum_regret, cum_hint_regret_h*, phase."""
        n_hints = max((r.get("n_hints", 0) for r in self.runs), default=0)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run_id", "seed", "t", "cum_regret"]
                   + [f"cum_hint_regret_h{j}" for j in range(n_hints)] + ["phase"])
        for i, r in enumerate(self.runs):
            for t, reg, hint_regs, phase in r["trace"]:
                hr = [repr(float(x)) for x in hint_regs]
                hr += [""] * (n_hints - len(hr))
                w.writerow([i, r["seed"], t, repr(float(reg))] + hr + [phase])
        return buf.getvalue()


def _quantile_table(summary):
    out = {"cum_regret": {str(q): nearest_rank(summary.final_regrets(), q) for q in QUANTILES}}
    ok = summary.ok_runs
    if ok and ok[0].get("cum_hint_regret"):
        for j in range(len(ok[0]["cum_hint_regret"])):
            vals = [r["cum_hint_regret"][j] for r in ok]
            out[f"cum_hint_regret_h{j}"] = {str(q): nearest_rank(vals, q) for q in QUANTILES}
    return _jsonable(out)


def run_experiment(cfg, threads=1):
    """Run every seed of ``cfg`` and aggregate in seed order."""
    if threads > 1 and len(cfg.seeds) > 1:
        data = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(_replication_job, [(data, s) for s in cfg.seeds]))
    else:
        runs = [run_replication(cfg, s) for s in cfg.seeds]
    summary = RunSummary(cfg, runs, cfg.config_hash())
    summary.quantiles = _quantile_table(summary)
    return summary


def write_outputs(summary, out_dir, extra_manifest=None, timestamp=None):
    """Write trace.csv, summary.json and manifest.json under ``out_dir``."""
    import datetime

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as f:
        f.write(summary.csv_text())
    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump(summary.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    manifest = {
        "config_hash": summary.config_hash,
        "seeds": list(summary.config.seeds),
        "library_version": __version__,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "timestamp": timestamp,
        "files": ["trace.csv", "summary.json"],
        "config": summary.config.to_dict(),
    }
    manifest.update(extra_manifest or {})
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def sweep_frontier(base, g_values, members=None, threads=1):
    """Run the frontier policy for each G on shared instances and seeds.

    Hint-based regret is measured on ``base`` as configured. Worst-case
    regret is the largest per-member median total regret over the
    ``members`` family indices (``base`` alone when ``members`` is None).

    Returns rows ``{"G", "median_hint_regret", "median_regret", "product"}``.
    """
    T = base.horizon
    for G in g_values:
        if G > math.sqrt(T) * (1 + 1e-12):
            raise ConfigError("g_values", f"G = {G} exceeds sqrt(T)")
    rows = []
    for G in g_values:
        policy = {k: v for k, v in base.policy.items() if k in POLICY_PARAMS["frontier"]}
        policy.update(kind="frontier", G=G)
        cfg = base.with_changes(policy=policy)
        hint_summary = run_experiment(cfg, threads)
        worst = []
        for idx in members or [None]:
            if idx is None:
                worst.append(hint_summary.median_regret())
                continue
            inst = cfg.instance.to_dict()
            inst["params"] = dict(inst["params"], index=idx)
            worst.append(run_experiment(cfg.with_changes(instance=inst), threads).median_regret())
        rh = hint_summary.median_hint_regret(0)
        reg = max(worst)
        rows.append({"G": G, "median_hint_regret": rh, "median_regret": reg,
                     "product": rh * reg, "failed_seeds": hint_summary.failed})
    return rows


def estimate_norms(cfg):
    """Run only the norm-estimation phases for every seed.

    Per seed: r from the zero reference action with unit perturbation, then
    r_perp from the hint with perturbation 1 / (sqrt(r) T^(1/4)), each capped
    by the remaining horizon. Reports estimates, pull counts and true values.
    """
    p = cfg.policy
    dp = float(p.get("delta_prob", 0.1))
    hp_k = p.get("hp_k")
    T = cfg.horizon
    rows = []
    for seed in cfg.seeds:
        root = RandomSource(seed)
        instance = cfg.instance.build(root.child(STREAM_INSTANCE))
        h = build_hints(cfg, instance, root.child(STREAM_HINT))[0]
        env = Environment(instance, T, root.child(STREAM_NOISE), [h])
        prng = root.child(STREAM_POLICY)
        d = instance.dimension
        row = {"seed": seed, "theta_norm": instance.theta_norm,
               "perp_norm": vecmath.norm(vecmath.project_orth(instance.theta_star, h))}
        r, used = _run_hp(EstimateNormHP(np.zeros(d), 1.0, dp / 4, prng.child(1), k=hp_k), env)
        row.update(r=r, r_pulls=used)
        row.update(r_perp=None, r_perp_pulls=0)
        if r is not None and r > 0:
            delta = 1.0 / (math.sqrt(r) * T**0.25)
            rp, used = _run_hp(EstimateNormHP(h, delta, dp / 4, prng.child(2), k=hp_k), env)
            row.update(r_perp=rp, r_perp_pulls=used)
        rows.append(_jsonable(row))
    return rows


def _run_hp(hp, env):
    start = env.ledger.t
    while True:
        steps = hp.steps()
        try:
            action = next(steps)
            while True:
                if env.rounds_left == 0:
                    return None, env.ledger.t - start
                action = steps.send(env.pull(action))
        except StopIteration as stop:
            if stop.value is not None:
                return stop.value, env.ledger.t - start


def calibrate_w(dims, horizon, seeds, threads=1, quantile=0.95):
    """Fit the worst-case scale W from OFUL regret on random unit instances.

    W = max over d of quantile(regret) / (d ln(T) sqrt(T)).
    """
    table = []
    for d in dims:
        cfg = ExperimentConfig(
            InstanceSpec("random_unit", int(d)), {"kind": "perfect"}, {"kind": "oful"},
            int(horizon), list(seeds), record_every=int(horizon),
        )
        s = run_experiment(cfg, threads)
        if s.failed:
            raise RuntimeError(f"OFUL failed for seeds {s.failed}")
        q = nearest_rank(s.final_regrets(), quantile)
        scale = d * math.log(horizon) * math.sqrt(horizon)
        table.append({"d": int(d), "regret_quantile": q, "W": q / scale,
                      "median_regret": s.median_regret()})
    return {"quantile": quantile, "horizon": int(horizon), "W": max(r["W"] for r in table),
            "per_dimension": table}


__all__ = [
    "ExperimentConfig", "RunSummary", "build_hints", "build_policy", "calibrate_w",
    "estimate_norms", "nearest_rank", "parse_seeds", "run_experiment", "run_replication",
    "sweep_frontier", "write_outputs",
]
