"""Command-line interface: ``hintbandit {run,sweep-frontier,estimate,calibrate-w}``.

Every option can also be set through an environment variable named
``HINTBANDIT_<OPTION>`` (upper case, dashes as underscores), e.g.
``HINTBANDIT_THREADS=4``. Command-line flags take precedence.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

import argparse
import json
import math
import os
import sys

from .errors import ConfigError
from .harness import (
    ExperimentConfig, calibrate_w, estimate_norms, parse_seeds, run_experiment,
    sweep_frontier, write_outputs,
)

ENV_PREFIX = "HINTBANDIT_"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _env(name, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _int_or_none(text):
    return None if text in (None, "") else int(text)


def parse_g_values(text, horizon):
    """Comma-separated G values; ``T^x`` means horizon**x."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if part.startswith("T^"):
                values.append(horizon ** float(part[2:]))
            else:
                values.append(float(part))
        except ValueError:
            raise ConfigError("--g-values", f"cannot parse {part!r}") from None
    if not values:
        raise ConfigError("--g-values", "empty list")
    return values


def _load(args):
    cfg = ExperimentConfig.load(args.config)
    seeds = _int_or_none(args.seeds)
    if seeds is not None:
        base = cfg.seeds[0]
        cfg = cfg.with_changes(seeds=parse_seeds({"base_seed": base, "n_reps": seeds}))
    return cfg


def _write_json(obj, out_dir, name):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, name), "w") as f:
            f.write(text)
    return text


def cmd_run(args):
    cfg = _load(args)
    summary = run_experiment(cfg, threads=int(args.threads))
    write_outputs(summary, args.out)
    q = summary.quantiles["cum_regret"]
    print(f"config {summary.config_hash[:12]}  runs {len(summary.runs)}  "
          f"median regret {q['0.5']:.6g}  failed {len(summary.failed)}")
    return EXIT_RUNTIME if summary.failed else EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    g_values = parse_g_values(args.g_values, cfg.horizon)
    members = None
    if args.members:
        members = [int(x) for x in args.members.split(",") if x.strip()]
    rows = sweep_frontier(cfg, g_values, members, threads=int(args.threads))
    _write_json({"config_hash": cfg.config_hash(), "seeds": cfg.seeds, "rows": rows},
                args.out, "frontier.json")
    print("G\tmedian_hint_regret\tmedian_regret\tproduct")
    for r in rows:
        print(f"{r['G']:.6g}\t{r['median_hint_regret']:.6g}\t{r['median_regret']:.6g}\t"
              f"{r['product']:.6g}")
    return EXIT_RUNTIME if any(r["failed_seeds"] for r in rows) else EXIT_OK


def cmd_estimate(args):
    cfg = _load(args)
    rows = estimate_norms(cfg)
    _write_json({"config_hash": cfg.config_hash(), "rows": rows}, args.out, "estimate.json")
    for r in rows:
        print(json.dumps(r, sort_keys=True))
    return EXIT_OK


def cmd_calibrate(args):
    try:
        dims = [int(x) for x in args.dims.split(",") if x.strip()]
        horizon = int(args.horizon)
    except ValueError:
        raise ConfigError("calibrate-w", "dimensions and horizon must be integers") from None
    if not dims or min(dims) < 1 or horizon < 2:
        raise ConfigError("calibrate-w", "need positive dimensions and horizon >= 2")
    n = _int_or_none(args.seeds) or 20
    result = calibrate_w(dims, horizon, list(range(int(args.base_seed), int(args.base_seed) + n)),
                         threads=int(args.threads))
    _write_json(result, args.out, "calibration.json")
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="hintbandit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", help="YAML experiment config")
        p.add_argument("--out", default=_env("out"), help="output directory")
        p.add_argument("--seeds", default=_env("seeds"),
                       help="number of replications (overrides the config)")
        p.add_argument("--threads", default=_env("threads", "1"), help="worker processes")

    p = sub.add_parser("run", help="run an experiment")
    common(p)
    p.set_defaults(func=cmd_run, default_out="out")

    p = sub.add_parser("sweep-frontier", help="sweep the frontier policy over G")
    common(p)
    p.add_argument("--g-values", default=_env("g_values"), required=_env("g_values") is None,
                   help="comma-separated G values; T^x allowed")
    p.add_argument("--members", default=_env("members"),
                   help="family indices used for the worst-case column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="run only the norm-estimation phases")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("calibrate-w", help="fit the worst-case regret scale W from OFUL")
    p.add_argument("dims", help="comma-separated dimensions, e.g. 8,16")
    p.add_argument("horizon", help="horizon T")
    common(p, config=False)
    p.add_argument("--base-seed", default=_env("base_seed", "0"))
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "default_out", None) and not args.out:
        args.out = args.default_out
    try:
        if math.isnan(float(args.threads)) or int(args.threads) < 1:
            raise ConfigError("--threads", "must be a positive integer")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
