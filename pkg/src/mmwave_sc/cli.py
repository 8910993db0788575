"""Command-line entry point: simulate, train-dnn, verify-code, report."""

from __future__ import annotations

import argparse
import sys

from . import harness
from .gf2codes import CodeSpec, TooExpensiveError, is_injective_over_supports, \
    min_measurements_lower_bound, min_singular_value, to_standard_form
from .mlp import TrainConfig

FAST_TRIALS = 200
FAST_N_S = 50
FAST_EPOCHS = 60


def _config(args) -> harness.ScenarioConfig:
    if args.config:
        cfg = harness.load_config(args.config, validate=False)
    elif args.preset:
        cfg = harness.preset(args.preset)
    else:
        raise harness.ConfigError("give --config or --preset")
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config(args)
    trials = args.trials or (min(cfg.trials, FAST_TRIALS) if args.fast else None)
    cfg = harness.with_overrides(cfg, trials=trials, seed=args.seed, workers=args.workers)
    cfg.validate()
    records = harness.run_experiment(cfg)
    harness.emit_results(records, args.out, args.format, L=cfg.L)
    problems = harness.check_invariants(records)
    for p in problems:
        print(f"invariant violated: {p}", file=sys.stderr)
    print(f"wrote {len(records)} records to {args.out}")
    return 3 if problems else 0


def cmd_train(args) -> int:
    cfg = _config(args)
    n_s = args.n_s or (FAST_N_S if args.fast else 300)
    epochs = args.epochs or (FAST_EPOCHS if args.fast else 200)
    tcfg = TrainConfig(epochs=epochs, seed=cfg.seed if args.seed is None else args.seed)
    points = None
    if args.sd:
        snrs = args.snr_grid or cfg.snr_grid_db
        if not snrs:
            raise harness.ConfigError("--sd needs --snr-grid or an snr grid in the config")
        bits = args.bits_grid or cfg.adc_bits
        points = [(s, b) for s in snrs for b in bits]
    log = None if args.quiet else print
    manifest = harness.train_dnn_models(cfg, args.out, n_s, tcfg, points, log)
    print(f"wrote {len(manifest['models'])} model set(s) to {args.out}")
    return 0


def cmd_verify(args) -> int:
    spec = CodeSpec.parse(args.code)
    G = spec.matrix()
    if args.n is not None and G.shape[1] != args.n:
        print(f"error: {spec.label} has {G.shape[1]} columns, not {args.n}", file=sys.stderr)
        return 2
    n = G.shape[1]
    bound = min_measurements_lower_bound(n, args.L)
    try:
        ok = is_injective_over_supports(G, args.L)
        verdict = "injective" if ok else "NOT injective"
    except TooExpensiveError as exc:
        ok, verdict = False, f"undecided ({exc})"
    print(f"code          {spec.label}  ({G.shape[0]} x {n})")
    print(f"supports      weight <= {args.L}: {verdict}")
    print(f"lower bound   m >= {bound}  (code uses {G.shape[0]})")
    print(f"sigma_min     {min_singular_value(G):.6f}")
    try:
        R, _ = to_standard_form(G)
        print(f"sigma_min std {min_singular_value(R):.6f}")
    except ValueError:
        print("sigma_min std n/a (not full rank)")
    return 0 if ok else 1


def cmd_report(args) -> int:
    cfg = _config(args)
    rep = harness.measurement_report(cfg)
    print(f"scenario      {cfg.name or '-'}  {cfg.n_r} x {cfg.n_t}, L = {cfg.L}")
    print(f"exhaustive    {rep['exhaustive']}")
    print(f"source code   {rep['source_coding']}  ({100 * rep['reduction']:.1f}% fewer)")
    print(f"802.11ad SLS  {rep['sweep_80211ad']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmwave-sc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--config", help="TOML scenario file")
        g.add_argument("--preset", choices=sorted(harness.PRESETS))

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    scenario_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--fast", action="store_true", help=f"cap trials at {FAST_TRIALS}")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train-dnn", help="train MLP decoders for a scenario")
    scenario_args(p)
    p.add_argument("--out", required=True, help="model directory")
    p.add_argument("--sd", action="store_true", help="train noise-aware models per grid point")
    p.add_argument("--snr-grid", type=float, nargs="+")
    p.add_argument("--bits-grid", nargs="+", help="ADC resolutions; 'inf' for ideal")
    p.add_argument("--fast", action="store_true", help=f"n_s={FAST_N_S}, {FAST_EPOCHS} epochs")
    p.add_argument("--n-s", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("verify-code", help="check a generator matrix")
    p.add_argument("--code", required=True, help="hamming:r, golay23[:n], rm:r:m, identity:n or a file")
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="measurement counts for a scenario")
    scenario_args(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, harness.ModelMissingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
