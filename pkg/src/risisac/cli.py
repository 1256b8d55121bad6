"""Command-line entry point ``risisac``.

Exit codes: 0 on success, 2 for configuration errors, 3 when too many
Monte Carlo trials fail.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from risisac import harness
from risisac.beamforming import oracle_baseline
from risisac.channel import draw_channels
from risisac.geometry import Vec3
from risisac.sensing import MicroSurfaceConfig, SensingError, sense_location
from risisac.signal import synthesize_sensing_snapshots

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risisac", description="RIS-aided ISAC link-level simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo run over a trade-off grid")
    s.add_argument("--config", help="TOML config file")
    s.add_argument("--preset", help="start from a bundled preset")
    s.add_argument("--algorithm", choices=harness.ALGORITHMS, default="s_sdr")
    s.add_argument("--rho-grid", type=_float_list, help="comma-separated trade-off values")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True, help="output CSV path")

    d = sub.add_parser("sense-demo", help="end-to-end localization check on the default geometry")
    d.add_argument("--noiseless", action="store_true", help="disable receiver noise")
    d.add_argument("--seed", type=int, default=0)

    w = sub.add_parser("sweep", help="run every variant of a preset")
    w.add_argument("--preset", required=True)
    w.add_argument("--algorithms", default="s_sdr", help="comma-separated algorithms")
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--out", required=True)
    return p


def _simulate(args) -> int:
    cfg = harness.preset(args.preset) if args.preset else harness.ScenarioConfig()
    if args.config:
        cfg = harness.load_config(args.config, cfg)
    over = {}
    if args.rho_grid is not None:
        over["rho_grid"] = args.rho_grid
    if args.trials is not None:
        over["n_trials"] = args.trials
    if args.seed is not None:
        over["seed"] = args.seed
    cfg = harness.apply_overrides(cfg, over)
    table = harness.sweep_tradeoff(cfg, (args.algorithm,))
    harness.emit_csv(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return EXIT_OK


def _sweep(args) -> int:
    algs = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    bad = [a for a in algs if a not in harness.ALGORITHMS]
    if bad or not algs:
        raise harness.ConfigError(f"unknown algorithms {bad}")
    table = harness.sweep_preset(args.preset, algs, args.trials, args.seed)
    harness.emit_csv(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return EXIT_OK


def _sense_demo(args) -> int:
    cfg = harness.ScenarioConfig()
    dep = cfg.deployment()
    rng = np.random.default_rng(args.seed)
    ue = Vec3(*cfg.ue_pos)
    ch = draw_channels(dep, ue, rng)
    bf = oracle_baseline(ue, dep)
    s2 = 0.0 if args.noiseless else cfg.sigma0_sq
    batches = synthesize_sensing_snapshots(ch, bf, cfg.rho, s2, cfg.tau1 + cfg.tau2, rng)
    try:
        est = sense_location(batches, MicroSurfaceConfig.for_array(dep.sensing), dep)
    except SensingError as e:
        print(f"localization failed at {e.stage}: {e}")
        return EXIT_SIMULATION
    err = est.position.distance_to(ue)
    print(f"true UE      {ue.as_array()}")
    print(f"estimated UE {est.position.as_array()}")
    print(f"error        {err:.3e} m")
    ok = err < 1e-6 if args.noiseless else True
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_SIMULATION


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "sweep":
            return _sweep(args)
        return _sense_demo(args)
    except harness.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.SimulationFailure as e:
        print(f"simulation failure: {e}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
