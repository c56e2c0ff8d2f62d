"""Command-line entry point: ``impurity-decay <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .couplings import assemble_system
from .dynamics import FitError, StepSizeError, fit_decay_rate, integrate_amplitudes
from .experiments import (
    ConfigError,
    ExperimentConfig,
    calibrate_conventions,
    run_plaquette_couplings,
    run_position_map,
    run_table1,
    run_vacancy_scan,
    table1_report,
)
from .experiments.common import case_array, case_spec, run_sweep
from .geometry import GeometryError, LatticeKind, Placement
from .solver import ResonanceError, effective_decay, self_energy

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("impurity_decay")


class NumericalFailure(RuntimeError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2)


def write_rows(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def _conventions(cfg: ExperimentConfig) -> dict:
    sub = "rescaled" if cfg.substitution == "auto" else cfg.substitution
    tri = "equal_distance" if cfg.triangular == "auto" else cfg.triangular
    return {"substitution": sub, "triangular": tri}


def cmd_generate(args, cfg, out):
    array = case_array(args.kind, args.placement, cfg, **_conventions(cfg))
    stem = f"lattice_{args.kind}_{args.placement}"
    if args.format == "csv":
        array.write_csv(out / f"{stem}.csv")
    else:
        array.write_json(out / f"{stem}.json")
    return EXIT_OK


def cmd_sweep(args, cfg, out):
    array = case_array(args.kind, args.placement, cfg, **_conventions(cfg))
    curve = run_sweep(assemble_system(array), cfg)
    stem = f"sweep_{args.kind}_{args.placement}"
    if args.format == "csv":
        curve.write_csv(out / f"{stem}.csv")
    write_json(out / f"{stem}.json", {**curve.summary(), "config": cfg.to_dict()}
               if args.format == "csv" else {**curve.summary(), "detunings": curve.detunings,
                                             "gamma_eff": curve.gamma_eff, "config": cfg.to_dict()})
    print(json.dumps(_jsonable(curve.summary())))
    return EXIT_OK


def cmd_table1(args, cfg, out):
    conventions = calibrate_conventions(cfg) if "auto" in (cfg.substitution, cfg.triangular) \
        else _conventions(cfg)
    records = run_table1(cfg, conventions)
    report = table1_report(records, conventions, cfg)
    write_json(out / "table1.json", report)
    if args.format == "csv":
        write_rows(out / "table1.csv", [r.to_dict() for r in records])
    for r in records:
        log.info("%-20s N_nn=%s N_d=%s gamma_min=%s d_BE=%s%s", r.label, r.n_nearest, r.n_distinct,
                 r.gamma_min, r.d_be, f"  ERROR {r.error}" if r.error else "")
    if any(r.error for r in records):
        raise NumericalFailure("one or more cases failed; see table1.json")
    return EXIT_OK


def cmd_vacancy(args, cfg, out):
    curves = run_vacancy_scan(cfg)
    summary = []
    for k, vc in enumerate(curves, start=1):
        if args.format == "csv":
            vc.curve.write_csv(out / f"vacancy_p{k}.csv")
        summary.append({"offset": vc.offset, "position": vc.position, **vc.curve.summary()})
    write_json(out / "vacancy_scan.json", summary)
    return EXIT_OK


def cmd_posmap(args, cfg, out):
    spec = case_spec(args.kind, Placement.INTERSTITIAL, cfg, **_conventions(cfg))
    pm = run_position_map(spec, args.grid_n or cfg.grid_n, cfg)
    stem = f"posmap_{args.kind}"
    if args.format == "csv":
        pm.write_csv(out / f"{stem}.csv")
        if pm.cut:
            pm.write_cut_csv(out / f"{stem}_cut.csv")
        write_json(out / f"{stem}.json", pm.summary())
    else:
        write_json(out / f"{stem}.json", {**pm.summary(), "points": pm.points, "gamma_min": pm.gamma_min,
                                          "delta_opt": pm.delta_opt, "cut": pm.cut})
    return EXIT_OK


def cmd_plaquette(args, cfg, out):
    rows = run_plaquette_couplings(args.theta_min * math.pi, args.theta_max * math.pi, args.n, cfg.a_sq)
    if args.format == "csv":
        write_rows(out / "plaquette_couplings.csv", rows)
    else:
        write_json(out / "plaquette_couplings.json", rows)
    return EXIT_OK


def cmd_dynamics(args, cfg, out):
    array = case_array(args.kind, args.placement, cfg, **_conventions(cfg))
    system = assemble_system(array)
    curve = run_sweep(system, cfg)
    delta = curve.delta_min if args.delta is None else args.delta
    gamma_I = args.gamma_I
    # Gamma_eff is proportional to gamma_I at fixed geometry and detuning
    sigma = self_energy(system, delta).sigma
    gamma_eff = effective_decay(system.gamma_I, sigma) * gamma_I / system.gamma_I
    t_max = args.t_max if args.t_max else 8.0 / gamma_eff
    traj = integrate_amplitudes(system, delta, gamma_I=gamma_I, t_max=t_max, n_records=args.records)
    fitted = fit_decay_rate(traj)
    stem = f"dynamics_{args.kind}_{args.placement}"
    if args.format == "csv":
        traj.write_csv(out / f"{stem}.csv")
    result = {"delta": delta, "gamma_I": gamma_I, "gamma_eff": gamma_eff, "fitted_rate": fitted,
              "rel_difference": abs(fitted - gamma_eff) / gamma_eff, "t_max": t_max, "dt": traj.dt}
    if args.format == "json":
        result.update(times=traj.times, impurity_population=traj.impurity_population,
                      total_population=traj.population)
    write_json(out / f"{stem}.json", result)
    print(json.dumps(_jsonable({k: result[k] for k in ("delta", "gamma_eff", "fitted_rate")})))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file (see config.schema.json)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None, help="recorded only; runs are deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    kinds = [k.value for k in LatticeKind]
    placements = [p.value for p in Placement]
    parser = argparse.ArgumentParser(prog="impurity-decay",
                                     description="Impurity decay in finite 2D emitter arrays.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="export lattice positions")
    p.add_argument("--kind", choices=kinds, default="square")
    p.add_argument("--placement", choices=placements, default="interstitial")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", parents=[common], help="effective decay versus detuning")
    p.add_argument("--kind", choices=kinds, default="square")
    p.add_argument("--placement", choices=placements, default="interstitial")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table1", parents=[common], help="all ten geometry cases with comparison")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("vacancy-scan", parents=[common], help="impurity moved toward a vacancy")
    p.set_defaults(func=cmd_vacancy)

    p = sub.add_parser("posmap", parents=[common], help="optimal decay over positions in a plaquette")
    p.add_argument("--kind", choices=kinds, default="square")
    p.add_argument("--grid-n", type=int, default=None)
    p.set_defaults(func=cmd_posmap)

    p = sub.add_parser("plaquette-couplings", parents=[common], help="J and Gamma across plaquette angles")
    p.add_argument("--theta-min", type=float, default=0.1, help="in units of pi")
    p.add_argument("--theta-max", type=float, default=0.9, help="in units of pi")
    p.add_argument("--n", type=int, default=81)
    p.set_defaults(func=cmd_plaquette)

    p = sub.add_parser("dynamics", parents=[common], help="integrate amplitudes and fit the decay")
    p.add_argument("--kind", choices=kinds, default="square")
    p.add_argument("--placement", choices=placements, default="interstitial")
    p.add_argument("--gamma-I", type=float, default=1e-2)
    p.add_argument("--delta", type=float, default=None, help="detuning; default is the optimum")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--records", type=int, default=4001)
    p.set_defaults(func=cmd_dynamics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        overrides = {k: v for k, v in (("threads", args.threads), ("seed", args.seed)) if v is not None}
        if overrides:
            cfg = cfg.replace(**overrides)
        if cfg.threads < 1:
            raise ConfigError("threads must be at least 1")
        args.out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg, args.out)
    except (ConfigError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ResonanceError, FitError, StepSizeError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
