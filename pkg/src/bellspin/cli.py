"""Command-line surface.

Eight subcommands: witness-curve and husimi render state-level quantities,
emulate runs the full synthetic experiment, fit-rabi fits a pulse-sweep CSV,
lhv-check minimizes the classical strategy value, adversary / overlap /
producibility drive the statistical analyses.

Conventions: angles are degrees at this boundary (radians internally);
tabular output is CSV with a header row; structured output is JSON with
sorted keys; every stochastic command takes a seed through its config.
Exit codes: 0 success, 2 bad configuration or arguments, 3 empty result,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dicke import (
    OATParams,
    RotationPulse,
    X_AXIS,
    Z_AXIS,
    coherent_state,
    husimi_q,
    oat_evolve,
    rotate,
)
from .emulator import fit_rabi
from .errors import BellspinError, ConfigError, EmptyResultError, NumericalError
from .lhv import brute_force_min, classical_argmin
from .pipeline import run_experiment
from .stats import (
    MomentEstimate,
    adversary_report,
    overlap_probability,
    producibility_bound,
)
from .witness import witness_curve, witness_curve_from_moments


def _dump_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(out: str | None, header, rows) -> None:
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)


def _apply_set(cfg: dict, assignments) -> None:
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"--set key {key!r} descends into a non-object")
            node = nxt
        node[parts[-1]] = value


def _load_config(args) -> dict:
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    _apply_set(cfg, getattr(args, "set", None) or [])
    return cfg


def _pick(flag_value, cfg: dict, key: str, default):
    """Explicit flag wins, then config file value, then the default."""
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


# ---------------------------------------------------------------------------
# subcommands

def cmd_witness_curve(args) -> int:
    cfg = _load_config(args)
    start = float(_pick(args.start_deg, cfg, "start_deg", 0.0))
    stop = float(_pick(args.stop_deg, cfg, "stop_deg", 180.0))
    points = int(_pick(args.points, cfg, "points", 181))
    if points < 2:
        raise ConfigError("witness-curve needs at least 2 grid points")
    thetas = np.radians(np.linspace(start, stop, points))

    n_atoms = _pick(args.n, cfg, "n_atoms", None)
    if n_atoms is not None:
        state = coherent_state(int(n_atoms), X_AXIS)
        twist = float(_pick(args.twist, cfg, "twist_angle", 0.0))
        if twist != 0.0:
            state = oat_evolve(state, OATParams(twist, int(n_atoms)))
        tilt = math.radians(float(_pick(args.tilt_deg, cfg, "tilt_deg", 0.0)))
        if tilt != 0.0:
            state = rotate(state, RotationPulse(tilt, 0.0))
        curve = witness_curve(state, Z_AXIS, X_AXIS, thetas)
    else:
        contrast = float(_pick(args.contrast, cfg, "contrast", 0.980))
        zeta_sq = float(_pick(args.zeta_sq, cfg, "zeta_sq", 0.272))
        curve = witness_curve_from_moments(contrast, zeta_sq, thetas)

    rows = [(math.degrees(theta), w) for theta, w in curve]
    _write_csv(args.out, ("theta_deg", "witness"), rows)
    if args.fig:
        from .plotting import plot_witness_curve

        plot_witness_curve(curve, args.fig)
    return 0


def cmd_emulate(args) -> int:
    cfg = _load_config(args)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.theta is not None:
        cfg["theta_deg"] = args.theta
    summary, artifacts = run_experiment(cfg)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    shot_header = ("seed", "tau_ms", "n1_det", "n2_det")
    for name, records in (
        ("shots_squeezing.csv", artifacts["squeezing_records"]),
        ("shots_rabi.csv", artifacts["rabi_records"]),
        ("shots_witness.csv", artifacts["witness_records"]),
    ):
        rows = [(r.seed_id, r.tau, r.n1_det, r.n2_det) for r in records]
        _write_csv(str(outdir / name), shot_header, rows)

    corrected_rows = []
    groups = [("squeezing", artifacts["squeezing_samples"])]
    groups += [("rabi", g) for g in artifacts["rabi_groups"]]
    groups += [("witness", artifacts["witness_samples"])]
    for label, g in groups:
        for tau, ratio, ntot in zip(g.taus, g.ratios, g.n_totals):
            corrected_rows.append((label, tau, ratio, ntot))
    _write_csv(str(outdir / "corrected_samples.csv"),
               ("group", "tau_ms", "ratio", "n_total"), corrected_rows)

    _dump_json(summary, str(outdir / "summary.json"))
    if not args.no_figs:
        from .plotting import plot_rabi_fit, plot_witness_curve

        fit = artifacts["rabi_fit"]
        plot_rabi_fit(artifacts["fit_points"], fit, str(outdir / "rabi_fit.png"))
        thetas = np.radians(np.linspace(0.0, 180.0, 361))
        curve = witness_curve_from_moments(
            fit.contrast, summary["squeezing"]["zeta_sq"]["mean"], thetas)
        op = (math.radians(summary["witness"]["theta_deg"]),
              summary["witness"]["value"])
        plot_witness_curve(curve, str(outdir / "witness_curve.png"),
                           operating_point=op)
    _dump_json(summary, None)
    return 0


def cmd_fit_rabi(args) -> int:
    with open(args.data, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                not {"tau_ms", "ratio"} <= set(reader.fieldnames):
            raise ConfigError("fit-rabi data needs CSV columns tau_ms, ratio")
        pairs = [(float(row["tau_ms"]), float(row["ratio"])) for row in reader]
    fit, info = fit_rabi(pairs, full_output=True)
    out = fit.to_json_dict()
    out["sigmas"] = [float(s) for s in info["sigmas"]]
    out["iterations"] = info["iterations"]
    out["rss"] = info["rss"]
    out["n_points"] = len(pairs)
    _dump_json(out, args.out)
    return 0


def cmd_lhv_check(args) -> int:
    value, strategy = classical_argmin(args.n)
    out = {
        "n_atoms": args.n,
        "min": value,
        "strategy": strategy.to_json_dict(),
    }
    if args.brute_force:
        out["brute_force_min"] = brute_force_min(args.n)
    _dump_json(out, args.out)
    return 0


def cmd_adversary(args) -> int:
    report, extras = adversary_report(
        args.n, math.radians(args.theta), args.m, full_output=True)
    out = report.to_json_dict()
    out.update({
        "n_atoms": args.n,
        "theta_deg": args.theta,
        "m_total": args.m,
        "twist_angle": extras["twist_angle"],
        "tilt_angle": extras["tilt_angle"],
    })
    _dump_json(out, args.out)
    return 0


def cmd_overlap(args) -> int:
    cfg = _load_config(args)
    contrast = float(_pick(args.contrast, cfg, "contrast", 0.980))
    contrast_err = float(_pick(args.contrast_err, cfg, "contrast_err", 0.002))
    zeta_sq = float(_pick(args.zeta_sq, cfg, "zeta_sq", 0.272))
    zeta_sq_err = float(_pick(args.zeta_sq_err, cfg, "zeta_sq_err", 0.037))
    c_b = MomentEstimate(contrast, contrast_err, 120)
    zeta = MomentEstimate(zeta_sq, zeta_sq_err, 190)
    probability = overlap_probability(c_b, zeta, region=args.region)
    _dump_json({
        "region": args.region,
        "probability": probability,
        "c_b": c_b.to_json_dict(),
        "zeta_sq": zeta.to_json_dict(),
    }, args.out)
    return 0


def cmd_producibility(args) -> int:
    if args.points < 2:
        raise ConfigError("producibility needs at least 2 grid points")
    grid = np.linspace(args.min_contrast, args.max_contrast, args.points)
    curve = producibility_bound(args.k, grid)
    _write_csv(args.out, ("contrast", "zeta_sq_limit"), curve)
    if args.fig:
        from .plotting import plot_producibility

        plot_producibility({args.k: curve}, args.fig)
    return 0


def cmd_husimi(args) -> int:
    state = coherent_state(args.n, X_AXIS)
    if args.twist != 0.0:
        state = oat_evolve(state, OATParams(args.twist, args.n))
    if args.tilt_deg != 0.0:
        state = rotate(state, RotationPulse(math.radians(args.tilt_deg), 0.0))
    thetas = np.linspace(0.0, math.pi, args.theta_points)
    phis = np.linspace(-math.pi, math.pi, args.phi_points)
    grid = [(t, p) for t in thetas for p in phis]
    q = husimi_q(state, grid)
    rows = [
        (math.degrees(t), math.degrees(p), qv)
        for (t, p), qv in zip(grid, q)
    ]
    _write_csv(args.out, ("theta_deg", "phi_deg", "q"), rows)
    if args.fig:
        from .plotting import plot_husimi

        plot_husimi(thetas, phis, np.reshape(q, (thetas.size, phis.size)), args.fig)
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellspin",
        description="Collective-spin Bell correlation toolkit: state simulation, "
                    "witness evaluation, classical bounds, and an emulated "
                    "measurement campaign.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="config override, dotted keys, JSON values")
    common.add_argument("--out", help="output file (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness-curve", parents=[common],
                       help="witness vs analysis angle, from moments or a simulated state")
    p.add_argument("--contrast", type=float, help="scaled spin length along the mean-spin axis")
    p.add_argument("--zeta-sq", type=float, dest="zeta_sq",
                   help="scaled second moment along the squeezed axis")
    p.add_argument("--n", type=int, help="simulate an n-atom state instead of using moments")
    p.add_argument("--twist", type=float, help="twisting angle for the simulated state")
    p.add_argument("--tilt-deg", type=float, dest="tilt_deg",
                   help="rotation after twisting, degrees")
    p.add_argument("--start-deg", type=float, dest="start_deg")
    p.add_argument("--stop-deg", type=float, dest="stop_deg")
    p.add_argument("--points", type=int)
    p.add_argument("--fig", help="also render the curve to this image file")
    p.set_defaults(func=cmd_witness_curve)

    p = sub.add_parser("emulate", parents=[common],
                       help="run the emulated measurement campaign and analysis")
    p.add_argument("--outdir", required=True, help="directory for CSV, JSON, and figures")
    p.add_argument("--seed", type=int, help="master seed (config key 'seed')")
    p.add_argument("--theta", type=float, help="witness analysis angle, degrees")
    p.add_argument("--no-figs", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_emulate)

    p = sub.add_parser("fit-rabi", parents=[common],
                       help="fit the pulse-sweep model to a CSV of (tau_ms, ratio)")
    p.add_argument("--data", required=True, help="CSV with columns tau_ms, ratio")
    p.set_defaults(func=cmd_fit_rabi)

    p = sub.add_parser("lhv-check", parents=[common],
                       help="minimum of the Bell expression over classical strategies")
    p.add_argument("--n", type=int, required=True, help="number of parties")
    p.add_argument("--brute-force", action="store_true",
                   help="cross-check by enumerating all 4^n assignments (n <= 10)")
    p.set_defaults(func=cmd_lhv_check)

    p = sub.add_parser("adversary", parents=[common],
                       help="finite-statistics adversary analysis for n atoms")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, default=128.0, help="analysis angle, degrees")
    p.add_argument("--m", type=int, default=200, help="number of witness measurements")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("overlap", parents=[common],
                       help="probability mass of the measured moments inside a region")
    p.add_argument("--contrast", type=float)
    p.add_argument("--contrast-err", type=float, dest="contrast_err")
    p.add_argument("--zeta-sq", type=float, dest="zeta_sq")
    p.add_argument("--zeta-sq-err", type=float, dest="zeta_sq_err")
    p.add_argument("--region", default="bell",
                   help="'bell', 'all', or 'k_producible(<k>)'")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("producibility", parents=[common],
                       help="entanglement-depth limit curve for blocks of k atoms")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--min-contrast", type=float, default=0.0, dest="min_contrast")
    p.add_argument("--max-contrast", type=float, default=0.999, dest="max_contrast")
    p.add_argument("--fig", help="also render the curve to this image file")
    p.set_defaults(func=cmd_producibility)

    p = sub.add_parser("husimi", parents=[common],
                       help="Husimi-Q field of a simulated state on a polar grid")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--twist", type=float, default=0.0)
    p.add_argument("--tilt-deg", type=float, default=0.0, dest="tilt_deg")
    p.add_argument("--theta-points", type=int, default=61, dest="theta_points")
    p.add_argument("--phi-points", type=int, default=121, dest="phi_points")
    p.add_argument("--fig", help="also render the field to this image file")
    p.set_defaults(func=cmd_husimi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmptyResultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BellspinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
