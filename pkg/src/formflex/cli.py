"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 numeric non-convergence.
"""
import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (REFERENCE_FLOW_GROUPS, SWEEP_PARAMETERS, calibrate_reference_set,
                          fit_holding_margin, fit_parameters, reference_observations, sensitivity,
                          sweep_grid)
from .config import load_config, parse_objects, parse_observations
from .deflection import tip_deflection
from .errors import ConvergenceError, DomainError
from .grasp import aperture_ratio, reference_objects, simulate_grasp
from .pneumatics import blower_curve, operating_point
from .traces import extract_mhf, extract_plateau, parse_trace

SCHEMA_VERSION = 1
MODES = {"paper": "paper_faithful", "consistent": "mechanics_consistent"}


def _report(kind, body):
    return {"schema_version": SCHEMA_VERSION, "command": kind, **body}


def _csv_text(rows, columns):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(args, name, report, rows=None, columns=None):
    """Write the JSON report (and CSV rows, if any) to --out, else to stdout."""
    text_json = json.dumps(report, indent=2)
    text_csv = _csv_text(rows, columns) if rows is not None else None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text_json + "\n")
        if text_csv is not None:
            (out / f"{name}.csv").write_text(text_csv)
    elif args.format == "csv" and text_csv is not None:
        sys.stdout.write(text_csv)
    else:
        sys.stdout.write(text_json + "\n")


def _config(args):
    return load_config(
        args.config,
        interpretation=MODES[args.mode] if args.mode else None,
        flow_mode=args.flow,
        power=getattr(args, "power", None),
    )


def _flow(args):
    if args.q_m3h is not None:
        return args.q_m3h / 3600.0
    return args.q


def cmd_deflect(args):
    cfg = _config(args)
    res = tip_deflection(cfg.geometry(), cfg.environment(), _flow(args), cfg.grid(),
                         cfg.flow_mode, cfg.interpretation)
    rows = [{"x_m": x, "y_m": y} for x, y in zip(res.x.tolist(), res.y.tolist())]
    summary = res.summary()
    summary.update(q_total_m3s=_flow(args), n_segments=cfg.n_segments)
    _emit(args, "deflect", _report("deflect", summary), rows, ["x_m", "y_m"])


def cmd_operate(args):
    cfg = _config(args)
    blower = blower_curve(cfg.power, cfg.blower_config())
    c = cfg.c0 if args.c is None else args.c
    kind = args.leak_kind or cfg.leak_kind
    dp, q = operating_point(blower, c, kind)
    body = {"power": cfg.power, "p_stall_pa": blower.p_stall, "q_free_m3s": blower.q_free,
            "conductance": c, "leak_kind": kind, "dp_op_pa": dp, "q_op_m3s": q,
            "q_op_m3h": q * 3600.0}
    _emit(args, "operate", _report("operate", body), [body], list(body))


def _objects(args):
    if args.objects:
        return parse_objects(Path(args.objects).read_text())
    return reference_objects()


def cmd_grasp(args):
    cfg = _config(args)
    geom, env, grid, modes = cfg.geometry(), cfg.environment(), cfg.grid(), cfg.modes()
    blower = blower_curve(cfg.power, cfg.blower_config())
    objects = _objects(args)
    if args.calibrated:
        objects, _, modes = calibrate_reference_set(geom, env, cfg.blower_config(), grid, modes, objects)
    reports = []
    for obj in objects:
        out = simulate_grasp(geom, env, blower, obj, grid, modes)
        rep = out.report()
        ap = aperture_ratio(obj.diameter, cfg.aperture_m)
        rep.update(aperture_ratio=ap.ratio, contact_path=ap.path)
        reports.append(rep)
    body = {"power": cfg.power, "flow_mode": cfg.flow_mode, "interpretation": cfg.interpretation,
            "aperture_m": cfg.aperture_m, "holding_margin": modes.holding_margin, "objects": reports,
            "assumptions": ["aperture inferred from the gripper model name",
                            "blower maximum taken at 100 % power, scaled linearly"]}
    columns = ["object", "stage", "sealed", "dp_op_pa", "q_op_m3s", "y_tip_m", "mhf_n", "load_ratio"]
    _emit(args, "grasp", _report("grasp", body), reports, columns)


def cmd_fit(args):
    cfg = _config(args)
    geom, env, grid, modes = cfg.geometry(), cfg.environment(), cfg.grid(), cfg.modes()
    obs = parse_observations(Path(args.observations).read_text()) if args.observations else reference_observations()
    objects = _objects(args)
    groups = REFERENCE_FLOW_GROUPS if args.groups == "paper" else None
    res = fit_parameters(obs, objects, geom, env, cfg.blower_config(), grid, modes, groups=groups)
    body = {"converged": res.converged, "sweeps": res.iterations, "residual_norm": res.residual_norm,
            "groups": res.groups,
            "parameters": {n: {"c0": c, "a_seal_m2": a} for n, (c, a) in res.params().items()},
            "residuals": res.residuals}
    if args.threshold_object:
        fitted = {o.name: o for o in res.apply(objects)}
        if args.threshold_object not in fitted:
            raise DomainError(f"unknown object {args.threshold_object!r}")
        body["holding_margin"] = fit_holding_margin(
            fitted[args.threshold_object], args.threshold_power, geom, env, cfg.blower_config(), grid, modes)
    rows = [{"object": n, "c0": c, "a_seal_m2": a} for n, (c, a) in res.params().items()]
    _emit(args, "fit", _report("fit", body), rows, ["object", "c0", "a_seal_m2"])
    if not res.converged:
        raise ConvergenceError("fit did not converge")


def cmd_sweep(args):
    cfg = _config(args)
    geom, env, grid, modes = cfg.geometry(), cfg.environment(), cfg.grid(), cfg.modes()
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    else:
        values = np.linspace(args.start, args.stop, args.num).tolist()
    objs = {o.name: o for o in _objects(args)}
    if args.object not in objs:
        raise DomainError(f"unknown object {args.object!r}; have {sorted(objs)}")
    rows = sweep_grid(args.parameter, values, geom, objs[args.object], env, cfg.blower_config(),
                      cfg.power, grid, modes)
    exponents = {}
    for p in ("Q", "b", "E", "d_theta"):
        exponents[p] = sensitivity(geom, env, _flow(args), p, cfg.grid().d_theta,
                                   cfg.flow_mode, cfg.interpretation)
    body = {"parameter": args.parameter, "object": args.object, "rows": rows,
            "sensitivity": {"q_total_m3s": _flow(args), "exponents": exponents}}
    _emit(args, "sweep", _report("sweep", body), rows,
          ["value", "y_tip_m", "dp_op_pa", "q_op_m3s", "mhf_n"])


def _trace_one(path, args):
    text = Path(path).read_text()
    rep = {"file": str(path)}
    if args.kind == "force":
        ts = parse_trace(text, args.channel)
        mhf, t_detach = extract_mhf(ts, args.threshold)
        rep.update(channel=ts.channel, mhf_n=mhf, t_detach_s=t_detach)
    else:
        ts = parse_trace(text, args.channel)
        plateau = extract_plateau(ts, args.window)
        rep.update(channel=ts.channel, plateau=plateau.value, stable=plateau.stable,
                   spread=plateau.spread)
        if ts.channel.endswith("_m3s"):
            rep["plateau_m3h"] = plateau.value * 3600.0
    return rep


def cmd_trace(args):
    with ThreadPoolExecutor() as pool:
        reports = list(pool.map(lambda p: _trace_one(p, args), args.files))
    columns = list(reports[0]) if reports else []
    _emit(args, "trace", _report("trace", {"kind": args.kind, "traces": reports}), reports, columns)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--mode", choices=sorted(MODES), help="beam formula reading")
    common.add_argument("--flow", choices=["total", "apportioned"], help="flow per lip segment")
    common.add_argument("--out", help="directory for report files (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    flow = argparse.ArgumentParser(add_help=False)
    g = flow.add_mutually_exclusive_group()
    g.add_argument("--q", type=float, default=0.01, help="total flow [m^3/s]")
    g.add_argument("--q-m3h", type=float, help="total flow [m^3/h]")

    parser = argparse.ArgumentParser(prog="formflex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deflect", parents=[common, flow], help="lip tip deflection and profile")
    p.set_defaults(func=cmd_deflect)

    p = sub.add_parser("operate", parents=[common], help="pneumatic operating point")
    p.add_argument("--power", type=float)
    p.add_argument("--c", type=float, help="leak conductance (default: config c0)")
    p.add_argument("--leak-kind", choices=["linear", "orifice"])
    p.set_defaults(func=cmd_operate)

    p = sub.add_parser("grasp", parents=[common], help="three-stage grasp simulation")
    p.add_argument("--power", type=float)
    p.add_argument("--objects", help="objects CSV (default: built-in reference object set)")
    p.add_argument("--calibrated", action="store_true",
                   help="fit the objects to the stated values first (brick fails below 40 %% power)")
    p.set_defaults(func=cmd_grasp)

    p = sub.add_parser("fit", parents=[common], help="calibrate leak conductance and seal area")
    p.add_argument("--observations", help="observations CSV (default: text-stated values)")
    p.add_argument("--objects", help="objects CSV (default: built-in reference object set)")
    p.add_argument("--groups", choices=["paper", "none"], default="paper")
    p.add_argument("--threshold-object", help="object whose failure power fixes the holding margin")
    p.add_argument("--threshold-power", type=float, default=0.4)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", parents=[common, flow], help="parameter grid and sensitivity exponents")
    p.add_argument("--parameter", choices=SWEEP_PARAMETERS, default="power")
    p.add_argument("--values", help="comma-separated grid values")
    p.add_argument("--start", type=float, default=0.1)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--num", type=int, default=10)
    p.add_argument("--object", default="brick")
    p.add_argument("--objects", help="objects CSV (default: built-in reference object set)")
    p.add_argument("--power", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", parents=[common], help="MHF / flow plateau from CSV traces")
    p.add_argument("files", nargs="+")
    p.add_argument("--kind", choices=["force", "flow"], default="force")
    p.add_argument("--channel", help="column name (default: first after time)")
    p.add_argument("--threshold", type=float, default=0.5, help="detachment drop fraction")
    p.add_argument("--window", type=float, default=1.0, help="plateau window [s]")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
