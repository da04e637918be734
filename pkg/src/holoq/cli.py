"""Command-line interface: ``holoq {compile,simulate,verify,sweep,compare}``.

Exit codes: 0 success, 2 invalid request, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import holonomy as hol
from .evolve import IntegratorConfig
from .labframe import LabFrameSpec, rwa_error_sweep, simulate_labframe_gate
from .model import BlochAxis, LoopSpec, PulseEnvelope, SegmentSpec
from .numkit import HoloqError, phase_distance
from .report import ReportRecord, dumps, rows_to_csv

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3
DEFAULT_TOL = 1e-8
DYN_PHASE_TOL = 1e-10

SCHEME_ALIASES = {
    "single-pi": "single-pi", "pi": "single-pi", "single": "single-pi",
    "two-loop": "two-loop", "two-pi": "two-loop",
    "off-resonant": "off-resonant", "offres": "off-resonant",
    "multi-pulse-l2": "multi-pulse-l2", "l2": "multi-pulse-l2", "multi-pulse": "multi-pulse-l2",
}
NAMED_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0),
              "-x": (-1.0, 0.0, 0.0), "-y": (0.0, -1.0, 0.0), "-z": (0.0, 0.0, -1.0)}
SWEEP_VARIABLES = ("eta", "ratio", "nu", "area")
_PI_EXPR = re.compile(r"^\s*(-?[\d.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([\d.eE+-]+))?\s*$")


class UsageError(HoloqError):
    pass


def parse_number(text) -> float:
    """Float, or a multiple of pi such as ``pi/2`` or ``3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(text)
    except ValueError:
        m = _PI_EXPR.match(str(text))
        if not m:
            raise UsageError(f"cannot parse number {text!r}")
        k = m.group(1)
        k = -1.0 if k == "-" else float(k) if k else 1.0
        return k * math.pi / (float(m.group(2)) if m.group(2) else 1.0)


def parse_axis(value) -> np.ndarray:
    if isinstance(value, dict):
        return BlochAxis(parse_number(value["theta"]), parse_number(value["phi"])).vector
    if isinstance(value, (list, tuple)):
        v = np.array([parse_number(x) for x in value])
        return v / np.linalg.norm(v)
    text = str(value).strip().lower()
    if text in NAMED_AXES:
        return np.array(NAMED_AXES[text])
    parts = text.split(",")
    if len(parts) == 2:
        return BlochAxis(parse_number(parts[0]), parse_number(parts[1])).vector
    raise UsageError(f"axis must be x|y|z or 'theta,phi', got {value!r}")


def _axis_dict(n) -> dict:
    ax = BlochAxis.from_vector(np.asarray(n) / np.linalg.norm(n))
    return {"theta": ax.theta, "phi": ax.phi}


def load_samples(path: str) -> PulseEnvelope:
    p = Path(path)
    if p.suffix == ".json":
        data = json.loads(p.read_text())
        pairs = data["samples"] if isinstance(data, dict) else data
        ts, vs = zip(*pairs)
    else:
        arr = np.loadtxt(p, delimiter="," if p.suffix == ".csv" else None, ndmin=2)
        ts, vs = arr[:, 0], arr[:, 1]
    return PulseEnvelope.from_samples(ts, vs)


def _settings(args) -> dict:
    s: dict = {}
    if args.config:
        try:
            s = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}")
    for key in ("axis", "angle", "eta", "scheme", "ratio", "variable", "tau"):
        v = getattr(args, key, None)
        if v is not None:
            s[key] = v
    if args.shape is not None:
        s.setdefault("envelope", {})
        if args.shape.startswith("sampled:"):
            s["envelope"] = {"file": args.shape.split(":", 1)[1]}
        else:
            s["envelope"] = {**s["envelope"], "shape": args.shape}
    if args.values is not None:
        s["values"] = [] if not args.values.strip() else args.values.split(",")
    if args.steps is not None:
        s.setdefault("integrator", {})["steps"] = args.steps
    if args.strict:
        s["strict"] = True
    if args.numeric:
        s["numeric"] = True
    tol = args.tol if args.tol is not None else float(os.environ.get("HOLOQ_TOL", DEFAULT_TOL))
    s["tol"] = tol
    return s


def _scheme_name(name) -> str | None:
    if name is None:
        return None
    key = str(name).lower()
    if key not in SCHEME_ALIASES:
        raise UsageError(f"unknown scheme {name!r}; expected one of {hol.SCHEME_KINDS}")
    return SCHEME_ALIASES[key]


def _target(s: dict) -> hol.GateTarget:
    if "angle" not in s:
        raise UsageError("a target needs --angle")
    return hol.GateTarget(tuple(parse_axis(s.get("axis", "z"))), parse_number(s["angle"]))


def _template(s: dict) -> PulseEnvelope:
    env = dict(s.get("envelope", {}))
    if "file" in env:
        return load_samples(env["file"])
    if env.get("shape") == "sampled":
        return PulseEnvelope.from_dict(env)
    env.setdefault("shape", "gaussian")
    env.setdefault("duration", parse_number(s.get("tau", 1.0)))
    return PulseEnvelope.from_dict(env)


def _integrator(s: dict) -> IntegratorConfig:
    cfg = s.get("integrator", {})
    return IntegratorConfig(step_count=int(cfg.get("steps", 256)),
                            tolerance=float(cfg.get("tolerance", 1e-10)))


def scheme_params(s: dict) -> hol.SchemeParams:
    """Scheme parameters given explicitly or synthesized from a target angle."""
    kind = _scheme_name(s.get("scheme"))
    explicit = {"multi-pulse-l2": "eta", "off-resonant": "ratio", "two-loop": "axis2", "single-pi": "axis"}
    if "angle" in s and (kind is None or explicit[kind] not in s or kind == "single-pi"):
        target = _target(s)
        return hol.synthesize(target, kind or hol.select_scheme(target))
    if kind is None:
        raise UsageError("need --scheme with explicit parameters, or a target --angle")
    n = tuple(parse_axis(s.get("axis", "z")))
    if kind == "single-pi":
        return hol.SingleLoopPi(n)
    if kind == "multi-pulse-l2":
        return hol.MultiPulseL2(n, parse_number(s.get("eta", 0.0)))
    if kind == "off-resonant":
        return hol.OffResonant(n, parse_number(s["ratio"]))
    return hol.TwoLoopPi(n, tuple(parse_axis(s["axis2"])))


def build_program(s: dict, params: hol.SchemeParams) -> hol.Program:
    tmpl = _template(s)
    strict = bool(s.get("strict", False))
    areas = s.get("areas")
    if areas is not None and isinstance(params, (hol.MultiPulseL2, hol.SingleLoopPi)):
        areas = [parse_number(a) for a in areas]
        etas = [0.0] + [getattr(params, "eta", 0.0)] * (len(areas) - 1)
        segs, start = [], 0.0
        for a, eta in zip(areas, etas):
            env = PulseEnvelope.from_dict({**tmpl.to_dict(), "start": start})
            segs.append(SegmentSpec.build(env, eta, a))
            start += tmpl.duration
        return hol.Program(params, loops=(LoopSpec(hol.laser_for_axis(params.n), segs),))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return hol.compile_to_segments(params, tmpl, tmpl.duration,
                                       omega0_rabi=float(s.get("omega0_rabi", 1.0)), strict=strict)


def describe(params: hol.SchemeParams, program: hol.Program | None = None) -> dict:
    d: dict = {}
    if isinstance(params, hol.TwoLoopPi):
        d["axis1"], d["axis2"] = _axis_dict(params.n1), _axis_dict(params.n2)
    else:
        d["axis"] = _axis_dict(params.n)
    if isinstance(params, hol.MultiPulseL2):
        d["eta"] = params.eta
    if isinstance(params, hol.OffResonant):
        d["ratio"] = params.ratio
        d["chi"] = hol.chi_offresonant(params.ratio)
    if program is not None:
        if program.offres is not None:
            d["areas"] = [program.total_area]
            d["duration"] = program.offres.duration
            d["delta"] = program.offres.delta
        else:
            d["areas"] = [seg.target_area for loop in program.loops for seg in loop.segments]
        d["loops"] = program.loop_count
        d["total_area"] = program.total_area
    return d


def _emit(payload, args, csv_rows=None, csv_header=None) -> None:
    fmt = args.format
    if fmt == "csv":
        text = rows_to_csv(csv_rows if csv_rows is not None else [payload], csv_header)
    else:
        text = dumps(payload)
    sys.stdout.write(text)
    if args.out:
        Path(f"{args.out}.{fmt}").write_text(text)


def cmd_compile(args, s: dict) -> int:
    params = scheme_params(s)
    program = build_program(s, params)
    result = hol.run_program(program)
    gate = params.gate()
    infid = {"distance_to_target": phase_distance(gate, _target(s).unitary)} if "angle" in s else {}
    rec = ReportRecord(params.kind, describe(params, program), gate, result.closure_defect,
                       result.dyn_phase_max, infid)
    _emit(rec.to_dict(), args)
    return EXIT_OK


def _simulate(s: dict):
    params = scheme_params(s)
    program = build_program(s, params)
    numeric = s.get("numeric", True)
    result = hol.run_program(program, numeric=numeric, cfg=_integrator(s))
    closed = params.gate()
    infid = {"distance_to_closed_form": phase_distance(result.gate, closed)}
    if "angle" in s:
        infid["distance_to_target"] = phase_distance(result.gate, _target(s).unitary)
    extra = {"valid": result.valid}
    if result.message:
        extra["message"] = result.message
    lab = s.get("labframe")
    if lab is not None:
        if not isinstance(params, hol.MultiPulseL2):
            raise UsageError("lab-frame simulation is defined for the multi-pulse-l2 scheme")
        spec = LabFrameSpec.build(hol.laser_for_axis(params.n), params.eta, parse_number(lab["ratio"]),
                                  _template(s))
        lr = simulate_labframe_gate(spec, counter_rotating=lab.get("counter_rotating", True))
        infid["labframe_vs_rwa"] = lr.infidelity
        extra["labframe"] = {"ratio": spec.rwa_ratio, "closure_defect": lr.closure_defect,
                             "steps": list(lr.steps)}
    return ReportRecord(params.kind, describe(params, program), result.gate, result.closure_defect,
                        result.dyn_phase_max, infid, extra)


def cmd_simulate(args, s: dict) -> int:
    s.setdefault("numeric", True)
    _emit(_simulate(s).to_dict(), args)
    return EXIT_OK


def cmd_verify(args, s: dict) -> int:
    s["numeric"] = True
    rec = _simulate(s)
    tol = s["tol"]
    limits = {"closure_defect": tol, "distance_to_closed_form": tol, "dyn_phase_max": DYN_PHASE_TOL}
    limits.update(s.get("tolerances", {}))
    values = {"closure_defect": rec.closure_defect, "dyn_phase_max": rec.dyn_phase_max,
              "distance_to_closed_form": rec.infidelity["distance_to_closed_form"]}
    failures = [k for k in ("closure_defect", "distance_to_closed_form", "dyn_phase_max")
                if not values[k] <= limits[k]]
    rec.extra["failures"] = failures
    rec.extra["tolerances"] = limits
    _emit(rec.to_dict(), args)
    if failures:
        for k in failures:
            print(f"verification failed: {k} = {values[k]:.3e} exceeds {limits[k]:.1e}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _sweep_rows(s: dict) -> tuple[list[dict], list[str] | None]:
    var = s.get("variable")
    if var not in SWEEP_VARIABLES:
        raise UsageError(f"unknown sweep variable {var!r}; expected one of {SWEEP_VARIABLES}")
    values = [parse_number(v) for v in s.get("values", [])]
    n = tuple(parse_axis(s.get("axis", "z")))
    rows: list[dict] = []
    if var == "nu":
        eta = parse_number(s.get("eta", 0.0))
        template = LabFrameSpec.build(hol.laser_for_axis(n), eta, 0.003, _template(s))
        if not values:
            return [], ["ratio", "infidelity", "closure_defect"]
        for r in rwa_error_sweep(template, values, workers=int(s.get("workers", 1))):
            row = {"ratio": r.ratio, "infidelity": r.infidelity, "closure_defect": r.closure_defect}
            if not r.ok:
                row["error"] = r.error
            rows.append(row)
        return rows, ["ratio", "infidelity", "closure_defect"]
    for v in values:
        row: dict = {var: v}
        try:
            if var == "eta":
                params = hol.MultiPulseL2(n, v)
                res = hol.run_program(build_program(s, params), numeric=bool(s.get("numeric")),
                                      cfg=_integrator(s))
                row.update(rotation_angle=hol.rotation_angle(res.gate), closure_defect=res.closure_defect,
                           distance_to_closed_form=phase_distance(res.gate, params.gate()))
            elif var == "ratio":
                params = hol.OffResonant(n, v)
                res = hol.run_program(build_program({**s, "envelope": {"shape": "square"}}, params))
                row.update(chi=hol.chi_offresonant(v), rotation_angle=hol.rotation_angle(res.gate),
                           closure_defect=res.closure_defect,
                           distance_to_closed_form=phase_distance(res.gate, params.gate()))
            else:
                params = hol.MultiPulseL2(n, parse_number(s.get("eta", 0.0)))
                res = hol.run_program(build_program({**s, "areas": [v, v]}, params),
                                      numeric=bool(s.get("numeric")), cfg=_integrator(s))
                row.update(closure_defect=res.closure_defect, valid=res.valid)
            row["ok"] = True
        except HoloqError as exc:
            row.update(ok=False, error=str(exc))
        rows.append(row)
    return rows, None


def cmd_sweep(args, s: dict) -> int:
    rows, header = _sweep_rows(s)
    if args.format == "csv":
        _emit(None, args, rows, header)
    else:
        _emit({"variable": s["variable"], "rows": rows}, args)
    return EXIT_OK


CONTROL_PARAMETERS = {"single-pi": 3, "multi-pulse-l2": 5, "two-loop": 6, "off-resonant": 4}


def compare_rows(target: hol.GateTarget) -> list[dict]:
    rows = []
    if target.trace_abs >= 2 - 1e-12:
        rows.append({"scheme": "identity", "control_parameters": 0, "loops": 0, "total_area": 0.0,
                     "square_pulse_required": False, "distance_to_target": 0.0})
    for kind in hol.reachable_schemes(target):
        params = hol.synthesize(target, kind)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            program = hol.compile_to_segments(params, "square" if kind == "off-resonant" else "gaussian")
        rows.append({
            "scheme": kind,
            "control_parameters": CONTROL_PARAMETERS[kind],
            "loops": program.loop_count,
            "total_area": program.total_area,
            "square_pulse_required": kind == "off-resonant",
            "distance_to_target": phase_distance(params.gate(), target.unitary),
        })
    return rows


def cmd_compare(args, s: dict) -> int:
    rows = compare_rows(_target(s))
    if args.format == "csv":
        _emit(None, args, rows)
    else:
        _emit({"target": {"axis": _axis_dict(_target(s).axis), "angle": _target(s).angle}, "rows": rows}, args)
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "simulate": cmd_simulate, "verify": cmd_verify,
            "sweep": cmd_sweep, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", help="JSON config file")
    common.add_argument("--axis", help="x|y|z or 'theta,phi' (radians)")
    common.add_argument("--angle", help="target rotation angle (radians, 'pi/2' accepted)")
    common.add_argument("--eta", help="phase shift of the second pulse pair")
    common.add_argument("--ratio", help="off-resonant detuning ratio Delta/(2 Omega0)")
    common.add_argument("--scheme", help="single-pi | two-loop | off-resonant | multi-pulse-l2")
    common.add_argument("--shape", help="square | gaussian | sin2 | sampled:FILE")
    common.add_argument("--tau", help="duration of one pulse pair")
    common.add_argument("--steps", type=int, help="initial integrator step count")
    common.add_argument("--tol", type=float, help="tolerance (default $HOLOQ_TOL or 1e-8)")
    common.add_argument("--variable", help="sweep variable: eta | ratio | nu | area")
    common.add_argument("--values", help="comma-separated sweep values")
    common.add_argument("--strict", action="store_true", help="reject non-square off-resonant pulses")
    common.add_argument("--numeric", action="store_true", help="integrate numerically where optional")
    common.add_argument("--out", help="output path prefix")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    parser = argparse.ArgumentParser(prog="holoq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        s = _settings(args)
        return COMMANDS[args.command](args, s)
    except (KeyError, ValueError) as exc:  # HoloqError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
