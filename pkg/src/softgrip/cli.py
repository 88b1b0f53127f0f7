"""Command-line front end: ``softgrip {fk,command,grasp,workspace,calib}``.

Settings resolve as flags > config file > built-in defaults.  The config
file is JSON, found via ``--config`` or the ``SOFTGRIP_CONFIG`` environment
variable, with any of the keys in :data:`CONFIG_KEYS`.

Errors go to stderr as ``ERROR:<code>:<message>``; the exit status is 1 for
domain errors and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import calibration as cal
from .errors import SoftGripError, UsageError
from .grasp import GraspObject, plan_grasp
from .kinematics import (
    CurveParams,
    FingerParams,
    GripperParams,
    backbone_points,
    check_phi,
    gripper_finger_transform,
    sample_workspace,
)

CONFIG_ENV = "SOFTGRIP_CONFIG"
CONFIG_KEYS = ("arc_length", "actuator_radius", "phi_max", "base_offset", "mount_angle", "calibration", "format")
FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class Config:
    finger: FingerParams
    gripper: GripperParams
    calibration: Optional[str]
    format: Optional[str]
    clamp: bool = False

    def grid(self) -> cal.CalibrationGrid:
        return cal.load_grid(self.calibration)


def _read_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: top level must be an object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise UsageError(f"config {path}: unknown keys {', '.join(unknown)}")
    return data


def resolve_config(args: argparse.Namespace, env=None) -> Config:
    env = os.environ if env is None else env
    path = getattr(args, "config", None) or env.get(CONFIG_ENV)
    values = _read_config_file(path) if path else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    finger_kw = {k: float(values[k]) for k in ("arc_length", "actuator_radius", "phi_max") if k in values}
    gripper_kw = {k: float(values[k]) for k in ("base_offset", "mount_angle") if k in values}
    calib = values.get("calibration")
    if calib is not None and not Path(calib).is_file():
        raise UsageError(f"calibration file {calib} does not exist")
    fmt = values.get("format")
    if fmt is not None and fmt not in FORMATS:
        raise UsageError(f"format must be one of {', '.join(FORMATS)}")
    return Config(
        finger=FingerParams(**finger_kw),
        gripper=GripperParams(**gripper_kw),
        calibration=calib,
        format=fmt,
        clamp=bool(getattr(args, "clamp", False)),
    )


# -- formatting --------------------------------------------------------------


def _num(v: float) -> float:
    """Round to 9 significant digits for JSON output."""
    v = float(f"{float(v):.9g}")
    return 0.0 if v == 0 else v


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _bar(v: float) -> str:
    """At least two decimals, more only when the value needs them."""
    s = f"{v:.6f}".rstrip("0")
    head, _, tail = s.partition(".")
    return f"{head}.{tail.ljust(2, '0')}"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _svg(polylines, title: str) -> str:
    """SVG with one polyline per entry of ``polylines`` (lists of (x, z) in m), drawn in mm."""
    pts = [(x * 1000.0, z * 1000.0) for line in polylines for x, z in line]
    xs, zs = [p[0] for p in pts], [p[1] for p in pts]
    pad = 10.0
    x0, x1 = min(xs) - pad, max(xs) + pad
    z0, z1 = min(zs) - pad, max(zs) + pad
    width, height = x1 - x0, z1 - z0
    colors = ("#d62728", "#2ca02c", "#1f77b4")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}mm" height="{height:.3f}mm" '
        f'viewBox="{x0:.3f} {-z1:.3f} {width:.3f} {height:.3f}">',
        f"  <title>{title}</title>",
    ]
    for k, line in enumerate(polylines):
        # SVG y grows downward; flip z.
        coords = " ".join(f"{x * 1000.0:.4f},{-z * 1000.0:.4f}" for x, z in line)
        out.append(
            f'  <polyline id="finger_{k + 1}" fill="none" stroke="{colors[k % 3]}" '
            f'stroke-width="0.5" points="{coords}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_fk(args, config: Config) -> str:
    curve = CurveParams.from_phi(check_phi(args.phi, config.finger), config.finger.arc_length)
    poses = {i: gripper_finger_transform(i, curve, args.xi, config.gripper) for i in (1, 2, 3)}
    fmt = config.format
    if fmt == "json":
        doc = {"phi": _num(args.phi), "xi": _num(args.xi)}
        for i, t in poses.items():
            doc[f"finger_{i}"] = {
                "position": [_num(v) for v in t.position],
                "rotation": [[_num(v) for v in row] for row in t.rotation],
            }
        return _dumps(doc) + "\n"
    if fmt == "csv":
        header = ["finger", "x", "y", "z"] + [f"r{a}{b}" for a in range(3) for b in range(3)]
        rows = [[i, *map(float, t.position), *map(float, t.rotation.ravel())] for i, t in poses.items()]
        return _csv(rows, header)
    if fmt == "svg":
        lines = [[(p[0], p[2]) for p in backbone_points(curve, i, config.gripper)] for i in (1, 2, 3)]
        return _svg(lines, f"forward kinematics, phi={args.phi:g} rad")
    lines = [f"phi={args.phi:.9g} rad xi={args.xi:.9g}"]
    for i, t in poses.items():
        x, y, z = t.position
        lines.append(f"finger_{i} x={x:.6f} y={y:.6f} z={z:.6f} radial={math.hypot(x, y):.5f} m")
    return "\n".join(lines) + "\n"


def _command_report(phi: float, p1: float, p2: float, k: float, fmt: Optional[str]) -> str:
    if fmt == "json":
        return _dumps({"phi": _num(phi), "p1_bar": _num(p1), "p2_bar": _num(p2), "k_nm_per_rad": _num(k)}) + "\n"
    if fmt == "csv":
        return _csv([[float(phi), float(p1), float(p2), float(k)]], cal.CSV_HEADER)
    if fmt == "svg":
        raise UsageError("svg output is only available for fk and workspace")
    return f"phi={phi:.9g} P1={_bar(p1)} P2={_bar(p2)} K={_bar(k)}\n"


def cmd_command(args, config: Config) -> str:
    grid = config.grid()
    if args.stiffness is not None:
        command = cal.inverse_command(grid, args.phi, args.stiffness, clamp=config.clamp)
        p1, p2 = command.p1, command.p2
    else:
        p1 = args.p1
        p2 = cal.command_from_target(grid, args.phi, p1, clamp=config.clamp)
    k = cal.stiffness_from_target(grid, args.phi, p1, clamp=config.clamp)
    return _command_report(args.phi, p1, p2, k, config.format)


def cmd_grasp(args, config: Config) -> str:
    obj = GraspObject.load(args.object)
    plan = plan_grasp(
        config.grid(), obj, stiffness=args.stiffness, p1=args.p1,
        params=config.finger, gparams=config.gripper, clamp=config.clamp,
    )
    fmt = config.format
    if fmt == "json":
        return _dumps({
            "shape": obj.shape,
            "characteristic_radius_m": _num(obj.characteristic_radius),
            "phi": _num(plan.phi),
            "k_nm_per_rad": _num(plan.stiffness),
            "p1_bar": _num(plan.command.p1),
            "p2_bar": _num(plan.command.p2),
            "aperture_m": _num(plan.aperture),
        }) + "\n"
    if fmt == "csv":
        header = ["shape", "characteristic_radius_m", "phi_rad", "k_nm_per_rad", "p1_bar", "p2_bar", "aperture_m"]
        row = [obj.shape, float(obj.characteristic_radius), float(plan.phi), float(plan.stiffness),
               float(plan.command.p1), float(plan.command.p2), float(plan.aperture)]
        return _csv([row], header)
    if fmt == "svg":
        raise UsageError("svg output is only available for fk and workspace")
    return (
        f"{obj.shape} r={obj.characteristic_radius:.6f} m phi={plan.phi:.6f} "
        f"P1={_bar(plan.command.p1)} P2={_bar(plan.command.p2)} K={_bar(plan.stiffness)} "
        f"aperture={plan.aperture:.6f} m\n"
    )


def cmd_workspace(args, config: Config) -> str:
    if args.n < 2:
        raise UsageError(f"-n must be >= 2, got {args.n}")
    samples = sample_workspace(config.finger, config.gripper, args.n)
    fmt = config.format or "csv"
    if fmt == "svg":
        lines = [[(s.fingertips[i, 0], s.fingertips[i, 2]) for s in samples] for i in range(3)]
        return _svg(lines, f"fingertip loci, phi in [0, {config.finger.phi_max:.6g}] rad")
    if fmt == "json":
        return _dumps([
            {"phi": _num(s.phi), **{f"finger_{i + 1}": [_num(v) for v in s.fingertips[i]] for i in range(3)}}
            for s in samples
        ]) + "\n"
    header = ["phi"] + [f"f{i}_{a}" for i in (1, 2, 3) for a in "xyz"]
    return _csv([[s.phi, *map(float, s.fingertips.ravel())] for s in samples], header)


def cmd_calib(args, config: Config) -> str:
    fmt = config.format
    if fmt == "svg":
        raise UsageError("svg output is only available for fk and workspace")
    if args.calib_cmd == "validate":
        source = args.file or config.calibration
        grid = cal.load_grid(source)
        name = source or cal.BUNDLED_GRID
        return f"OK {name}: {len(grid.phi_knots)}x{len(grid.p1_knots)} grid\n"
    grid = config.grid()
    if args.calib_cmd == "iso":
        p1s = args.p1 if args.p1 else grid.p1_knots
        pairs = cal.iso_phi_curve(grid, args.phi, p1s, clamp=config.clamp)
        if fmt == "json":
            return _dumps({"phi": _num(args.phi), "pairs": [
                {"p1_bar": _num(c.p1), "p2_bar": _num(c.p2)} for c in pairs]}) + "\n"
        if fmt == "csv":
            return _csv([[float(args.phi), c.p1, c.p2] for c in pairs], ["phi_rad", "p1_bar", "p2_bar"])
        return "".join(f"P1={_bar(c.p1)} P2={_bar(c.p2)}\n" for c in pairs)
    # invert
    phi = cal.shape_from_pressures(grid, args.p1, args.p2, clamp=config.clamp)
    if fmt == "json":
        return _dumps({"p1_bar": _num(args.p1), "p2_bar": _num(args.p2), "phi": _num(phi)}) + "\n"
    if fmt == "csv":
        return _csv([[float(args.p1), float(args.p2), phi]], ["p1_bar", "p2_bar", "phi_rad"])
    return f"phi={phi:.6f}\n"


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"ERROR:{UsageError.code}:{message}\n")
        sys.exit(2)


def _add_global(p: argparse.ArgumentParser, top: bool) -> None:
    # Subparsers use SUPPRESS so they never overwrite a value given before the subcommand.
    d = None if top else argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=d, help=f"JSON config file (fallback: ${CONFIG_ENV})")
    g.add_argument("--calibration", default=d, help="calibration CSV (default: bundled grid)")
    g.add_argument("--format", choices=FORMATS, default=d)
    g.add_argument("--clamp", action="store_true", default=False if top else argparse.SUPPRESS,
                   help="clamp out-of-hull calibration queries to the hull boundary")
    g.add_argument("--arc-length", dest="arc_length", type=float, default=d, help="finger arc length L (m)")
    g.add_argument("--actuator-radius", dest="actuator_radius", type=float, default=d, help="muscle radius r (m)")
    g.add_argument("--phi-max", dest="phi_max", type=float, default=d, help="largest bend angle (rad)")
    g.add_argument("--sigma", dest="base_offset", type=float, default=d, help="base offset sigma (m)")
    g.add_argument("--mount-angle", dest="mount_angle", type=float, default=d, help="finger mount angle (rad)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softgrip", description=__doc__.splitlines()[0])
    _add_global(parser, top=True)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fk", help="poses of all three fingers at a bend angle")
    _add_global(p, top=False)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--xi", type=float, default=1.0, help="point along the backbone, 0 base .. 1 tip")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("command", help="pressure pair for a bend angle and P1 or stiffness")
    _add_global(p, top=False)
    p.add_argument("--phi", type=float, required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--p1", type=float)
    target.add_argument("--stiffness", type=float)
    p.set_defaults(func=cmd_command)

    p = sub.add_parser("grasp", help="closure angle and pressures for an object")
    _add_global(p, top=False)
    p.add_argument("object", help="object JSON, inline or a file path")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--p1", type=float)
    target.add_argument("--stiffness", type=float)
    p.set_defaults(func=cmd_grasp)

    p = sub.add_parser("workspace", help="fingertip loci over the bend range")
    _add_global(p, top=False)
    p.add_argument("-n", type=int, default=50)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_workspace)

    p = sub.add_parser("calib", help="calibration grid tools")
    _add_global(p, top=False)
    csub = p.add_subparsers(dest="calib_cmd", required=True)
    q = csub.add_parser("validate", help="check a calibration CSV")
    _add_global(q, top=False)
    q.add_argument("file", nargs="?")
    q = csub.add_parser("iso", help="iso-bend pressure pairs")
    _add_global(q, top=False)
    q.add_argument("--phi", type=float, required=True)
    q.add_argument("--p1", type=float, nargs="+")
    q = csub.add_parser("invert", help="bend angle from a pressure pair")
    _add_global(q, top=False)
    q.add_argument("--p1", type=float, required=True)
    q.add_argument("--p2", type=float, required=True)
    p.set_defaults(func=cmd_calib)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        text = args.func(args, config)
    except SoftGripError as exc:
        sys.stderr.write(f"ERROR:{exc.code}:{exc}\n")
        return 2 if isinstance(exc, UsageError) else 1
    _write(text, getattr(args, "output", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
