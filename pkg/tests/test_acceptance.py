"""Exit criteria for the build, one test per criterion at its stated tolerance.

A PASS/FAIL line per criterion is printed in the pytest terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np

from conftest import record_criterion
from oracles import dense_closure
from softgrip.calibration import (
    command_from_target,
    inverse_command,
    load_grid,
    shape_from_pressures,
    stiffness_from_target,
)
from softgrip.grasp import GraspObject, closure_phi
from softgrip.kinematics import (
    CurveParams,
    FingerParams,
    GripperParams,
    finger_transform,
    fingertip_positions,
    rot_z,
)

TABLE_I = {
    0.4: [(0.50, 1.86, 0.63), (0.75, 1.90, 0.81), (1.00, 1.96, 1.11), (1.25, 2.09, 1.32)],
    0.6: [(0.50, 2.11, 0.71), (0.75, 2.17, 0.85), (1.00, 2.24, 1.40), (1.25, 2.39, 1.71)],
    0.8: [(0.50, 2.36, 0.86), (0.75, 2.42, 1.42), (1.00, 2.52, 1.90), (1.25, 2.67, 2.18)],
    1.0: [(0.50, 2.60, 1.56), (0.75, 2.68, 1.98), (1.00, 2.80, 2.33), (1.25, 2.98, 2.58)],
}
L = 0.150
N_RANDOM = 1000


def test_criterion_1_table_reproduction():
    start = time.perf_counter()
    grid = load_grid()
    mismatches = []
    for phi, rows in TABLE_I.items():
        for p1, p2, k in rows:
            if command_from_target(grid, phi, p1) != p2:
                mismatches.append(("P2", phi, p1))
            if stiffness_from_target(grid, phi, p1) != k:
                mismatches.append(("K", phi, p1))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 1.0
    record_criterion(1, "Table I reproduction (32 exact lookups, < 1 s)", ok,
                     f"{32 - len(mismatches)}/32 exact, {elapsed:.3f} s")
    assert not mismatches, mismatches
    assert elapsed < 1.0


def test_criterion_2_decoupling():
    grid = load_grid()
    failures = []
    for phi, rows in TABLE_I.items():
        commands = []
        for p1, p2, k in rows:
            cmd = inverse_command(grid, phi, k)
            commands.append((cmd.p1, cmd.p2))
            if abs(cmd.p2 - p2) > 1e-9:
                failures.append(f"P2 at phi={phi}, K={k}: {cmd.p2}")
            if abs(shape_from_pressures(grid, cmd.p1, cmd.p2) - phi) > 1e-6:
                failures.append(f"phi round trip at phi={phi}, K={k}")
        if len(set(commands)) != 4:
            failures.append(f"commands at phi={phi} not distinct")
    ok = not failures
    record_criterion(2, "decoupling: 4 distinct commands per phi, P2 to 1e-9, phi to 1e-6", ok,
                     f"{len(failures)} failures")
    assert ok, failures


def test_criterion_3_kinematic_invariants():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    gp = GripperParams()
    worst = dict(inext=0.0, group=0.0, ident=0.0, rigid=0.0, chord=0.0, sym=0.0)
    for phi, xa, xb in zip(rng.uniform(1e-6, math.pi, N_RANDOM), rng.uniform(0, 1, N_RANDOM),
                           rng.uniform(0, 1, N_RANDOM)):
        if xa + xb > 1:
            xa, xb = xa / 2, xb / 2
        c = CurveParams.from_phi(phi, L)
        worst["inext"] = max(worst["inext"], abs(c.radius * c.phi - L) / L)

        lhs = finger_transform(c, xa) @ finger_transform(c, xb)
        rhs = finger_transform(c, xa + xb)
        worst["group"] = max(worst["group"], np.abs(lhs.matrix - rhs.matrix).max())

        worst["ident"] = max(worst["ident"], np.abs(finger_transform(c, 0.0).matrix - np.eye(4)).max())

        for xi in (xa, xb, 1.0):
            R = finger_transform(c, xi).rotation
            worst["rigid"] = max(worst["rigid"], np.abs(R.T @ R - np.eye(3)).max(), abs(np.linalg.det(R) - 1))

        chord = np.linalg.norm(finger_transform(c, 1.0).position - finger_transform(c, 0.0).position)
        worst["chord"] = max(worst["chord"], abs(chord - 2 * c.radius * math.sin(phi / 2)))

        tips = fingertip_positions(c, gp)
        worst["sym"] = max(
            worst["sym"],
            np.abs(tips[1] - rot_z(2 * math.pi / 3).apply(tips[0])).max(),
            np.abs(tips[2] - rot_z(4 * math.pi / 3).apply(tips[0])).max(),
        )
    elapsed = time.perf_counter() - start
    limits = dict(inext=1e-12, group=1e-10, ident=1e-12, rigid=1e-12, chord=1e-10, sym=1e-12)
    bad = {k: v for k, v in worst.items() if not v <= limits[k]}
    ok = not bad and elapsed < 10.0
    record_criterion(3, f"kinematic invariants over {N_RANDOM} random cases (< 10 s)", ok,
                     ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f", {elapsed:.2f} s")
    assert not bad, bad
    assert elapsed < 10.0


def test_criterion_4_monotonicity():
    grid = load_grid()
    k, p2 = grid.k_values, grid.p2_values
    k_p1 = [k[i, j + 1] > k[i, j] for i in range(4) for j in range(3)]
    k_phi = [k[i + 1, j] > k[i, j] for i in range(3) for j in range(4)]
    p2_phi = [p2[i + 1, j] > p2[i, j] for i in range(3) for j in range(4)]
    counts = (sum(k_p1), sum(k_phi), sum(p2_phi))
    ok = len(k_p1) == len(k_phi) == len(p2_phi) == 12 and counts == (12, 12, 12)
    record_criterion(4, "monotonicity of bundled grid (3 x 12 strict comparisons)", ok,
                     f"K along P1 {counts[0]}/12, K along phi {counts[1]}/12, P2 along phi {counts[2]}/12")
    assert ok


def test_criterion_5_oracle_equivalence():
    start = time.perf_counter()
    params, gp = FingerParams(), GripperParams()
    rng = np.random.default_rng(5)
    open_r = L * math.sqrt(2) / 2
    closure_err = 0.0
    for radius in rng.uniform(0.01, open_r * 0.999, 50):
        got = closure_phi(GraspObject.sphere(radius), params, gp)
        closure_err = max(closure_err, abs(got - dense_closure(radius, L, gp.mount_angle, math.pi / 2)))

    grid = load_grid()
    trip_err = 0.0
    for phi, p1 in zip(rng.uniform(0.4, 1.0, 200), rng.uniform(0.5, 1.25, 200)):
        trip_err = max(trip_err, abs(shape_from_pressures(grid, p1, command_from_target(grid, phi, p1)) - phi))
    elapsed = time.perf_counter() - start
    ok = closure_err < 1e-4 and trip_err < 1e-9 and elapsed < 30.0
    record_criterion(5, "closure vs dense oracle (50 radii, 1e-4 rad); shape round trip (200 pts, 1e-9)", ok,
                     f"closure {closure_err:.1e} rad, round trip {trip_err:.1e} rad, {elapsed:.2f} s")
    assert closure_err < 1e-4
    assert trip_err < 1e-9
    assert elapsed < 30.0


def test_criterion_6_small_angle_stability():
    phis = np.concatenate([np.geomspace(1e-7, 1e-5, 201), [1e-6 * (1 - 1e-12), 1e-6, 1e-6 * (1 + 1e-12)]])
    phis.sort()
    pos = [finger_transform(CurveParams.from_phi(p, L), 1.0).position for p in phis]
    jump = max(np.linalg.norm(b - a) for a, b in zip(pos, pos[1:]))
    span = np.linalg.norm(pos[0] - pos[-1])
    ok = jump < 1e-6 and span < 1e-6
    record_criterion(6, "position continuity across phi = 1e-6 series threshold (1e-6 m)", ok,
                     f"max step {jump:.1e} m, 1e-7..1e-5 span {span:.1e} m")
    assert ok


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "softgrip", *argv], capture_output=True, text=True)


def test_criterion_7_cli_end_to_end():
    cmd = _cli("command", "--phi", "0.8", "--stiffness", "1.90")
    iso = _cli("calib", "iso", "--phi", "1.0")
    again = [_cli("command", "--phi", "0.8", "--stiffness", "1.90"), _cli("calib", "iso", "--phi", "1.0")]
    checks = {
        "command": cmd.returncode == 0 and "P1=1.00" in cmd.stdout and "P2=2.52" in cmd.stdout,
        "iso": iso.returncode == 0 and iso.stdout.splitlines() == [
            "P1=0.50 P2=2.60", "P1=0.75 P2=2.68", "P1=1.00 P2=2.80", "P1=1.25 P2=2.98"],
        "deterministic": again[0].stdout == cmd.stdout and again[1].stdout == iso.stdout,
    }
    ok = all(checks.values())
    record_criterion(7, "CLI command / calib iso output and byte-identical reruns", ok,
                     ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))
    assert ok, (checks, cmd.stdout, iso.stdout)
