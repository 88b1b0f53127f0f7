"""Empirical pressure / shape / stiffness map of a finger.

The map is a rectilinear grid over bend angle ``phi`` (rad) and stiffness
muscle pressure ``P1`` (bar).  Each node stores the bending-pair pressure
``P2`` (bar) that holds that bend and the measured bending stiffness ``K``
(Nm/rad).  Values in between come from bilinear interpolation; queries
outside the measured rectangle raise :class:`OutOfHull` unless ``clamp`` is
set.  No unit conversion happens anywhere in this module.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, DegenerateInput, OutOfHull, ParseError, ValidationError

CSV_HEADER = ("phi_rad", "p1_bar", "p2_bar", "k_nm_per_rad")
BUNDLED_GRID = "table1.csv"

PHI_TOL = 1e-9
P1_TOL = 1e-9
MAX_BISECTION_STEPS = 200
# Targets this close to an achievable-band edge snap onto it.
BAND_SLACK = 1e-9


@dataclass(frozen=True)
class PressureCommand:
    p1: float  # stiffness muscle, bar
    p2: float  # bundled bending pair, bar

    def validate(self, pressure_min: float = 0.0, pressure_max: float = 7.0) -> "PressureCommand":
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if not pressure_min <= p <= pressure_max:
                raise ValidationError(f"{name}={p} bar outside [{pressure_min}, {pressure_max}]")
        if self.p1 > self.p2:
            raise ValidationError(f"gripping requires p1 <= p2, got p1={self.p1}, p2={self.p2}")
        return self


@dataclass(frozen=True)
class StiffnessSample:
    delta_tau: float  # Nm
    delta_phi: float  # rad

    @property
    def k(self) -> float:
        return estimate_stiffness(self.delta_tau, self.delta_phi)


def estimate_stiffness(delta_tau: float, delta_phi: float) -> float:
    """Bending stiffness ``K = delta_tau / delta_phi`` in Nm/rad."""
    if abs(delta_phi) < 1e-12:
        raise DegenerateInput(f"delta_phi={delta_phi} too small to estimate stiffness")
    return delta_tau / delta_phi


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True, eq=False)
class CalibrationGrid:
    phi_knots: tuple
    p1_knots: tuple
    p2_values: np.ndarray  # [phi][p1]
    k_values: np.ndarray  # [phi][p1]

    def __post_init__(self):
        phi = tuple(float(v) for v in self.phi_knots)
        p1 = tuple(float(v) for v in self.p1_knots)
        object.__setattr__(self, "phi_knots", phi)
        object.__setattr__(self, "p1_knots", p1)
        for name, knots in (("phi", phi), ("p1", p1)):
            if len(knots) < 2:
                raise ValidationError(f"{name} axis needs at least 2 knots, got {len(knots)}")
            for a, b in zip(knots, knots[1:]):
                if not b > a:
                    raise ValidationError(f"{name} knots not strictly ascending at {_fmt(a)} -> {_fmt(b)}")
        for name in ("p2_values", "k_values"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (len(phi), len(p1)):
                raise ValidationError(f"{name} has shape {m.shape}, expected {(len(phi), len(p1))}")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        self._validate_values()

    def _cell(self, i, j) -> str:
        return f"(phi={_fmt(self.phi_knots[i])}, p1={_fmt(self.p1_knots[j])})"

    def _validate_values(self):
        for name, m in (("p2", self.p2_values), ("k", self.k_values)):
            for i in range(m.shape[0]):
                for j in range(m.shape[1]):
                    if not (math.isfinite(m[i, j]) and m[i, j] > 0):
                        raise ValidationError(f"{name} at cell {self._cell(i, j)} must be positive, got {m[i, j]}")
        # P2 rises with phi at each P1; K rises along both axes.
        checks = [("p2", self.p2_values, 0), ("k", self.k_values, 0), ("k", self.k_values, 1)]
        for name, m, axis in checks:
            for i in range(m.shape[0]):
                for j in range(m.shape[1]):
                    ni, nj = (i + 1, j) if axis == 0 else (i, j + 1)
                    if ni >= m.shape[0] or nj >= m.shape[1]:
                        continue
                    if not m[ni, nj] > m[i, j]:
                        along = "phi" if axis == 0 else "p1"
                        raise ValidationError(
                            f"{name} not strictly increasing along {along} at cell {self._cell(ni, nj)}: "
                            f"{m[ni, nj]} <= {m[i, j]} at {self._cell(i, j)}"
                        )

    @property
    def phi_range(self) -> tuple:
        return self.phi_knots[0], self.phi_knots[-1]

    @property
    def p1_range(self) -> tuple:
        return self.p1_knots[0], self.p1_knots[-1]

    def rows(self):
        """Yield ``(phi, p1, p2, k)`` node tuples in phi-major order."""
        for i, phi in enumerate(self.phi_knots):
            for j, p1 in enumerate(self.p1_knots):
                yield phi, p1, float(self.p2_values[i, j]), float(self.k_values[i, j])

    def equals(self, other: "CalibrationGrid") -> bool:
        return (
            self.phi_knots == other.phi_knots
            and self.p1_knots == other.p1_knots
            and np.array_equal(self.p2_values, other.p2_values)
            and np.array_equal(self.k_values, other.k_values)
        )

    def __eq__(self, other):
        if not isinstance(other, CalibrationGrid):
            return NotImplemented
        return self.equals(other)

    __hash__ = None


# -- ingestion ---------------------------------------------------------------


def parse_grid(text: str, origin: str = "<string>") -> CalibrationGrid:
    """Build a grid from calibration CSV text; row order does not matter."""
    lines = [
        (n, line) for n, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise ParseError(f"{origin}: no header line")
    header_no, header = lines[0]
    fields = tuple(f.strip() for f in next(csv.reader([header])))
    if fields != CSV_HEADER:
        raise ParseError(f"{origin}:{header_no}: expected header {','.join(CSV_HEADER)}, got {header.strip()!r}")

    cells = {}
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(CSV_HEADER):
            raise ParseError(f"{origin}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        try:
            phi, p1, p2, k = (float(v) for v in row)
        except ValueError:
            raise ParseError(f"{origin}:{lineno}: non-numeric field in {line.strip()!r}") from None
        if not all(math.isfinite(v) for v in (phi, p1, p2, k)):
            raise ParseError(f"{origin}:{lineno}: non-finite value in {line.strip()!r}")
        if (phi, p1) in cells:
            raise ValidationError(f"{origin}:{lineno}: duplicate cell (phi={_fmt(phi)}, p1={_fmt(p1)})")
        cells[(phi, p1)] = (p2, k)

    phi_knots = sorted({phi for phi, _ in cells})
    p1_knots = sorted({p1 for _, p1 in cells})
    p2 = np.empty((len(phi_knots), len(p1_knots)))
    k = np.empty_like(p2)
    for i, phi in enumerate(phi_knots):
        for j, p1 in enumerate(p1_knots):
            if (phi, p1) not in cells:
                raise ValidationError(f"{origin}: missing cell (phi={_fmt(phi)}, p1={_fmt(p1)})")
            p2[i, j], k[i, j] = cells[(phi, p1)]
    try:
        return CalibrationGrid(tuple(phi_knots), tuple(p1_knots), p2, k)
    except ValidationError as exc:
        raise ValidationError(f"{origin}: {exc}") from None


def bundled_grid_text() -> str:
    return resources.files("softgrip").joinpath("data", BUNDLED_GRID).read_text(encoding="utf-8")


def load_grid(source=None) -> CalibrationGrid:
    """Load a calibration grid from a CSV path, or the bundled default when ``source`` is None."""
    if source is None:
        return parse_grid(bundled_grid_text(), origin=BUNDLED_GRID)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_grid(text, origin=str(path))


def dumps_grid(grid: CalibrationGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in grid.rows():
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def save_grid(grid: CalibrationGrid, path) -> None:
    Path(path).write_text(dumps_grid(grid), encoding="utf-8")


# -- interpolation -----------------------------------------------------------


def _locate(knots: Sequence[float], x: float):
    """Cell index and local coordinate in [0, 1] of ``x`` within ``knots``."""
    i = bisect.bisect_right(knots, x) - 1
    i = min(max(i, 0), len(knots) - 2)
    t = (x - knots[i]) / (knots[i + 1] - knots[i])
    return i, t


def _in_range(x: float, lo: float, hi: float) -> bool:
    return lo <= x <= hi


def _hull_point(grid: CalibrationGrid, phi: float, p1: float, clamp: bool):
    (phi_lo, phi_hi), (p1_lo, p1_hi) = grid.phi_range, grid.p1_range
    if clamp:
        return min(max(phi, phi_lo), phi_hi), min(max(p1, p1_lo), p1_hi)
    if not (_in_range(phi, phi_lo, phi_hi) and _in_range(p1, p1_lo, p1_hi)):
        raise OutOfHull(
            f"(phi={phi:.9g}, p1={p1:.9g}) outside calibrated hull "
            f"phi in [{phi_lo:g}, {phi_hi:g}] rad, p1 in [{p1_lo:g}, {p1_hi:g}] bar"
        )
    return phi, p1


def bilinear(phi_knots, p1_knots, values, phi: float, p1: float) -> float:
    """Bilinear interpolation, exact at the nodes.

    The ``(1 - t) * a + t * b`` form returns ``a`` at ``t == 0`` and ``b`` at
    ``t == 1`` without round-off.
    """
    i, t = _locate(phi_knots, phi)
    j, u = _locate(p1_knots, p1)
    v00, v01 = values[i, j], values[i, j + 1]
    v10, v11 = values[i + 1, j], values[i + 1, j + 1]
    lo = (1.0 - u) * v00 + u * v01
    hi = (1.0 - u) * v10 + u * v11
    return float((1.0 - t) * lo + t * hi)


def command_from_target(grid: CalibrationGrid, phi: float, p1: float, clamp: bool = False) -> float:
    """Bending-pair pressure P2 (bar) that holds bend ``phi`` at stiffness pressure ``p1``."""
    phi, p1 = _hull_point(grid, phi, p1, clamp)
    return bilinear(grid.phi_knots, grid.p1_knots, grid.p2_values, phi, p1)


def stiffness_from_target(grid: CalibrationGrid, phi: float, p1: float, clamp: bool = False) -> float:
    """Bending stiffness K (Nm/rad) at bend ``phi`` and stiffness pressure ``p1``."""
    phi, p1 = _hull_point(grid, phi, p1, clamp)
    return bilinear(grid.phi_knots, grid.p1_knots, grid.k_values, phi, p1)


def _bisect_increasing(f, target: float, lo: float, hi: float, tol: float) -> float:
    """Root of ``f(x) = target`` for increasing ``f`` bracketed by [lo, hi]."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == target:
        return lo
    if f_hi == target:
        return hi
    for _ in range(MAX_BISECTION_STEPS):
        if hi - lo < tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == target:
            return mid
        if f_mid < target:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not reach tolerance {tol} in {MAX_BISECTION_STEPS} steps")


def p2_band(grid: CalibrationGrid, p1: float, clamp: bool = False) -> tuple:
    phi_lo, phi_hi = grid.phi_range
    return (
        command_from_target(grid, phi_lo, p1, clamp=clamp),
        command_from_target(grid, phi_hi, p1, clamp=clamp),
    )


def stiffness_band(grid: CalibrationGrid, phi: float, clamp: bool = False) -> tuple:
    p1_lo, p1_hi = grid.p1_range
    return (
        stiffness_from_target(grid, phi, p1_lo, clamp=clamp),
        stiffness_from_target(grid, phi, p1_hi, clamp=clamp),
    )


def shape_from_pressures(grid: CalibrationGrid, p1: float, p2: float, clamp: bool = False) -> float:
    """Bend angle produced by the pressure pair (p1, p2).

    Inverts P2(phi, p1) in phi by bisection; P2 is strictly increasing in
    phi, which grid validation guarantees.
    """
    if clamp:
        p1 = min(max(p1, grid.p1_range[0]), grid.p1_range[1])
    lo_p2, hi_p2 = p2_band(grid, p1)
    if lo_p2 - BAND_SLACK <= p2 <= hi_p2 + BAND_SLACK:
        p2 = min(max(p2, lo_p2), hi_p2)
    else:
        if not clamp:
            raise OutOfHull(
                f"p2={p2:.9g} bar unachievable at p1={p1:.9g} bar; achievable band [{lo_p2:.9g}, {hi_p2:.9g}]",
                band=(lo_p2, hi_p2),
            )
        p2 = min(max(p2, lo_p2), hi_p2)
    phi_lo, phi_hi = grid.phi_range
    return _bisect_increasing(lambda phi: command_from_target(grid, phi, p1), p2, phi_lo, phi_hi, PHI_TOL)


def inverse_command(grid: CalibrationGrid, phi: float, k: float, clamp: bool = False) -> PressureCommand:
    """Pressure pair that holds bend ``phi`` with bending stiffness ``k``.

    Shape and stiffness decouple: P1 is chosen on the iso-phi line to hit
    ``k``, then P2 is read back for that P1.
    """
    if clamp:
        phi = min(max(phi, grid.phi_range[0]), grid.phi_range[1])
    k_lo, k_hi = stiffness_band(grid, phi)
    if k_lo - BAND_SLACK <= k <= k_hi + BAND_SLACK:
        k = min(max(k, k_lo), k_hi)
    else:
        if not clamp:
            raise OutOfHull(
                f"stiffness {k:.9g} Nm/rad unachievable at phi={phi:.9g} rad; "
                f"achievable band [{k_lo:.9g}, {k_hi:.9g}]",
                band=(k_lo, k_hi),
            )
        k = min(max(k, k_lo), k_hi)
    p1_lo, p1_hi = grid.p1_range
    p1 = _bisect_increasing(lambda p: stiffness_from_target(grid, phi, p), k, p1_lo, p1_hi, P1_TOL)
    return PressureCommand(p1=p1, p2=command_from_target(grid, phi, p1))


def iso_phi_curve(grid: CalibrationGrid, phi: float, p1_samples: Iterable[float], clamp: bool = False) -> list:
    """Pressure pairs along the iso-bend line at ``phi``."""
    return [PressureCommand(p1=float(p1), p2=command_from_target(grid, phi, p1, clamp=clamp)) for p1 in p1_samples]


# -- synthetic data ----------------------------------------------------------


def linear_model_coefficient(arc_length: float = 0.150, max_pressure_bar: float = 7.0, max_strain: float = 0.5) -> float:
    """Muscle extension per bar (m/bar) for a muscle that stretches linearly to ``max_strain`` at full pressure."""
    return max_strain * arc_length / max_pressure_bar


def synthetic_grid(
    phi_knots: Sequence[float] = (0.4, 0.6, 0.8, 1.0),
    p1_knots: Sequence[float] = (0.50, 0.75, 1.00, 1.25),
    actuator_radius: float = 0.012,
    arc_length: float = 0.150,
    k_base: float = 0.2,
    k_per_bar: float = 0.6,
) -> CalibrationGrid:
    """Idealized grid from a linear pressure-to-extension muscle model.

    Bending needs a differential extension ``l2 - l1 = 1.5 * r * phi``, so
    with extension ``c * P`` per muscle, ``P2 = P1 + 1.5 * r * phi / c``.
    Stiffness grows linearly with the common-mode pressure ``(P1 + P2)/2``.
    For tests and demos; never a substitute for measured data.
    """
    c = linear_model_coefficient(arc_length)
    phi = np.asarray(phi_knots, dtype=float)[:, None]
    p1 = np.asarray(p1_knots, dtype=float)[None, :]
    p2 = p1 + 1.5 * actuator_radius * phi / c
    k = k_base + k_per_bar * 0.5 * (p1 + p2)
    return CalibrationGrid(tuple(phi_knots), tuple(p1_knots), p2, k)
