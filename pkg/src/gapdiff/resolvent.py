"""Eigenfunctions and Green function of a discrete string on an interval.

For a speed measure with purely atomic interior, the increasing/decreasing
lambda-eigenfunctions are piecewise linear: between atoms they are straight,
and at an atom of weight w the slope jumps by 2 * lambda * w * value.  From
the pair (phi normalised to phi(0)=1 with zero initial slope, psi normalised
to psi(0)=0 with unit slope) the boundary functionals h+ and h- follow as
limits of psi/phi at the interval ends, and the Green function of the killed
process is g(x, y) = h * u_plus(x v y) * u_minus(x ^ y).

Everything here is anchored at the origin, so measures must be recentred
before use (mean zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonAtomicInterior, OutOfInterval, OutOfRange
from .measure import PotentialProfile, excess_potential
from .speed import SpeedMeasure

__all__ = [
    "EigenSolution",
    "IdentityReport",
    "solve_eigenfunctions",
    "green_function",
    "check_main_identity",
]


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function given by knots and knot values."""

    knots: np.ndarray
    vals: np.ndarray

    def __call__(self, x) -> np.ndarray | float:
        out = np.interp(np.asarray(x, dtype=float), self.knots, self.vals)
        return float(out) if np.asarray(x).ndim == 0 else out

    def slope_right(self, x: float) -> float:
        """Slope on the piece immediately to the right of x."""
        j = int(np.searchsorted(self.knots, x, side="right"))
        if j >= len(self.knots):
            raise OutOfInterval(f"no piece to the right of {x}")
        j = max(j, 1)
        return float((self.vals[j] - self.vals[j - 1]) / (self.knots[j] - self.knots[j - 1]))

    def slope_left(self, x: float) -> float:
        j = int(np.searchsorted(self.knots, x, side="left"))
        if j <= 0:
            raise OutOfInterval(f"no piece to the left of {x}")
        j = min(j, len(self.knots) - 1)
        return float((self.vals[j] - self.vals[j - 1]) / (self.knots[j] - self.knots[j - 1]))


@dataclass(frozen=True)
class EigenSolution:
    lam: float
    interval: tuple[float, float]
    phi: PiecewiseLinear
    psi: PiecewiseLinear
    h_plus: float
    h_minus: float
    h: float
    u_plus: PiecewiseLinear
    u_minus: PiecewiseLinear
    h_plus_integral: float
    h_minus_integral: float


def _run_recursion(atom_x: np.ndarray, atom_w: np.ndarray, lam: float,
                   v0: float, s0: float, end: float) -> tuple[list[float], list[float]]:
    """March a jump recursion from 0 to end > 0 over atoms at 0 <= x <= end.

    Returns knots and values including both endpoints; the slope gains
    2 * lam * w * value at every atom (an atom at 0 adjusts the initial slope).
    """
    knots, vals = [0.0], [v0]
    v, s, x_prev = v0, s0, 0.0
    for x, w in zip(atom_x, atom_w):
        if x == 0.0:
            s += 2.0 * lam * w * v
            continue
        v = v + s * (x - x_prev)
        knots.append(float(x))
        vals.append(v)
        s += 2.0 * lam * w * v
        x_prev = float(x)
    knots.append(end)
    vals.append(v + s * (end - x_prev))
    return knots, vals


def _inv_square_integral(f: PiecewiseLinear, a: float, b: float) -> float:
    """Exact integral of 1 / f(x)^2 over [a, b] for piecewise-linear f > 0."""
    cuts = [a] + [float(k) for k in f.knots if a < k < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        flo, fhi = f(lo), f(hi)
        if np.isclose(flo, fhi):
            total += (hi - lo) / (flo * fhi)
        else:
            s = (fhi - flo) / (hi - lo)
            total += (1.0 / flo - 1.0 / fhi) / s
    return total


def solve_eigenfunctions(sm: SpeedMeasure, lam: float = 1.0) -> EigenSolution:
    """Eigenfunction pair, boundary functionals and u-pair for an atomic string.

    The interior of the speed measure must be purely atomic and the interval
    must contain the origin (recentre the measure first).  h+ comes from the
    psi/phi limit, which is exact for piecewise-linear data; the closed-form
    integral of phi^(-2) is returned alongside as a cross-check.
    """
    if sm.segments:
        raise NonAtomicInterior("interior speed measure must be purely atomic")
    if not lam > 0.0:
        raise OutOfRange(f"lambda must be positive, got {lam}")
    lo, hi = sm.interval
    if not lo < 0.0 < hi:
        raise OutOfInterval("interval must contain the origin; recentre the measure")

    right = [(a.x, a.weight) for a in sm.atoms if a.x >= 0.0]
    left = sorted(((-a.x, a.weight) for a in sm.atoms if a.x < 0.0))
    rx = np.array([p for p, _ in right])
    rw = np.array([w for _, w in right])
    lx = np.array([p for p, _ in left])
    lw = np.array([w for _, w in left])

    kr_phi, vr_phi = _run_recursion(rx, rw, lam, 1.0, 0.0, hi)
    kr_psi, vr_psi = _run_recursion(rx, rw, lam, 0.0, 1.0, hi)
    # left side: mirror x -> -x; phi is even-type (same recursion), psi odd-type
    kl_phi, vl_phi = _run_recursion(lx, lw, lam, 1.0, 0.0, -lo)
    kl_psi, vl_psi = _run_recursion(lx, lw, lam, 0.0, 1.0, -lo)

    knots = np.array([-k for k in reversed(kl_phi[1:])] + kr_phi)
    phi_vals = np.array(list(reversed(vl_phi[1:])) + vr_phi)
    psi_vals = np.array([-v for v in reversed(vl_psi[1:])] + vr_psi)
    phi = PiecewiseLinear(knots, phi_vals)
    psi = PiecewiseLinear(knots, psi_vals)

    h_plus = float(psi_vals[-1] / phi_vals[-1])
    h_minus = float(-psi_vals[0] / phi_vals[0])
    h = 1.0 / (1.0 / h_plus + 1.0 / h_minus)
    u_plus = PiecewiseLinear(knots, phi_vals - psi_vals / h_plus)
    u_minus = PiecewiseLinear(knots, phi_vals + psi_vals / h_minus)

    h_plus_int = _inv_square_integral(phi, 0.0, hi)
    h_minus_int = _inv_square_integral(phi, lo, 0.0)
    return EigenSolution(
        lam=lam,
        interval=(lo, hi),
        phi=phi,
        psi=psi,
        h_plus=h_plus,
        h_minus=h_minus,
        h=h,
        u_plus=u_plus,
        u_minus=u_minus,
        h_plus_integral=h_plus_int,
        h_minus_integral=h_minus_int,
    )


def green_function(sol: EigenSolution, x: float, y: float) -> float:
    """g_lambda(x, y) = h * u_plus(x v y) * u_minus(x ^ y), symmetric in (x, y)."""
    lo, hi = sol.interval
    for p in (x, y):
        if not lo <= p <= hi:
            raise OutOfInterval(f"{p} outside [{lo}, {hi}]")
    return sol.h * float(sol.u_plus(max(x, y))) * float(sol.u_minus(min(x, y)))


@dataclass(frozen=True)
class IdentityReport:
    grid: np.ndarray
    green_vals: np.ndarray
    half_excess: np.ndarray
    max_abs_err: float
    derivative_jump: float | None  # g'(0-) - g'(0+), only when no atom at 0


def check_main_identity(profile: PotentialProfile, sm: SpeedMeasure,
                        grid: np.ndarray | None = None) -> IdentityReport:
    """Compare g_1(x, 0) with U(x) / 2 over a grid (they agree identically).

    When the measure has no atom at the origin the report also carries the
    derivative jump of x -> g_1(x, 0) at 0, which must equal 1.
    """
    if abs(profile.mean) > 1e-12:
        raise OutOfRange("identity check requires a measure centred at 0")
    sol = solve_eigenfunctions(sm, 1.0)
    lo, hi = sol.interval
    if grid is None:
        knots = sol.phi.knots
        mids = 0.5 * (knots[:-1] + knots[1:])
        grid = np.unique(np.concatenate([knots, mids, np.linspace(lo, hi, 41)]))
    grid = np.asarray(grid, dtype=float)
    g_vals = np.array([green_function(sol, float(x), 0.0) for x in grid])
    half_u = 0.5 * np.asarray(excess_potential(profile, grid), dtype=float)
    err = float(np.max(np.abs(g_vals - half_u)))

    jump: float | None = None
    if profile.base.atom_mass(0.0) == 0.0:
        jump = sol.h * (sol.u_minus.slope_left(0.0) - sol.u_plus.slope_right(0.0))
    return IdentityReport(grid, g_vals, half_u, err, jump)
