"""Probability measures on the line and their potential functions.

A measure is a finite collection of atoms plus piecewise-constant density
segments, so every integral used downstream (mean, potential, call prices,
CDF) has a closed form.  The potential of a measure,

    u(x) = integral of |x - y| against the measure,

is convex and piecewise smooth; its excess over the degenerate potential
|x - x0| (x0 the mean) is the nonnegative function U that drives the
speed-measure construction.  For a constant density c on [l, r] the
antiderivative used throughout is

    integral_l^r |x - y| c dy = c * ((r-x)|r-x| - (l-x)|l-x|) / 2,

which is exact for every relative position of x and [l, r].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    EmptyMeasure,
    InvalidMeasure,
    NonFiniteMean,
    NonUnitMass,
    NoTangent,
    OutOfRange,
)

__all__ = [
    "Atom",
    "Segment",
    "Measure",
    "PotentialProfile",
    "PotentialTable",
    "validate_measure",
    "potential_profile",
    "potential",
    "excess_potential",
    "slope_plus",
    "slope_minus",
    "truncate_measure",
    "vhat_ratio",
    "potential_table",
    "discretize_density",
    "measure_from_dict",
    "measure_to_dict",
    "uniform_measure",
    "atomic_measure",
]


@dataclass(frozen=True)
class Atom:
    x: float
    p: float


@dataclass(frozen=True)
class Segment:
    left: float
    right: float
    density: float

    @property
    def mass(self) -> float:
        return self.density * (self.right - self.left)


@dataclass(frozen=True)
class Measure:
    """Finite-mean probability measure: atoms plus constant-density segments."""

    atoms: tuple[Atom, ...] = ()
    segments: tuple[Segment, ...] = ()
    name: str | None = None

    # -- cached numeric views -------------------------------------------------

    @cached_property
    def atom_x(self) -> np.ndarray:
        return np.array([a.x for a in self.atoms], dtype=float)

    @cached_property
    def atom_p(self) -> np.ndarray:
        return np.array([a.p for a in self.atoms], dtype=float)

    @cached_property
    def seg_l(self) -> np.ndarray:
        return np.array([s.left for s in self.segments], dtype=float)

    @cached_property
    def seg_r(self) -> np.ndarray:
        return np.array([s.right for s in self.segments], dtype=float)

    @cached_property
    def seg_c(self) -> np.ndarray:
        return np.array([s.density for s in self.segments], dtype=float)

    # -- basic functionals ----------------------------------------------------

    def total_mass(self) -> float:
        return float(self.atom_p.sum() + (self.seg_c * (self.seg_r - self.seg_l)).sum())

    def mean(self) -> float:
        atom_part = float((self.atom_p * self.atom_x).sum())
        seg_part = float((self.seg_c * (self.seg_r**2 - self.seg_l**2) / 2.0).sum())
        return atom_part + seg_part

    def support_bounds(self) -> tuple[float, float]:
        lows = [a.x for a in self.atoms] + [s.left for s in self.segments]
        highs = [a.x for a in self.atoms] + [s.right for s in self.segments]
        return min(lows), max(highs)

    def is_atomic(self) -> bool:
        return not self.segments

    def atom_mass(self, x: float, eps: float = 0.0) -> float:
        """Mass of the atom at x (0.0 if none); eps widens the position match."""
        for a in self.atoms:
            if abs(a.x - x) <= eps:
                return a.p
        return 0.0

    def cdf(self, x) -> np.ndarray | float:
        """Right-continuous CDF, exact for the atom + segment representation."""
        xs = np.asarray(x, dtype=float)
        out = np.zeros(xs.shape)
        if len(self.atoms):
            out += (self.atom_p[:, None] * (self.atom_x[:, None] <= xs.ravel())).sum(0).reshape(xs.shape)
        if len(self.segments):
            l, r, c = self.seg_l[:, None], self.seg_r[:, None], self.seg_c[:, None]
            covered = np.clip(xs.ravel() - l, 0.0, r - l)
            out += (c * covered).sum(0).reshape(xs.shape)
        return float(out) if np.isscalar(x) else out

    def mass_of_interval(self, a: float, b: float, closed_left: bool = False,
                         closed_right: bool = True) -> float:
        """Mass of the interval from a to b with the given endpoint conventions."""
        lo, hi = (a, b) if a <= b else (b, a)
        total = 0.0
        for at in self.atoms:
            inside = lo < at.x < hi
            if closed_left and at.x == lo:
                inside = True
            if closed_right and at.x == hi:
                inside = True
            if inside:
                total += at.p
        for s in self.segments:
            total += s.density * max(0.0, min(hi, s.right) - max(lo, s.left))
        return total


# ---------------------------------------------------------------------------
# validation and construction
# ---------------------------------------------------------------------------

def validate_measure(raw: Measure, tol: Tolerances = DEFAULT_TOLERANCES) -> Measure:
    """Normalize a measure: sort, merge duplicate atoms, check invariants.

    Raises EmptyMeasure, NonFiniteMean (non-finite coordinate anywhere),
    NonUnitMass (|mass - 1| beyond tol.unit_mass) or InvalidMeasure
    (overlapping segments, nonpositive weights).  The returned measure is
    renormalized so its total mass is 1 to machine precision.
    """
    values = [a.x for a in raw.atoms] + [a.p for a in raw.atoms]
    for s in raw.segments:
        values += [s.left, s.right, s.density]
    if not all(math.isfinite(v) for v in values):
        raise NonFiniteMean("measure contains a non-finite position, mass or density")

    atoms = sorted((a for a in raw.atoms if a.p != 0.0), key=lambda a: a.x)
    for a in atoms:
        if a.p < 0.0:
            raise InvalidMeasure(f"negative atom mass at x={a.x}")
    merged: list[Atom] = []
    for a in atoms:
        if merged and a.x == merged[-1].x:
            merged[-1] = Atom(a.x, merged[-1].p + a.p)
        else:
            merged.append(a)

    segments = sorted(
        (s for s in raw.segments if s.density != 0.0 and s.right > s.left),
        key=lambda s: s.left,
    )
    for s in segments:
        if s.density < 0.0:
            raise InvalidMeasure(f"negative density on [{s.left}, {s.right}]")
        if s.right <= s.left:
            raise InvalidMeasure(f"segment with left >= right: [{s.left}, {s.right}]")
    for prev, nxt in zip(segments, segments[1:]):
        if nxt.left < prev.right:
            raise InvalidMeasure(
                f"overlapping segments [{prev.left}, {prev.right}] and [{nxt.left}, {nxt.right}]"
            )

    if not merged and not segments:
        raise EmptyMeasure("measure has no atoms and no segments")

    candidate = Measure(tuple(merged), tuple(segments), raw.name)
    mass = candidate.total_mass()
    if abs(mass - 1.0) > tol.unit_mass:
        raise NonUnitMass(f"total mass {mass!r} differs from 1 beyond {tol.unit_mass}")
    if mass != 1.0:
        scale = 1.0 / mass
        candidate = Measure(
            tuple(Atom(a.x, a.p * scale) for a in merged),
            tuple(Segment(s.left, s.right, s.density * scale) for s in segments),
            raw.name,
        )
    assert abs(candidate.total_mass() - 1.0) <= tol.mass_invariant
    return candidate


def atomic_measure(pairs: Iterable[tuple[float, float]], name: str | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> Measure:
    return validate_measure(Measure(tuple(Atom(x, p) for x, p in pairs), (), name), tol)


def uniform_measure(left: float = -1.0, right: float = 1.0, name: str | None = None) -> Measure:
    return validate_measure(
        Measure((), (Segment(left, right, 1.0 / (right - left)),), name or f"uniform[{left},{right}]")
    )


def discretize_density(density: Callable[[float], float], left: float, right: float,
                       cells: int, name: str | None = None) -> Measure:
    """Midpoint-rule discretization of a smooth density into constant segments.

    The result is renormalized to unit mass, so the tail mass lost by
    restricting to [left, right] is spread proportionally over the cells.
    """
    if cells < 1 or not right > left:
        raise OutOfRange("need cells >= 1 and right > left")
    edges = np.linspace(left, right, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = np.array([max(0.0, float(density(m))) for m in mids])
    segs = tuple(
        Segment(float(edges[i]), float(edges[i + 1]), float(vals[i]))
        for i in range(cells)
        if vals[i] > 0.0
    )
    # renormalization may need a wider gate than the default validator allows
    total = sum(s.mass for s in segs)
    if total <= 0.0:
        raise EmptyMeasure("density is zero on the whole interval")
    segs = tuple(Segment(s.left, s.right, s.density / total) for s in segs)
    return validate_measure(Measure((), segs, name))


def measure_from_dict(data: dict, name: str | None = None,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> Measure:
    """Build a validated measure from the JSON schema
    {"atoms": [{"x": ..., "p": ...}], "segments": [{"l": ..., "r": ..., "density": ...}]}.
    """
    atoms = tuple(Atom(float(a["x"]), float(a["p"])) for a in data.get("atoms", []))
    segments = tuple(
        Segment(float(s["l"]), float(s["r"]), float(s["density"]))
        for s in data.get("segments", [])
    )
    return validate_measure(Measure(atoms, segments, name or data.get("name")), tol)


def measure_to_dict(mu: Measure) -> dict:
    out: dict = {
        "atoms": [{"x": a.x, "p": a.p} for a in mu.atoms],
        "segments": [{"l": s.left, "r": s.right, "density": s.density} for s in mu.segments],
    }
    if mu.name:
        out["name"] = mu.name
    return out


# ---------------------------------------------------------------------------
# potential profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialProfile:
    """A validated measure with its mean, support bounds and kink positions."""

    base: Measure
    mean: float
    lower: float
    upper: float
    breakpoints: tuple[float, ...]


def potential_profile(mu: Measure, tol: Tolerances = DEFAULT_TOLERANCES) -> PotentialProfile:
    mu = validate_measure(mu, tol)
    lower, upper = mu.support_bounds()
    kinks = sorted({a.x for a in mu.atoms} | {s.left for s in mu.segments} | {s.right for s in mu.segments})
    return PotentialProfile(mu, mu.mean(), lower, upper, tuple(kinks))


def potential(profile: PotentialProfile, x) -> np.ndarray | float:
    """u(x): exact closed-form potential of the measure (scalar or array x)."""
    mu = profile.base
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.zeros_like(xs)
    if len(mu.atoms):
        u += (mu.atom_p[:, None] * np.abs(xs[None, :] - mu.atom_x[:, None])).sum(0)
    if len(mu.segments):
        dl = mu.seg_l[:, None] - xs[None, :]
        dr = mu.seg_r[:, None] - xs[None, :]
        u += (mu.seg_c[:, None] * (dr * np.abs(dr) - dl * np.abs(dl)) / 2.0).sum(0)
    return float(u[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else u


def excess_potential(profile: PotentialProfile, x) -> np.ndarray | float:
    """U(x) = u(x) - |x - x0|, nonnegative, vanishing at the support bounds."""
    xs = np.asarray(x, dtype=float)
    val = potential(profile, x) - np.abs(xs - profile.mean)
    return val


def _slope(profile: PotentialProfile, x: float, side: int) -> float:
    """One-sided derivative of u at x; side=+1 right, side=-1 left."""
    mu = profile.base
    s = 0.0
    for a in mu.atoms:
        if x > a.x or (x == a.x and side > 0):
            s += a.p
        else:
            s -= a.p
    for seg in mu.segments:
        s += seg.density * (abs(x - seg.left) - abs(x - seg.right))
    return s


def slope_plus(profile: PotentialProfile, x: float) -> float:
    return _slope(profile, x, +1)


def slope_minus(profile: PotentialProfile, x: float) -> float:
    return _slope(profile, x, -1)


# ---------------------------------------------------------------------------
# mean-preserving truncation
# ---------------------------------------------------------------------------

def _reflect(mu: Measure, centre: float) -> Measure:
    atoms = tuple(Atom(2.0 * centre - a.x, a.p) for a in reversed(mu.atoms))
    segments = tuple(
        Segment(2.0 * centre - s.right, 2.0 * centre - s.left, s.density)
        for s in reversed(mu.segments)
    )
    return Measure(atoms, segments, mu.name)


def _right_tangent(profile: PotentialProfile, M: float, tol: Tolerances) -> float:
    """Touch point q of the line through (M, M - x0) tangent to u from below.

    G(q) = u(q) + u'(q+) (M - q) - (M - x0) is nondecreasing in q (u convex),
    negative left of the touch point and positive right of it; atoms of the
    measure put upward jumps in G, so the crossing may happen at an atom.
    """
    x0 = profile.mean

    def g(q: float) -> float:
        return potential(profile, q) + slope_plus(profile, q) * (M - q) - (M - x0)

    lo, hi = x0, M
    if g(lo) >= 0.0:
        raise NoTangent(f"no tangent bracket on [{lo}, {hi}]; increase M")
    if g(hi) <= 0.0:
        raise NoTangent("tangent condition not positive at M; support may not exceed M")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol.root_position * max(1.0, abs(M)):
            break
    q = hi
    snap = tol.atom_snap * max(1.0, abs(M))
    for a in profile.base.atoms:
        if abs(a.x - q) <= snap:
            return a.x
    return q


def truncate_measure(profile: PotentialProfile, M: float,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> Measure:
    """Mean-preserving truncation of the measure to [-M, M].

    Each side whose support exceeds the wall is replaced by a partial atom at
    the tangency point q and an endpoint atom at the wall, chosen so that the
    truncated potential equals the original potential on [q-, q+] and lies
    below it elsewhere.  A side already inside the wall is left untouched; if
    neither side exceeds, the measure is returned unchanged.
    """
    mu, x0 = profile.base, profile.mean
    if M <= abs(potential(profile, x0)):
        raise OutOfRange(f"need M > |u(x0)| = {abs(potential(profile, x0))}")
    lower, upper = profile.lower, profile.upper
    if upper <= M and lower >= -M:
        return mu

    def right_pieces(prof: PotentialProfile, wall: float):
        """(q, atom mass at q, atom mass at wall) for the right-side truncation."""
        q = _right_tangent(prof, wall, tol)
        uq = potential(prof, q)
        slope_line = (wall - prof.mean - uq) / (wall - q)
        mass_wall = (1.0 - slope_line) / 2.0
        mass_q = (slope_line - slope_minus(prof, q)) / 2.0
        return q, mass_q, mass_wall

    if upper > M:
        q_plus, mass_qp, mass_wall_p = right_pieces(profile, M)
    else:
        q_plus, mass_qp, mass_wall_p = upper, mu.atom_mass(upper), 0.0

    if lower < -M:
        reflected = potential_profile(_reflect(mu, x0))
        # reflection around x0 maps the left wall -M to 2*x0 + M
        q_refl, mass_qr, mass_wall_r = right_pieces(reflected, 2.0 * x0 + M)
        q_minus = 2.0 * x0 - q_refl
        mass_qm, mass_wall_m = mass_qr, mass_wall_r
        wall_minus: float | None = -M
    else:
        q_minus, mass_qm, mass_wall_m = lower, mu.atom_mass(lower), 0.0
        wall_minus = None

    atoms: list[Atom] = []
    if wall_minus is not None and mass_wall_m > tol.mass_invariant:
        atoms.append(Atom(-M, mass_wall_m))
    if mass_qm > tol.mass_invariant:
        atoms.append(Atom(q_minus, mass_qm))
    for a in mu.atoms:
        if q_minus < a.x < q_plus:
            atoms.append(a)
    if upper > M and mass_qp > tol.mass_invariant:
        atoms.append(Atom(q_plus, mass_qp))
    if upper > M and mass_wall_p > tol.mass_invariant:
        atoms.append(Atom(M, mass_wall_p))

    segments = []
    for s in mu.segments:
        l, r = max(s.left, q_minus), min(s.right, q_plus)
        if r > l:
            segments.append(Segment(l, r, s.density))

    name = f"{mu.name}|trunc{M}" if mu.name else None
    return validate_measure(Measure(tuple(atoms), tuple(segments), name), tol)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def vhat_ratio(profile: PotentialProfile, N: float, a: float) -> float:
    """(N - u(a)) / (N - |a|) for a centred measure supported inside (-N, N).

    Bounded by 1: the potential dominates |a| for centred measures.
    """
    if abs(a) >= N:
        raise OutOfRange(f"need |a| < N, got a={a}, N={N}")
    if abs(profile.mean) > 1e-12:
        raise OutOfRange("ratio is defined for measures centred at 0")
    if profile.lower <= -N or profile.upper >= N:
        raise OutOfRange("support must lie strictly inside (-N, N)")
    return (N - potential(profile, a)) / (N - abs(a))


# ---------------------------------------------------------------------------
# piecewise-quadratic table (fast exact evaluation for the path engines)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialTable:
    """Piecewise representation of u, U and the density between breakpoints.

    On piece j (breaks[j] <= x < breaks[j+1], d = x - breaks[j]):
        u(x) = u0[j] + u1[j] * d + dens[j] * d**2
    The mean is a breakpoint, so U(x) = u(x) - |x - mean| is quadratic on
    every piece as well.
    """

    breaks: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    dens: np.ndarray
    mean: float

    def u(self, x) -> np.ndarray | float:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        j = np.clip(np.searchsorted(self.breaks, xs, side="right") - 1, 0, len(self.breaks) - 2)
        d = xs - self.breaks[j]
        val = self.u0[j] + self.u1[j] * d + self.dens[j] * d * d
        return float(val[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else val

    def U(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        return self.u(x) - np.abs(xs - self.mean)

    def density(self, x: float) -> float:
        j = int(np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.breaks) - 2))
        return float(self.dens[j])


def potential_table(profile: PotentialProfile) -> PotentialTable:
    """Exact piecewise-quadratic table of u between consecutive breakpoints."""
    pts = sorted(set(profile.breakpoints) | {profile.mean})
    breaks = np.array(pts, dtype=float)
    u0 = np.array([potential(profile, b) for b in breaks])
    u1 = np.array([slope_plus(profile, b) for b in breaks])
    dens = np.zeros(len(breaks))
    for s in profile.base.segments:
        inside = (breaks[:-1] >= s.left - 1e-15) & (breaks[:-1] < s.right)
        dens[:-1][inside] = s.density
    return PotentialTable(breaks, u0, u1, dens, profile.mean)
