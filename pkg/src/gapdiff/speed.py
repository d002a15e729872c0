"""Speed measures turning a target law into a generalised diffusion.

The construction divides the measure by its excess potential U: interior
atoms of mass p at position a become atoms of the speed measure with weight
p / U(a); density f on a segment becomes the pointwise density f / U(x).
Atoms sitting exactly on a support bound get infinite weight, which makes
the bound an absorbing trap; outside the support interval the speed measure
is identically infinite.  Infinite weights are represented by flags, never
by float('inf') entering arithmetic.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from functools import cached_property
from typing import IO

import numpy as np
from scipy import integrate

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateMeasure, InvalidRate, OutOfInterval
from .measure import (
    Measure,
    PotentialProfile,
    excess_potential,
    potential_profile,
)

__all__ = [
    "SpeedAtom",
    "SpeedSegment",
    "SpeedMeasure",
    "BoundaryClass",
    "build_speed_measure",
    "classify_boundary",
    "sigma_m",
    "scale_for_rate",
    "write_speed_csv",
]


@dataclass(frozen=True)
class SpeedAtom:
    x: float
    weight: float


@dataclass(frozen=True)
class SpeedSegment:
    """Density piece of the speed measure, kept as the pair (numerator, U).

    The pointwise density is numerator / U(x); storing the numerator (the
    measure's segment density, possibly rate-scaled) keeps the blow-up at the
    support bounds out of the stored data.
    """

    left: float
    right: float
    numerator: float


@dataclass(frozen=True)
class SpeedMeasure:
    atoms: tuple[SpeedAtom, ...]
    segments: tuple[SpeedSegment, ...]
    interval: tuple[float, float]
    absorbing_left: bool
    absorbing_right: bool
    profile: PotentialProfile

    @cached_property
    def atom_x(self) -> np.ndarray:
        return np.array([a.x for a in self.atoms], dtype=float)

    @cached_property
    def atom_w(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=float)

    def density(self, x: float) -> float:
        """Pointwise density of the speed measure strictly inside the interval."""
        lo, hi = self.interval
        if not lo < x < hi:
            raise OutOfInterval(f"{x} outside ({lo}, {hi})")
        for s in self.segments:
            if s.left <= x <= s.right:
                return s.numerator / float(excess_potential(self.profile, x))
        return 0.0

    def mass_of(self, a: float, b: float) -> float:
        """Finite part of the speed measure on (a, b] inside the interval."""
        total = float(self.atom_w[(self.atom_x > a) & (self.atom_x <= b)].sum())
        for s in self.segments:
            lo, hi = max(a, s.left), min(b, s.right)
            if hi > lo:
                val, _ = integrate.quad(
                    lambda y: s.numerator / float(excess_potential(self.profile, y)),
                    lo, hi, limit=200,
                )
                total += val
        return total


class BoundaryClass(enum.Enum):
    NATURAL = "natural"
    ABSORBING_REGULAR = "absorbing-regular"
    ABSORBING_ISOLATED = "absorbing-isolated"


def build_speed_measure(profile: PotentialProfile,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> SpeedMeasure:
    """Speed measure of the diffusion embedding the profile's measure.

    Raises DegenerateMeasure when the measure is a single point mass at its
    mean (the embedded process never moves; there is nothing to build).
    """
    mu = profile.base
    lo, hi = profile.lower, profile.upper
    if lo == hi:
        raise DegenerateMeasure("measure is a point mass at its mean")

    atoms = []
    for a in mu.atoms:
        if a.x == lo or a.x == hi:
            continue  # infinite weight, carried by the absorbing flags
        U = float(excess_potential(profile, a.x))
        atoms.append(SpeedAtom(a.x, a.p / U))
    segments = tuple(SpeedSegment(s.left, s.right, s.density) for s in mu.segments)
    return SpeedMeasure(
        atoms=tuple(atoms),
        segments=segments,
        interval=(lo, hi),
        absorbing_left=mu.atom_mass(lo) > 0.0,
        absorbing_right=mu.atom_mass(hi) > 0.0,
        profile=profile,
    )


def classify_boundary(sm: SpeedMeasure, profile: PotentialProfile,
                      side: str) -> BoundaryClass:
    """Boundary behaviour at the chosen support bound ('left' or 'right').

    No atom at the bound means the speed measure piles up infinite mass under
    it and the bound cannot be reached in finite time (natural).  An atom at
    the bound is a reachable trap: regular if the measure charges every
    neighbourhood below the bound (density running into it), isolated if the
    atom is separated from the rest of the support by a gap.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    mu = profile.base
    bound = profile.upper if side == "right" else profile.lower
    if mu.atom_mass(bound) == 0.0:
        return BoundaryClass.NATURAL
    for s in mu.segments:
        if side == "right" and s.right == bound:
            return BoundaryClass.ABSORBING_REGULAR
        if side == "left" and s.left == bound:
            return BoundaryClass.ABSORBING_REGULAR
    return BoundaryClass.ABSORBING_ISOLATED


def sigma_m(sm: SpeedMeasure, profile: PotentialProfile, side: str) -> float:
    """Numerical value of the boundary integral deciding reachability.

    For the right side this is the integral over (x0, upper) of (upper - y)
    against the speed measure; finite exactly when the bound is attainable.
    Only meaningful for the absorbing classes (it diverges for natural
    bounds); quadrature there will fail loudly rather than return a value.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    x0 = profile.mean
    bound = profile.upper if side == "right" else profile.lower
    total = 0.0
    for a in sm.atoms:
        if (side == "right" and x0 < a.x) or (side == "left" and a.x < x0):
            total += abs(bound - a.x) * a.weight
    for s in sm.segments:
        if side == "right":
            lo, hi = max(s.left, x0), min(s.right, bound)
        else:
            lo, hi = max(s.left, bound), min(s.right, x0)
        if hi > lo:
            val, _ = integrate.quad(
                lambda y: abs(bound - y) * s.numerator / float(excess_potential(profile, y)),
                lo, hi, limit=400,
            )
            total += val
    return total


def scale_for_rate(sm: SpeedMeasure, q: float) -> SpeedMeasure:
    """Speed measure for an exponential clock of rate q: finite parts times q.

    Absorbing flags and the interval (the infinite parts) are unchanged.
    """
    if not q > 0.0 or not np.isfinite(q):
        raise InvalidRate(f"rate must be positive and finite, got {q}")
    return replace(
        sm,
        atoms=tuple(SpeedAtom(a.x, a.weight * q) for a in sm.atoms),
        segments=tuple(SpeedSegment(s.left, s.right, s.numerator * q) for s in sm.segments),
    )


def write_speed_csv(sm: SpeedMeasure, fp: IO[str]) -> None:
    """Rows: kind(atom|segment), x_or_left, right, weight_or_density, absorbing.

    Endpoint traps are emitted as atoms with weight 'inf'.  Segment rows carry
    the numerator of the pointwise density (density = numerator / U(x)).
    """
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(["kind", "x_or_left", "right", "weight_or_density", "absorbing"])
    lo, hi = sm.interval
    if sm.absorbing_left:
        w.writerow(["atom", repr(lo), "", "inf", "true"])
    for a in sm.atoms:
        w.writerow(["atom", repr(a.x), "", repr(a.weight), "false"])
    for s in sm.segments:
        w.writerow(["segment", repr(s.left), repr(s.right), repr(s.numerator), "false"])
    if sm.absorbing_right:
        w.writerow(["atom", repr(hi), "", "inf", "true"])
