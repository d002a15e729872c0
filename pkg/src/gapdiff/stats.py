"""Goodness-of-fit primitives shared by the verification paths.

The target side of every comparison is a Measure (atoms plus constant
density), whose CDF is available in closed form, or an arbitrary callable
CDF.  Nothing here integrates numerically: the verification layer must not
add error of its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import EmptySample, NotAtomic
from .measure import Measure

__all__ = ["EmpiricalLaw", "ks_distance", "tv_atomic", "wasserstein1"]


@dataclass(frozen=True)
class EmpiricalLaw:
    """Sorted sample with its empirical CDF."""

    samples: np.ndarray

    @staticmethod
    def from_samples(values: Iterable[float]) -> "EmpiricalLaw":
        arr = np.sort(np.asarray(tuple(values), dtype=float).ravel())
        if arr.size == 0:
            raise EmptySample("no samples")
        return EmpiricalLaw(arr)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.count

    def cdf_left(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="left") / self.count


def ks_distance(emp: EmpiricalLaw, target: Measure | Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup distance between the empirical CDF and a target CDF.

    Mixed targets are handled exactly: the comparison is taken at every
    sample point and every target discontinuity, from both sides.
    """
    if emp.count < 1:
        raise EmptySample("no samples")
    if isinstance(target, Measure):
        points = np.unique(np.concatenate([
            emp.samples,
            target.atom_x,
            target.seg_l,
            target.seg_r,
        ]))
        t_right = np.asarray(target.cdf(points), dtype=float)
        atom_jump = np.zeros_like(points)
        if len(target.atoms):
            pos = np.searchsorted(target.atom_x, points)
            hit = (pos < len(target.atom_x)) & (
                target.atom_x[np.minimum(pos, len(target.atom_x) - 1)] == points)
            atom_jump[hit] = target.atom_p[pos[hit]]
        t_left = t_right - atom_jump
    else:
        points = emp.samples
        t_right = np.asarray(target(points), dtype=float)
        t_left = t_right  # continuous target
    e_right = emp.cdf(points)
    e_left = emp.cdf_left(points)
    return float(max(np.max(np.abs(e_right - t_right)), np.max(np.abs(e_left - t_left))))


def tv_atomic(p: Measure, q: Measure) -> float:
    """Total-variation distance between purely atomic measures."""
    if not p.is_atomic() or not q.is_atomic():
        raise NotAtomic("total variation is computed for atomic measures only")
    masses: dict[float, float] = {}
    for a in p.atoms:
        masses[a.x] = masses.get(a.x, 0.0) + a.p
    for a in q.atoms:
        masses[a.x] = masses.get(a.x, 0.0) - a.p
    return 0.5 * sum(abs(v) for v in masses.values())


def wasserstein1(emp: EmpiricalLaw, target: Measure) -> float:
    """Exact integral of |empirical CDF - target CDF|.

    Both CDFs are piecewise linear between the merged breakpoints (the
    empirical one is piecewise constant), so each piece integrates in closed
    form, splitting at the sign change when the difference crosses zero.
    """
    if emp.count < 1:
        raise EmptySample("no samples")
    points = np.unique(np.concatenate([emp.samples, target.atom_x, target.seg_l, target.seg_r]))
    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        # difference is linear on the open piece; use inner one-sided limits
        d_lo = float(emp.cdf(np.array([lo]))[0] - target.cdf(lo))
        d_hi = float(emp.cdf_left(np.array([hi]))[0] - (target.cdf(hi) - target.atom_mass(hi)))
        width = hi - lo
        if d_lo == 0.0 and d_hi == 0.0:
            continue
        if d_lo * d_hi >= 0.0:
            total += 0.5 * (abs(d_lo) + abs(d_hi)) * width
        else:
            total += 0.5 * width * (d_lo * d_lo + d_hi * d_hi) / (abs(d_lo) + abs(d_hi))
    return total
