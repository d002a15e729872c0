"""Numerical tolerances, fixed in one overridable record."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Package-wide tolerance constants.

    unit_mass        rejection threshold for |total mass - 1| in validation
    mass_invariant   post-normalization bound on |total mass - 1|
    mean_match       bound for mean-preservation checks (truncation, chains)
    root_position    absolute position tolerance of bracketed root searches
    atom_snap        distance at which a root is identified with an atom position
    """

    unit_mass: float = 1e-9
    mass_invariant: float = 1e-12
    mean_match: float = 1e-9
    root_position: float = 1e-13
    atom_snap: float = 1e-10

    def override(self, **kwargs: float) -> "Tolerances":
        return replace(self, **kwargs)


DEFAULT_TOLERANCES = Tolerances()
