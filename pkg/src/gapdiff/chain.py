"""Birth-death chain realization of the diffusion for purely atomic measures.

An atomic speed measure turns the diffusion into a continuous-time nearest-
neighbour Markov chain on the support points.  Holding times are exponential
with mean 2 * beta_i * (a_{i+1}-a_i) * (a_i-a_{i-1}) / (a_{i+1}-a_{i-1}) and
jump probabilities are fixed by the martingale property.  The law of the
chain at an independent exponential time solves a tridiagonal linear system,
which is the machine-precision oracle for the whole construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import IO

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    InvalidRate,
    NotAtomic,
    OutOfRange,
    SingularSystem,
    StepCapExceeded,
    TooFewStates,
)
from .measure import Atom, Measure, validate_measure
from .speed import SpeedMeasure

__all__ = [
    "BirthDeathChain",
    "build_chain",
    "exact_law",
    "simulate_chain",
    "simulate_chain_batch",
    "simulate_chain_at_times",
    "write_chain_law_csv",
]

_DEFAULT_STEP_CAP = 1_000_000


@dataclass(frozen=True)
class BirthDeathChain:
    """Nearest-neighbour chain: sorted states, per-state holding data.

    holding_mean is 0.0 both for absorbing states (never used) and for
    instantaneous pass-through states (the start point when the measure puts
    no mass at its mean); up_prob is NaN only at absorbing states, where no
    jump ever happens.
    """

    states: np.ndarray
    holding_mean: np.ndarray
    up_prob: np.ndarray
    absorbing: np.ndarray

    def __post_init__(self) -> None:
        self.states.setflags(write=False)
        self.holding_mean.setflags(write=False)
        self.up_prob.setflags(write=False)
        self.absorbing.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.states)

    @cached_property
    def generator(self) -> np.ndarray:
        """Dense rate matrix; defined only when no interior state is instantaneous."""
        interior = ~self.absorbing
        if np.any(interior & (self.holding_mean == 0.0)):
            raise OutOfRange(
                "generator undefined: chain has an instantaneous state "
                "(use exact_law / simulate_chain, which handle it)"
            )
        n = self.n
        Q = np.zeros((n, n))
        for i in range(n):
            if self.absorbing[i]:
                continue
            rate = 1.0 / self.holding_mean[i]
            Q[i, i - 1] = rate * (1.0 - self.up_prob[i])
            Q[i, i + 1] = rate * self.up_prob[i]
            Q[i, i] = -rate
        return Q

    def index_of(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.states - x)))
        if abs(self.states[i] - x) > 1e-9 * max(1.0, float(np.abs(self.states).max())):
            raise OutOfRange(f"{x} is not a state of the chain")
        return i


def build_chain(sm: SpeedMeasure, mu: Measure) -> BirthDeathChain:
    """Chain over the support of an atomic measure, plus the mean if uncharged.

    The mean must be a state because the process starts there; when the
    measure puts no mass at it the state is instantaneous (zero holding time,
    martingale-balanced exit probabilities).
    """
    if not mu.is_atomic():
        raise NotAtomic("chain construction requires a purely atomic measure")
    x0 = sm.profile.mean
    positions = [a.x for a in mu.atoms]
    scale = max(1.0, max(abs(p) for p in positions))
    if not any(abs(p - x0) <= 1e-12 * scale for p in positions):
        positions.append(x0)
    states = np.array(sorted(positions))
    n = len(states)
    if n < 2:
        raise TooFewStates("chain needs at least two states")

    weight = {float(a.x): a.weight for a in sm.atoms}
    atom_positions = {float(a.x) for a in mu.atoms}
    holding = np.zeros(n)
    up = np.full(n, np.nan)
    absorbing = np.zeros(n, dtype=bool)
    absorbing[0] = absorbing[-1] = True
    for i in range(1, n - 1):
        gap_up = states[i + 1] - states[i]
        gap_dn = states[i] - states[i - 1]
        up[i] = gap_dn / (gap_up + gap_dn)
        x = float(states[i])
        if x in atom_positions:
            beta = weight[x]  # every interior atom of the measure has finite weight
        else:
            beta = 0.0  # the inserted mean: instantaneous pass-through state
        holding[i] = 2.0 * beta * gap_up * gap_dn / (gap_up + gap_dn)
    return BirthDeathChain(states, holding, up, absorbing)


def exact_law(chain: BirthDeathChain, start: float, rate: float = 1.0,
              tol: Tolerances = DEFAULT_TOLERANCES) -> Measure:
    """Exact law of the chain at an independent exponential time of given rate.

    First-step decomposition: with gamma_i = 1 / (1 + rate * theta_i), the law
    vector w_i from state i satisfies
        w_i = (1 - gamma_i) e_i + gamma_i [(1-p_i) w_{i-1} + p_i w_{i+1}]
    for holding states (gamma_i = 1 when theta_i = 0, which handles
    instantaneous states exactly), and w_i = e_i at absorbing states.
    """
    if not rate > 0.0 or not np.isfinite(rate):
        raise InvalidRate(f"rate must be positive and finite, got {rate}")
    n = chain.n
    M = np.eye(n)
    D = np.zeros((n, n))
    for i in range(n):
        if chain.absorbing[i]:
            D[i, i] = 1.0
            continue
        gamma = 1.0 / (1.0 + rate * chain.holding_mean[i])
        M[i, i - 1] = -gamma * (1.0 - chain.up_prob[i])
        M[i, i + 1] = -gamma * chain.up_prob[i]
        D[i, i] = 1.0 - gamma
    try:
        W = scipy.linalg.solve(M, D)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SingularSystem(str(exc)) from exc
    law = W[chain.index_of(start)]
    if law.min() < -1e-12:
        raise SingularSystem(f"negative mass {law.min()} in resolvent law")
    law = np.clip(law, 0.0, None)
    total = law.sum()
    if abs(total - 1.0) > 1e-12:
        raise SingularSystem(f"law mass {total} differs from 1 beyond 1e-12")
    atoms = tuple(Atom(float(x), float(p)) for x, p in zip(chain.states, law) if p > 0.0)
    return validate_measure(Measure(atoms, (), name="exact-law"), tol)


def simulate_chain(chain: BirthDeathChain, start: float, horizon: float, seed: int,
                   step_cap: int = _DEFAULT_STEP_CAP) -> float:
    """Single path: run holding/jump events until the clock at `horizon` rings
    or the path is absorbed; returns the position at the clock time.
    """
    rng = np.random.default_rng(seed)
    i = chain.index_of(start)
    remaining = float(horizon)
    for _ in range(step_cap):
        if chain.absorbing[i]:
            return float(chain.states[i])
        hold = rng.exponential(chain.holding_mean[i]) if chain.holding_mean[i] > 0.0 else 0.0
        if hold >= remaining:  # tie resolved in favour of the clock
            return float(chain.states[i])
        remaining -= hold
        i += 1 if rng.random() < chain.up_prob[i] else -1
    raise StepCapExceeded(f"path exceeded {step_cap} jumps")


def simulate_chain_batch(chain: BirthDeathChain, start: float, n_paths: int, seed: int,
                         rate: float = 1.0, step_cap: int = _DEFAULT_STEP_CAP) -> np.ndarray:
    """Vectorized batch of paths stopped at independent Exp(rate) times."""
    if not rate > 0.0 or not np.isfinite(rate):
        raise InvalidRate(f"rate must be positive and finite, got {rate}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    idx = np.full(n_paths, chain.index_of(start), dtype=np.int64)
    remaining = rng.exponential(1.0 / rate, size=n_paths)
    done = chain.absorbing[idx].copy()
    for _ in range(step_cap):
        if done.all():
            break
        active = ~done
        cur = idx[active]
        hold = rng.exponential(chain.holding_mean[cur])
        rang = rng.random(active.sum())
        stop_now = hold >= remaining[active]
        remaining[active] -= np.where(stop_now, 0.0, hold)
        move = np.where(rang < chain.up_prob[cur], 1, -1)
        idx[active] = np.where(stop_now, cur, cur + move)
        newly = idx[active]
        done_active = stop_now | chain.absorbing[newly]
        done[active] = done_active
    else:
        raise StepCapExceeded(f"batch exceeded {step_cap} rounds")
    return chain.states[idx]


def simulate_chain_at_times(chain: BirthDeathChain, start: float, times: np.ndarray,
                            rng: np.random.Generator,
                            step_cap: int = _DEFAULT_STEP_CAP) -> np.ndarray:
    """Single path observed at the given (sorted, nonnegative) times."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0.0) or (len(times) and times[0] < 0.0):
        raise OutOfRange("times must be sorted and nonnegative")
    out = np.empty(len(times))
    i = chain.index_of(start)
    elapsed = 0.0
    k = 0
    for _ in range(step_cap):
        if k >= len(times):
            return out
        if chain.absorbing[i]:
            out[k:] = chain.states[i]
            return out
        hold = rng.exponential(chain.holding_mean[i]) if chain.holding_mean[i] > 0.0 else 0.0
        while k < len(times) and elapsed + hold >= times[k]:
            out[k] = chain.states[i]
            k += 1
        elapsed += hold
        i += 1 if rng.random() < chain.up_prob[i] else -1
    raise StepCapExceeded(f"path exceeded {step_cap} jumps")


def write_chain_law_csv(states: np.ndarray, exact: np.ndarray, empirical: np.ndarray,
                        fp: IO[str]) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(["state", "exact_mass", "empirical_mass", "abs_error"])
    for s, e, m in zip(states, exact, empirical):
        w.writerow([repr(float(s)), repr(float(e)), repr(float(m)), repr(abs(float(e) - float(m)))])
