"""Interval-uncertain cross-holdings.

Time-varying holdings c_ij(t) in [c_lower_ij, c_upper_ij] turn the healthy
dynamics into the difference inclusion x(t+1) = C(t) x(t) + r. Because the
state stays nonnegative inside the healthy region and the matrices are
nonnegative, trajectories are squeezed between the two constant-matrix
extremes, and in the limit between the extremal fixed points

    x_lower = (I - C_lower)^-1 r,    x_upper = (I - C_upper)^-1 r.

The robust invariant region is the maximal invariant set of the lower
system; the upper system's set is the last-hope region, outside of which
even the most favorable holdings cannot keep every organization healthy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .invariance import Polyhedron, healthy_invariant_region
from .numerics import solve_linear


class NoPositiveEquilibriumError(ValueError):
    """Lower-extreme system admits no equilibrium in the healthy region."""


@dataclass(frozen=True)
class IntervalNetwork:
    """Entrywise interval [c_lower, c_upper] for C, plus the fixed drift r.

    Zero-width intervals are allowed (diagonals are normally pinned to 0).
    Both extremes must have column sums < 1.
    """

    c_lower: np.ndarray
    c_upper: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        cl = np.asarray(self.c_lower, dtype=float)
        cu = np.asarray(self.c_upper, dtype=float)
        r = np.asarray(self.r, dtype=float)
        object.__setattr__(self, "c_lower", cl)
        object.__setattr__(self, "c_upper", cu)
        object.__setattr__(self, "r", r)
        if cl.shape != cu.shape or cl.ndim != 2 or cl.shape[0] != cl.shape[1]:
            raise ValueError("interval bounds must be square matrices of equal shape")
        if r.shape != (cl.shape[0],):
            raise ValueError("r has wrong shape")
        if np.any(cl < 0):
            raise ValueError("c_lower has negative entries")
        if np.any(cu < cl):
            raise ValueError("c_upper must dominate c_lower entrywise")
        if np.any(cu.sum(axis=0) >= 1.0):
            raise ValueError("c_upper column sums must be < 1")

    @property
    def n(self) -> int:
        return self.c_lower.shape[0]

    @classmethod
    def from_nominal(cls, C, r, spread: float) -> "IntervalNetwork":
        """Symmetric relative spread around a nominal matrix.

        Zero entries (including the diagonal) stay pinned at zero.
        """
        C = np.asarray(C, dtype=float)
        return cls(c_lower=(1.0 - spread) * C, c_upper=(1.0 + spread) * C,
                   r=np.asarray(r, dtype=float))


def extremal_fixed_points(inet: IntervalNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Fixed points of the two constant-extreme systems, lower then upper."""
    n = inet.n
    x_lower = solve_linear(np.eye(n) - inet.c_lower, inet.r)
    x_upper = solve_linear(np.eye(n) - inet.c_upper, inet.r)
    if np.any(x_lower > x_upper + 1e-12):
        raise ValueError("extremal fixed points are not ordered; check r sign pattern")
    return x_lower, x_upper


def robust_invariant_set(inet: IntervalNetwork) -> Polyhedron:
    """Maximal healthy-invariant set under every admissible switching.

    Equals the maximal invariant set of the constant lower-extreme system.
    Requires that system to have a nonnegative fixed point.
    """
    n = inet.n
    x_lower = solve_linear(np.eye(n) - inet.c_lower, inet.r)
    if np.any(x_lower < 0):
        raise NoPositiveEquilibriumError(
            "lower-extreme fixed point has negative components: %s" % x_lower)
    return healthy_invariant_region(inet.c_lower, inet.r)


def last_hope_region(inet: IntervalNetwork) -> Polyhedron:
    """Maximal invariant set of the upper-extreme system.

    States outside it leave the healthy orthant under every admissible
    holding sequence.
    """
    n = inet.n
    x_upper = solve_linear(np.eye(n) - inet.c_upper, inet.r)
    if np.any(x_upper < 0):
        raise NoPositiveEquilibriumError(
            "upper-extreme fixed point has negative components: %s" % x_upper)
    return healthy_invariant_region(inet.c_upper, inet.r)


def last_hope_membership(inet: IntervalNetwork, x0) -> bool:
    """Whether x0 still lies in the last-hope region."""
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("membership test expects a nonnegative state")
    return last_hope_region(inet).contains(x0)


# -- holding-sequence samplers ----------------------------------------------
# A sampler maps the step index t to the matrix C(t) used at that step.

def constant_lower(inet: IntervalNetwork) -> Callable[[int], np.ndarray]:
    return lambda t: inet.c_lower


def constant_upper(inet: IntervalNetwork) -> Callable[[int], np.ndarray]:
    return lambda t: inet.c_upper


def uniform_sampler(inet: IntervalNetwork, seed: int = 0) -> Callable[[int], np.ndarray]:
    """Independent uniform draw per entry per step; zero-width entries stay put."""
    rng = np.random.default_rng(seed)
    lo, hi = inet.c_lower, inet.c_upper
    return lambda t: rng.uniform(lo, hi)


def sequence_sampler(mats: Sequence[np.ndarray]) -> Callable[[int], np.ndarray]:
    """Replay a user-supplied matrix sequence (cycled if too short)."""
    mats = [np.asarray(M, dtype=float) for M in mats]
    return lambda t: mats[t % len(mats)]


@dataclass
class SandwichResult:
    """Trajectories of the sampled system and the two extreme systems."""

    sampled: np.ndarray        # (T+1, n)
    lower: np.ndarray
    upper: np.ndarray
    liminf_estimate: np.ndarray
    limsup_estimate: np.ndarray

    @property
    def T(self) -> int:
        return self.sampled.shape[0] - 1


def sandwich_bounds(inet: IntervalNetwork, x0, T: int,
                    sampler: Callable[[int], np.ndarray] | None = None,
                    tail: int = 10) -> SandwichResult:
    """Simulate sampled and extreme trajectories from a common x0.

    x0 must lie in the robust invariant set, which keeps every admissible
    trajectory nonnegative and therefore ordered between the extremes.
    Limit estimates are taken over the last `tail` states.
    """
    x0 = np.asarray(x0, dtype=float)
    region = robust_invariant_set(inet)
    if not region.contains(x0):
        raise ValueError("x0 is outside the robust invariant set; bounds would not apply")
    if sampler is None:
        sampler = uniform_sampler(inet)
    n = inet.n
    traj = {key: np.empty((T + 1, n)) for key in ("sampled", "lower", "upper")}
    xs = xl = xu = x0
    traj["sampled"][0] = traj["lower"][0] = traj["upper"][0] = x0
    for t in range(T):
        xs = sampler(t) @ xs + inet.r
        xl = inet.c_lower @ xl + inet.r
        xu = inet.c_upper @ xu + inet.r
        traj["sampled"][t + 1] = xs
        traj["lower"][t + 1] = xl
        traj["upper"][t + 1] = xu
    win = traj["sampled"][-min(tail, T + 1):]
    return SandwichResult(sampled=traj["sampled"], lower=traj["lower"],
                          upper=traj["upper"],
                          liminf_estimate=win.min(axis=0),
                          limsup_estimate=win.max(axis=0))


@dataclass
class RobustReport:
    x_lower: np.ndarray
    x_upper: np.ndarray
    invariant: Polyhedron
    last_hope: Polyhedron


def robust_report(inet: IntervalNetwork) -> RobustReport:
    """Extremal fixed points plus the two nested invariant regions."""
    x_lower, x_upper = extremal_fixed_points(inet)
    return RobustReport(x_lower=x_lower, x_upper=x_upper,
                        invariant=robust_invariant_set(inet),
                        last_hope=last_hope_region(inet))
