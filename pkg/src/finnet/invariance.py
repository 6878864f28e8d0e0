"""Invariant orthants and regions of attraction.

All regions live in shifted coordinates x = V - threshold and are stored
as raw stacked halfspaces {x : A x >= b}. Three facts drive the module:

* the healthy orthant is invariant iff r >= 0;
* the all-failed orthant is invariant iff r < beta strictly;
* inside orthant k the error dynamics are linear, so the set of states
  whose whole forward orbit stays in the orthant is the intersection of
  the rows J_k C^t x >= J_k (C^t - I) x_k over t = 0, 1, 2, ...

For the two monotone orthants (k = 0 and k = 2^n - 1) the intersection is
finitely determined: once C^tau maps the threshold gap past the
equilibrium, every later row is implied. The truncation index tau is the
smallest power at which that happens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibria import EquilibriumRecord, candidate_equilibrium
from .netmodel import OrthantIndex, ShiftedModel, orthant_of
from .numerics import LinearProgram, OPT_TOL, UnboundedError, lp_solve

TAU_CAP = 10000             # finite-determination search cap


class NotDeterminedError(RuntimeError):
    """Raised when the truncation index is not found within TAU_CAP."""


@dataclass(frozen=True)
class Polyhedron:
    """Halfspace intersection {x : A x >= b} with row provenance.

    row_power[i] records which matrix power generated row i (t = 0 rows
    are the orthant itself). certified marks regions whose rows beyond
    the stored horizon are provably redundant.
    """

    A: np.ndarray
    b: np.ndarray
    row_power: np.ndarray
    certified: bool = False
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "row_power", np.asarray(self.row_power, dtype=int))

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def margins(self, x) -> np.ndarray:
        """A x - b; nonnegative entries mean the row is satisfied."""
        return self.A @ np.asarray(x, dtype=float) - self.b

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(np.all(self.margins(x) >= -tol))

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "row_power": self.row_power.tolist(),
            "certified": self.certified,
            "note": self.note,
        }


def orthant0_invariant(model: ShiftedModel) -> bool:
    """Healthy orthant invariant iff the drift r is nonnegative."""
    return bool(np.all(model.r >= 0))


def last_orthant_invariant(model: ShiftedModel) -> bool:
    """All-failed orthant invariant iff r < beta strictly."""
    return bool(np.all(model.r < model.beta))


@dataclass(frozen=True)
class IntermediateVerdict:
    """Verdict on invariance of an intermediate orthant.

    status is 'not_invariant' or 'unknown'. When the positivity hypothesis
    on C fails the check falls back to sampling the orthant for a state
    that exits in one step; finding one still settles non-invariance, just
    with an empirical certificate.
    """

    k: int
    status: str
    reason: str
    witness: np.ndarray | None = None


def intermediate_not_invariant(model: ShiftedModel, k: int,
                               samples: int = 200, seed: int = 0,
                               scale: float = 10.0) -> IntermediateVerdict:
    """Decide non-invariance of intermediate orthant k.

    With all off-diagonal C entries strictly positive no intermediate
    orthant is invariant. Otherwise the answer is Unknown unless a
    sampled one-step escape witness is found.
    """
    n = model.n
    if k in (0, 2 ** n - 1):
        raise ValueError("intermediate orthant required, got k=%d" % k)
    offdiag = model.C[~np.eye(n, dtype=bool)]
    if np.all(offdiag > 0):
        return IntermediateVerdict(k=k, status="not_invariant", reason="theorem")
    signs = 1.0 - 2.0 * OrthantIndex(k, n).phi
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = signs * rng.uniform(0.0, scale, size=n)
        if orthant_of(model.step(x)) != k:
            return IntermediateVerdict(k=k, status="not_invariant",
                                       reason="escape-witness", witness=x)
    return IntermediateVerdict(k=k, status="unknown", reason="no-witness-found")


def region_of_attraction(model: ShiftedModel, eq: EquilibriumRecord,
                         tau: int, certified: bool = False) -> Polyhedron:
    """Stack rows J_k C^t x >= J_k (C^t - I) x_k for t = 0..tau.

    States satisfying every row stay in orthant k forever and converge to
    the equilibrium. For intermediate orthants a finite tau is only an
    outer truncation; certified stays False unless the caller proved the
    tail redundant.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    n = model.n
    J = OrthantIndex(eq.k, n).J
    rows_A, rows_b, powers = [], [], []
    P = np.eye(n)
    for t in range(tau + 1):
        rows_A.append(J @ P)
        rows_b.append(J @ ((P - np.eye(n)) @ eq.x))
        powers.extend([t] * n)
        P = P @ model.C
    return Polyhedron(A=np.vstack(rows_A), b=np.concatenate(rows_b),
                      row_power=np.array(powers), certified=certified,
                      note=f"orthant {eq.k} truncated at tau={tau}")


def finite_determination_index(model: ShiftedModel, k: int) -> int:
    """Smallest tau >= 1 with C^tau (-x_k) + x_k signed like orthant k.

    Only the healthy (k=0) and all-failed (k=2^n-1) orthants admit this
    finite test. tau = 1 recovers the two closed-form invariance tests.
    """
    n = model.n
    if k not in (0, 2 ** n - 1):
        raise ValueError("finite determination applies to k=0 or k=2^n-1 only")
    eq = candidate_equilibrium(model, k)
    if not eq.consistent:
        raise ValueError(f"orthant {k} has no consistent equilibrium")
    gap = -eq.x            # threshold minus equilibrium, shifted coordinates
    P = model.C.copy()
    for tau in range(1, TAU_CAP + 1):
        test = P @ gap + eq.x
        if k == 0 and np.all(test >= 0):
            return tau
        if k != 0 and np.all(test <= 0):
            return tau
        P = P @ model.C
    raise NotDeterminedError(f"no truncation index up to {TAU_CAP} for orthant {k}")


def maximal_invariant_region(model: ShiftedModel, k: int) -> Polyhedron:
    """Largest forward-invariant subset of orthant k (k = 0 or 2^n - 1)."""
    tau = finite_determination_index(model, k)
    eq = candidate_equilibrium(model, k)
    return region_of_attraction(model, eq, tau, certified=True)


def healthy_invariant_region(C, r) -> Polyhedron:
    """Maximal invariant set of x(t+1) = C x(t) + r inside x >= 0.

    Shared by the nominal model (k = 0, where the failure term is inactive)
    and the interval-uncertain system, which has no failure term at all.
    """
    C = np.asarray(C, dtype=float)
    model = ShiftedModel.from_parts(C, r, beta=np.ones(C.shape[0]))
    return maximal_invariant_region(model, 0)


# ---------------------------------------------------------------------------
# LP-backed redundancy checks, used for the fixed-point property of the
# truncation index and for comparing regions.
# ---------------------------------------------------------------------------

def row_redundant(poly: Polyhedron, a, rhs: float, tol: float = OPT_TOL) -> bool:
    """True if a.x >= rhs holds everywhere on poly."""
    a = np.asarray(a, dtype=float)
    try:
        sol = lp_solve(LinearProgram(c=a, A=poly.A, b=poly.b))
    except UnboundedError:
        return False
    return sol.objective >= rhs - tol


def prune_redundant(poly: Polyhedron, tol: float = OPT_TOL) -> Polyhedron:
    """Drop rows implied by the others. Quadratic in row count; fine here."""
    keep = list(range(poly.n_rows))
    changed = True
    while changed:
        changed = False
        for idx in list(keep):
            others = [i for i in keep if i != idx]
            if not others:
                continue
            sub = Polyhedron(A=poly.A[others], b=poly.b[others],
                             row_power=poly.row_power[others])
            if row_redundant(sub, poly.A[idx], float(poly.b[idx]), tol):
                keep.remove(idx)
                changed = True
    return Polyhedron(A=poly.A[keep], b=poly.b[keep],
                      row_power=poly.row_power[keep],
                      certified=poly.certified, note=poly.note + " (pruned)")


def polyhedra_equivalent(p: Polyhedron, q: Polyhedron, tol: float = OPT_TOL) -> bool:
    """Set equality via mutual row redundancy."""
    for src, dst in ((p, q), (q, p)):
        for i in range(dst.n_rows):
            if not row_redundant(src, dst.A[i], float(dst.b[i]), tol):
                return False
    return True


def stable_region(model: ShiftedModel, eq: EquilibriumRecord,
                  tau_cap: int = 64) -> tuple[Polyhedron, int]:
    """Grow the truncation horizon until one extra block adds nothing.

    Intended for intermediate orthants, where no closed-form truncation
    index exists. Returns the region and the horizon at which membership
    stabilized. Raises NotDeterminedError if tau_cap is hit first.
    """
    n = model.n
    J = OrthantIndex(eq.k, n).J
    poly = region_of_attraction(model, eq, 0)
    P = model.C.copy()
    for tau in range(1, tau_cap + 1):
        A_new = J @ P
        b_new = J @ ((P - np.eye(n)) @ eq.x)
        if all(row_redundant(poly, A_new[i], float(b_new[i])) for i in range(n)):
            return Polyhedron(A=poly.A, b=poly.b, row_power=poly.row_power,
                              certified=True,
                              note=f"orthant {eq.k} stabilized at tau={tau - 1}"), tau - 1
        poly = Polyhedron(A=np.vstack([poly.A, A_new]),
                          b=np.concatenate([poly.b, b_new]),
                          row_power=np.concatenate([poly.row_power, [tau] * n]),
                          note=poly.note)
        P = P @ model.C
    raise NotDeterminedError(f"membership did not stabilize within tau_cap={tau_cap}")


@dataclass
class InvarianceReport:
    """Bundle of the orthant-level invariance answers for one model."""

    orthant0: bool
    last_orthant: bool
    intermediate: dict[int, IntermediateVerdict] = field(default_factory=dict)
    region0: Polyhedron | None = None
    region_last: Polyhedron | None = None
    tau0: int | None = None
    tau_last: int | None = None


def invariance_report(model: ShiftedModel, intermediate_ks=None) -> InvarianceReport:
    """Run the standard battery: closed-form tests, regions, verdicts."""
    n = model.n
    rep = InvarianceReport(orthant0=orthant0_invariant(model),
                           last_orthant=last_orthant_invariant(model))
    eq0 = candidate_equilibrium(model, 0)
    if eq0.consistent:
        rep.tau0 = finite_determination_index(model, 0)
        rep.region0 = region_of_attraction(model, eq0, rep.tau0, certified=True)
    eq_last = candidate_equilibrium(model, 2 ** n - 1)
    if eq_last.consistent:
        rep.tau_last = finite_determination_index(model, 2 ** n - 1)
        rep.region_last = region_of_attraction(model, eq_last, rep.tau_last, certified=True)
    if intermediate_ks is None:
        intermediate_ks = range(1, 2 ** n - 1) if n <= 4 else []
    for k in intermediate_ks:
        rep.intermediate[k] = intermediate_not_invariant(model, k)
    return rep
