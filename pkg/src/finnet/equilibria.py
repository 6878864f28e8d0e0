"""Equilibrium enumeration for the switched dynamics.

On orthant k the dynamics are affine, so the only equilibrium candidate is

    x_k = (I - C)^-1 (r - B phi_k).

The candidate is an actual equilibrium iff it lies in the orthant that
generated it (consistency). Since C is Schur by the column-sum condition,
every consistent candidate is locally asymptotically stable; the error
dynamics inside the orthant are y(t+1) = C y(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import OrthantIndex, ShiftedModel, indicator
from .numerics import SOLVE_TOL, lu_factor, lu_solve

ENUMERATION_LIMIT = 24      # 2**n candidates; refuse past this
INTERIOR_TOL = 1e-9         # entries closer to zero than this are boundary


class DimensionTooLargeError(ValueError):
    """Raised when 2**n enumeration would be astronomically large."""


@dataclass(frozen=True)
class EquilibriumRecord:
    """Candidate equilibrium of one orthant.

    consistent: candidate lies in its generating orthant (true equilibrium)
    interior:   no component within INTERIOR_TOL of zero; boundary cases
                are flagged rather than classified either way
    """

    k: int
    x: np.ndarray
    v: np.ndarray              # equity levels, x + threshold
    consistent: bool
    interior: bool

    @property
    def phi(self) -> np.ndarray:
        n = self.x.shape[0]
        return OrthantIndex(self.k, n).phi


def candidate_equilibrium(model: ShiftedModel, k: int) -> EquilibriumRecord:
    """Solve the affine fixed-point equation of orthant k and classify it."""
    n = model.n
    phi = OrthantIndex(k, n).phi
    LU, perm = lu_factor(np.eye(n) - model.C)
    x = lu_solve(LU, perm, model.r - model.beta * phi)
    consistent = bool(np.array_equal(indicator(x), phi))
    interior = bool(np.min(np.abs(x)) > INTERIOR_TOL)
    return EquilibriumRecord(k=k, x=x, v=x + model.threshold,
                             consistent=consistent, interior=interior)


def enumerate_equilibria(model: ShiftedModel, consistent_only: bool = True) -> list[EquilibriumRecord]:
    """All 2**n orthant candidates, filtered to consistent ones by default.

    The factorization of (I - C) is shared across orthants, so this is one
    LU plus 2**n triangular solves.
    """
    n = model.n
    if n > ENUMERATION_LIMIT:
        raise DimensionTooLargeError(f"n={n} exceeds enumeration guard {ENUMERATION_LIMIT}")
    LU, perm = lu_factor(np.eye(n) - model.C)
    out = []
    for k in range(2 ** n):
        phi = OrthantIndex(k, n).phi
        x = lu_solve(LU, perm, model.r - model.beta * phi)
        consistent = bool(np.array_equal(indicator(x), phi))
        if consistent_only and not consistent:
            continue
        interior = bool(np.min(np.abs(x)) > INTERIOR_TOL)
        out.append(EquilibriumRecord(k=k, x=x, v=x + model.threshold,
                                     consistent=consistent, interior=interior))
    return out


@dataclass(frozen=True)
class ExistenceReport:
    """Sign tests on (I-C)^-1 r and (I-C)^-1 (r - beta).

    positive_exists:      healthy equilibrium x >= 0 exists (w_plus >= 0)
    positive_unique:      it is the only equilibrium (w_minus >= 0)
    negative_exists:      all-failed equilibrium x < 0 exists (w_minus < 0)
    negative_unique:      it is the only equilibrium (w_plus < 0)
    """

    positive_exists: bool
    positive_unique: bool
    negative_exists: bool
    negative_unique: bool
    w_plus: np.ndarray          # (I-C)^-1 r, healthy-orthant candidate
    w_minus: np.ndarray         # (I-C)^-1 (r - beta), failed-orthant candidate


def existence_conditions(model: ShiftedModel) -> ExistenceReport:
    """Evaluate the four existence/uniqueness sign conditions."""
    n = model.n
    LU, perm = lu_factor(np.eye(n) - model.C)
    w_plus = lu_solve(LU, perm, model.r)
    w_minus = lu_solve(LU, perm, model.r - model.beta)
    rep = ExistenceReport(
        positive_exists=bool(np.all(w_plus >= 0)),
        positive_unique=bool(np.all(w_minus >= 0)),
        negative_exists=bool(np.all(w_minus < 0)),
        negative_unique=bool(np.all(w_plus < 0)),
        w_plus=w_plus,
        w_minus=w_minus,
    )
    # implications guaranteed by nonnegativity of (I-C)^-1
    assert not rep.positive_unique or rep.positive_exists
    assert not rep.negative_unique or rep.negative_exists
    return rep
