"""Network model and switched dynamics.

A network of n organizations holds cross-equity C, external assets D
priced at p, failure costs beta and failure thresholds underbar_v. Equity
evolves as

    V(t+1) = C V(t) + D p - B phi(V(t) - underbar_v),

where phi flags components strictly below threshold and B = diag(beta).
The shifted coordinates x = V - underbar_v turn this into

    x(t+1) = C x(t) + r - B phi(x(t)),     r = (C - I) underbar_v + D p,

which is the form every analysis module works in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import SingularMatrixError, lu_factor


@dataclass(frozen=True)
class FinancialNetwork:
    """Static network data.

    C : (n, n) cross-holding fractions, zero diagonal, column sums < 1
    D : (n, m) nonnegative holdings of external assets
    p : (m,) nonnegative asset prices, at least one positive
    beta : (n,) positive failure costs
    threshold : (n,) failure thresholds (equity below this means failed)
    """

    C: np.ndarray
    D: np.ndarray
    p: np.ndarray
    beta: np.ndarray
    threshold: np.ndarray

    def __post_init__(self):
        for name in ("C", "D", "p", "beta", "threshold"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def r(self) -> np.ndarray:
        """Constant drift of the shifted dynamics: (C - I) threshold + D p."""
        return (self.C - np.eye(self.n)) @ self.threshold + self.D @ self.p


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(net: FinancialNetwork) -> ValidationReport:
    """Check the standing assumptions on the network data.

    Violations are conditions the analysis relies on. Singularity of C is
    reported as a warning only: no computation here inverts C, but the
    model class nominally requires it.
    """
    rep = ValidationReport()
    bad = rep.violations.append
    C, D, p, beta, thr = net.C, net.D, net.p, net.beta, net.threshold

    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        bad(f"C must be square, got {C.shape}")
        return rep
    n = C.shape[0]
    if D.ndim != 2 or D.shape[0] != n:
        bad(f"D must have {n} rows, got {D.shape}")
        return rep
    m = D.shape[1]
    if p.shape != (m,):
        bad(f"p must have shape ({m},), got {p.shape}")
        return rep
    for name, v in (("beta", beta), ("threshold", thr)):
        if v.shape != (n,):
            bad(f"{name} must have shape ({n},), got {v.shape}")
            return rep
    for name, v in (("C", C), ("D", D), ("p", p), ("beta", beta), ("threshold", thr)):
        if not np.all(np.isfinite(v)):
            bad(f"{name} contains non-finite entries")

    if np.any(C < 0):
        bad("C has negative entries")
    if np.any(np.abs(np.diag(C)) > 0):
        bad("C has nonzero diagonal entries")
    colsums = C.sum(axis=0)
    if np.any(colsums >= 1.0):
        bad(f"C column sums must be < 1, max is {colsums.max():.6g}")
    if np.any(D < 0):
        bad("D has negative entries")
    if np.any(p < 0):
        bad("p has negative entries")
    if not np.any(p > 0):
        bad("p has no positive entry")
    if np.any(beta <= 0):
        bad("beta must be strictly positive")
    try:
        lu_factor(C)
    except (SingularMatrixError, ValueError):
        rep.warnings.append("C is singular or near-singular (not used directly, reported only)")
    return rep


def positivity_holds(net: FinancialNetwork) -> bool:
    """True iff D p - beta >= 0, which keeps V(t) >= 0 from V(0) >= 0."""
    return bool(np.all(net.D @ net.p - net.beta >= 0))


def indicator(x) -> np.ndarray:
    """Componentwise failure indicator: 1.0 where x_i < 0, else 0.0.

    The boundary x_i = 0 counts as healthy.
    """
    x = np.asarray(x, dtype=float)
    return (x < 0).astype(float)


@dataclass(frozen=True)
class OrthantIndex:
    """Orthant k of R^n, encoded by the binary expansion of k.

    The first component carries the most significant bit, so for n=2 the
    point (1, -1) lies in orthant k=1 with phi = (0, 1).
    """

    k: int
    n: int

    def __post_init__(self):
        if not 0 <= self.k < 2 ** self.n:
            raise ValueError(f"orthant index {self.k} out of range for n={self.n}")

    @property
    def phi(self) -> np.ndarray:
        bits = [(self.k >> (self.n - 1 - i)) & 1 for i in range(self.n)]
        return np.array(bits, dtype=float)

    @property
    def J(self) -> np.ndarray:
        """Sign matrix diag(1 - 2 phi); J x >= 0 characterizes the orthant."""
        return np.diag(1.0 - 2.0 * self.phi)


def orthant_of(x) -> int:
    """Index of the orthant containing x (boundaries count as healthy)."""
    bits = indicator(x).astype(int)
    k = 0
    for b in bits:
        k = (k << 1) | int(b)
    return k


@dataclass(frozen=True)
class ShiftedModel:
    """Dynamics in shifted coordinates: x(t+1) = C x(t) + r - B phi(x(t)).

    Built from a FinancialNetwork (r derived) or directly from parts for
    synthetic models. threshold is kept so reports can translate back to
    equity levels V = x + threshold.
    """

    C: np.ndarray
    r: np.ndarray
    beta: np.ndarray
    threshold: np.ndarray

    def __post_init__(self):
        for name in ("C", "r", "beta", "threshold"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @classmethod
    def from_network(cls, net: FinancialNetwork) -> "ShiftedModel":
        return cls(C=net.C, r=net.r, beta=net.beta, threshold=net.threshold)

    @classmethod
    def from_parts(cls, C, r, beta, threshold=None) -> "ShiftedModel":
        C = np.asarray(C, dtype=float)
        n = C.shape[0]
        thr = np.zeros(n) if threshold is None else threshold
        return cls(C=C, r=r, beta=beta, threshold=thr)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def step(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.C @ x + self.r - self.beta * indicator(x)

    def affine_piece(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(C, r - B phi_k): the affine map active on orthant k."""
        phi = OrthantIndex(k, self.n).phi
        return self.C, self.r - self.beta * phi


def step(model: ShiftedModel, x) -> np.ndarray:
    """One step of the shifted dynamics."""
    return model.step(x)


@dataclass
class Trajectory:
    """States of a simulation run, indexed t = 0..T."""

    states: np.ndarray          # (T+1, n)
    model: ShiftedModel

    @property
    def T(self) -> int:
        return self.states.shape[0] - 1

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, t):
        return self.states[t]

    def orthant_sequence(self) -> np.ndarray:
        return np.array([orthant_of(x) for x in self.states], dtype=int)


def simulate(model: ShiftedModel, x0, T: int) -> Trajectory:
    """Iterate the dynamics T steps from x0."""
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    x = np.asarray(x0, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"x0 must have shape ({model.n},), got {x.shape}")
    states = np.empty((T + 1, model.n))
    states[0] = x
    for t in range(T):
        x = model.step(x)
        states[t + 1] = x
    return Trajectory(states=states, model=model)
