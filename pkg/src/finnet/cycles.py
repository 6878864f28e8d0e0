"""Periodic orbits of the switched dynamics.

A period-h orbit of the n-dimensional system is a fixed point of the
lifted nh-dimensional system whose state stacks h consecutive states; the
lifted matrices are block-circulant with C (resp. diag(beta)) on the
subdiagonal blocks and the top-right corner. The dynamics admit no
period-2 orbits, which verify_no_period2 probes empirically, and
trajectories that stay clear of the switching boundaries settle on an
equilibrium or a cycle, which classify_limit reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import ShiftedModel, Trajectory, indicator, simulate


class InsufficientLengthError(ValueError):
    """Trajectory too short for the requested cycle search."""


@dataclass(frozen=True)
class LiftedSystem:
    """Fixed-point form Z = C_lift Z + constant - B_lift phi(Z)."""

    h: int
    n: int
    C_lift: np.ndarray
    B_lift: np.ndarray
    constant: np.ndarray

    def residual(self, Z) -> np.ndarray:
        """Zero exactly on lifts of period-h orbits."""
        Z = np.asarray(Z, dtype=float)
        return Z - (self.C_lift @ Z + self.constant - self.B_lift @ indicator(Z))

    def stack_orbit(self, states) -> np.ndarray:
        """Stack h consecutive states into a lifted point."""
        states = np.asarray(states, dtype=float)
        if states.shape != (self.h, self.n):
            raise ValueError(f"expected ({self.h}, {self.n}) states, got {states.shape}")
        return states.reshape(-1)


def build_lifted(model: ShiftedModel, h: int) -> LiftedSystem:
    """Block-circulant lift for period-h analysis."""
    if h < 1:
        raise ValueError("period must be >= 1")
    n = model.n
    C_lift = np.zeros((n * h, n * h))
    B_lift = np.zeros((n * h, n * h))
    B = np.diag(model.beta)
    for i in range(h):
        j = (i - 1) % h            # predecessor block; row 0 wraps to the last
        C_lift[i * n:(i + 1) * n, j * n:(j + 1) * n] = model.C
        B_lift[i * n:(i + 1) * n, j * n:(j + 1) * n] = B
    return LiftedSystem(h=h, n=n, C_lift=C_lift, B_lift=B_lift,
                        constant=np.tile(model.r, h))


@dataclass(frozen=True)
class CycleHit:
    """Detected periodicity: smallest period and the window start index."""

    period: int
    phase: int

    @property
    def is_equilibrium(self) -> bool:
        return self.period == 1


def _orthant_codes(states: np.ndarray) -> np.ndarray:
    n = states.shape[1]
    weights = 2 ** np.arange(n - 1, -1, -1)
    return (states < 0) @ weights


def _detect(states: np.ndarray, tol: float, h_max: int) -> CycleHit | None:
    """Core search over a (T+1, n) state array."""
    T = states.shape[0] - 1
    codes = _orthant_codes(states)
    for h in range(1, h_max + 1):
        start = T - h_max - h + 1
        stop = T - h                   # inclusive; window of h_max start times
        if start < 0:
            return None
        win = slice(start, stop + 1)
        if np.any(codes[start + h:stop + h + 1] != codes[win]):
            continue                   # orthant pattern already rules h out
        diff = states[start + h:stop + h + 1] - states[win]
        if np.max(np.abs(diff)) <= tol:
            return CycleHit(period=h, phase=start)
    return None


def detect_cycle(traj: Trajectory, tol: float = 1e-9, h_max: int = 64,
                 transient: int = 8) -> CycleHit | None:
    """Smallest period h <= h_max sustained over the last h_max steps.

    Closure means ||x(t+h) - x(t)||_inf <= tol for every start t in the
    window. period=1 is an equilibrium. None means nothing closed, either
    an unsettled transient or a longer cycle.
    """
    states = traj.states
    if states.shape[0] < 2 * h_max + transient:
        raise InsufficientLengthError(
            f"need at least {2 * h_max + transient} states, got {states.shape[0]}")
    return _detect(states, tol, h_max)


@dataclass
class Period2Report:
    trials: int
    seed: int
    period_counts: dict[int, int]
    violations: list[np.ndarray]     # initial states that produced period 2

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_no_period2(model: ShiftedModel, trials: int = 100, seed: int = 0,
                      h_max: int = 8, tol: float = 1e-7,
                      scale: float | None = None) -> Period2Report:
    """Probe random initial states for genuine period-2 limit behavior.

    Initial states are sampled from a box sized by the asymptotic bound
    ||x||_1 <= (||r||_1 + ||beta||_1) / (1 - max column sum). Counts the
    detected period per trial; a hit at period 2 with two distinct states
    is recorded as a violation.
    """
    rng = np.random.default_rng(seed)
    n = model.n
    slack = 1.0 - float(model.C.sum(axis=0).max())
    if scale is None:
        scale = min(100.0, (np.abs(model.r).sum() + model.beta.sum()) / max(slack, 1e-2))
    # enough steps for the 1-norm contraction to push a transient of size
    # `scale` two orders below tol
    settle = np.log(tol / (100.0 * n * max(scale, 1.0))) / np.log(max(1.0 - slack, 0.1))
    T = 2 * h_max + min(max(int(settle) + 1, 64), 4000)
    X = rng.uniform(-scale, scale, size=(n, trials))
    history = np.empty((T + 1, n, trials))
    history[0] = X
    for t in range(T):
        X = model.C @ X + model.r[:, None] - model.beta[:, None] * (X < 0)
        history[t + 1] = X
    counts: dict[int, int] = {}
    violations = []
    for j in range(trials):
        hit = _detect(history[:, :, j], tol, h_max)
        key = hit.period if hit else 0
        counts[key] = counts.get(key, 0) + 1
        if hit and hit.period == 2:
            tail = history[-2:, :, j]
            if np.max(np.abs(tail[1] - tail[0])) > tol:
                violations.append(history[0, :, j].copy())
    return Period2Report(trials=trials, seed=seed, period_counts=counts,
                         violations=violations)


@dataclass
class LimitClassification:
    """Outcome of a long simulation: where did the trajectory settle.

    kind is one of 'equilibrium', 'cycle', 'critical', 'undetermined'.
    Critical marks trajectories that graze a switching boundary
    (|x_i(t)| < rho for some i, t); those are never classified further
    because the indicator value there is numerically unreliable.
    """

    kind: str
    rho: float
    period: int | None = None
    point: np.ndarray | None = None         # equilibrium location
    orbit: np.ndarray | None = None         # (h, n) one period of the cycle
    transient: int | None = None
    first_critical: tuple[int, int] | None = None   # (t, i)


def classify_limit(model: ShiftedModel, x0, T: int = 10000, rho: float = 1e-6,
                   tol: float = 1e-9, h_max: int = 64) -> LimitClassification:
    """Simulate T steps and classify the limit behavior.

    The criticality screen runs first: any state component within rho of
    zero makes the whole trajectory Critical. Undetermined means no period
    up to h_max closed within the horizon.
    """
    traj = simulate(model, x0, T)
    states = traj.states
    near = np.abs(states) < rho
    if near.any():
        t, i = np.argwhere(near)[0]
        return LimitClassification(kind="critical", rho=rho,
                                   first_critical=(int(t), int(i)))
    hit = detect_cycle(traj, tol=tol, h_max=h_max)
    if hit is None:
        return LimitClassification(kind="undetermined", rho=rho)
    h = hit.period
    # earliest start from which closure holds through the end
    diff = np.max(np.abs(states[h:] - states[:-h]), axis=1)
    bad = np.nonzero(diff > tol)[0]
    transient = int(bad[-1] + 1) if bad.size else 0
    if h == 1:
        return LimitClassification(kind="equilibrium", rho=rho, period=1,
                                   point=states[-1].copy(), transient=transient)
    return LimitClassification(kind="cycle", rho=rho, period=h,
                               orbit=states[-h:].copy(), transient=transient)
