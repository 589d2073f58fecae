"""Tangent vector field on the S0^5 chart, its first integrals and equilibria, and flow integration.

Points are 6-vectors ``(x1, ..., x6)`` in the chart of :mod:`real_schmidt.states`.
Integral curves of the field consist of states related by ``Ry (x) Ry (x) Ry`` gates,
and the accumulated rotation angles are integrated alongside the state.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import StepSizeUnderflow
from .states import ToleranceConfig


def vector_field(x):
    x1, x2, x3, x4, x5, x6 = x
    d14 = x1 * x1 - x4 * x4
    return np.array([
        x2 * d14,
        -x1**3 + (x3 * x3 + x4 * x4 + x5 * x5) * x1 + 2 * x3 * x4 * x5,
        (x3 * x4 + x1 * x5) * x6 - x2 * (x1 * x3 + x4 * x5),
        d14 * x6,
        (x1 * x3 + x4 * x5) * x6 - x2 * (x3 * x4 + x1 * x5),
        2 * x4**3 + (x2 * x2 + x6 * x6 - 1) * x4 - 2 * x1 * x3 * x5,
    ])


def angle_rates(x):
    """Rates ``(L0, L1, L2)`` of the per-qubit Ry angles along the flow."""
    x1, _, x3, x4, x5, _ = x
    return np.array([
        -2 * (x1 * x3 + x4 * x5),
        2 * (x4 * x4 - x1 * x1),
        -2 * (x3 * x4 + x1 * x5),
    ])


@dataclass(frozen=True)
class InvariantVector:
    I0: float
    I2: float
    I3: float
    I4: float

    def as_array(self):
        return np.array([self.I0, self.I2, self.I3, self.I4])


# I2, I3, I4 are the purities of qubits 0, 1, 2 (fixed by regression test)
PURITY_QUBIT = {"I2": 0, "I3": 1, "I4": 2}


def invariants(x):
    x1, x2, x3, x4, x5, x6 = x
    I2 = (2 * x3**4 + 2 * (x2**2 + 2 * x4**2 + 2 * x6**2 - 1) * x3**2 + 4 * x2 * x5 * x6 * x3
          + 2 * x4**4 + 2 * x6**4 + 2 * x5**2 * x6**2 - 2 * x6**2 + x4**2 * (4 * x6**2 - 2) + 1)
    I3 = (x1**4 + 2 * (x2**2 + x4**2) * x1**2 + 4 * x2 * x4 * x6 * x1 + x2**4 + x3**4 + x4**4
          + x5**4 + x6**4 + 2 * x3**2 * x5**2 + 2 * x3**2 * x6**2 + 2 * x4**2 * x6**2
          + 2 * x5**2 * x6**2 + 2 * x2**2 * (x3**2 + x5**2 + x6**2))
    I4 = (2 * x4**4 + (4 * x5**2 + 4 * x6**2 - 2) * x4**2 + 2 * x5**4 + 2 * x6**4
          + 2 * x3**2 * x6**2 - 2 * x6**2 + 4 * x2 * x3 * x5 * x6 + 2 * x5**2 * (x2**2 + 2 * x6**2 - 1) + 1)
    I0 = (x2 * x4 - x1 * x6) ** 2 + 4 * x1 * x3 * x4 * x5
    return InvariantVector(float(I0), float(I2), float(I3), float(I4))


def invariant_gradients(x):
    """Closed-form gradients, rows ordered (I0, I2, I3, I4)."""
    x1, x2, x3, x4, x5, x6 = x
    g0 = [
        2 * (x1 * x6**2 - x2 * x4 * x6 + 2 * x3 * x4 * x5),
        -2 * x4 * (x1 * x6 - x2 * x4),
        4 * x1 * x4 * x5,
        -2 * (x1 * x2 * x6 - 2 * x1 * x3 * x5 - x2**2 * x4),
        4 * x1 * x3 * x4,
        2 * x1 * (x1 * x6 - x2 * x4),
    ]
    g2 = [
        0.0,
        4 * x3 * (x2 * x3 + x5 * x6),
        4 * (x2**2 * x3 + x2 * x5 * x6 + 2 * x3**3 + 2 * x3 * x4**2 + 2 * x3 * x6**2 - x3),
        4 * x4 * (2 * x3**2 + 2 * x4**2 + 2 * x6**2 - 1),
        4 * x6 * (x2 * x3 + x5 * x6),
        4 * (x2 * x3 * x5 + 2 * x3**2 * x6 + 2 * x4**2 * x6 + x5**2 * x6 + 2 * x6**3 - x6),
    ]
    s = x2**2 + x3**2 + x5**2 + x6**2
    g3 = [
        4 * (x1**3 + x1 * x2**2 + x1 * x4**2 + x2 * x4 * x6),
        4 * (x1**2 * x2 + x1 * x4 * x6 + x2**3 + x2 * x3**2 + x2 * x5**2 + x2 * x6**2),
        4 * x3 * s,
        4 * (x1**2 * x4 + x1 * x2 * x6 + x4**3 + x4 * x6**2),
        4 * x5 * s,
        4 * (x1 * x2 * x4 + x2**2 * x6 + x3**2 * x6 + x4**2 * x6 + x5**2 * x6 + x6**3),
    ]
    g4 = [
        0.0,
        4 * x5 * (x2 * x5 + x3 * x6),
        4 * x6 * (x2 * x5 + x3 * x6),
        4 * x4 * (2 * x4**2 + 2 * x5**2 + 2 * x6**2 - 1),
        4 * (x2**2 * x5 + x2 * x3 * x6 + 2 * x4**2 * x5 + 2 * x5**3 + 2 * x5 * x6**2 - x5),
        4 * (x2 * x3 * x5 + x3**2 * x6 + 2 * x4**2 * x6 + 2 * x5**2 * x6 + 2 * x6**3 - x6),
    ]
    return np.array([g0, g2, g3, g4], dtype=float)


# -- equilibria ---------------------------------------------------------------

EQUILIBRIUM_TAGS = ("S1", "S2", "S3", "P", "NotEquilibrium")


@dataclass(frozen=True)
class EquilibriumClass:
    tag: str
    distance: float


def class_residuals(x):
    """Max residual of each equilibrium set's defining equations, in priority order."""
    x1, x2, x3, x4, x5, x6 = x
    return {
        "S3": max(abs(x1), abs(x4)),
        "S1": max(abs(x1 - x4), abs(x3 + x5)),
        "S2": max(abs(x1 + x4), abs(x3 - x5)),
        "P": max(
            abs(-2 * x1**3 + x1 + 2 * x3 * x4 * x5),
            abs(2 * x4**3 - x4 - 2 * x1 * x3 * x5),
            abs(x2),
            abs(x6),
        ),
    }


def classify_equilibrium(x, tol=1e-8):
    res = class_residuals(x)
    if np.linalg.norm(vector_field(x)) < tol:
        for tag, r in res.items():
            if r < tol:
                return EquilibriumClass(tag, float(r))
    return EquilibriumClass("NotEquilibrium", float(min(res.values())))


def snap_to_class(x, tag):
    """Nearest-ish point of the named equilibrium set, renormalized."""
    y = np.array(x, dtype=float)
    if tag == "S3":
        y[0] = y[3] = 0.0
    elif tag == "S1":
        y[0] = y[3] = 0.5 * (y[0] + y[3])
        y[2] = 0.5 * (y[2] - y[4])
        y[4] = -y[2]
    elif tag == "S2":
        y[0] = 0.5 * (y[0] - y[3])
        y[3] = -y[0]
        y[2] = y[4] = 0.5 * (y[2] + y[4])
    elif tag == "P":
        y[1] = y[5] = 0.0
    else:
        raise ValueError(f"cannot snap to {tag!r}")
    return y / np.linalg.norm(y)


# -- integration --------------------------------------------------------------

class FlowOutcome(str, enum.Enum):
    X2_ZERO = "X2ZeroEvent"
    STAGNATION = "Stagnation"
    MAX_TIME = "MaxTimeReached"


@dataclass
class FlowTrace:
    times: np.ndarray
    states: np.ndarray
    angles: np.ndarray  # columns theta0, theta1, theta2
    outcome: FlowOutcome
    t_end: float
    invariant_drift: float
    direction: int = 1

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def final_angles(self):
        return self.angles[-1]


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _rhs(y, direction):
    x = y[:6]
    return direction * np.concatenate([vector_field(x), angle_rates(x)])


def _dp_step(y, h, direction):
    k = np.empty((7, y.size))
    k[0] = _rhs(y, direction)
    for i in range(1, 7):
        k[i] = _rhs(y + h * np.dot(_A[i], k[:i]), direction)
    y_new = y + h * np.dot(_B5, k)
    err = h * np.dot(_E, k)
    return y_new, err


def _renormalized(y):
    y = y.copy()
    y[:6] /= np.linalg.norm(y[:6])
    return y


class FlowIntegrator:
    """Adaptive integrator of the augmented (state, angles) system that can be advanced in chunks."""

    def __init__(self, x0, direction=1, config=None):
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        self.config = config or ToleranceConfig()
        self.direction = direction
        self.t = 0.0
        self.y = np.concatenate([np.asarray(x0, dtype=float), np.zeros(3)])
        self.h = 1e-2
        self.outcome = None
        self.t_end = None
        self.event_y = None
        if np.linalg.norm(vector_field(self.y[:6])) < self.config.stagnation_tol:
            self._finish(FlowOutcome.STAGNATION, self.y)

    @property
    def x(self):
        return self.y[:6]

    @property
    def thetas(self):
        return self.y[6:]

    @property
    def done(self):
        return self.outcome is not None

    def _finish(self, outcome, y):
        self.outcome = outcome
        self.t_end = self.t
        self.y = y

    def _error_norm(self, y, y_new, err):
        scale = self.config.ode_abs_tol + self.config.ode_rel_tol * np.maximum(abs(y), abs(y_new))
        return float(np.sqrt(np.mean((err / scale) ** 2)))

    def _refine_event(self, y_left, h_right):
        """Bisect the step length until |x2| drops below zero_tol."""
        s_left = math.copysign(1.0, y_left[1])
        lo, hi = 0.0, h_right
        best = None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            y_mid, _ = _dp_step(y_left, mid, self.direction)
            y_mid = _renormalized(y_mid)
            best = (mid, y_mid)
            if abs(y_mid[1]) < self.config.zero_tol or hi - lo <= 4 * np.finfo(float).eps * max(1.0, self.t):
                break
            if math.copysign(1.0, y_mid[1]) == s_left:
                lo = mid
            else:
                hi = mid
        return best

    def step(self, t_limit, stop_on_event=True):
        """Take one accepted step not past ``t_limit``; returns True if an accepted step was taken."""
        cfg = self.config
        h = min(self.h, t_limit - self.t)
        if h <= 0:
            return False
        while True:
            y_new, err = _dp_step(self.y, h, self.direction)
            e = self._error_norm(self.y, y_new, err)
            if e <= 1.0:
                break
            h *= max(0.2, 0.9 * e ** -0.2)
            if h < 1e-14 * max(1.0, abs(self.t)):
                raise StepSizeUnderflow(f"step size underflow at t={self.t:.6g}")
        factor = 5.0 if e == 0 else min(5.0, max(0.2, 0.9 * e ** -0.2))
        clipped = h == t_limit - self.t
        if not clipped:
            self.h = h * factor
        else:
            self.h = max(self.h, h * factor)
        y_new = _renormalized(y_new)
        y_old = self.y
        if stop_on_event and y_old[1] != 0.0 and y_new[1] != 0.0 and (y_old[1] > 0) != (y_new[1] > 0):
            tau, y_ev = self._refine_event(y_old, h)
            self.t += tau
            self._finish(FlowOutcome.X2_ZERO, y_ev)
            return True
        self.t += h
        self.y = y_new
        if stop_on_event and abs(y_new[1]) < cfg.zero_tol:
            self._finish(FlowOutcome.X2_ZERO, y_new)
        elif np.linalg.norm(vector_field(y_new[:6])) < cfg.stagnation_tol:
            self._finish(FlowOutcome.STAGNATION, y_new)
        return True

    def advance(self, t_target, stop_on_event=True):
        t_target = min(t_target, self.config.max_flow_time)
        while not self.done and self.t < t_target:
            self.step(t_target, stop_on_event)
        if not self.done and self.t >= self.config.max_flow_time:
            self._finish(FlowOutcome.MAX_TIME, self.y)
        return self.outcome


def integrate_flow(x0, direction=1, config=None, t_max=None, stop_on_event=True, sample_times=None):
    """Integrate ``x' = direction * X(x)`` from ``x0`` and record a trace.

    The trace holds every accepted step, or only ``sample_times`` (plus the
    terminal point) when given. Integration stops at the first x2 sign change
    (unless ``stop_on_event`` is false), when the field speed falls below
    ``stagnation_tol``, or at ``t_max`` (default ``config.max_flow_time``).
    """
    cfg = config or ToleranceConfig()
    horizon = cfg.max_flow_time if t_max is None else min(t_max, cfg.max_flow_time)
    integ = FlowIntegrator(x0, direction, cfg)
    times, ys = [0.0], [integ.y.copy()]
    if stop_on_event and not integ.done and abs(integ.y[1]) < cfg.zero_tol:
        integ._finish(FlowOutcome.X2_ZERO, integ.y)
    if sample_times is None:
        while not integ.done and integ.t < horizon:
            integ.step(horizon, stop_on_event)
            times.append(integ.t)
            ys.append(integ.y.copy())
    else:
        for ts in sorted(t for t in sample_times if 0 < t <= horizon):
            if integ.done:
                break
            while not integ.done and integ.t < ts:
                integ.step(ts, stop_on_event)
            times.append(integ.t)
            ys.append(integ.y.copy())
            if integ.done:
                break
    if not integ.done:
        integ.t_end = integ.t
        integ.outcome = FlowOutcome.MAX_TIME
    ys = np.array(ys)
    inv0 = invariants(ys[0, :6]).as_array()
    drift = max(float(np.max(abs(invariants(y[:6]).as_array() - inv0))) for y in ys)
    return FlowTrace(
        times=np.array(times),
        states=ys[:, :6],
        angles=ys[:, 6:],
        outcome=integ.outcome,
        t_end=float(integ.t_end),
        invariant_drift=drift,
        direction=direction,
    )
