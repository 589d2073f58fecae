"""Normal form ``l1|000> + l2|011> + l3|101> + l4|110> + l5|111>`` of a real 3-qubit state.

Pipeline: eliminate |001> and |100> in closed form, then eliminate |010> either
with an equilibrium-set solver or by following the tangent flow until x2
changes sign. The returned gate maps the input onto the pattern.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateRecovery, NormalFormFailed, SolveFailed
from .flowfield import (
    FlowIntegrator,
    FlowOutcome,
    class_residuals,
    classify_equilibrium,
    snap_to_class,
)
from .reduce5 import reduce_to_s05
from .states import (
    LocalOrthogonalGate,
    ToleranceConfig,
    apply_local_gate,
    compose_gates,
    embed_s05,
    ry_generator,
)

TARGET_SLOTS = (0, 3, 5, 6, 7)
OFF_TARGET_SLOTS = (1, 2, 4)

PATHS = (
    "AlreadyNormal",
    "EquilibriumS1",
    "EquilibriumS2",
    "EquilibriumS3",
    "EquilibriumP",
    "FlowEvent",
    "FlowStagnationThenEquilibrium",
)

BISECTION_TOL = 1e-14
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class NormalFormResult:
    lambdas: np.ndarray
    gate: LocalOrthogonalGate
    residual: float
    path: str
    flow_time: float = 0.0

    def state(self):
        u = np.zeros(8)
        u[list(TARGET_SLOTS)] = self.lambdas
        return u


def off_target_norm(u):
    return float(np.linalg.norm(np.asarray(u)[list(OFF_TARGET_SLOTS)]))


# -- S1 / S2 root function ------------------------------------------------------

def f_eval(w, theta2):
    """Root function for the S1 solver; at a root, x2 of the transformed state vanishes."""
    w1, w2, w3, _, _, w6 = w
    s, c = math.sin(theta2), math.cos(theta2)
    return (w1 * w1 * s * c
            + 0.25 * (2 * w3 * s + (w2 + w6) * c + w2 - w6) * ((w2 + w6) * s - 2 * w3 * c))


def f_eval_s2(w, theta2):
    """S2 counterpart of :func:`f_eval` for the gate ``Ry(t2) (x) Ry(t1) (x) Ry(t2)``."""
    w1, w2, w3, _, _, w6 = w
    s, c = math.sin(theta2), math.cos(theta2)
    return (w1 * w1 * s * c
            + 0.25 * ((w2 - w6) * s + 2 * w3 * c) * (-2 * w3 * s + (w2 - w6) * c + w2 + w6))


def s1_z1(w, theta2, theta1):
    """|001> amplitude after ``Ry(t2) (x) Ry(t1) (x) Ry(-t2)`` on an S1 point (|100> is its negative)."""
    w1, w2, w3, _, _, w6 = w
    return (0.5 * (w2 * math.sin(theta2) + w6 * math.sin(theta2) - 2 * w3 * math.cos(theta2)) * math.sin(theta1 / 2)
            - w1 * math.sin(theta2) * math.cos(theta1 / 2))


def s1_x2(w, theta2, theta1):
    """|010> amplitude after ``Ry(t2) (x) Ry(t1) (x) Ry(-t2)`` on an S1 point."""
    w1, w2, w3, _, _, w6 = w
    return (w1 * math.sin(theta1 / 2) * math.cos(theta2)
            + 0.5 * math.cos(theta1 / 2) * (2 * w3 * math.sin(theta2) + w2 * math.cos(theta2)
                                             + w6 * math.cos(theta2) + w2 - w6))


QUARTER_POINTS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)


def bracket_quarter_root(f):
    """Locate a root of ``f`` on [0, 3pi/2] from its values at the four quarter turns.

    Relies on f(0) + f(pi/2) + f(pi) + f(3pi/2) = 0, which forces either a zero
    sample or a sign change between consecutive samples.
    """
    values = [f(t) for t in QUARTER_POINTS]
    for t, v in zip(QUARTER_POINTS, values):
        if abs(v) < BISECTION_TOL:
            return t
    for (ta, va), (tb, vb) in zip(zip(QUARTER_POINTS, values), zip(QUARTER_POINTS[1:], values[1:])):
        if (va > 0) != (vb > 0):
            return _bisect(f, ta, tb, va)
    raise SolveFailed(f"no sign change among quarter samples {values}")


def _bisect(f, lo, hi, f_lo):
    mid = 0.5 * (lo + hi)
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < BISECTION_TOL or mid in (lo, hi):
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid


def _post_check(w, gate, zero_tol, label):
    image = apply_local_gate(gate, embed_s05(w))
    bad = off_target_norm(image)
    if bad >= zero_tol:
        raise SolveFailed(f"{label} solver left off-pattern norm {bad:.3e}")
    return gate


def _recover_theta1(sin_arg, cos_arg, fallback):
    if math.hypot(sin_arg, cos_arg) < 1e-300:
        warnings.warn("theta1 recovery degenerate at the chosen root", DegenerateRecovery, stacklevel=3)
        return fallback()
    return 2.0 * math.atan2(sin_arg, cos_arg)


def solve_equilibrium_s1(w, zero_tol=1e-10):
    """Gate ``Ry(t2) (x) Ry(t1) (x) Ry(-t2)`` clearing x2 of a point with w1 = w4, w3 = -w5."""
    w1, w2, w3, _, _, w6 = w
    theta2 = bracket_quarter_root(lambda t: f_eval(w, t))
    s, c = math.sin(theta2), math.cos(theta2)
    sin_arg = w1 * s
    cos_arg = 0.5 * (w2 * s + w6 * s - 2 * w3 * c)

    def zero_x2_directly():
        # z1 vanishes for every theta1 here, so pick theta1 to cancel x2
        return 2.0 * math.atan2(-0.5 * (2 * w3 * s + w2 * c + w6 * c + w2 - w6), w1 * c)

    theta1 = _recover_theta1(sin_arg, cos_arg, zero_x2_directly)
    gate = LocalOrthogonalGate.ry(theta2, theta1, -theta2)
    return _post_check(w, gate, zero_tol, "S1")


def solve_equilibrium_s2(w, zero_tol=1e-10):
    """Gate ``Ry(t2) (x) Ry(t1) (x) Ry(t2)`` clearing x2 of a point with w1 = -w4, w3 = w5."""
    w1, w2, w3, _, _, w6 = w
    theta2 = bracket_quarter_root(lambda t: f_eval_s2(w, t))
    s, c = math.sin(theta2), math.cos(theta2)
    sin_arg = w1 * s
    cos_arg = 0.5 * ((w2 - w6) * s + 2 * w3 * c)

    def zero_x2_directly():
        return 2.0 * math.atan2(-0.5 * (-2 * w3 * s + (w2 - w6) * c + w2 + w6), w1 * c)

    theta1 = _recover_theta1(sin_arg, cos_arg, zero_x2_directly)
    gate = LocalOrthogonalGate.ry(theta2, theta1, theta2)
    return _post_check(w, gate, zero_tol, "S2")


def solve_equilibrium_s3(w, zero_tol=1e-10):
    """Gate ``Ry(t2) (x) I (x) I`` clearing x2 of a point with w1 = w4 = 0."""
    w2, w5 = w[1], w[4]
    theta2 = 0.0 if w2 == 0.0 and w5 == 0.0 else 2.0 * math.atan2(w2, w5)
    gate = LocalOrthogonalGate.ry(theta2, 0.0, 0.0)
    return _post_check(w, gate, zero_tol, "S3")


EQUILIBRIUM_SOLVERS = {
    "S1": solve_equilibrium_s1,
    "S2": solve_equilibrium_s2,
    "S3": solve_equilibrium_s3,
    "P": lambda w, zero_tol=1e-10: LocalOrthogonalGate.identity(),
}


# -- polishing ----------------------------------------------------------------

def _generator_images(u):
    t = u.reshape(2, 2, 2)
    g = ry_generator()
    return [
        np.einsum("ck,ijk->ijc", g, t).reshape(8),
        np.einsum("bj,ijk->ibk", g, t).reshape(8),
        np.einsum("ai,ijk->ajk", g, t).reshape(8),
    ]


def polish_gate(s, gate, max_iter=30):
    """Gauss-Newton on three extra Ry angles to drive the off-pattern amplitudes to zero."""
    off = list(OFF_TARGET_SLOTS)
    best_gate = gate
    u = apply_local_gate(gate, s)
    best = off_target_norm(u)
    for _ in range(max_iter):
        if best < 1e-15:
            break
        jac = np.column_stack([v[off] for v in _generator_images(u)])
        delta = np.linalg.lstsq(jac, -u[off], rcond=None)[0]
        candidate = compose_gates(LocalOrthogonalGate(tuple(delta)), best_gate)
        u_new = apply_local_gate(candidate, s)
        r = off_target_norm(u_new)
        if not r < best:
            break
        best_gate, best, u = candidate, r, u_new
    return best_gate, best


def _lm_polish(s, gate):
    """Levenberg-Marquardt fallback for rank-deficient Jacobians (near the P curve)."""
    off = list(OFF_TARGET_SLOTS)
    base = apply_local_gate(gate, s)

    def residuals(delta):
        return apply_local_gate(LocalOrthogonalGate(tuple(delta)), base)[off]

    fit = least_squares(residuals, np.zeros(3), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    candidate = compose_gates(LocalOrthogonalGate(tuple(fit.x)), gate)
    return polish_gate(s, candidate)


# -- pipeline -----------------------------------------------------------------

def _flow_to_pattern(w, config):
    """Follow the flow both ways with doubling time budgets; returns (gate, path, time)."""
    integrators = [FlowIntegrator(w, 1, config), FlowIntegrator(w, -1, config)]
    budget = 1.0
    while True:
        for integ in integrators:
            if not integ.done:
                integ.advance(budget)
        finished = [i for i in integrators if i.outcome in (FlowOutcome.X2_ZERO, FlowOutcome.STAGNATION)]
        if finished:
            chosen = min(finished, key=lambda i: (i.t_end, -i.direction))
            th = chosen.thetas
            flow_gate = LocalOrthogonalGate.ry(th[2], th[1], th[0])
            if chosen.outcome is FlowOutcome.X2_ZERO:
                return flow_gate, "FlowEvent", chosen.t_end
            x_end = chosen.x
            tag = classify_equilibrium(x_end, 10 * config.class_tol).tag
            if tag == "NotEquilibrium":
                res = class_residuals(x_end)
                tag = min(res, key=res.get)
            x_snap = snap_to_class(x_end, tag)
            try:
                eq_gate = EQUILIBRIUM_SOLVERS[tag](x_snap, 1.0)
            except SolveFailed:
                eq_gate = LocalOrthogonalGate.identity()
            return compose_gates(eq_gate, flow_gate), "FlowStagnationThenEquilibrium", chosen.t_end
        if all(i.done for i in integrators) or budget >= config.max_flow_time:
            return None, "FlowEvent", max(i.t for i in integrators)
        budget *= 2.0


def normal_form(s, config=None, canonical_sign=False):
    """Reduce a normalized real 3-qubit state to the five-term normal form.

    Raises :class:`NormalFormFailed` if no gate reaching ``config.zero_tol`` is found.
    """
    cfg = config or ToleranceConfig()
    s = np.asarray(s, dtype=float)
    w, stage1_gate = reduce_to_s05(s, cfg.zero_tol)
    flow_time = 0.0
    if abs(w[1]) < cfg.zero_tol:
        path, gate = "AlreadyNormal", LocalOrthogonalGate.identity()
    else:
        cls = classify_equilibrium(w, cfg.class_tol)
        if cls.tag != "NotEquilibrium":
            path = "Equilibrium" + cls.tag
            try:
                gate = EQUILIBRIUM_SOLVERS[cls.tag](w, 1.0)
            except SolveFailed:
                gate = LocalOrthogonalGate.identity()
        else:
            gate, path, flow_time = _flow_to_pattern(w, cfg)
            if gate is None:
                raise NormalFormFailed(off_target_norm(embed_s05(w)), path)
    total = compose_gates(gate, stage1_gate)
    residual = off_target_norm(apply_local_gate(total, s))
    if path != "AlreadyNormal":
        total, residual = polish_gate(s, total)
        if residual >= cfg.zero_tol:
            lm_total, lm_residual = _lm_polish(s, total)
            if lm_residual < residual:
                total, residual = lm_total, lm_residual
    if residual >= cfg.zero_tol:
        raise NormalFormFailed(residual, path)
    image = apply_local_gate(total, s)
    lambdas = image[list(TARGET_SLOTS)]
    if canonical_sign and lambdas[0] < 0:
        # Ry(2pi) on qubit 2 is -I
        total = compose_gates(LocalOrthogonalGate.ry(2 * math.pi, 0.0, 0.0), total)
        image = apply_local_gate(total, s)
        lambdas = image[list(TARGET_SLOTS)]
    return NormalFormResult(lambdas=lambdas, gate=total, residual=residual, path=path, flow_time=flow_time)
