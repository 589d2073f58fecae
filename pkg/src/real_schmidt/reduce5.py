"""Closed-form elimination of the |001> and |100> amplitudes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ReductionFailed
from .states import LocalOrthogonalGate, apply_local_gate, project_s05


@dataclass(frozen=True)
class Stage1Angles:
    theta0: float
    theta2: float
    a1: float
    a2: float
    b1: float
    b2: float


def _root_in_half_turn(sin_coeff, cos_coeff):
    # root of sin_coeff*sin(t) + cos_coeff*cos(t) = 0 with t in [0, pi); 0 when both vanish
    if sin_coeff == 0.0 and cos_coeff == 0.0:
        return 0.0
    t = math.atan2(-cos_coeff, sin_coeff) % math.pi
    return 0.0 if t >= math.pi else t


def stage1_angles(s):
    u0, u1, _, _, u4, u5, _, _ = (float(v) for v in s)
    a1 = -u0 * u0 + u1 * u1 - u4 * u4 + u5 * u5
    a2 = -2.0 * (u0 * u1 + u4 * u5)
    theta0 = _root_in_half_turn(a1, a2)
    c, sn = math.cos(theta0 / 2), math.sin(theta0 / 2)
    b1 = -u4 * sn - u5 * c
    b2 = u1 * c + u0 * sn
    theta2 = 2.0 * _root_in_half_turn(b1, b2)
    return Stage1Angles(theta0, theta2, a1, a2, b1, b2)


def reduce_to_s05(s, zero_tol=1e-10):
    """Rotate qubits 0 and 2 so the |001> and |100> amplitudes vanish.

    Returns the six chart coordinates and the gate ``Ry(theta2) (x) I (x) Ry(theta0)``.
    """
    angles = stage1_angles(s)
    gate = LocalOrthogonalGate.ry(angles.theta2, 0.0, angles.theta0)
    image = apply_local_gate(gate, s)
    if abs(image[1]) >= zero_tol or abs(image[4]) >= zero_tol:
        raise ReductionFailed(
            f"stage-1 gate left |u_001|={abs(image[1]):.3e}, |u_100|={abs(image[4]):.3e}"
        )
    return project_s05(image, zero_tol), gate
