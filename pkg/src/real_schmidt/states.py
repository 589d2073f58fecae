"""Real 3-qubit amplitudes, local orthogonal gates and the S0^5 chart.

Amplitude index convention: ``i = 4*q2 + 2*q1 + q0`` for the ket ``|q2 q1 q0>``.
Gates act as ``F2 (x) F1 (x) F0`` with ``F2`` on the leftmost ket symbol.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotInS05, ZeroVector

FOUR_PI = 4.0 * np.pi

# slots of the 8-vector that carry the six chart coordinates x1..x6
S05_SLOTS = (0, 2, 3, 5, 6, 7)
S05_ZERO_SLOTS = (1, 4)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ToleranceConfig:
    zero_tol: float = 1e-10
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    stagnation_tol: float = 1e-8
    class_tol: float = 1e-8
    max_flow_time: float = 1e4

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


def _wrap(theta):
    t = float(np.mod(theta, FOUR_PI))
    # np.mod can round a tiny negative angle up to exactly 4*pi
    return 0.0 if t >= FOUR_PI else t


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def ry_generator():
    """d/dtheta Ry(theta) at theta = 0."""
    return np.array([[0.0, -0.5], [0.5, 0.0]])


@dataclass(frozen=True)
class LocalOrthogonalGate:
    """Per-qubit factors ``Ry(theta_k) @ X**reflect_k``, indexed by qubit k = 0, 1, 2.

    Angles are stored reduced to ``[0, 4*pi)``.
    """

    thetas: tuple = (0.0, 0.0, 0.0)
    reflects: tuple = (False, False, False)

    def __post_init__(self):
        if len(self.thetas) != 3 or len(self.reflects) != 3:
            raise ValueError("a 3-qubit gate needs exactly three angles and three reflect flags")
        object.__setattr__(self, "thetas", tuple(_wrap(t) for t in self.thetas))
        object.__setattr__(self, "reflects", tuple(bool(r) for r in self.reflects))

    @classmethod
    def ry(cls, theta2, theta1, theta0):
        """Rotation-only gate written in ket order, ``Ry(theta2) (x) Ry(theta1) (x) Ry(theta0)``."""
        return cls((theta0, theta1, theta2))

    @classmethod
    def identity(cls):
        return cls()

    def factor(self, qubit):
        m = ry(self.thetas[qubit])
        if self.reflects[qubit]:
            m = m @ PAULI_X
        return m

    def matrix(self):
        return np.kron(self.factor(2), np.kron(self.factor(1), self.factor(0)))

    def is_identity(self):
        return self.thetas == (0.0, 0.0, 0.0) and not any(self.reflects)


def normalize(raw):
    u = np.asarray(raw, dtype=float).reshape(-1)
    if u.shape != (8,):
        raise ValueError(f"expected 8 amplitudes, got {u.size}")
    if not np.all(np.isfinite(u)):
        raise NonFinite("amplitudes must be finite")
    n = np.linalg.norm(u)
    if n < 1e-14:
        raise ZeroVector("cannot normalize the zero vector")
    return u / n


def apply_local_gate(g, s):
    t = np.asarray(s, dtype=float).reshape(2, 2, 2)
    out = np.einsum("ai,bj,ck,ijk->abc", g.factor(2), g.factor(1), g.factor(0), t)
    return out.reshape(8)


def compose_gates(outer, inner):
    """Gate equal to applying ``inner`` first, then ``outer``.

    Uses ``X Ry(a) = Ry(-a) X`` per qubit.
    """
    thetas = []
    reflects = []
    for k in range(3):
        ta, ra = outer.thetas[k], outer.reflects[k]
        tb, rb = inner.thetas[k], inner.reflects[k]
        thetas.append(ta - tb if ra else ta + tb)
        reflects.append(ra != rb)
    return LocalOrthogonalGate(tuple(thetas), tuple(reflects))


def overlap(a, b):
    return float(np.dot(a, b))


def reduced_density(s, qubit):
    t = np.asarray(s, dtype=float).reshape(2, 2, 2)
    m = np.moveaxis(t, 2 - qubit, 0).reshape(2, 4)
    return m @ m.T


def reduced_purity(s, qubit):
    """tr(rho^2) of the single-qubit marginal, computed by dense partial trace."""
    rho = reduced_density(s, qubit)
    return float(np.trace(rho @ rho))


def purities(s):
    return tuple(reduced_purity(s, k) for k in range(3))


def project_s05(s, tol=1e-10):
    u = np.asarray(s, dtype=float)
    if abs(u[1]) >= tol or abs(u[4]) >= tol:
        raise NotInS05(u[1], u[4])
    x = u[list(S05_SLOTS)]
    return x / np.linalg.norm(x)


def embed_s05(x):
    u = np.zeros(8)
    u[list(S05_SLOTS)] = x
    return u


def basis_state(bits):
    """Ket from a 3-character bit string such as ``"011"``."""
    u = np.zeros(8)
    u[int(bits, 2)] = 1.0
    return u


GHZ = normalize(basis_state("000") + basis_state("111"))
# 1/2(|001> - |010> + |100> + |111>): same unitary class as GHZ, different real class
GHZ_PARTNER = normalize(basis_state("001") - basis_state("010") + basis_state("100") + basis_state("111"))
XI = normalize([1, 1, 0, 1, 0, 1, -1, 0])
