"""Brute-force search over the full local orthogonal group O(2) x O(2) x O(2).

Independent of the reduction pipeline: every reflection sector is scanned on a
uniform angle grid over [0, 4pi)^3 and the best cells are refined with
Nelder-Mead. A grid search only bounds the true minimum from above.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .states import FOUR_PI, PAULI_X, LocalOrthogonalGate, apply_local_gate

TARGET = frozenset({0b000, 0b011, 0b101, 0b110, 0b111})
COMPLEX_STYLE = frozenset({0b000, 0b100, 0b101, 0b110, 0b111})

SECTORS = tuple(itertools.product((False, True), repeat=3))  # (r0, r1, r2)


def parse_pattern(text):
    """Pattern from comma-separated 3-bit kets, e.g. ``"000,011,101"``."""
    kets = [k.strip() for k in text.split(",") if k.strip()]
    if not kets:
        raise ValueError("pattern is empty")
    for k in kets:
        if len(k) != 3 or set(k) - {"0", "1"}:
            raise ValueError(f"invalid ket {k!r}: expected a 3-bit string like '011'")
    return frozenset(int(k, 2) for k in kets)


def pattern_label(p):
    return ",".join(format(i, "03b") for i in sorted(p))


@dataclass(frozen=True)
class SearchConfig:
    grid_n: int = 48
    refine_iter: int = 200
    refine_top: int = 4
    seed: int | None = None

    def __post_init__(self):
        if self.grid_n < 8:
            raise ValueError("grid_n must be at least 8")


def _thread_cap():
    env = os.environ.get("REAL_SCHMIDT_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _grid_angles(cfg):
    step = FOUR_PI / cfg.grid_n
    offset = 0.0
    if cfg.seed is not None:
        offset = np.random.default_rng(cfg.seed).uniform(0.0, step)
    return offset + step * np.arange(cfg.grid_n)


def _factors(thetas, reflect):
    c, s = np.cos(thetas / 2), np.sin(thetas / 2)
    f = np.empty((thetas.size, 2, 2))
    f[:, 0, 0], f[:, 0, 1], f[:, 1, 0], f[:, 1, 1] = c, -s, s, c
    if reflect:
        f = f @ PAULI_X
    return f


def _grid_images(s, angles, sector):
    """Images of ``s`` under every grid gate of one sector; shape (n, n, n, 8) indexed [t2, t1, t0]."""
    r0, r1, r2 = sector
    f0, f1, f2 = (_factors(angles, r) for r in (r0, r1, r2))
    t = np.asarray(s, dtype=float).reshape(2, 2, 2)
    step = np.einsum("nck,ijk->nijc", f0, t)
    step = np.einsum("mbj,nijc->mnibc", f1, step)
    step = np.einsum("lai,mnibc->lmnabc", f2, step)
    n = angles.size
    return step.reshape(n, n, n, 8)


class _Objective:
    def __init__(self, s, sector, target=None, pattern=None):
        self.s = np.asarray(s, dtype=float)
        self.sector = sector
        self.target = target
        if pattern is not None:
            self.off = [i for i in range(8) if i not in pattern]

    def gate(self, angles):
        t2, t1, t0 = angles
        return LocalOrthogonalGate((t0, t1, t2), self.sector)

    def grid_values(self, images):
        if self.target is None:
            return np.sum(images[..., self.off] ** 2, axis=-1)
        return np.sum((images - self.target) ** 2, axis=-1)

    def __call__(self, angles):
        u = apply_local_gate(self.gate(angles), self.s)
        if self.target is None:
            return float(np.sum(u[self.off] ** 2))
        return float(np.sum((u - self.target) ** 2))


def _local_minima(vals):
    """Flat indices of cells no larger than their six periodic neighbours, best first."""
    is_min = np.ones(vals.shape, dtype=bool)
    for axis in range(3):
        for shift in (1, -1):
            is_min &= vals <= np.roll(vals, shift, axis=axis)
    idx = np.flatnonzero(is_min)
    # stable sort keeps lexicographic (t2, t1, t0) order among ties
    return idx[np.argsort(vals.reshape(-1)[idx], kind="stable")]


def _search_sector(objective, angles, cfg):
    vals = objective.grid_values(_grid_images(objective.s, angles, objective.sector))
    flat = vals.reshape(-1)
    starts = _local_minima(vals)
    if objective.target is None and cfg.grid_n % 2 == 0:
        # off-pattern norm is unchanged by Ry(2pi) = -I, so cells half a grid apart are copies
        half = cfg.grid_n // 2
        seen, distinct = set(), []
        for idx in starts:
            key = tuple(int(i) % half for i in np.unravel_index(idx, vals.shape))
            if key not in seen:
                seen.add(key)
                distinct.append(idx)
        starts = distinct
    starts = starts[: cfg.refine_top]
    best_val, best_x = np.inf, None
    for idx in starts:
        i2, i1, i0 = np.unravel_index(idx, vals.shape)
        x0 = np.array([angles[i2], angles[i1], angles[i0]])
        val0 = float(flat[idx])
        if cfg.refine_iter > 0:
            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"maxiter": cfg.refine_iter, "xatol": 1e-13, "fatol": 1e-30,
                                    "initial_simplex": x0 + np.vstack([np.zeros(3), 0.25 * np.eye(3) * (FOUR_PI / cfg.grid_n)])})
            if res.fun < val0:
                x0, val0 = res.x, float(res.fun)
        if val0 < best_val:
            best_val, best_x = val0, x0
    return best_val, best_x


def _search(objective_for_sector, cfg):
    angles = _grid_angles(cfg)
    objectives = [objective_for_sector(sec) for sec in SECTORS]
    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        results = list(pool.map(lambda ob: _search_sector(ob, angles, cfg), objectives))
    best = min(range(len(SECTORS)), key=lambda i: (results[i][0], i))
    val, x = results[best]
    return float(np.sqrt(max(val, 0.0))), objectives[best].gate(x)


def pattern_residual(s, pattern, cfg=None):
    """Smallest off-pattern norm found over O(2)^3, and the gate achieving it."""
    cfg = cfg or SearchConfig()
    pattern = frozenset(pattern)
    return _search(lambda sec: _Objective(s, sec, pattern=pattern), cfg)


def equivalence_residual(a, b, cfg=None):
    """Smallest ``||U a - b||`` found over O(2)^3, and the gate U achieving it."""
    cfg = cfg or SearchConfig()
    b = np.asarray(b, dtype=float)
    return _search(lambda sec: _Objective(a, sec, target=b), cfg)


def stability_triple(func, grid_n, **kwargs):
    """Residuals at grid sizes ``grid_n // 2``, ``grid_n`` and ``2 * grid_n``."""
    out = []
    for n in (grid_n // 2, grid_n, 2 * grid_n):
        cfg = SearchConfig(grid_n=max(8, n), **kwargs)
        out.append((cfg.grid_n, func(cfg)[0]))
    return out


def random_state(seed):
    """Uniform point on the unit 7-sphere from a seeded Gaussian draw."""
    g = np.random.default_rng(seed).standard_normal(8)
    return g / np.linalg.norm(g)
