import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from real_schmidt.errors import NonFinite, NotInS05, ZeroVector
from real_schmidt.states import (
    FOUR_PI,
    GHZ,
    GHZ_PARTNER,
    XI,
    LocalOrthogonalGate,
    ToleranceConfig,
    apply_local_gate,
    basis_state,
    compose_gates,
    embed_s05,
    normalize,
    overlap,
    project_s05,
    reduced_purity,
    ry,
)

angles = st.floats(0.0, FOUR_PI, exclude_max=True, allow_nan=False)
flags = st.booleans()
gates = st.builds(
    lambda t, r: LocalOrthogonalGate(tuple(t), tuple(r)),
    st.tuples(angles, angles, angles),
    st.tuples(flags, flags, flags),
)


def random_gate(rng):
    return LocalOrthogonalGate(tuple(rng.uniform(0, FOUR_PI, 3)), tuple(rng.integers(0, 2, 3).astype(bool)))


def test_normalize_unit_input_unchanged():
    np.testing.assert_array_equal(normalize([1, 0, 0, 0, 0, 0, 0, 0]), basis_state("000"))


def test_normalize_xi():
    expected = np.array([1, 1, 0, 1, 0, 1, -1, 0]) / math.sqrt(5)
    np.testing.assert_allclose(normalize([1, 1, 0, 1, 0, 1, -1, 0]), expected, atol=1e-15)
    np.testing.assert_allclose(XI, expected, atol=1e-15)


def test_normalize_rejects_bad_input():
    with pytest.raises(ZeroVector):
        normalize(np.zeros(8))
    with pytest.raises(NonFinite):
        normalize([1, 0, 0, 0, 0, 0, 0, np.nan])
    with pytest.raises(ValueError):
        normalize([1, 0, 0])


def test_tolerance_config_positive():
    with pytest.raises(ValueError):
        ToleranceConfig(zero_tol=0.0)


def test_identity_gate():
    s = normalize(np.arange(1, 9))
    np.testing.assert_array_equal(apply_local_gate(LocalOrthogonalGate.identity(), s), s)


def test_ry_pi_on_qubit2_maps_000_to_100():
    g = LocalOrthogonalGate.ry(math.pi, 0, 0)
    np.testing.assert_allclose(apply_local_gate(g, basis_state("000")), basis_state("100"), atol=1e-15)


def test_ry_pi_on_ghz_partner():
    # |0> -> |1>, |1> -> -|0> on qubit 2
    g = LocalOrthogonalGate.ry(math.pi, 0, 0)
    expected = 0.5 * (-basis_state("000") - basis_state("011") + basis_state("101") - basis_state("110"))
    np.testing.assert_allclose(apply_local_gate(g, GHZ_PARTNER), expected, atol=1e-15)


def test_apply_matches_kronecker_matrix(rng):
    for _ in range(50):
        g = random_gate(rng)
        s = normalize(rng.standard_normal(8))
        np.testing.assert_allclose(apply_local_gate(g, s), g.matrix() @ s, atol=1e-14)


def test_factor_layout():
    g = LocalOrthogonalGate((0.3, 0.0, 0.0), (False, False, True))
    np.testing.assert_allclose(g.matrix(), np.kron(np.array([[0, 1], [1, 0]]), np.kron(np.eye(2), ry(0.3))))


def test_compose_with_identity():
    g = LocalOrthogonalGate((1.0, 2.0, 3.0), (True, False, True))
    assert compose_gates(LocalOrthogonalGate.identity(), g) == g


def test_compose_two_half_turns_is_minus_identity():
    half = LocalOrthogonalGate((math.pi, 0, 0))
    c = compose_gates(half, half)
    assert c.thetas[0] == pytest.approx(2 * math.pi)
    np.testing.assert_allclose(c.factor(0), -np.eye(2), atol=1e-15)


def test_compose_reflection_then_rotation():
    alpha = 0.7
    c = compose_gates(LocalOrthogonalGate((0, 0, 0), (True, False, False)), LocalOrthogonalGate((alpha, 0, 0)))
    assert c.reflects[0] is True
    assert c.thetas[0] == pytest.approx(FOUR_PI - alpha)
    x = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(x @ ry(alpha), c.factor(0), atol=1e-15)


def test_compose_law_seeded(rng):
    worst = 0.0
    for _ in range(1000):
        g1, g2 = random_gate(rng), random_gate(rng)
        s = normalize(rng.standard_normal(8))
        lhs = apply_local_gate(compose_gates(g2, g1), s)
        rhs = apply_local_gate(g2, apply_local_gate(g1, s))
        worst = max(worst, np.linalg.norm(lhs - rhs))
    assert worst < 1e-12


@settings(max_examples=200, deadline=None)
@given(gates)
def test_factors_orthogonal(g):
    for k in range(3):
        f = g.factor(k)
        np.testing.assert_allclose(f.T @ f, np.eye(2), atol=1e-14)
    assert all(0 <= t < FOUR_PI for t in g.thetas)


@settings(max_examples=200, deadline=None)
@given(gates, st.integers(0, 2**32 - 1))
def test_gate_preserves_norm_overlap_and_purity(g, seed):
    rng = np.random.default_rng(seed)
    a, b = normalize(rng.standard_normal(8)), normalize(rng.standard_normal(8))
    ua, ub = apply_local_gate(g, a), apply_local_gate(g, b)
    assert abs(np.linalg.norm(ua) - 1) < 1e-12
    assert abs(overlap(ua, ub) - overlap(a, b)) < 1e-12
    for k in range(3):
        assert abs(reduced_purity(ua, k) - reduced_purity(a, k)) < 1e-10


def test_overlap_examples():
    s = XI
    assert overlap(s, s) == pytest.approx(1.0)
    assert overlap(basis_state("000"), basis_state("111")) == 0.0
    assert overlap(GHZ, basis_state("000")) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def _purity_by_density_matrix(s, qubit):
    # independent route: full density matrix, trace out the others with explicit index sums
    rho = np.outer(s, s)
    red = np.zeros((2, 2))
    for i in range(8):
        for j in range(8):
            bi, bj = (i >> qubit) & 1, (j >> qubit) & 1
            if (i & ~(1 << qubit)) == (j & ~(1 << qubit)):
                red[bi, bj] += rho[i, j]
    return np.trace(red @ red)


def test_reduced_purity_examples(rng):
    for k in range(3):
        assert reduced_purity(basis_state("000"), k) == pytest.approx(1.0)
        assert reduced_purity(GHZ, k) == pytest.approx(0.5)
    s = normalize(basis_state("000") + basis_state("011"))
    assert reduced_purity(s, 2) == pytest.approx(1.0)
    assert reduced_purity(s, 0) == pytest.approx(0.5)
    for _ in range(20):
        s = normalize(rng.standard_normal(8))
        for k in range(3):
            assert reduced_purity(s, k) == pytest.approx(_purity_by_density_matrix(s, k), abs=1e-14)
            assert 0.5 - 1e-12 <= reduced_purity(s, k) <= 1 + 1e-12


def test_project_and_embed():
    np.testing.assert_allclose(project_s05(GHZ), [1 / math.sqrt(2), 0, 0, 0, 0, 1 / math.sqrt(2)])
    with pytest.raises(NotInS05) as info:
        project_s05(XI)
    assert info.value.u1 == pytest.approx(1 / math.sqrt(5))
    np.testing.assert_array_equal(embed_s05([1, 0, 0, 0, 0, 0]), basis_state("000"))
    np.testing.assert_array_equal(embed_s05([0, 1, 0, 0, 0, 0]), basis_state("010"))


def test_embed_project_roundtrip(chart_points):
    for x in chart_points[:100]:
        u = embed_s05(x)
        assert u[1] == 0.0 and u[4] == 0.0
        np.testing.assert_allclose(project_s05(u), x, atol=1e-15)
