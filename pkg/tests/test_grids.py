import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slsht.grids import (
    EulerAngles,
    beta_weights,
    ring_weights,
    rotation_matrix,
    so3_grid,
    so3_integrate,
    sphere_grid,
    sphere_integrate,
    w,
    w_array,
)
from slsht.wigner import wigner_D

from oracles import wigner_D_explicit


def test_sphere_grid_l0():
    g = sphere_grid(0)
    assert np.allclose(g.thetas, [np.pi]) and np.allclose(g.phis, [0.0])
    assert g.size == 1


def test_sphere_grid_l1():
    g = sphere_grid(1)
    assert np.allclose(g.thetas, [np.pi / 3, np.pi])
    assert np.allclose(g.phis, [0, 2 * np.pi / 3, 4 * np.pi / 3])
    assert g.size == 6


def test_sphere_grid_l64_count():
    assert sphere_grid(64).size == 65 * 129


@given(st.integers(0, 80))
def test_sphere_grid_ranges(L):
    g = sphere_grid(L)
    assert g.thetas.size == L + 1 and g.phis.size == 2 * L + 1
    assert np.all(np.diff(g.thetas) > 0) and g.thetas[0] > 0 and np.isclose(g.thetas[-1], np.pi)
    assert np.all(np.diff(g.phis) > 0) and g.phis[0] == 0 and g.phis[-1] < 2 * np.pi


def test_so3_grid_counts():
    assert so3_grid(0).size == 1
    assert np.allclose([so3_grid(0).alphas[0], so3_grid(0).betas[0], so3_grid(0).gammas[0]], 0)
    assert so3_grid(1).size == 18
    assert so3_grid(18).size == 37 * 19 * 37


@given(st.integers(0, 60))
def test_so3_beta_range(L):
    b = so3_grid(L).betas
    assert b.size == L + 1 and b[0] == 0 and np.isclose(b[-1], 2 * np.pi * L / (2 * L + 1))
    assert b[-1] <= np.pi


def test_grids_are_read_only_and_cached():
    g = sphere_grid(5)
    assert g is sphere_grid(5)
    with pytest.raises(ValueError):
        g.thetas[0] = 1.0


@pytest.mark.parametrize("bad", [-1, 2.5])
def test_bad_band_limit(bad):
    with pytest.raises(ValueError):
        sphere_grid(bad)


def test_w_table_values():
    assert w(0) == 2
    assert w(1) == 0.5j * np.pi and w(-1) == -0.5j * np.pi
    assert w(3) == 0 and w(-5) == 0
    assert np.isclose(w(2), -2 / 3) and np.isclose(w(-4), 2 / (1 - 16))
    tab = beta_weights(6).w_table
    for m in range(-6, 7):
        assert tab[m] == pytest.approx(w(m))


def test_w_matches_integral():
    t = np.linspace(0, np.pi, 20001)
    for m in range(-5, 6):
        vals = np.exp(1j * m * t) * np.sin(t)
        num = np.trapezoid(vals, t)
        assert abs(num - w(m)) < 1e-7


def test_w_array_indexing():
    arr = w_array(5)
    assert all(arr[m + 5] == w(m) for m in range(-5, 6))


def test_q0_value():
    q = beta_weights(2).beta_weights
    assert q[0] == pytest.approx(4 * np.pi**2 / 1.5)
    assert q[0] == pytest.approx(26.3189, abs=1e-4)


def test_beta_weights_real_dtype():
    assert beta_weights(9).beta_weights.dtype == np.float64


def test_so3_volume_l18():
    L = 18
    total = so3_integrate(np.ones(so3_grid(L).shape), L)
    assert abs(total - 8 * np.pi**2) < 1e-10


def _D_on_grid(l, m, mp, L):
    g = so3_grid(L)
    A, B, G = np.meshgrid(g.alphas, g.betas, g.gammas, indexing="ij")
    return wigner_D_explicit(l, m, mp, A, B, G)


@pytest.mark.parametrize("L", [2, 5, 8])
def test_fixed_rule_integrates_wigner_functions(L):
    # the weighted sum of D^p_{q,q'} is 8 pi^2 at p=0 and vanishes for 1 <= p <= L
    for p in range(L + 1):
        for q in range(-p, p + 1):
            for qp in range(-p, p + 1):
                val = so3_integrate(_D_on_grid(p, q, qp, L), L)
                ref = 8 * np.pi**2 if p == 0 else 0.0
                assert abs(val - ref) < 1e-10, (p, q, qp)


@pytest.mark.parametrize("L", [3, 6, 10])
def test_fixed_rule_integrates_cos_powers(L):
    # beta-profiles cos^k with k <= L are integrated exactly
    q = beta_weights(L).beta_weights
    b = so3_grid(L).betas
    n = 2 * L + 1
    for k in range(L + 1):
        got = np.sum(q * np.cos(b) ** k) * n**2 / n**3
        ref = 4 * np.pi**2 * (1 + (-1) ** k) / (k + 1)
        assert abs(got - ref) < 1e-10, k


def test_fixed_rule_is_inexact_beyond_band_limit():
    # documents the limit: cos^(L+1) is already aliased (odd L keeps it non-trivial)
    L = 3
    q = beta_weights(L).beta_weights
    b = so3_grid(L).betas
    k = L + 1
    got = np.sum(q * np.cos(b) ** k) / (2 * L + 1)
    assert abs(got - 4 * np.pi**2 * 2 / (k + 1)) > 1e-3


def test_ring_weights_exact_for_band_limited_profiles(rng):
    L = 12
    v = ring_weights(L)
    assert np.all(v > 0) and v.sum() == pytest.approx(2.0)
    t = sphere_grid(L).thetas
    for k in range(L + 1):
        # cos(k theta) is the profile of a degree-k zonal function
        ref = w(k).real
        assert abs(np.sum(v * np.cos(k * t)) - ref) < 1e-12


def test_sphere_integrate_constant():
    L = 7
    assert sphere_integrate(np.ones(sphere_grid(L).shape), L) == pytest.approx(4 * np.pi)


def test_rotation_matrix_orthogonal_and_zyz():
    R = rotation_matrix(0.3, 1.1, -0.4)
    assert np.allclose(R @ R.T, np.eye(3)) and np.isclose(np.linalg.det(R), 1)
    # beta about y takes the north pole towards +x
    assert np.allclose(rotation_matrix(0, np.pi / 2, 0) @ [0, 0, 1], [1, 0, 0])


def test_euler_angles_validate():
    EulerAngles(0.0, np.pi, 1.0)
    with pytest.raises(ValueError):
        EulerAngles(0.0, -0.1, 0.0)
    assert np.allclose(EulerAngles(0.1, 0.2, 0.3).matrix(), rotation_matrix(0.1, 0.2, 0.3))


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_degree_one_D_is_rotation(a, b, g):
    # Y_1^m(x) ~ u_m . x, so rotating a linear function a . x by R gives D = conj(U) R U^T
    D = wigner_D(1, (a, b, g))
    U = np.array([[1, -1j, 0], [0, 0, np.sqrt(2)], [-1, -1j, 0]]) / np.sqrt(2)  # rows u_{-1}, u_0, u_1
    R = rotation_matrix(a, b, g)
    assert np.allclose(U.conj() @ R @ U.T, D, atol=1e-12)
