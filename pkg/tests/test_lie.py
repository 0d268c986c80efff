from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_two_step_nilpotent, random_structures
from g2flow.errors import DegreeError, InvalidAlgebra, MetricError
from g2flow.exterior import AltForm, Metric7, form_inner, wedge
from g2flow.lie import (
    LieAlgebra,
    ce_differential,
    covariant_derivative,
    curl_tensor,
    curl_vector,
    curvature,
    div_tensor,
    div_vector,
    hodge_codifferential,
    levi_civita,
    rough_laplacian,
)
from g2flow.presets import almost_abelian, get_preset
from g2flow.structure import G2Structure, standard_phi


def su2_plus_r4() -> LieAlgebra:
    return LieAlgebra.from_brackets([(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)], name="su2+r4")


def algebras():
    rng = np.random.default_rng(7)
    return [random_two_step_nilpotent(rng), get_preset("heisenberg7").algebra,
            almost_abelian(np.diag([0.5, -0.2, 0.3, -0.7, 0.1, 0.0])), su2_plus_r4()]


def spd(seed):
    a = np.random.default_rng(seed).normal(size=(7, 7))
    return Metric7(a @ a.T + 5.0 * np.eye(7))


def koszul_loops(metric: Metric7, alg: LieAlgebra) -> np.ndarray:
    """Gamma^k_ij from the Koszul formula, one component at a time."""
    g, c, n = metric.g, alg.c, 7
    low = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for l in range(n):
                s = 0.0
                for m in range(n):
                    s += c[i, j, m] * g[m, l] - c[j, l, m] * g[m, i] + c[l, i, m] * g[m, j]
                low[i, j, l] = 0.5 * s
    return np.einsum("ijl,lk->ijk", low, metric.inverse)


def test_jacobi_and_antisymmetry_checks():
    with pytest.raises(InvalidAlgebra):
        LieAlgebra.from_brackets([(0, 1, 2, 1.0), (0, 2, 3, 1.0), (1, 2, 4, 1.0), (0, 4, 5, 1.0)])
    c = np.zeros((7, 7, 7))
    c[0, 1, 2] = 1.0
    with pytest.raises(InvalidAlgebra):
        LieAlgebra(c)
    with pytest.raises(InvalidAlgebra):
        LieAlgebra.from_brackets([(3, 3, 0, 1.0)])
    with pytest.raises(InvalidAlgebra):
        LieAlgebra(np.zeros((6, 6, 6)))


def test_non_jacobi_algebra_rejected_by_d():
    alg = LieAlgebra.from_brackets([(0, 1, 2, 1.0), (0, 2, 3, 1.0), (1, 2, 4, 1.0), (0, 4, 5, 1.0)],
                                   check_jacobi=False)
    with pytest.raises(InvalidAlgebra):
        ce_differential(AltForm.elementary((0,)), alg)
    assert ce_differential(AltForm.elementary((0,)), alg, strict=False).degree == 2


def test_unimodular_flags():
    assert get_preset("heisenberg7").algebra.unimodular
    assert get_preset("almost_abelian_a").algebra.unimodular
    assert not almost_abelian(np.eye(6)).unimodular
    assert LieAlgebra.abelian().is_abelian


def test_d_of_one_forms():
    alg = algebras()[0]
    for k in range(7):
        de = ce_differential(AltForm.elementary((k,)), alg)
        assert np.allclose(de.dense, -alg.c[:, :, k])


@pytest.mark.parametrize("alg", algebras(), ids=lambda a: a.name)
@pytest.mark.parametrize("k", range(6))
def test_d_squared_vanishes(alg, k):
    w = AltForm(k, np.random.default_rng(k).normal(size=comb(7, k)))
    assert np.abs(ce_differential(ce_differential(w, alg), alg).packed).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_d_is_antiderivation(k, l, seed):
    rng = np.random.default_rng(seed)
    alg = random_two_step_nilpotent(rng)
    a = AltForm(k, rng.normal(size=comb(7, k)))
    b = AltForm(l, rng.normal(size=comb(7, l)))
    lhs = ce_differential(wedge(a, b), alg)
    rhs = wedge(ce_differential(a, alg), b) + wedge(a, ce_differential(b, alg)) * (-1) ** k
    assert lhs.allclose(rhs, atol=1e-10)


def test_degree_guards():
    alg = algebras()[0]
    with pytest.raises(DegreeError):
        ce_differential(AltForm(7, [1.0]), alg)
    with pytest.raises(DegreeError):
        hodge_codifferential(AltForm(0, [1.0]), Metric7.identity(), alg)


@pytest.mark.parametrize("k", range(1, 7))
def test_codifferential_adjoint_on_unimodular(k):
    alg = algebras()[1]
    m = spd(k)
    rng = np.random.default_rng(k)
    a = AltForm(k - 1, rng.normal(size=comb(7, k - 1)))
    b = AltForm(k, rng.normal(size=comb(7, k)))
    lhs = form_inner(ce_differential(a, alg), b, m)
    rhs = form_inner(a, hodge_codifferential(b, m, alg), m)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("alg", algebras(), ids=lambda a: a.name)
def test_levi_civita_against_loop_koszul(alg):
    m = spd(1)
    conn = levi_civita(m, alg)
    assert np.allclose(conn.gamma, koszul_loops(m, alg), atol=1e-12)
    # torsion-free and metric
    assert np.allclose(conn.gamma - conn.gamma.transpose(1, 0, 2), alg.c, atol=1e-12)
    assert np.abs(covariant_derivative(m.g, conn)).max() < 1e-12


def test_levi_civita_rejects_bad_metric():
    with pytest.raises(MetricError):
        levi_civita(-np.eye(7), algebras()[0])


@pytest.mark.parametrize("alg", algebras(), ids=lambda a: a.name)
def test_riemann_symmetries(alg):
    curv = curvature(levi_civita(spd(2), alg))
    r = curv.riem
    assert np.allclose(r, -r.transpose(1, 0, 2, 3), atol=1e-12)
    assert np.allclose(r, -r.transpose(0, 1, 3, 2), atol=1e-12)
    assert np.allclose(r, r.transpose(2, 3, 0, 1), atol=1e-12)
    bianchi = r + r.transpose(1, 2, 0, 3) + r.transpose(2, 0, 1, 3)
    assert np.abs(bianchi).max() < 1e-12
    assert np.allclose(curv.ric, curv.ric.T, atol=1e-12)


def test_bi_invariant_su2_has_positive_ricci():
    curv = curvature(levi_civita(Metric7.identity(), su2_plus_r4()))
    assert np.allclose(curv.ric, np.diag([0.5, 0.5, 0.5, 0, 0, 0, 0]), atol=1e-14)
    assert curv.scal == pytest.approx(1.5)


def test_heisenberg_ricci():
    # orthonormal Heisenberg with centre e1: Ric(e1) = 3/2, Ric = -1/2 on the rest
    curv = curvature(levi_civita(Metric7.identity(), get_preset("heisenberg7").algebra))
    assert np.allclose(curv.ric, np.diag([1.5] + [-0.5] * 6), atol=1e-14)
    assert curv.scal == pytest.approx(-1.5)


def test_abelian_is_flat():
    conn = levi_civita(spd(4), LieAlgebra.abelian())
    curv = curvature(conn, standard_phi())
    assert not np.any(conn.gamma) and not np.any(curv.riem) and not np.any(curv.ric_star)
    t = np.random.default_rng(0).normal(size=(7, 7))
    assert not np.any(rough_laplacian(t, conn))


@pytest.mark.parametrize("idx", range(4))
def test_div_curl_against_loops(idx):
    alg, phi = random_structures(31, 4)[idx]
    g2 = G2Structure.from_phi(phi)
    conn = levi_civita(g2.metric, alg)
    gam, gi, p = conn.gamma, g2.metric.inverse, phi.dense
    rng = np.random.default_rng(idx)
    x = rng.normal(size=7)
    beta = rng.normal(size=(7, 7))
    # nabla_a X^b = Gamma^b_{am} X^m ; nabla_a beta_{bc} = -Gamma^m_{ab} beta_{mc} - Gamma^m_{ac} beta_{bm}
    nx = np.zeros((7, 7))
    nbeta = np.zeros((7, 7, 7))
    for a in range(7):
        for b in range(7):
            nx[a, b] = sum(gam[a, m, b] * x[m] for m in range(7))
            for c in range(7):
                nbeta[a, b, c] = -sum(gam[a, b, m] * beta[m, c] + gam[a, c, m] * beta[b, m] for m in range(7))
    assert div_vector(x, conn) == pytest.approx(np.trace(nx), abs=1e-12)
    assert np.allclose(div_tensor(beta, conn), np.einsum("ca,cab->b", gi, nbeta), atol=1e-12)
    phi_up = np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, p)
    nx_low = nx @ g2.g  # nabla_b X_c
    assert np.allclose(curl_vector(x, conn, phi), np.einsum("bc,abc->a", nx_low, phi_up), atol=1e-12)
    phi_mix = np.einsum("mi,nj,bij->bmn", gi, gi, p)
    assert np.allclose(curl_tensor(beta, conn, phi), np.einsum("mna,bmn->ab", nbeta, phi_mix), atol=1e-12)
