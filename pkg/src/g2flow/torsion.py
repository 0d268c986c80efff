"""Full torsion tensor, its type components and the torsion identity suites.

``T`` is stored fully lowered and defined by ``nabla_a phi_{bcd} = T_a^e psi_{ebcd}``.
Its components follow ``T = tau0/4 g - tau1 _| phi + tau2/2 - tau3/3``.

Two identities are checked in a form that differs from the commonly quoted
one when ``T`` is neither symmetric nor skew (they agree on closed and
co-closed structures):

* ``(nabla T) _| psi = -(T _| phi) _| T - T^2 _| phi + Tr(T) (T _| phi)``
* ``Ric*/4 = curl T + (T^t o T^t)/2``, hence ``Skew(curl T) = -Skew(T^t o T^t)/2``

For symmetric ``T`` the general Ricci identity reduces to
``Ric = -curl T - T^2 + Tr(T) T``.
"""
from __future__ import annotations

import functools
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NotCoclosed
from .exterior import AltForm, form_norm, interior, raise_indices, tensor_norm, unpack, antisymmetrize, wedge
from .lie import (
    Connection,
    Curvature,
    LieAlgebra,
    ce_differential,
    circ_product,
    covariant_derivative,
    curl_tensor,
    curvature,
    div_tensor,
    levi_civita,
)
from .structure import CONTRACTIONS, G2Structure, i_phi

VANISH_TOL = 1e-10


@dataclass(frozen=True)
class TorsionClass:
    closed: bool
    coclosed: bool
    torsion_free: bool
    nearly_parallel: bool
    locally_conformally_parallel: bool

    def as_dict(self) -> dict[str, bool]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class TorsionData:
    T: np.ndarray
    tau0: float
    tau1: np.ndarray  # 1-form (lowered)
    tau2: AltForm
    tau3: np.ndarray  # traceless symmetric, lowered
    class_flags: TorsionClass


def torsion_components(T: np.ndarray, g2: G2Structure) -> tuple[float, np.ndarray, AltForm, np.ndarray]:
    """``(tau0, tau1, tau2, tau3)`` of a lowered torsion tensor."""
    T = np.asarray(T, dtype=float)
    ginv = g2.metric.inverse
    tr = float(np.einsum("ab,ab->", ginv, T))
    t_phi = np.einsum("mn,mna->a", raise_indices(T, g2.metric), g2.phi.dense)
    tau0 = 4.0 * tr / 7.0
    tau1 = -t_phi / CONTRACTIONS["phi_phi"]
    skew = 0.5 * (T - T.T)
    sym = 0.5 * (T + T.T)
    tau2 = AltForm.from_dense(2.0 * (skew + interior(ginv @ tau1, g2.phi).dense))
    tau3 = -3.0 * (sym - (tr / 7.0) * g2.g)
    return tau0, tau1, tau2, tau3


def synthesize_torsion(tau0, tau1, tau2: AltForm, tau3, g2: G2Structure) -> np.ndarray:
    """Inverse of ``torsion_components``."""
    tau1 = np.asarray(tau1, dtype=float)
    return (0.25 * tau0 * g2.g
            - interior(g2.metric.inverse @ tau1, g2.phi).dense
            + 0.5 * tau2.dense
            - np.asarray(tau3, dtype=float) / 3.0)


def classify(tau0, tau1, tau2: AltForm, tau3, g2: G2Structure, T=None) -> TorsionClass:
    """Torsion-class flags; a component vanishes when its norm is below ``1e-10 (1 + |T|)``."""
    if T is None:
        T = synthesize_torsion(tau0, tau1, tau2, tau3, g2)
    tol = VANISH_TOL * (1.0 + tensor_norm(T, g2.metric))
    z0 = abs(tau0) < tol
    z1 = tensor_norm(tau1, g2.metric) < tol
    z2 = form_norm(tau2, g2.metric) < tol
    z3 = tensor_norm(tau3, g2.metric) < tol
    return TorsionClass(
        closed=z0 and z1 and z3,
        coclosed=z1 and z2,
        torsion_free=z0 and z1 and z2 and z3,
        nearly_parallel=(not z0) and z1 and z2 and z3,
        locally_conformally_parallel=(not z1) and z0 and z2 and z3,
    )


def full_torsion(g2: G2Structure, conn: Connection) -> TorsionData:
    """Extract ``T`` by contracting ``nabla phi`` with ``psi``."""
    nabla_phi = covariant_derivative(g2.phi.dense, conn)
    t_mixed = np.einsum("abcd,ebcd->ae", nabla_phi, g2.psi_up) / CONTRACTIONS["psi_psi"]
    T = t_mixed @ g2.g
    comps = torsion_components(T, g2)
    return TorsionData(T, *comps, class_flags=classify(*comps, g2, T=T))


def torsion_class(g2: G2Structure, alg: LieAlgebra) -> TorsionClass:
    return full_torsion(g2, levi_civita(g2.metric, alg)).class_flags


@dataclass(frozen=True, eq=False)
class Geometry:
    """Everything derived from an invariant 3-form on a given Lie algebra.

    Torsion and curvature are computed on first access.
    """

    algebra: LieAlgebra
    g2: G2Structure
    conn: Connection

    @classmethod
    def from_phi(cls, phi: AltForm, alg: LieAlgebra) -> "Geometry":
        g2 = G2Structure.from_phi(phi)
        return cls(alg, g2, levi_civita(g2.metric, alg))

    @functools.cached_property
    def torsion(self) -> TorsionData:
        return full_torsion(self.g2, self.conn)

    @functools.cached_property
    def curv(self) -> Curvature:
        return curvature(self.conn, self.g2.phi)

    @property
    def T(self) -> np.ndarray:
        return self.torsion.T

    def mat(self, a, b) -> np.ndarray:
        """Matrix product ``a_a^k b_kb`` of lowered 2-tensors."""
        return a @ self.g2.metric.inverse @ b

    def trace(self, a) -> float:
        return float(np.einsum("ab,ab->", self.g2.metric.inverse, a))

    def circ(self, a, b) -> np.ndarray:
        return circ_product(a, b, self.g2.phi, self.g2.metric)

    def t_phi(self) -> np.ndarray:
        """Covector ``(T _| phi)_a = T^{mn} phi_{mna}``."""
        return np.einsum("mn,mna->a", raise_indices(self.T, self.g2.metric), self.g2.phi.dense)

    def t_psi(self) -> np.ndarray:
        """``(T _| psi)_{ab} = T^{mn} psi_{mnab}``."""
        return np.einsum("mn,mnab->ab", raise_indices(self.T, self.g2.metric), self.g2.psi.dense)

    def psi_tt(self) -> float:
        tu = raise_indices(self.T, self.g2.metric)
        return float(np.einsum("abcd,ab,cd->", self.g2.psi.dense, tu, tu))

    def norm_t2(self) -> float:
        return float(np.sum(self.T * raise_indices(self.T, self.g2.metric)))

    def curl_t(self) -> np.ndarray:
        return curl_tensor(self.T, self.conn, self.g2.phi)

    def div_t(self) -> np.ndarray:
        return div_tensor(self.T, self.conn)

    def nabla_t(self) -> np.ndarray:
        return covariant_derivative(self.T, self.conn)


def _max_abs(x) -> float:
    return float(np.max(np.abs(x), initial=0.0))


def identity_suite(geo: Geometry) -> dict[str, float]:
    """Max-abs residual of each general torsion identity (invariant data: ``d(Tr T) = 0``)."""
    g2, conn, T = geo.g2, geo.conn, geo.T
    ginv, phi, psi = g2.metric.inverse, g2.phi.dense, g2.psi.dense
    tor, curv = geo.torsion, geo.curv
    tr = geo.trace(T)
    t_mixed = T @ ginv
    v = geo.t_phi()
    v_up = ginv @ v
    T2 = geo.mat(T, T)
    out: dict[str, float] = {}

    nabla_phi = covariant_derivative(phi, conn)
    out["nabla_phi"] = _max_abs(nabla_phi - np.einsum("ae,ebcd->abcd", t_mixed, psi))
    nabla_psi = covariant_derivative(psi, conn)
    tphi = -4.0 * np.einsum("ab,cde->abcde", T, phi)
    out["nabla_psi"] = _max_abs(nabla_psi - np.array([unpack(4, antisymmetrize(x)) for x in tphi]))

    recon = synthesize_torsion(tor.tau0, tor.tau1, tor.tau2, tor.tau3, g2)
    out["torsion_decomposition"] = _max_abs(T - recon)
    out["trace_tau0"] = abs(tr - 1.75 * tor.tau0)
    out["t_phi_tau1"] = _max_abs(v + 6.0 * tor.tau1)

    tau1 = AltForm(1, tor.tau1)
    dphi = ce_differential(g2.phi, geo.algebra)
    dpsi = ce_differential(g2.psi, geo.algebra)
    out["dphi"] = _max_abs((dphi - (tor.tau0 * g2.psi + 3.0 * wedge(tau1, g2.phi)
                                    + g2.star(i_phi(tor.tau3, g2)))).packed)
    out["dpsi"] = _max_abs((dpsi - (4.0 * wedge(tau1, g2.psi) + g2.star(tor.tau2))).packed)

    # 1/2 Riem_ij^{bc} phi^a_bc = nabla_i T_j^a - nabla_j T_i^a + T_i^b T_j^c phi^a_bc
    riem_up = raise_indices(curv.riem, g2.metric, axes=(2, 3))
    phi_mix = raise_indices(phi, g2.metric, axes=(0,))
    lhs = 0.5 * np.einsum("ijbc,abc->ija", riem_up, phi_mix)
    nt = covariant_derivative(t_mixed, conn, upper=(1,))
    rhs = nt - nt.transpose(1, 0, 2) + np.einsum("ib,jc,abc->ija", t_mixed, t_mixed, phi_mix)
    out["integrability"] = _max_abs(lhs - rhs)

    nabla_t = geo.nabla_t()
    lhs = np.einsum("abc,abcd->d", raise_indices(nabla_t, g2.metric), psi)
    t2_phi = np.einsum("mn,mna->a", raise_indices(T2, g2.metric), phi)
    out["nabla_t_psi"] = _max_abs(lhs - (-(v_up @ T) - t2_phi + tr * v))

    # d(Tr T) vanishes for invariant data
    out["div_t_transpose"] = _max_abs(-div_tensor(T.T, conn) - v_up @ T.T)

    curl_tt = curl_tensor(T.T, conn, g2.phi)
    nabla_v = covariant_derivative(v, conn)
    m = curl_tt - nabla_v + T2 - tr * T
    out["ricci"] = _max_abs(curv.ric + 0.5 * (m + m.T))

    curl_t = geo.curl_t()
    tt_t = geo.circ(T.T, T.T)
    out["ricci_star"] = _max_abs(0.25 * curv.ric_star - (curl_t + 0.5 * tt_t))
    out["ricci_star_trace"] = abs(geo.trace(curv.ric_star) - 2.0 * curv.scal)
    out["scalar"] = abs(curv.scal - (2.0 * geo.trace(curl_t) - geo.psi_tt() - geo.trace(T2) + tr * tr))
    skew = lambda a: 0.5 * (a - a.T)
    out["skew_curl"] = _max_abs(skew(curl_t) + 0.5 * skew(tt_t))

    if tor.class_flags.closed:
        out["closed_scalar"] = abs(geo.norm_t2() + curv.scal)
    return out


def dpsi_norm(geo: Geometry) -> float:
    return form_norm(ce_differential(geo.g2.psi, geo.algebra), geo.g2.metric)


def coclosed_identity_suite(geo: Geometry) -> dict[str, float]:
    """Residuals of the identities specific to co-closed structures."""
    residual = dpsi_norm(geo)
    if residual > VANISH_TOL:
        raise NotCoclosed(f"|d psi| = {residual:.3e}")
    T = geo.T
    tr = geo.trace(T)
    T2 = geo.mat(T, T)
    curl_t = geo.curl_t()
    curv = geo.curv
    tt = geo.circ(T, T)
    out = {
        "div_t": _max_abs(geo.div_t()),
        "curl_t_symmetric": _max_abs(curl_t - curl_t.T),
        "ricci": _max_abs(curv.ric - (-curl_t - T2 + tr * T)),
        "ricci_star": _max_abs(0.25 * curv.ric_star - (curl_t + 0.5 * tt)),
        "ricci_star_alt": _max_abs(0.25 * curv.ric_star - (-curv.ric + 0.5 * tt - T2 + tr * T)),
        "scalar": abs(curv.scal - (tr * tr - geo.norm_t2())),
    }
    return out
