"""Hodge Laplacian of invariant forms, directly and through torsion.

The torsion decomposition ``Delta phi = X _| psi + 3 i_phi(h)`` uses

    X = -div T
    h = -Ric*/4 + (R + 2|T|^2)/6 g - T^t T - (T _| phi)(T _| phi)/2
        + (T o T)/4 + (T^t o T^t)/4 - (T o T^t)/2
        + Sym(T (T _| psi) - T^t (T _| psi)) + psi(T, T)/2 g

with ``psi(T, T) = psi_{abcd} T^{ab} T^{cd}``.  The last term is needed for the
assembled form to agree with ``dd* phi + d* d phi``; it only contributes when
``T`` has a skew part.
"""
from __future__ import annotations

import numpy as np

from .errors import DegreeError, NotCoclosed
from .exterior import AltForm
from .lie import ce_differential, hodge_codifferential
from .structure import assemble_3form, symmetric_part_of_3form
from .torsion import VANISH_TOL, Geometry, dpsi_norm


def hodge_laplacian(w: AltForm, geo: Geometry) -> AltForm:
    """``dd* w + d*d w`` for an invariant form of degree 1..6."""
    if not 1 <= w.degree <= 6:
        raise DegreeError(f"Hodge Laplacian is implemented for degrees 1..6, got {w.degree}")
    g2, alg = geo.g2, geo.algebra
    codiff = lambda a: hodge_codifferential(a, g2.metric, alg, g2.orientation)
    return ce_differential(codiff(w), alg) + codiff(ce_differential(w, alg))


def laplacian_direct(geo: Geometry) -> AltForm:
    """``Delta phi`` through the exterior-derivative path."""
    return hodge_laplacian(geo.g2.phi, geo)


def laplacian_phi_decomposed(geo: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """``(X, h)`` with ``Delta phi = X _| psi + 3 i_phi(h)``, from torsion and curvature alone."""
    T, g = geo.T, geo.g2.g
    v = geo.t_phi()
    t_psi = geo.t_psi()
    mixed = geo.mat(T, t_psi) - geo.mat(T.T, t_psi)
    norm2 = geo.norm_t2()
    h = (-0.25 * geo.curv.ric_star
         + (geo.curv.scal + 2.0 * norm2) / 6.0 * g
         - geo.mat(T.T, T)
         - 0.5 * np.outer(v, v)
         + 0.25 * geo.circ(T, T) + 0.25 * geo.circ(T.T, T.T) - 0.5 * geo.circ(T, T.T)
         + 0.5 * (mixed + mixed.T)
         + 0.5 * geo.psi_tt() * g)
    h = 0.5 * (h + h.T)
    x = -geo.g2.metric.inverse @ geo.div_t()
    return x, h


def laplacian_phi_split(geo: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """``(X, h)`` read off from the direct Laplacian by type decomposition."""
    x, h3 = symmetric_part_of_3form(laplacian_direct(geo), geo.g2)
    return x, h3 / 3.0


def coclosed_s_forms(geo: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """The Ricci form and the curl form of ``s`` for a co-closed structure (they coincide)."""
    T, g = geo.T, geo.g2.g
    tr = geo.trace(T)
    norm2 = geo.norm_t2()
    tt = geo.circ(T, T)
    T2 = geo.mat(T, T)
    s_ric = geo.curv.ric + (geo.curv.scal + 2.0 * norm2) / 6.0 * g - tr * T - 0.5 * tt
    s_curl = -geo.curl_t() + (tr * tr + norm2) / 6.0 * g - T2 - 0.5 * tt
    return s_ric, s_curl


def laplacian_psi_coclosed(geo: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """``(X, s)`` with ``Delta phi = X _| psi + 3 i_phi(s)`` on a co-closed structure."""
    residual = dpsi_norm(geo)
    if residual > VANISH_TOL:
        raise NotCoclosed(f"|d psi| = {residual:.3e}")
    _, s_curl = coclosed_s_forms(geo)
    x = -geo.g2.metric.inverse @ geo.div_t()
    return x, s_curl


def laplacian_crosscheck(geo: Geometry) -> dict[str, float]:
    """Relative error of the torsion decomposition against the direct Laplacian, and trace residuals."""
    direct = laplacian_direct(geo)
    x, h = laplacian_phi_decomposed(geo)
    assembled = assemble_3form(x, 3.0 * h, geo.g2)
    scale = max(1.0, float(np.abs(direct.packed).max()))
    target = 2.0 / 3.0 * geo.curv.scal + 4.0 / 3.0 * geo.norm_t2()
    out = {
        "decomposed_vs_direct": float(np.abs((assembled - direct).packed).max()) / scale,
        "trace_h": abs(geo.trace(h) - target),
    }
    if dpsi_norm(geo) <= VANISH_TOL:
        s_ric, s_curl = coclosed_s_forms(geo)
        x_c, s = laplacian_psi_coclosed(geo)
        cocl = assemble_3form(x_c, 3.0 * s, geo.g2)
        out["coclosed_vs_direct"] = float(np.abs((cocl - direct).packed).max()) / scale
        out["s_forms"] = float(np.abs(s_ric - s_curl).max())
        out["trace_s"] = abs(geo.trace(s) - target)
    return out
