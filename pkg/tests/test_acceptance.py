"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Criteria 3 and 4 quote two formulas that do not hold as written (see the
notes in ``g2flow.laplacian`` and ``g2flow.torsion``).  Their lines report
the literal statement, which fails, next to the corrected form, which is
what the library implements.  The literal clauses are kept as strict xfail
tests so that they stay visible.
"""
import itertools
import time

import numpy as np
import pytest

from g2flow.exterior import AltForm, form_norm, wedge
from g2flow.flows import FLOW_KINDS, FlowSpec, evolution_crosscheck, integrate, observed_order, velocity
from g2flow.laplacian import coclosed_s_forms, laplacian_crosscheck, laplacian_direct, laplacian_phi_decomposed
from g2flow.lie import LieAlgebra
from g2flow.presets import get_preset, preset_names
from g2flow.structure import CONTRACTIONS, G2Structure, assemble_3form, metric_from_phi, standard_phi
from g2flow.torsion import Geometry, coclosed_identity_suite, identity_suite


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def geo_of(name):
    p = get_preset(name)
    return Geometry.from_phi(p.phi, p.algebra)


def literal_h_residuals(geo):
    """The Laplacian decomposition with ``h`` exactly as usually quoted (no ``psi(T, T)`` term)."""
    x, h = laplacian_phi_decomposed(geo)
    h_lit = h - 0.5 * geo.psi_tt() * geo.g2.g
    direct = laplacian_direct(geo)
    scale = max(1.0, float(np.abs(direct.packed).max()))
    rel = float(np.abs((assemble_3form(x, 3.0 * h_lit, geo.g2) - direct).packed).max()) / scale
    target = 2.0 / 3.0 * geo.curv.scal + 4.0 / 3.0 * geo.norm_t2()
    return rel, abs(geo.trace(h_lit) - target)


def literal_coclosed_residuals(geo):
    T = geo.T
    tr, T2, tt, curl = geo.trace(T), geo.mat(T, T), geo.circ(T, T), geo.curl_t()
    ric = geo.curv.ric
    ric_lit = float(np.abs(ric - (curl - T2 + tr * T)).max())
    s_ric_lit = -ric + (geo.curv.scal + 2.0 * geo.norm_t2()) / 6.0 * geo.g2.g + tr * T - 2.0 * T2 - 0.5 * tt
    _, s_curl = coclosed_s_forms(geo)
    star_lit = float(np.abs(0.25 * geo.curv.ric_star - (ric + 0.5 * tt + T2 - tr * T)).max())
    return {"ricci": ric_lit, "s_forms": float(np.abs(s_ric_lit - s_curl).max()), "ricci_star_alt": star_lit}


def test_criterion_1_bring_up(capsys):
    start = time.perf_counter()
    phi0 = standard_phi()
    metric, vol, orientation = metric_from_phi(phi0)
    g2 = G2Structure.from_phi(phi0)
    psi0 = AltForm.from_terms(4, [(1, (3, 4, 5, 6)), (1, (1, 2, 5, 6)), (1, (1, 2, 3, 4)), (1, (0, 2, 4, 6)),
                                  (-1, (0, 2, 3, 5)), (-1, (0, 1, 4, 5)), (-1, (0, 1, 3, 6))])
    errs = {
        "metric": float(np.abs(metric.g - np.eye(7)).max()),
        "star_phi": float(np.abs((g2.psi - psi0).packed).max()),
        "norm_phi": abs(form_norm(phi0, metric) ** 2 - 7.0),
        "norm_psi": abs(form_norm(g2.psi, metric) ** 2 - 7.0),
        "phi_psi_vol": float(np.abs((wedge(phi0, g2.psi) - vol * 7.0).packed).max()),
    }
    # brute-force contraction patterns, independent of the stored constants
    p, s = phi0.dense, g2.psi.dense
    phiphi = np.zeros((7, 7))
    psipsi = np.zeros((7, 7))
    for a, b in itertools.product(range(7), repeat=2):
        phiphi[a, b] = sum(p[a, m, n] * p[b, m, n] for m in range(7) for n in range(7))
        psipsi[a, b] = sum(s[a, m, n, k] * s[b, m, n, k] for m in range(7) for n in range(7) for k in range(7))
    errs["phi_phi_6"] = float(np.abs(phiphi - 6.0 * np.eye(7)).max())
    errs["psi_psi_24"] = float(np.abs(psipsi - 24.0 * np.eye(7)).max())
    errs["stored"] = abs(CONTRACTIONS["phi_phi"] - 6.0) + abs(CONTRACTIONS["psi_psi"] - 24.0)
    elapsed = time.perf_counter() - start
    ok = max(errs.values()) < 1e-12 and orientation == 1 and elapsed < 1.0
    report(capsys, 1, ok, f"max residual {max(errs.values()):.2e}, {elapsed:.3f} s")
    assert ok, errs


def test_criterion_2_identity_suite(capsys):
    worst, slowest = 0.0, 0.0
    for name in preset_names():
        start = time.perf_counter()
        res = identity_suite(geo_of(name))
        slowest = max(slowest, time.perf_counter() - start)
        worst = max(worst, max(res.values()))
    ok = worst < 1e-10 and slowest < 1.0
    report(capsys, 2, ok, f"max residual {worst:.2e} over {len(preset_names())} presets, slowest {slowest:.3f} s")
    assert ok


def test_criterion_3_laplacian(capsys):
    rel = trace = lit_rel = lit_trace = 0.0
    for name in preset_names():
        geo = geo_of(name)
        res = laplacian_crosscheck(geo)
        rel, trace = max(rel, res["decomposed_vs_direct"]), max(trace, res["trace_h"])
        lr, lt = literal_h_residuals(geo)
        lit_rel, lit_trace = max(lit_rel, lr), max(lit_trace, lt)
    corrected_ok = rel < 1e-8 and trace < 1e-10
    literal_ok = lit_rel < 1e-8 and lit_trace < 1e-10
    report(capsys, 3, literal_ok,
           f"h as stated: rel {lit_rel:.2e}, Tr h residual {lit_trace:.2e}; "
           f"with +psi(T,T)/2 g: rel {rel:.2e}, Tr h residual {trace:.2e} ({'PASS' if corrected_ok else 'FAIL'})")
    assert corrected_ok


@pytest.mark.xfail(strict=True, reason="h as stated lacks the psi(T,T)/2 g term; fails on almost_abelian_a")
def test_criterion_3_literal_h():
    for name in preset_names():
        rel, trace = literal_h_residuals(geo_of(name))
        assert rel < 1e-8 and trace < 1e-10


def test_criterion_4_coclosed(capsys):
    heis = geo_of("heisenberg7")
    res = coclosed_identity_suite(heis)
    lit = literal_coclosed_residuals(heis)
    closed = geo_of("almost_abelian_a")
    bonus = abs(closed.norm_t2() + closed.curv.scal)
    corrected_ok = max(res.values()) < 1e-10 and bonus < 1e-10
    literal_ok = res["scalar"] < 1e-10 and lit["ricci"] < 1e-10 and lit["s_forms"] < 1e-10 and bonus < 1e-10
    report(capsys, 4, literal_ok,
           f"R residual {res['scalar']:.2e}; Ric = curl T - T^2 + Tr(T) T as stated: {lit['ricci']:.2e}, "
           f"s forms as stated: {lit['s_forms']:.2e}; with Ric = -curl T - T^2 + Tr(T) T: "
           f"max {max(res.values()):.2e} ({'PASS' if corrected_ok else 'FAIL'}); |T|^2 + R (closed) {bonus:.2e}")
    assert corrected_ok


@pytest.mark.xfail(strict=True, reason="the stated co-closed Ricci identity has the wrong sign on curl T")
def test_criterion_4_literal_ricci():
    assert literal_coclosed_residuals(geo_of("heisenberg7"))["ricci"] < 1e-10


def test_criterion_5_conservation(capsys):
    p = get_preset("heisenberg7")
    trace = integrate(p.phi, p.algebra, FlowSpec(kind="modified_coflow", A=7.0, dt=1e-3, t_max=1.0))
    dpsi = max(trace.column("dpsi_residual"))
    drift = max(trace.column("coclass_drift"))
    rhs = max(trace.column("rhs_closedness"))
    ok = (trace.halt_reason == "t_max" and dpsi < 1e-8 and drift < 1e-8 and rhs < 1e-10
          and trace.wall_time < 60.0)
    report(capsys, 5, ok, f"|d psi| {dpsi:.2e}, drift {drift:.2e}, |d rhs| {rhs:.2e}, "
                          f"V {trace.records[0].V:.4f} -> {trace.records[-1].V:.4f}, {trace.wall_time:.1f} s")
    assert ok


def test_criterion_6_evolution(capsys):
    worst = {}
    runs = [("heisenberg7", "modified_coflow"), ("heisenberg7", "coflow_plus"),
            ("almost_abelian_a", "laplacian_flow"), ("almost_abelian_a", "modified_coflow")]
    for name, kind in runs:
        p = get_preset(name)
        trace = integrate(p.phi, p.algebra, FlowSpec(kind=kind, dt=1e-4, t_max=8e-4))
        for k, v in evolution_crosscheck(trace).items():
            worst[k] = max(worst.get(k, 0.0), v)
    ok = max(worst.values()) < 1e-6
    report(capsys, 6, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert ok


def test_criterion_7_order(capsys):
    p = get_preset("heisenberg7")
    order, diffs = observed_order(p.phi, p.algebra, FlowSpec(kind="modified_coflow", dt=0.05, t_max=0.5), levels=3)
    ok = order >= 3.8
    report(capsys, 7, ok, f"observed order {order:.3f}, successive differences "
                          + ", ".join(f"{d:.2e}" for d in diffs))
    assert ok


def test_criterion_8_stationarity_and_volume(capsys):
    p = get_preset("flat7")
    drift = 0.0
    for kind in FLOW_KINDS:
        trace = integrate(p.phi, p.algebra, FlowSpec(kind=kind, dt=0.1, t_max=1.0))
        drift = max(drift, float(np.abs(trace.final_phi.packed - p.phi.packed).max()) / trace.times[-1])
    q = get_preset("almost_abelian_a")
    spec = FlowSpec(kind="laplacian_flow", dt=0.01, t_max=1.0)
    trace = integrate(q.phi, q.algebra, spec)
    rates = []
    for i in range(len(trace.records)):
        geo = trace.geometry(i)
        _, h = velocity(geo, spec)
        rates.append(geo.trace(h) * trace.records[i].V)
    v = trace.column("V")
    min_rate, min_step = min(rates), float(np.diff(v).min())
    ok = drift < 1e-12 and trace.halt_reason == "t_max" and min_rate >= -1e-10 and min_step >= -1e-10
    report(capsys, 8, ok, f"flat drift per unit time {drift:.2e}; closed preset: min dV/dt {min_rate:.3e}, "
                          f"min step increment {min_step:.3e}, V {v[0]:.4f} -> {v[-1]:.4f}")
    assert ok


def test_criterion_9_halting(capsys):
    # Heisenberg brackets scaled by 4: torsion four times larger, blow-up time 16 times shorter
    p = get_preset("heisenberg7")
    big = LieAlgebra(4.0 * p.algebra.c, name="heisenberg7_x4")
    blow_spec = FlowSpec(kind="laplacian_flow", dt=1e-4, t_max=0.05, halting_threshold=1e6, monitor_stride=10)
    blow = integrate(p.phi, big, blow_spec)
    again = integrate(p.phi, big, blow_spec)
    tame_spec = FlowSpec(kind="coflow_plus", dt=1e-2, t_max=1.0)
    tame = integrate(p.phi, p.algebra, tame_spec)
    tame_again = integrate(p.phi, p.algebra, tame_spec)
    deterministic = (np.array_equal(np.array(blow.phis), np.array(again.phis))
                     and np.array_equal(np.array(tame.phis), np.array(tame_again.phis)))
    theta = blow.records[-1].Theta
    ok = (blow.halt_reason == "blow_up" and theta > 1e6 and tame.halt_reason == "t_max"
          and tame.times[-1] == 1.0 and max(tame.column("Theta")) <= 1e6 and deterministic)
    report(capsys, 9, ok, f"large torsion: {blow.halt_reason} at t = {blow.records[-1].t:.4f} (Theta {theta:.2e}); "
                          f"tame: {tame.halt_reason} at t = {tame.times[-1]}; deterministic {deterministic}")
    assert ok
