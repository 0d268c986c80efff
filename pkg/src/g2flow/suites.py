"""Residual suites with pass/fail tolerances, as used by the command line."""
from __future__ import annotations

import numpy as np

from .exterior import AltForm
from .flows import FlowSpec, evolution_crosscheck, integrate, shi_quantity
from .laplacian import laplacian_crosscheck
from .lie import LieAlgebra
from .torsion import Geometry, coclosed_identity_suite, dpsi_norm, identity_suite, VANISH_TOL

# absolute tolerances, multiplied by residual_scale of the structure
TOLERANCES = {
    "identity": 1e-10,
    "coclosed": 1e-10,
    "laplacian_relative": 1e-8,
    "laplacian_trace": 1e-10,
    "evolution": 1e-6,
}
EVOLUTION_WINDOW = {"dt": 1e-4, "steps": 8}


def residual_scale(geo: Geometry) -> float:
    """``1 + |T|^2 + |Riem| + |nabla T|``: roundoff in the identities grows like these."""
    riem, t, nt = shi_quantity(geo)
    return 1.0 + t * t + riem + nt


def _result(residuals: dict, tol: float, note: str = "") -> dict:
    residuals = {k: float(v) for k, v in residuals.items()}
    worst = max(residuals.values(), default=0.0)
    out = {"status": "pass" if worst < tol else "fail", "tolerance": tol, "max_residual": worst,
           "residuals": residuals}
    if note:
        out["note"] = note
    return out


def identity_result(geo: Geometry) -> dict:
    return _result(identity_suite(geo), TOLERANCES["identity"] * residual_scale(geo))


def coclosed_result(geo: Geometry) -> dict:
    if dpsi_norm(geo) > VANISH_TOL:
        return {"status": "skipped", "note": f"structure is not co-closed (|d psi| = {dpsi_norm(geo):.3e})"}
    return _result(coclosed_identity_suite(geo), TOLERANCES["coclosed"] * residual_scale(geo))


def laplacian_result(geo: Geometry) -> dict:
    res = laplacian_crosscheck(geo)
    scale = residual_scale(geo)
    rel = {k: v for k, v in res.items() if k.endswith("_vs_direct")}
    absolute = {k: v for k, v in res.items() if k not in rel}
    ok = (max(rel.values()) < TOLERANCES["laplacian_relative"]
          and max(absolute.values()) < TOLERANCES["laplacian_trace"] * scale)
    return {"status": "pass" if ok else "fail",
            "tolerance": {"relative": TOLERANCES["laplacian_relative"],
                          "absolute": TOLERANCES["laplacian_trace"] * scale},
            "max_residual": float(max(res.values())),
            "residuals": {k: float(v) for k, v in res.items()}}


def evolution_result(phi: AltForm, alg: LieAlgebra, spec: FlowSpec | None) -> dict:
    spec = (spec or FlowSpec()).replace(dt=EVOLUTION_WINDOW["dt"], t_max=EVOLUTION_WINDOW["dt"] * EVOLUTION_WINDOW["steps"],
                                        monitor_stride=1)
    trace = integrate(phi, alg, spec)
    if trace.halt_reason != "t_max":
        return {"status": "skipped", "note": f"window run halted: {trace.halt_reason}"}
    scale = residual_scale(trace.geometry(0))
    out = _result(evolution_crosscheck(trace), TOLERANCES["evolution"] * scale)
    out["flow"] = spec.kind
    return out


def run_suites(alg: LieAlgebra, phi: AltForm, names, flow: FlowSpec | None = None) -> dict:
    """Run the named suites; ``report["passed"]`` is False if any suite failed."""
    geo = Geometry.from_phi(phi, alg)
    report = {"torsion_class": geo.torsion.class_flags.as_dict(), "suites": {}}
    for name in names:
        if name == "identity":
            report["suites"][name] = identity_result(geo)
        elif name == "coclosed":
            report["suites"][name] = coclosed_result(geo)
        elif name == "laplacian_crosscheck":
            report["suites"][name] = laplacian_result(geo)
        elif name == "evolution_crosscheck":
            report["suites"][name] = evolution_result(phi, alg, flow)
        else:
            raise ValueError(f"unknown suite {name!r}")
    report["passed"] = all(r["status"] != "fail" for r in report["suites"].values())
    return report


def final_residuals(geo: Geometry) -> dict:
    """Compact residual summary of a single state for run summaries."""
    ident = identity_suite(geo)
    return {
        "identity_max": float(max(ident.values())),
        "dpsi": float(dpsi_norm(geo)),
        "laplacian_relative": float(laplacian_crosscheck(geo)["decomposed_vs_direct"]),
        "torsion_norm": float(np.sqrt(max(geo.norm_t2(), 0.0))),
    }
