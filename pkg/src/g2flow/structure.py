"""G2-structures: metric from a positive 3-form, the dual 4-form, type decompositions.

The canonical 3-form (Bryant's sign convention), with ``eijk = e^i ^ e^j ^ e^k``::

    phi0 = e123 + e145 + e167 + e246 - e257 - e347 - e356

It induces the identity metric and orientation ``e^{1..7}``, and

    psi0 = *phi0 = e4567 + e2367 + e2345 + e1357 - e1346 - e1256 - e1247.

In this convention ``phi_{abk} phi_{cd}^k = g_ac g_bd - g_ad g_bc + psi_{abcd}``
and ``*(X _| psi) = -X ^ phi``.  Every contraction constant used by the
projections is recomputed from ``phi0`` at import (see ``CONTRACTIONS``).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import NotPositive
from .exterior import (
    DIM,
    AltForm,
    Metric7,
    hodge_star,
    interior,
    raise_indices,
    wedge,
)

PHI0_TERMS = (
    (1.0, (1, 2, 3)), (1.0, (1, 4, 5)), (1.0, (1, 6, 7)), (1.0, (2, 4, 6)),
    (-1.0, (2, 5, 7)), (-1.0, (3, 4, 7)), (-1.0, (3, 5, 6)),
)

# smallest admissible |eigenvalue| of the bilinear form B; below it phi is treated as degenerate
POSITIVITY_FLOOR = 1e-12


def standard_phi() -> AltForm:
    return AltForm.from_terms(3, [(c, tuple(i - 1 for i in idx)) for c, idx in PHI0_TERMS])


def bilinear_form(phi: AltForm) -> np.ndarray:
    """``B`` with ``(u _| phi) ^ (v _| phi) ^ phi = 6 B(u, v) e^{1..7}``."""
    # eps_{abcdefg} phi_{efg} = 6 (*_0 phi)_{abcd} for the frame metric
    q = hodge_star(phi, Metric7.identity()).dense
    p = phi.dense
    return np.einsum("iab,jcd,abcd->ij", p, p, q, optimize=True) / 24.0


def metric_from_phi(phi: AltForm) -> tuple[Metric7, AltForm, int]:
    """Metric, volume form and orientation sign induced by a positive 3-form.

    ``g = B det(B)^(-1/9)`` after flipping the sign of a negative-definite
    ``B``; the flip is the orientation.  Raises ``NotPositive`` when ``B`` is
    indefinite or degenerate.
    """
    if phi.degree != 3:
        raise NotPositive(f"expected a 3-form, got degree {phi.degree}")
    b = bilinear_form(phi)
    b = 0.5 * (b + b.T)
    eig = np.linalg.eigvalsh(b)
    if np.all(eig > POSITIVITY_FLOOR):
        orientation = 1
    elif np.all(eig < -POSITIVITY_FLOOR):
        orientation = -1
        b = -b
        eig = -eig[::-1]
    else:
        raise NotPositive(f"bilinear form B is not definite (eigenvalues {eig.min():.3e} .. {eig.max():.3e})")
    log_det = float(np.sum(np.log(eig)))
    metric = Metric7(b * np.exp(-log_det / 9.0))
    vol = AltForm(DIM, [orientation * metric.volume_density])
    return metric, vol, orientation


@dataclass(frozen=True, eq=False)
class G2Structure:
    """A positive 3-form with its derived metric, dual 4-form and volume form."""

    phi: AltForm
    metric: Metric7
    psi: AltForm
    orientation: int
    vol: AltForm

    @classmethod
    def from_phi(cls, phi: AltForm) -> "G2Structure":
        metric, vol, orientation = metric_from_phi(phi)
        psi = hodge_star(phi, metric, orientation)
        return cls(phi, metric, psi, orientation, vol)

    @classmethod
    def standard(cls) -> "G2Structure":
        return cls.from_phi(standard_phi())

    @property
    def g(self) -> np.ndarray:
        return self.metric.g

    def star(self, w: AltForm) -> AltForm:
        return hodge_star(w, self.metric, self.orientation)

    @functools.cached_property
    def phi_up(self) -> np.ndarray:
        return raise_indices(self.phi.dense, self.metric)

    @functools.cached_property
    def psi_up(self) -> np.ndarray:
        return raise_indices(self.psi.dense, self.metric)


def _brute_force_contractions() -> dict[str, float]:
    """Contraction constants of the canonical structure, by explicit index loops."""
    p = standard_phi().dense
    s = hodge_star(standard_phi(), Metric7.identity()).dense
    rng = range(DIM)
    phi_phi = sum(p[0, m, n] * p[0, m, n] for m in rng for n in rng)
    psi_psi = sum(s[0, b, c, d] * s[0, b, c, d] for b in rng for c in rng for d in rng)
    # phi_{imn} psi_{abmn} = k phi_{iab}, read off at (i, a, b) = (0, 1, 2) where phi_{012} = 1
    phi_psi = sum(p[0, m, n] * s[1, 2, m, n] for m in rng for n in rng)
    # i_phi(h)_{amn} phi_b^{mn} for the traceless h = e^1 e^2 + e^2 e^1, component (0, 1)
    h = np.zeros((DIM, DIM))
    h[0, 1] = h[1, 0] = 1.0
    ih = i_phi_dense(h, p)
    iphi_traceless = sum(ih[0, m, n] * p[1, m, n] for m in rng for n in rng)
    return {
        "phi_phi": float(phi_phi),          # phi_{amn} phi_b^{mn} = 6 g_ab
        "psi_psi": float(psi_psi),          # psi_{abcd} psi_e^{bcd} = 24 g_ae
        "phi_psi": float(phi_psi),          # phi_{imn} psi_{ab}^{mn} = 4 phi_{iab}
        "iphi_traceless": float(iphi_traceless),  # i_phi(h)_{amn} phi_b^{mn} = (4/3) h_ab, Tr h = 0
    }


def i_phi_dense(h_mixed: np.ndarray, phi_dense: np.ndarray) -> np.ndarray:
    """Dense ``h^d_[a phi_bc]d`` from the mixed tensor ``h_a^d``."""
    t = np.einsum("ad,dbc->abc", h_mixed, phi_dense)
    return (t + np.einsum("abc->bca", t) + np.einsum("abc->cab", t)) / 3.0


CONTRACTIONS = _brute_force_contractions()


def i_phi(h, g2: G2Structure) -> AltForm:
    """``i_phi(h)_{abc} = h^d_[a phi_bc]d`` for a lowered symmetric 2-tensor ``h``."""
    h_mixed = np.asarray(h, dtype=float) @ g2.metric.inverse
    return AltForm.from_dense(np.einsum("ad,dbc->abc", h_mixed, g2.phi.dense))


def i_psi(h, g2: G2Structure) -> AltForm:
    """``i_psi(h)_{abcd} = -h^e_[a psi_bcd]e`` for a lowered symmetric 2-tensor ``h``."""
    h_mixed = np.asarray(h, dtype=float) @ g2.metric.inverse
    # -h_a^e psi_{bcde} = h_a^e psi_{ebcd}
    return AltForm.from_dense(np.einsum("ae,ebcd->abcd", h_mixed, g2.psi.dense))


def project_2form(b: AltForm, g2: G2Structure) -> tuple[np.ndarray, AltForm]:
    """Split ``b = x7 _| phi + b14``; returns the vector ``x7`` and the 14-part."""
    # (x _| phi)^{mn} phi_{mna} = phi_phi x_a
    contracted = np.einsum("mn,mna->a", raise_indices(b.dense, g2.metric), g2.phi.dense)
    x7 = g2.metric.inverse @ contracted / CONTRACTIONS["phi_phi"]
    return x7, b - interior(x7, g2.phi)


def _three_form_contraction(s_dense: np.ndarray, g2: G2Structure) -> np.ndarray:
    # K_ab = s_{amn} phi_b^{mn}
    phi_mix = raise_indices(g2.phi.dense, g2.metric, axes=(1, 2))
    return np.einsum("amn,bmn->ab", s_dense, phi_mix)


def project_3form(s: AltForm, g2: G2Structure) -> tuple[float, np.ndarray, np.ndarray]:
    """Split ``s = f phi + x _| psi + i_phi(h27)``; returns ``(f, x, h27)``.

    ``x`` is a vector, ``h27`` a lowered traceless symmetric 2-tensor.
    """
    k = _three_form_contraction(s.dense, g2)
    ginv = g2.metric.inverse
    sym = 0.5 * (k + k.T)
    skew = 0.5 * (k - k.T)
    trace = float(np.einsum("ab,ab->", ginv, sym))
    f = trace / (DIM * CONTRACTIONS["phi_phi"])
    h27 = (sym - (trace / DIM) * g2.g) / CONTRACTIONS["iphi_traceless"]
    # Skew(K) = phi_psi (x _| phi); contracting with phi^{ab c} gives phi_phi * phi_psi * x^c
    x = np.einsum("ab,abc->c", skew, g2.phi_up) / (CONTRACTIONS["phi_psi"] * CONTRACTIONS["phi_phi"])
    return f, x, h27


def project_4form(c: AltForm, g2: G2Structure) -> tuple[float, np.ndarray, np.ndarray]:
    """Split ``c = f psi + *(x _| psi) + *i_phi(h27)`` by applying ``project_3form`` to ``*c``.

    Because ``*(x _| psi) = -x ^ phi`` here, ``x ^ phi`` projects to ``-x``.
    """
    return project_3form(g2.star(c), g2)


def symmetric_part_of_3form(s: AltForm, g2: G2Structure) -> tuple[np.ndarray, np.ndarray]:
    """``(x, h)`` with ``s = x _| psi + i_phi(h)`` and ``h`` symmetric (trace included)."""
    f, x, h27 = project_3form(s, g2)
    return x, f * g2.g + h27


def assemble_3form(x, h, g2: G2Structure) -> AltForm:
    """``x _| psi + i_phi(h)``."""
    return interior(x, g2.psi) + i_phi(h, g2)


def projector_matrices(g2: G2Structure) -> dict[str, np.ndarray]:
    """Matrices of pi_1, pi_7, pi_27 on packed 3-forms (35 x 35)."""
    n = 35
    cols = {"1": [], "7": [], "27": []}
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        f, x, h27 = project_3form(AltForm(3, e), g2)
        cols["1"].append((f * g2.phi).packed)
        cols["7"].append(interior(x, g2.psi).packed)
        cols["27"].append(i_phi(h27, g2).packed)
    return {k: np.array(v).T for k, v in cols.items()}


def x_wedge_phi(x, g2: G2Structure) -> AltForm:
    """``X^b ^ phi`` with the vector lowered by the metric."""
    return wedge(AltForm(1, g2.g @ np.asarray(x, dtype=float)), g2.phi)
