"""Named Lie algebras with invariant G2-structures used as reference cases.

flat7
    Abelian algebra with the canonical 3-form: torsion-free, every flow is stationary.

heisenberg7
    The 7-dimensional Heisenberg algebra with structure equations
    ``de^1 = omega = e23 + e45 + e67`` and ``de^i = 0`` otherwise, that is
    ``[e2, e3] = [e4, e5] = [e6, e7] = -e1`` (1-based).  Every term of ``psi0`` either avoids
    ``e^1`` (so it is built from closed 1-forms) or is ``e^1 ^ beta`` with
    ``beta`` one of ``e357, e346, e256, e247``, and ``omega ^ beta = 0`` for each.
    Hence ``d psi0 = 0`` and the canonical structure is co-closed, while
    ``d phi0 = omega ^ omega != 0``.  Its torsion is symmetric with ``Tr T = 3/2``.
    Reversing the sign of ``omega`` gives the structure ``-phi0`` up to
    isomorphism; it has ``Tr T = -3/2`` and is not equivalent for the modified
    coflow, whose constant ``A`` breaks the ``phi -> -phi`` symmetry.

almost_abelian_a
    ``R x_A R^6`` with ``[e1, e_j] = A e_j`` on ``span(e2..e7)``,
    ``A = diag(1, 1, -1, -1, 0, 0)``.  In the complex frame
    ``(e2 + i e3, e4 + i e5, e6 + i e7)`` this ``A`` lies in ``sl(3, C)``, which
    is the condition for the canonical 3-form to be closed.  Since ``A`` is
    not skew the structure is closed but not torsion-free, and the algebra is
    unimodular because ``Tr A = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .exterior import AltForm
from .lie import LieAlgebra
from .structure import standard_phi


@dataclass(frozen=True, eq=False)
class Preset:
    name: str
    algebra: LieAlgebra
    phi: AltForm
    description: str


def _flat7() -> Preset:
    return Preset("flat7", LieAlgebra.abelian("flat7"), standard_phi(),
                  "abelian algebra, canonical 3-form; torsion-free")


def _heisenberg7() -> Preset:
    alg = LieAlgebra.from_brackets([(1, 2, 0, -1.0), (3, 4, 0, -1.0), (5, 6, 0, -1.0)], name="heisenberg7")
    return Preset("heisenberg7", alg, standard_phi(), "Heisenberg algebra, canonical 3-form; co-closed")


ALMOST_ABELIAN_A = np.diag([1.0, 1.0, -1.0, -1.0, 0.0, 0.0])


def almost_abelian(a: np.ndarray, name: str = "almost_abelian") -> LieAlgebra:
    """``[e1, e_j] = sum_k a[k-2, j-2] e_k`` for ``j, k`` in 2..7 (1-based)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (6, 6):
        raise ConfigError(f"almost-abelian matrix must be 6 x 6, got {a.shape}")
    brackets = [(0, j + 1, k + 1, a[k, j]) for j in range(6) for k in range(6) if a[k, j] != 0.0]
    return LieAlgebra.from_brackets(brackets, name=name)


def _almost_abelian_a() -> Preset:
    return Preset("almost_abelian_a", almost_abelian(ALMOST_ABELIAN_A, "almost_abelian_a"), standard_phi(),
                  "almost-abelian, A = diag(1,1,-1,-1,0,0); closed with |T|^2 = -R")


_REGISTRY = {
    "flat7": _flat7,
    "heisenberg7": _heisenberg7,
    "almost_abelian_a": _almost_abelian_a,
}


def preset_names() -> list[str]:
    return list(_REGISTRY)


def get_preset(name: str) -> Preset:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(_REGISTRY)}") from None
