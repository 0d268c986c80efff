"""Left-invariant geometry on a 7-dimensional Lie group, computed in the Lie-algebra frame.

All tensors have constant coefficients in the left-invariant frame ``e_1..e_7``,
so derivatives reduce to contractions with the structure constants and the
connection coefficients.  Index conventions:

* ``c[i, j, k] = c^k_{ij}`` with ``[e_i, e_j] = c^k_{ij} e_k``;
* ``gamma[i, j, k] = Gamma^k_{ij}`` with ``nabla_{e_i} e_j = Gamma^k_{ij} e_k``;
* ``riem[i, j, k, l] = g(R(e_i, e_j) e_l, e_k)``, so ``ric[j, l] = g^{ik} riem[i, j, k, l]``
  and the round sphere has positive Ricci curvature.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DegreeError, InvalidAlgebra
from .exterior import (
    DIM,
    AltForm,
    Metric7,
    basis,
    basis_index,
    hodge_star,
    permutation_sign,
    raise_indices,
    tensor_norm,
)

JACOBI_TOL = 1e-12


def jacobi_residual(c: np.ndarray) -> float:
    """Max entry of the cyclic sum ``[[e_i, e_j], e_k] + cyclic``."""
    c = np.asarray(c, dtype=float)
    ijk = np.einsum("ijm,mkn->ijkn", c, c)
    total = ijk + np.transpose(ijk, (1, 2, 0, 3)) + np.transpose(ijk, (2, 0, 1, 3))
    return float(np.abs(total).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants of a 7-dimensional real Lie algebra."""

    c: np.ndarray
    name: str = "custom"
    check_jacobi: bool = True

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (DIM, DIM, DIM):
            raise InvalidAlgebra(f"structure constants must have shape {(DIM,) * 3}, got {c.shape}")
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        if np.abs(c + c.transpose(1, 0, 2)).max() > 1e-12 * scale:
            raise InvalidAlgebra("structure constants are not antisymmetric in the lower indices")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        if self.check_jacobi and self.jacobi_residual > JACOBI_TOL * scale * scale:
            raise InvalidAlgebra(f"Jacobi identity violated (residual {self.jacobi_residual:.3e})")

    @classmethod
    def from_brackets(cls, brackets, name: str = "custom", check_jacobi: bool = True) -> "LieAlgebra":
        """Build from ``(i, j, k, value)`` meaning ``[e_i, e_j] += value e_k`` (0-based), completing antisymmetry."""
        c = np.zeros((DIM, DIM, DIM))
        for i, j, k, value in brackets:
            if i == j:
                raise InvalidAlgebra(f"bracket [e{i}, e{i}] must vanish")
            c[i, j, k] += value
            c[j, i, k] -= value
        return cls(c, name=name, check_jacobi=check_jacobi)

    @classmethod
    def abelian(cls, name: str = "abelian") -> "LieAlgebra":
        return cls(np.zeros((DIM, DIM, DIM)), name=name)

    @functools.cached_property
    def jacobi_residual(self) -> float:
        return jacobi_residual(self.c)

    @functools.cached_property
    def unimodular(self) -> bool:
        return bool(np.abs(np.einsum("ikk->i", self.c)).max() < 1e-12)

    @functools.cached_property
    def is_abelian(self) -> bool:
        return not np.any(self.c)

    def brackets(self) -> list[tuple[int, int, int, float]]:
        """Nonzero ``(i, j, k, value)`` with ``i < j``, in lexicographic order."""
        out = []
        for i in range(DIM):
            for j in range(i + 1, DIM):
                for k in range(DIM):
                    if self.c[i, j, k] != 0.0:
                        out.append((i, j, k, float(self.c[i, j, k])))
        return out

    def d_matrix(self, k: int) -> np.ndarray:
        """Matrix of d on packed k-forms (rows: packed (k+1)-forms)."""
        return _d_matrices(self)[k]


@functools.lru_cache(maxsize=64)
def _d_matrices(alg: LieAlgebra) -> tuple[np.ndarray, ...]:
    mats = []
    for k in range(DIM):
        cols = basis_index(k)
        mat = np.zeros((len(basis(k + 1)), len(basis(k))))
        for row, out in enumerate(basis(k + 1)):
            for p in range(k + 1):
                for q in range(p + 1, k + 1):
                    rest = tuple(out[r] for r in range(k + 1) if r not in (p, q))
                    sign_pq = -1.0 if (p + q) % 2 else 1.0
                    for m in range(DIM):
                        coeff = alg.c[out[p], out[q], m]
                        if coeff == 0.0 or m in rest:
                            continue
                        idx = (m,) + rest
                        mat[row, cols[tuple(sorted(idx))]] += sign_pq * coeff * permutation_sign(idx)
        mat.setflags(write=False)
        mats.append(mat)
    return tuple(mats)


def ce_differential(w: AltForm, alg: LieAlgebra, *, strict: bool = True) -> AltForm:
    """Exterior derivative of a left-invariant form: ``(d e^k)(e_i, e_j) = -c^k_{ij}``, extended as an antiderivation."""
    if w.degree >= DIM:
        raise DegreeError(f"d of a degree-{w.degree} form is not defined in dimension {DIM}")
    if strict and alg.jacobi_residual > JACOBI_TOL * max(1.0, float(np.abs(alg.c).max())) ** 2:
        raise InvalidAlgebra(f"Jacobi identity violated (residual {alg.jacobi_residual:.3e})")
    return AltForm(w.degree + 1, alg.d_matrix(w.degree) @ w.packed)


def hodge_codifferential(w: AltForm, metric: Metric7, alg: LieAlgebra, orientation: int = 1) -> AltForm:
    """``d* = (-1)^k * d *`` on k-forms in dimension 7.

    Adjoint to d for the frame-volume pairing only on unimodular algebras.
    """
    if w.degree == 0:
        raise DegreeError("codifferential of a 0-form is not defined")
    star_w = hodge_star(w, metric, orientation)
    out = hodge_star(ce_differential(star_w, alg), metric, orientation)
    return out if w.degree % 2 == 0 else -out


@dataclass(frozen=True, eq=False)
class Connection:
    """Levi-Civita connection coefficients ``gamma[i, j, k] = Gamma^k_{ij}``."""

    gamma: np.ndarray
    metric: Metric7
    algebra: LieAlgebra


def koszul_lowered(metric: Metric7, alg: LieAlgebra) -> np.ndarray:
    """``g(nabla_{e_i} e_j, e_l)`` from ``2g(nabla_X Y, Z) = g([X,Y],Z) - g([Y,Z],X) + g([Z,X],Y)``."""
    cg = np.einsum("ijm,ml->ijl", alg.c, metric.g)
    return 0.5 * (cg - np.einsum("jli->ijl", cg) + np.einsum("lij->ijl", cg))


def levi_civita(metric: Metric7, alg: LieAlgebra) -> Connection:
    if not isinstance(metric, Metric7):
        metric = Metric7(metric)  # raises MetricError
    gamma = koszul_lowered(metric, alg) @ metric.inverse
    gamma.setflags(write=False)
    return Connection(gamma, metric, alg)


def covariant_derivative(t, conn: Connection, upper=()) -> np.ndarray:
    """``nabla t`` of a left-invariant tensor; the derivative index is prepended.

    ``upper`` lists the slots of ``t`` that are contravariant.
    """
    t = np.asarray(t, dtype=float)
    gamma = conn.gamma
    out = np.zeros((DIM,) + t.shape)
    for slot in range(t.ndim):
        if slot in upper:
            # + Gamma^b_{a m} t^{..m..}
            term = np.tensordot(gamma, t, axes=([1], [slot]))  # (a, b, rest...)
        else:
            # - Gamma^m_{a b} t_{..m..}
            term = -np.tensordot(gamma, t, axes=([2], [slot]))  # (a, b, rest...)
        out += np.moveaxis(term, 1, slot + 1)
    return out


@dataclass(frozen=True, eq=False)
class Curvature:
    riem: np.ndarray
    ric: np.ndarray
    scal: float
    ric_star: np.ndarray | None = None


def riemann_tensor(conn: Connection) -> np.ndarray:
    """Fully lowered ``riem[i, j, k, l] = g(R(e_i, e_j) e_l, e_k)``."""
    gamma, c = conn.gamma, conn.algebra.c
    # component n of R(e_i, e_j) e_k
    rfull = (np.einsum("jkm,imn->ijkn", gamma, gamma)
             - np.einsum("ikm,jmn->ijkn", gamma, gamma)
             - np.einsum("ijm,mkn->ijkn", c, gamma))
    return np.einsum("ijln,nk->ijkl", rfull, conn.metric.g)


def curvature(conn: Connection, phi: AltForm | None = None) -> Curvature:
    """Riemann, Ricci and scalar curvature; ``Ric*`` when a 3-form is supplied."""
    riem = riemann_tensor(conn)
    ginv = conn.metric.inverse
    ric = np.einsum("ik,ijkl->jl", ginv, riem)
    scal = float(np.einsum("jl,jl->", ginv, ric))
    ric_star = None
    if phi is not None:
        phi_up = raise_indices(phi.dense, conn.metric, axes=(0, 1))
        ric_star = np.einsum("mnpq,mna,pqb->ab", riem, phi_up, phi_up)
    return Curvature(riem, ric, scal, ric_star)


def lower_vector(x, metric: Metric7) -> np.ndarray:
    return metric.g @ np.asarray(x, dtype=float)


def raise_covector(x, metric: Metric7) -> np.ndarray:
    return metric.inverse @ np.asarray(x, dtype=float)


def div_vector(x, conn: Connection) -> float:
    """``div X = nabla_a X^a`` for a vector ``X`` (upper index)."""
    return float(np.trace(covariant_derivative(x, conn, upper=(0,))))


def div_tensor(beta, conn: Connection) -> np.ndarray:
    """``(div beta)_b = nabla^a beta_{ab}`` for a lowered 2-tensor; returns a covector."""
    nb = covariant_derivative(beta, conn)
    return np.einsum("ca,cab->b", conn.metric.inverse, nb)


def curl_vector(x, conn: Connection, phi: AltForm) -> np.ndarray:
    """``(curl X)^a = (nabla_b X_c) phi^{abc}`` for a vector ``X``; returns a vector."""
    nx = covariant_derivative(lower_vector(x, conn.metric), conn)
    phi_up = raise_indices(phi.dense, conn.metric)
    return np.einsum("bc,abc->a", nx, phi_up)


def curl_tensor(beta, conn: Connection, phi: AltForm) -> np.ndarray:
    """``(curl beta)_{ab} = (nabla_m beta_{na}) phi_b^{mn}`` for a lowered 2-tensor."""
    nb = covariant_derivative(beta, conn)
    phi_mix = raise_indices(phi.dense, conn.metric, axes=(1, 2))
    return np.einsum("mna,bmn->ab", nb, phi_mix)


def circ_product(alpha, beta, phi: AltForm, metric: Metric7) -> np.ndarray:
    """``(alpha o beta)_{ab} = phi_{amn} phi_{bpq} alpha^{mp} beta^{nq}`` for lowered 2-tensors."""
    a_up = raise_indices(alpha, metric)
    b_up = raise_indices(beta, metric)
    return np.einsum("amn,bpq,mp,nq->ab", phi.dense, phi.dense, a_up, b_up, optimize=True)


def rough_laplacian(t, conn: Connection) -> np.ndarray:
    """``g^{ab} nabla_a nabla_b t`` for a lowered tensor."""
    nnt = covariant_derivative(covariant_derivative(t, conn), conn)
    return np.tensordot(conn.metric.inverse, nnt, axes=([0, 1], [0, 1]))


def full_norm(t, metric: Metric7) -> float:
    return tensor_norm(t, metric)
