"""Multilinear algebra on a fixed 7-dimensional frame.

Forms are stored packed: one coefficient per increasing multi-index
``i1 < ... < ik``, in ``itertools.combinations`` order.  The coefficient of
``e^{i1...ik}`` equals the value of the form on ``(e_{i1}, ..., e_{ik})``, so
``(e^1 ^ e^2)(e_1, e_2) = 1`` and no factorials appear in the basis.  A dense,
fully antisymmetric ``(7,)*k`` array is produced on demand for contractions.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeError, MetricError

DIM = 7


def permutation_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (0 if an entry repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@functools.lru_cache(maxsize=None)
def basis(k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(DIM), k))


@functools.lru_cache(maxsize=None)
def basis_index(k: int) -> dict[tuple[int, ...], int]:
    return {idx: n for n, idx in enumerate(basis(k))}


@functools.lru_cache(maxsize=None)
def _unpack_table(k: int):
    # every ordered multi-index with distinct entries, its packed source and sign
    flat, src, sign = [], [], []
    strides = [DIM ** (k - 1 - r) for r in range(k)]
    for n, idx in enumerate(basis(k)):
        for perm in itertools.permutations(range(k)):
            ordered = [idx[p] for p in perm]
            flat.append(sum(s * i for s, i in zip(strides, ordered)))
            src.append(n)
            sign.append(permutation_sign(perm))
    return np.array(flat, dtype=np.intp), np.array(src, dtype=np.intp), np.array(sign, dtype=float)


@functools.lru_cache(maxsize=None)
def _sorted_flat(k: int) -> np.ndarray:
    strides = [DIM ** (k - 1 - r) for r in range(k)]
    return np.array([sum(s * i for s, i in zip(strides, idx)) for idx in basis(k)], dtype=np.intp)


@functools.lru_cache(maxsize=None)
def _wedge_table(k: int, l: int):
    out_index = basis_index(k + l)
    rows, cols, signs = [], [], []
    nb = len(basis(l))
    for i, a in enumerate(basis(k)):
        for j, b in enumerate(basis(l)):
            if set(a) & set(b):
                continue
            merged = a + b
            rows.append(out_index[tuple(sorted(merged))])
            cols.append(i * nb + j)
            signs.append(permutation_sign(merged))
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp), np.array(signs, dtype=float)


@functools.lru_cache(maxsize=None)
def _complement_table(k: int):
    # *e^I is proportional to e^J with J the complement of I; sign of (I, J)
    target = basis_index(DIM - k)
    dest, signs = [], []
    for idx in basis(k):
        comp = tuple(i for i in range(DIM) if i not in idx)
        dest.append(target[comp])
        signs.append(permutation_sign(idx + comp))
    return np.array(dest, dtype=np.intp), np.array(signs, dtype=float)


def pack(dense: np.ndarray) -> np.ndarray:
    """Packed coefficients of an antisymmetric dense array (no symmetrization)."""
    dense = np.asarray(dense, dtype=float)
    k = dense.ndim
    if k == 0:
        return dense.reshape(1).copy()
    return dense.reshape(-1)[_sorted_flat(k)].copy()


def antisymmetrize(t: np.ndarray) -> np.ndarray:
    """Packed coefficients of ``Alt(t)`` for an arbitrary covariant k-tensor."""
    t = np.asarray(t, dtype=float)
    k = t.ndim
    if k == 0:
        return t.reshape(1).copy()
    flat, src, sign = _unpack_table(k)
    total = np.bincount(src, weights=sign * t.reshape(-1)[flat], minlength=len(basis(k)))
    return total / math.factorial(k)


def unpack(k: int, packed: np.ndarray) -> np.ndarray:
    packed = np.asarray(packed, dtype=float)
    if k == 0:
        return packed.reshape(())
    flat, src, sign = _unpack_table(k)
    dense = np.zeros(DIM ** k)
    dense[flat] = sign * packed[src]
    return dense.reshape((DIM,) * k)


class AltForm:
    """An antisymmetric k-form with packed coefficients; immutable."""

    __slots__ = ("degree", "packed", "_dense")

    def __init__(self, degree: int, packed):
        if not 0 <= degree <= DIM:
            raise DegreeError(f"degree {degree} outside 0..{DIM}")
        packed = np.array(packed, dtype=float).reshape(-1)
        if packed.shape[0] != len(basis(degree)):
            raise DegreeError(f"expected {len(basis(degree))} coefficients for degree {degree}, got {packed.shape[0]}")
        packed.setflags(write=False)
        self.degree = degree
        self.packed = packed
        self._dense = None

    @classmethod
    def from_dense(cls, dense, *, antisymmetrize_input: bool = True) -> "AltForm":
        """Build from a dense tensor; by default the input is projected onto its alternating part."""
        dense = np.asarray(dense, dtype=float)
        if antisymmetrize_input:
            return cls(dense.ndim, antisymmetrize(dense))
        return cls(dense.ndim, pack(dense))

    @classmethod
    def zero(cls, degree: int) -> "AltForm":
        return cls(degree, np.zeros(len(basis(degree))))

    @classmethod
    def elementary(cls, indices, coeff: float = 1.0) -> "AltForm":
        """``coeff * e^{i1} ^ ... ^ e^{ik}`` for 0-based, not necessarily sorted indices."""
        indices = tuple(indices)
        out = np.zeros(len(basis(len(indices))))
        sign = permutation_sign(indices)
        if sign:
            out[basis_index(len(indices))[tuple(sorted(indices))]] = sign * coeff
        return cls(len(indices), out)

    @classmethod
    def from_terms(cls, degree: int, terms) -> "AltForm":
        """Sum of ``coeff * e^{indices}`` over ``(coeff, indices)`` pairs."""
        total = cls.zero(degree)
        for coeff, idx in terms:
            total = total + cls.elementary(idx, coeff)
        return total

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            d = unpack(self.degree, self.packed)
            d.setflags(write=False)
            self._dense = d
        return self._dense

    def __add__(self, other: "AltForm") -> "AltForm":
        _same_degree(self, other)
        return AltForm(self.degree, self.packed + other.packed)

    def __sub__(self, other: "AltForm") -> "AltForm":
        _same_degree(self, other)
        return AltForm(self.degree, self.packed - other.packed)

    def __neg__(self) -> "AltForm":
        return AltForm(self.degree, -self.packed)

    def __mul__(self, scalar: float) -> "AltForm":
        return AltForm(self.degree, self.packed * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "AltForm":
        return AltForm(self.degree, self.packed / float(scalar))

    def norm_flat(self) -> float:
        """Euclidean norm of the packed coefficients (frame norm, metric-free)."""
        return float(np.linalg.norm(self.packed))

    def allclose(self, other: "AltForm", atol: float = 1e-12) -> bool:
        return self.degree == other.degree and bool(np.allclose(self.packed, other.packed, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        terms = [f"{c:+.6g}e{''.join(str(i + 1) for i in idx)}"
                 for c, idx in zip(self.packed, basis(self.degree)) if c != 0.0]
        return f"AltForm({self.degree}, {' '.join(terms) or '0'})"


def _same_degree(a: AltForm, b: AltForm) -> None:
    if a.degree != b.degree:
        raise DegreeError(f"degree mismatch: {a.degree} vs {b.degree}")


def frame_volume() -> AltForm:
    return AltForm(DIM, [1.0])


@dataclass(frozen=True)
class Metric7:
    """Symmetric positive-definite metric on the frame, with cached inverse."""

    g: np.ndarray
    inverse: np.ndarray = field(init=False, repr=False)
    volume_density: float = field(init=False)

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.shape != (DIM, DIM):
            raise MetricError(f"metric must be {DIM}x{DIM}, got {g.shape}")
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise MetricError("metric is not symmetric")
        g = 0.5 * (g + g.T)
        try:
            chol = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise MetricError("metric is not positive-definite") from exc
        inv = np.linalg.inv(g)
        inv = 0.5 * (inv + inv.T)
        g.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "volume_density", float(np.prod(np.diag(chol))))

    @classmethod
    def identity(cls) -> "Metric7":
        return cls(np.eye(DIM))


def _contract_axes(t: np.ndarray, mat: np.ndarray, axes) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if axes is None:
        axes = range(t.ndim)
    for ax in axes:
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [ax])), 0, ax)
    return t


def raise_indices(t, metric: Metric7, axes=None) -> np.ndarray:
    """Raise the given axes (default: all) of a dense tensor with the inverse metric."""
    return _contract_axes(t, metric.inverse, axes)


def lower_indices(t, metric: Metric7, axes=None) -> np.ndarray:
    """Lower the given axes (default: all) of a dense tensor with the metric."""
    return _contract_axes(t, metric.g, axes)


def raise_lower(t, metric: Metric7, index_spec: str) -> np.ndarray:
    """Apply musical maps slot by slot: ``'u'`` raises, ``'d'`` lowers, ``'.'`` keeps."""
    t = np.asarray(t, dtype=float)
    if len(index_spec) != t.ndim:
        raise ValueError(f"index_spec {index_spec!r} does not match tensor rank {t.ndim}")
    up = [i for i, c in enumerate(index_spec) if c == "u"]
    down = [i for i, c in enumerate(index_spec) if c == "d"]
    return lower_indices(raise_indices(t, metric, up), metric, down)


def wedge(a: AltForm, b: AltForm) -> AltForm:
    k, l = a.degree, b.degree
    if k + l > DIM:
        raise DegreeError(f"wedge of degrees {k} and {l} exceeds {DIM}")
    rows, cols, signs = _wedge_table(k, l)
    prod = np.outer(a.packed, b.packed).reshape(-1)
    out = np.bincount(rows, weights=signs * prod[cols], minlength=len(basis(k + l)))
    return AltForm(k + l, out)


def interior(u, w: AltForm) -> AltForm:
    """Contraction ``(u _| w)_{m...} = u^a w_{a m ...}`` of a vector into the first slot."""
    if w.degree == 0:
        raise DegreeError("cannot contract a vector into a 0-form")
    u = np.asarray(u, dtype=float)
    return AltForm(w.degree - 1, pack(np.tensordot(u, w.dense, axes=([0], [0]))))


def hodge_star(w: AltForm, metric: Metric7, orientation: int = 1) -> AltForm:
    """Hodge star fixed by ``a ^ *b = <a, b> vol`` with ``vol = orientation * sqrt(det g) e^{1..7}``."""
    k = w.degree
    raised = pack(raise_indices(w.dense, metric)) if k else w.packed
    dest, signs = _complement_table(k)
    out = np.zeros(len(basis(DIM - k)))
    out[dest] = signs * raised
    return AltForm(DIM - k, orientation * metric.volume_density * out)


def form_inner(a: AltForm, b: AltForm, metric: Metric7) -> float:
    """``<a, b> = (1/k!) a_{I} b^{I}``; the basis ``e^I`` is orthonormal for the identity metric."""
    _same_degree(a, b)
    if a.degree == 0:
        return float(a.packed[0] * b.packed[0])
    return float(a.packed @ pack(raise_indices(b.dense, metric)))


def form_norm(a: AltForm, metric: Metric7) -> float:
    return math.sqrt(max(form_inner(a, a, metric), 0.0))


def tensor_inner(a, b, metric: Metric7) -> float:
    """Full contraction ``a_{i...} b^{i...}`` of two covariant tensors (no factorials)."""
    a = np.asarray(a, dtype=float)
    return float(np.sum(a * raise_indices(b, metric)))


def tensor_norm(a, metric: Metric7) -> float:
    return math.sqrt(max(tensor_inner(a, a, metric), 0.0))
