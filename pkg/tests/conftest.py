import numpy as np
import pytest

from g2flow.exterior import AltForm
from g2flow.lie import LieAlgebra
from g2flow.presets import get_preset
from g2flow.structure import standard_phi
from g2flow.torsion import Geometry

PRESETS = ("flat7", "heisenberg7", "almost_abelian_a")


def random_two_step_nilpotent(rng) -> LieAlgebra:
    """Brackets of e0..e3 land in span(e4, e5, e6), which is central, so Jacobi holds."""
    brackets = [(i, j, k, rng.normal()) for i in range(4) for j in range(i + 1, 4) for k in (4, 5, 6)]
    return LieAlgebra.from_brackets(brackets, name="random_nilpotent")


def pulled_back_phi(m: np.ndarray, phi: AltForm | None = None) -> AltForm:
    """``phi'_{abc} = m_ia m_jb m_kc phi_ijk``; positive for invertible ``m``."""
    p = (phi or standard_phi()).dense
    return AltForm.from_dense(np.einsum("ia,jb,kc,ijk->abc", m, m, m, p))


def random_phi(rng, eps: float = 0.3, max_cond: float = 4.0) -> AltForm:
    """Pull back the canonical form by ``1 + eps N``, resampling badly conditioned frames."""
    while True:
        m = np.eye(7) + eps * rng.normal(size=(7, 7))
        if np.linalg.cond(m) < max_cond:
            return pulled_back_phi(m)


def change_frame(alg: LieAlgebra, phi: AltForm, m: np.ndarray) -> tuple[LieAlgebra, AltForm]:
    """Express the same structure in the frame ``f_a = m_ia e_i``; an isomorphic copy."""
    minv = np.linalg.inv(m)
    c = np.einsum("ia,jb,ijk,ck->abc", m, m, alg.c, minv)
    return LieAlgebra(c, name=alg.name + "_reframed"), pulled_back_phi(m, phi)


def random_structures(seed: int, n: int = 4):
    """Mixed list of (algebra, phi) with generic torsion of every type."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append((random_two_step_nilpotent(rng), random_phi(rng)))
        else:
            p = get_preset("almost_abelian_a" if i % 4 == 1 else "heisenberg7")
            out.append((p.algebra, random_phi(rng, 0.25)))
    return out


@pytest.fixture(params=PRESETS)
def preset(request):
    return get_preset(request.param)


@pytest.fixture(params=PRESETS)
def preset_geo(request):
    p = get_preset(request.param)
    return Geometry.from_phi(p.phi, p.algebra)


@pytest.fixture
def heis_geo():
    p = get_preset("heisenberg7")
    return Geometry.from_phi(p.phi, p.algebra)


@pytest.fixture(params=range(4))
def random_geo(request):
    alg, phi = random_structures(100 + request.param, 4)[request.param]
    return Geometry.from_phi(phi, alg)
