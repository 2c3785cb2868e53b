import math

import numpy as np
import pytest
from scipy.special import sph_harm_y

from rotcool.params import lookup
from rotcool.rotor import (
    APOLAR_OPS,
    COS2_THETA,
    COS_SIN_COS_PHI,
    COS_THETA,
    POLAR_OPS,
    SIN2_COS2_PHI,
    SIN_COS_PHI,
    RotorBasis,
    RotorState,
    build_couplings,
    build_hamiltonian,
    matrix_element,
    wigner_3j,
)
from rotcool.units import ev_to_hartree

_OP_FUNCS = {
    COS_THETA: lambda th, ph: np.cos(th),
    SIN_COS_PHI: lambda th, ph: np.sin(th) * np.cos(ph),
    COS2_THETA: lambda th, ph: np.cos(th) ** 2,
    COS_SIN_COS_PHI: lambda th, ph: np.cos(th) * np.sin(th) * np.cos(ph),
    SIN2_COS2_PHI: lambda th, ph: (np.sin(th) * np.cos(ph)) ** 2,
}


def quadrature_element(kind, Jp, mp, J, m, n_theta=40, n_phi=64):
    """<J'm'| f |Jm> by Gauss-Legendre x trapezoid quadrature on the sphere."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    integ = (np.conj(sph_harm_y(Jp, mp, th, ph)) * _OP_FUNCS[kind](th, ph)
             * sph_harm_y(J, m, th, ph))
    val = np.dot(w, integ.sum(axis=1)) * (2 * math.pi / n_phi)
    assert abs(val.imag) < 1e-12
    return val.real


def test_wigner_3j_spot_values():
    assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3))
    assert wigner_3j(2, 1, 1, 0, 0, 0) == pytest.approx(math.sqrt(2 / 15))
    assert wigner_3j(1, 1, 2, 1, -1, 0) == pytest.approx(1 / math.sqrt(30))
    assert wigner_3j(1, 1, 1, 0, 0, 0) == 0.0          # parity
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0          # triangle
    assert wigner_3j(2, 2, 2, 1, 1, 1) == 0.0          # m-sum


def test_alignment_element_closed_form():
    assert matrix_element(COS2_THETA, 2, 0, 0, 0) == pytest.approx(
        2.0 / (3.0 * math.sqrt(5.0)))
    assert matrix_element(COS2_THETA, 0, 0, 0, 0) == pytest.approx(1.0 / 3.0)


@pytest.mark.parametrize("kind", POLAR_OPS + APOLAR_OPS)
def test_elements_match_sphere_quadrature(kind):
    rng = np.random.default_rng(7)
    pairs = set()
    for _ in range(40):
        J, Jp = rng.integers(0, 7, size=2)
        m = rng.integers(-J, J + 1) if J else 0
        mp = rng.integers(-Jp, Jp + 1) if Jp else 0
        pairs.add((int(Jp), int(mp), int(J), int(m)))
    for Jp, mp, J, m in sorted(pairs):
        closed = matrix_element(kind, Jp, mp, J, m)
        quad = quadrature_element(kind, Jp, mp, J, m)
        assert closed == pytest.approx(quad, abs=1e-10)


def test_unknown_operator_kind():
    with pytest.raises(ValueError):
        matrix_element("sin_phi", 0, 0, 0, 0)


def test_basis_indexing_round_trip():
    basis = RotorBasis(6)
    assert basis.dim == 49
    seen = set()
    for J in range(7):
        for m in range(-J, J + 1):
            idx = basis.index(J, m)
            assert basis.quantum_numbers(idx) == (J, m)
            seen.add(idx)
    assert seen == set(range(basis.dim))


def test_free_energies():
    basis = RotorBasis(4)
    B = 2.88e-5
    E0 = basis.free_energies(B)
    for J in range(5):
        assert E0[basis.index(J, 0)] == pytest.approx(B * J * (J + 1))


def test_ground_state_and_populations():
    basis = RotorBasis(3)
    state = RotorState.ground(basis)
    assert state.norm == pytest.approx(1.0)
    pops = state.populations_by_J()
    assert pops[0] == pytest.approx(1.0)
    assert np.all(pops[1:] == 0.0)
    assert state.population(0, 0) == pytest.approx(1.0)


def test_coupling_matrices_hermitian_and_selection_rules():
    basis = RotorBasis(8)
    for ops in (POLAR_OPS, APOLAR_OPS):
        cpl = build_couplings(basis, ops)
        for kind in ops:
            M = cpl.dense(kind)
            assert np.abs(M - M.T).max() <= 1e-15  # real symmetric
            for i, j in zip(*np.nonzero(M)):
                Jp, mp = basis.quantum_numbers(int(i))
                J, m = basis.quantum_numbers(int(j))
                assert abs(Jp - J) <= 2
                assert abs(mp - m) <= 2


def test_hamiltonian_hermitian_polar_and_apolar():
    basis = RotorBasis(6)
    for name in ("MgH+", "N2+"):
        s = lookup(name)
        H = build_hamiltonian(s, basis, eps=1e-4, beta=0.7)
        assert np.allclose(H, H.conj().T, atol=0.0)


def test_polar_hamiltonian_limits():
    # beta = 0: only the cos(theta) coupling; beta = pi/2: only sin cos(phi)
    s = lookup("MgH+")
    basis = RotorBasis(4)
    eps = 1e-4
    cpl = build_couplings(basis, POLAR_OPS)
    free = np.diag(basis.free_energies(s.molecule.B))
    H0 = build_hamiltonian(s, basis, eps=eps, beta=0.0)
    assert np.allclose(H0 - free, -s.molecule.D * eps * cpl.dense(COS_THETA))
    H90 = build_hamiltonian(s, basis, eps=eps, beta=math.pi / 2)
    assert np.allclose(H90 - free, -s.molecule.D * eps * cpl.dense(SIN_COS_PHI))
