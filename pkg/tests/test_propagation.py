import math

import numpy as np
import pytest

from rotcool.estimators import pt_amplitude
from rotcool.params import CollisionSystem, MoleculeSpec, lookup
from rotcool.rotor import (
    CollisionOptions,
    PropagationError,
    RotorBasis,
    RotorState,
    propagate_between,
    propagate_collision,
)
from rotcool.trajectory import CollisionGeometry, integration_span
from rotcool.units import ev_to_hartree


def null_system():
    """An apolar molecule with every coupling constant zero."""
    mol = MoleculeSpec("null", B=1e-4, D=0.0, delta_alpha=0.0, alpha_perp=0.0,
                       Q_Z=0.0, M_mol=2000.0, polarity="apolar")
    return CollisionSystem(mol, M_atom=20000.0)


def test_norm_conservation_polar():
    s = lookup("HD+")
    res = propagate_collision(s, ev_to_hartree(1.0), 20.0)
    assert res.norm_drift < 1e-8
    assert abs(res.final_state.norm - 1.0) < 1e-8


def test_norm_conservation_apolar():
    s = lookup("H2+")
    res = propagate_collision(s, ev_to_hartree(1.5), 0.0)
    assert res.norm_drift < 1e-8


def test_head_on_polar_m_conserved():
    # b = 0: the field never rotates, so m is rigorously conserved
    s = lookup("HD+")
    res = propagate_collision(s, ev_to_hartree(1.0), 0.0)
    basis = res.final_state.basis
    leaked = sum(res.final_state.population(J, m)
                 for J in range(basis.J_max + 1)
                 for m in range(-J, J + 1) if m != 0)
    assert leaked < 1e-12


def test_jmax_doubling_stable():
    s = lookup("HD+")
    E = ev_to_hartree(1.0)
    e16 = propagate_collision(
        s, E, 20.0, CollisionOptions(J_max=16, auto_escalate=False)).excitation
    e24 = propagate_collision(
        s, E, 20.0, CollisionOptions(J_max=24, auto_escalate=False)).excitation
    assert e16 == pytest.approx(e24, rel=0.01)


def test_auto_escalation_reaches_converged_value():
    # a deliberately tiny basis must grow until the top shells empty out
    s = lookup("H2+")
    E = ev_to_hartree(2.0)
    res = propagate_collision(s, E, 0.0, CollisionOptions(J_max=2))
    assert res.J_max > 2
    ref = propagate_collision(
        s, E, 0.0, CollisionOptions(J_max=12, auto_escalate=False))
    assert res.excitation == pytest.approx(ref.excitation, rel=0.01)


def test_time_reversal_round_trip():
    s = lookup("HD+")
    E, b = ev_to_hartree(1.0), 20.0
    geo = CollisionGeometry.build(E, b, s.mu)
    T, r_T, pr_T, beta_T = integration_span(E, b, s.mu)
    basis = RotorBasis(16)
    phi0 = RotorState.ground(basis).amplitudes.astype(np.complex128)
    classical0 = (r_T, -pr_T, 2 * geo.beta_half - beta_T)
    kw = dict(J_max=16, rtol=1e-11, atol=1e-14)
    phi1, cls1, *_ = propagate_between(
        s, E, b, t_from=-T, t_to=T, phi=phi0, classical=classical0, **kw)
    phi2, cls2, *_ = propagate_between(
        s, E, b, t_from=T, t_to=-T, phi=phi1, classical=cls1, **kw)
    fidelity = abs(np.vdot(phi0, phi2)) ** 2
    assert fidelity > 1.0 - 1e-8
    assert cls2[0] == pytest.approx(classical0[0], rel=1e-6)


def test_zero_coupling_is_identity():
    s = null_system()
    res = propagate_collision(s, ev_to_hartree(1.0), 10.0)
    assert res.excitation < 1e-20
    assert res.final_state.population(0, 0) == pytest.approx(1.0)


def test_excited_initial_state_survives_zero_coupling():
    s = null_system()
    basis = RotorBasis(8)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.index(1, 0)] = 1.0
    init = RotorState(basis, amps)
    res = propagate_collision(s, ev_to_hartree(1.0), 10.0,
                              CollisionOptions(J_max=8, auto_escalate=False),
                              initial_state=init)
    assert res.final_state.population(1, 0) == pytest.approx(1.0)


def test_perturbation_theory_matches_forced_lorentzian():
    # weak quadrupole coupling, model pulse: first-order amplitude to (2,0)
    s = lookup("H2+")
    E, b = ev_to_hartree(1.0), 30.0   # chi_Q ~ 0.08, safely perturbative
    res = propagate_collision(
        s, E, b, CollisionOptions(field_model="lorentzian",
                                  include_polarizability=False))
    expected = abs(pt_amplitude(s, E, b)) ** 2
    assert res.excitation == pytest.approx(expected, rel=0.10)


def test_trace_recording():
    s = lookup("H2+")
    res = propagate_collision(s, ev_to_hartree(1.5), 0.0,
                              CollisionOptions(trace=True))
    t, pops = res.trace
    assert len(t) == pops.shape[0] > 10
    assert pops.shape[1] == res.J_max + 1
    assert np.all(np.abs(pops.sum(axis=1) - 1.0) < 1e-6)
    assert np.all(np.diff(t) > 0)


def test_propagation_error_carries_context():
    s = lookup("HD+")
    with pytest.raises(PropagationError, match="E=.*b="):
        propagate_collision(s, ev_to_hartree(1.0), 20.0,
                            CollisionOptions(max_steps=10))


def test_lorentzian_close_to_exact_field():
    # the model pulse tracks the exact field well enough for estimates
    s = lookup("H2+")
    E = ev_to_hartree(1.5)
    exact = propagate_collision(s, E, 0.0).excitation
    model = propagate_collision(
        s, E, 0.0, CollisionOptions(field_model="lorentzian")).excitation
    assert model == pytest.approx(exact, rel=0.5)
