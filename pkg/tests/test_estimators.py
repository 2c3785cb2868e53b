import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import k1

from rotcool.cycle import average_excitation
from rotcool.estimators import (
    ALIGN_20,
    ChiParameters,
    KappaFit,
    averaged_chiQ2,
    averaged_chiQ2_quadrature,
    fit_kappa,
    kappa_integral,
    nonadiabaticity_2level,
    nonadiabaticity_exact,
    pt_amplitude,
    pt_cycle_excitation,
)
from rotcool.kinematics import EnergySchedule
from rotcool.params import CoulombCrystal, lookup
from rotcool.trajectory import closest_approach, pulse_fwhm
from rotcool.units import ev_to_hartree


def test_kappa_integral_at_zero():
    assert kappa_integral(0.0) == 2.0 + 0.0j
    with pytest.raises(ValueError):
        kappa_integral(-0.1)


@pytest.mark.parametrize("kappa", [0.1, 0.3, 0.5, 1.0, 2.0, 5.0])
def test_kappa_integral_bessel_identity(kappa):
    # |I(kappa)| = 6 kappa K_1(3 kappa), an independent closed form
    exact = 6.0 * kappa * k1(3.0 * kappa)
    assert abs(kappa_integral(kappa, tol=1e-13)) == pytest.approx(exact, rel=1e-6)


def test_kappa_integral_variable_change_identity():
    # the tan substitution must agree with the original u-integral
    kappa = 0.5
    direct, _ = quad(lambda u: math.cos(u) * math.cos(3 * kappa * math.tan(u)),
                     -math.pi / 2, math.pi / 2, limit=400)
    assert abs(kappa_integral(kappa)) == pytest.approx(abs(direct), rel=1e-6)


def test_kappa_fit_parameters():
    fit = fit_kappa()
    assert fit.a1 == pytest.approx(6.83, rel=0.10)
    assert fit.a2 == pytest.approx(0.40, rel=0.10)
    assert fit.a3 == pytest.approx(2.93, rel=0.10)
    assert fit(0.0) == pytest.approx(2.0)


def test_fit_tracks_integral():
    fit = fit_kappa()
    for kappa in (0.2, 1.0, 3.0):
        assert fit(kappa) == pytest.approx(abs(kappa_integral(kappa)), rel=0.12)


def test_chi_ratio_polar():
    # chi_Q / chi_D = 0.0131 E[eV] for the polar reference system, head-on
    s = lookup("MgH+")
    for E_ev in (1.0, 2.0):
        chi = ChiParameters.build(s, ev_to_hartree(E_ev), 0.0)
        assert chi.chi_Q / chi.chi_D == pytest.approx(0.0131 * E_ev, rel=0.02)


def test_chi_ratio_apolar():
    # quadrupole dominates polarizability by roughly 8x at 2 eV
    chi = ChiParameters.build(lookup("N2+"), ev_to_hartree(2.0), 0.0)
    assert 7.0 < chi.chi_Q / chi.chi_alpha < 9.0


def test_chi_decays_with_b():
    s = lookup("MgH+")
    E = ev_to_hartree(1.0)
    chis = [ChiParameters.build(s, E, b) for b in (0.0, 50.0, 500.0)]
    assert chis[0].chi_D > chis[1].chi_D > chis[2].chi_D
    assert chis[0].kappa == chis[1].kappa == chis[2].kappa


def test_two_level_estimate_polar_only():
    with pytest.raises(ValueError):
        nonadiabaticity_2level(lookup("N2+"), 0.03, 0.0)


def test_two_level_maximum_at_critical_coupling():
    # eta^2 is maximal in b where chi_D = 2 sqrt(3)
    s = lookup("HD+")
    E = ev_to_hartree(1.0)
    b = np.linspace(0.0, 400.0, 4001)
    eta2 = np.array([nonadiabaticity_2level(s, E, x) for x in b])
    b_star = b[np.argmax(eta2)]
    chi_star = ChiParameters.build(s, E, float(b_star)).chi_D
    assert chi_star == pytest.approx(2.0 * math.sqrt(3.0), rel=0.02)


def test_two_level_linear_in_weak_coupling():
    # far out in b the estimate is linear in chi_D
    s = lookup("MgH+")
    E = ev_to_hartree(1.0)
    c1 = ChiParameters.build(s, E, 2000.0).chi_D
    c2 = ChiParameters.build(s, E, 4000.0).chi_D
    r_eta = nonadiabaticity_2level(s, E, 2000.0) / nonadiabaticity_2level(
        s, E, 4000.0)
    assert r_eta == pytest.approx(c1 / c2, rel=1e-3)


def test_exact_nonadiabaticity_structure():
    # off-axis collision: the field both swells and rotates
    s = lookup("MgH+")
    E = ev_to_hartree(1.0)
    t, eta = nonadiabaticity_exact(s, E, 50.0, n_samples=801)
    assert t.shape == eta.shape == (801,)
    assert np.all(np.isfinite(eta))
    peak = np.max(np.abs(eta))
    assert peak > 0.0
    # the collision window ends where the field is negligible, so the
    # coupling has died off at both edges
    assert abs(eta[0]) < 1e-3 * peak
    assert abs(eta[-1]) < 1e-3 * peak


def test_pt_amplitude_scaling_with_b():
    s = lookup("N2+")
    E = ev_to_hartree(1.0)
    c0 = abs(pt_amplitude(s, E, 0.0))
    c1 = abs(pt_amplitude(s, E, 100.0))
    scale = (closest_approach(E, 0.0) / closest_approach(E, 100.0)) ** 3
    assert c1 / c0 == pytest.approx(scale, rel=1e-10)


def test_averaged_chiQ2_matches_quadrature():
    s = lookup("N2+")
    for E_ev in (0.5, 1.0, 2.0):
        E = ev_to_hartree(E_ev)
        closed = averaged_chiQ2(s, E, 1e5)
        direct = averaged_chiQ2_quadrature(s, E, 1e5)
        assert closed == pytest.approx(direct, rel=0.01)


def test_averaged_chiQ2_warns_for_small_crystal():
    s = lookup("N2+")
    with pytest.warns(UserWarning, match="Coulomb length"):
        averaged_chiQ2(s, ev_to_hartree(1.0), 200.0)


def test_pt_average_factorizes_to_chiQ2():
    # kappa does not depend on b, so the b-average of |c_20|^2 is exactly
    # <chi_Q^2> times the fixed pulse-shape factor
    s = lookup("N2+")
    E = ev_to_hartree(1.0)
    cc = CoulombCrystal(1e5)
    avg = average_excitation("pt", s, cc, E, n_nodes=48)
    kappa = ChiParameters.build(s, E, 0.0).kappa
    factor = (0.5 * kappa * abs(kappa_integral(kappa)) * ALIGN_20) ** 2
    expected = averaged_chiQ2_quadrature(s, E, 1e5) * factor
    assert avg == pytest.approx(expected, rel=1e-3)


def test_pt_cycle_closed_form_vs_engine():
    from rotcool.cycle import accumulate
    s = lookup("N2+")
    cc = CoulombCrystal(1e5)
    sch = EnergySchedule.build(ev_to_hartree(1.5), ev_to_hartree(0.1),
                               ev_to_hartree(0.05))
    closed = pt_cycle_excitation(s, 1e5, sch, fit_kappa())
    engine = accumulate("pt", s, cc, sch, n_nodes=24).total_linear
    assert closed == pytest.approx(engine, rel=0.2)


def test_pt_cycle_insensitive_to_fit_start():
    # rough physically-estimated fit parameters give essentially the same
    # cumulative excitation wherever that excitation is appreciable; in the
    # deep tails (Sigma ~ 1e-5 and below) the spread can reach ~25%
    fitted_fit = fit_kappa()
    rough_fit = KappaFit(6.0, 0.5, 3.0)
    checks = [("N2+", 2.5, 0.10), ("I2+", 0.5, 0.10), ("I2+", 1.5, 0.10),
              ("H2+", 2.5, 0.25)]
    for name, einit, tol in checks:
        s = lookup(name)
        sch = EnergySchedule.build(ev_to_hartree(einit), ev_to_hartree(0.1),
                                   ev_to_hartree(0.2))
        rough = pt_cycle_excitation(s, 1e5, sch, rough_fit)
        fitted = pt_cycle_excitation(s, 1e5, sch, fitted_fit)
        assert rough == pytest.approx(fitted, rel=tol), (name, einit)
