import warnings

import pytest

from rotcool.params import (
    CollisionSystem,
    CoulombCrystal,
    MissingParameterError,
    MoleculeSpec,
    SingleAtom,
    builtin_registry,
    load_molecule_file,
    lookup,
)


def test_registry_contents():
    names = [s.name for s in builtin_registry()]
    assert names == ["MgH+", "HD+", "N2+", "H2+", "I2+"]


def test_lookup_case_insensitive():
    assert lookup("mgh+").name == "MgH+"
    assert lookup("HD+").molecule.B == pytest.approx(9.96e-5)


def test_lookup_unknown():
    with pytest.raises(KeyError):
        lookup("CO+")


def test_xi_recomputed_from_masses():
    s = lookup("HD+")
    # 3 amu molecule on 9 amu coolant
    assert s.xi == pytest.approx(3.022 / 9.012, rel=1e-3)
    # lab_over_cm uses the tabulated mu, so it tracks 1 + xi only to ~1%
    assert s.lab_over_cm == pytest.approx(s.molecule.M_mol / s.mu)
    assert s.lab_over_cm == pytest.approx(1.0 + s.xi, rel=0.02)


def test_tabulated_mu_close_to_mass_derived():
    for s in builtin_registry():
        mu_m = s.molecule.M_mol * s.M_atom / (s.molecule.M_mol + s.M_atom)
        assert s.mu == pytest.approx(mu_m, rel=0.01)


def test_mu_deviation_warns():
    mol = lookup("HD+").molecule
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        CollisionSystem(mol, M_atom=9.012 * 1822.888, mu=5000.0)
    assert any("deviates" in str(w.message) for w in caught)


def test_polarity_classes():
    assert lookup("MgH+").molecule.polarity == "polar"
    assert lookup("N2+").molecule.polarity == "apolar"


def test_apolar_with_dipole_rejected():
    with pytest.raises(ValueError):
        MoleculeSpec("X+", B=1e-5, D=0.5, delta_alpha=1.0, alpha_perp=1.0,
                     Q_Z=1.0, M_mol=2000.0, polarity="apolar")


def test_missing_alpha_perp_fails_loudly():
    i2 = lookup("I2+")
    assert i2.molecule.alpha_perp is None
    with pytest.raises(MissingParameterError):
        i2.molecule.require_alpha_perp()


def test_scenarios():
    cc = CoulombCrystal(1e5)
    assert cc.b_max == 5e4
    with pytest.raises(ValueError):
        CoulombCrystal(-1.0)
    with pytest.raises(ValueError):
        SingleAtom(0.0)


def test_molecule_file_round_trip(tmp_path):
    path = tmp_path / "mol.txt"
    path.write_text(
        "# test molecule\n"
        "name = XY+\n"
        "B_au = 5e-5\n"
        "D_au = 0.7\n"
        "dalpha_au = 0\n"
        "alphaperp_au = 0\n"
        "QZ_au = 1.1\n"
        "Mmol_me = 40000\n"
        "Matom_me = 43000\n")
    s = load_molecule_file(str(path))
    assert s.name == "XY+"
    assert s.molecule.polarity == "polar"
    assert s.mu == pytest.approx(40000 * 43000 / 83000)


def test_molecule_file_alpha_none(tmp_path):
    path = tmp_path / "mol.txt"
    path.write_text(
        "name=Z2+\nB_au=1e-6\nD_au=0\ndalpha_au=10\nalphaperp_au=none\n"
        "QZ_au=5\nMmol_me=100000\nMatom_me=90000\n")
    s = load_molecule_file(str(path))
    assert s.molecule.alpha_perp is None
    assert s.molecule.polarity == "apolar"


def test_molecule_file_missing_key(tmp_path):
    path = tmp_path / "mol.txt"
    path.write_text("name=Z2+\nB_au=1e-6\n")
    with pytest.raises(ValueError, match="missing keys"):
        load_molecule_file(str(path))
