"""Pinned defaults for the `reproduce` subcommand.

These values are versioned so that regression tests comparing emitted
datasets do not drift when ordinary CLI defaults change.  Bump
DEFAULTS_VERSION whenever any value below changes.
"""

from __future__ import annotations

DEFAULTS_VERSION = 1

#: single-collision population traces; the HD+ panel at b = 20 Bohr is the
#: impact parameter giving the most excitation at 1 eV (non-adiabatic case),
#: the apolar non-adiabatic panel uses a higher collision energy instead
FIG2 = {
    "a": {"system": "HD+", "E_eV": 1.0, "b_bohr": 0.0},
    "b": {"system": "H2+", "E_eV": 1.0, "b_bohr": 0.0},
    "c": {"system": "HD+", "E_eV": 1.0, "b_bohr": 20.0},
    "d": {"system": "H2+", "E_eV": 5.0, "b_bohr": 0.0},
}

#: polar accumulated excitation vs initial energy (panel a) and
#: per-collision excitation / nonadiabaticity vs impact parameter (b, c)
FIG3 = {
    "a": {
        "systems": ["MgH+", "HD+"],
        "d_bohr": 1e5,
        "E_final_eV": 0.1,
        "eta2l": {"dE_eV": 0.05, "E_init_eV": 2.0},
        "full": {"dE_eV": 0.1, "E_init_eV": 2.0, "n_nodes": 12},
    },
    "bc": {
        "systems": {"b": "MgH+", "c": "HD+"},
        "E_eV": 1.0,
        "d_bohr": 1e5,
        "b_grid_bohr": [0.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0,
                        60.0, 80.0, 120.0, 200.0, 400.0, 800.0],
    },
}

#: apolar accumulated excitation, PT vs full propagation
FIG4 = {
    "systems_full": ["N2+", "H2+"],
    "systems_pt": ["N2+", "H2+", "I2+"],
    "d_bohr": 1e5,
    "E_final_eV": 0.1,
    "dE_eV": 0.2,
    "E_init_eV": [0.5, 1.0, 1.5, 2.0, 2.5],
    "n_nodes": 12,
}

#: headline cooling-time numbers
TIMING = {
    "system": "MgH+",
    "E_init_eV": 2.0,
    "E_final_eV": 0.01,
    "dE_eV": 0.01,
    "crystal_d_um": 5.29177210903,      # 1e5 Bohr
    "sa_omega_hz": 1.0e6,               # trap frequency f; omega = 2 pi f
    "sa_compare_d_um": 10.0,
}
