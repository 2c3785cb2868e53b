"""Unit conversions between Hartree atomic units and laboratory units.

All physics in this package is done in Hartree atomic units (hbar = m_e =
e = 1/(4 pi eps0) = 1).  User-facing quantities are energies in eV, lengths
in micrometres, times in seconds or milliseconds, and trap frequencies in Hz.

Conversion factors follow CODATA 2018.
"""

from __future__ import annotations

import math

HARTREE_EV = 27.211386245988        # Hartree in eV
BOHR_UM = 5.29177210903e-5          # Bohr radius in micrometres
AU_TIME_S = 2.4188843265857e-17     # atomic unit of time in seconds
AMU_ME = 1822.888486209             # atomic mass unit in electron masses

_FACTORS: dict[tuple[str, str], float] = {
    ("hartree", "ev"): HARTREE_EV,
    ("bohr", "um"): BOHR_UM,
    ("au_time", "s"): AU_TIME_S,
    ("au_time", "ms"): AU_TIME_S * 1e3,
    ("amu", "me"): AMU_ME,
    ("s", "ms"): 1e3,
    ("um", "m"): 1e-6,
    ("bohr", "m"): BOHR_UM * 1e-6,
}
# inverses derived from the same constants so round trips are exact
for (_a, _b), _f in list(_FACTORS.items()):
    _FACTORS[(_b, _a)] = 1.0 / _f

_ALIASES = {
    "ha": "hartree",
    "hartrees": "hartree",
    "a0": "bohr",
    "micron": "um",
    "micrometer": "um",
    "seconds": "s",
    "sec": "s",
}


def _canonical(unit: str) -> str:
    u = unit.strip().lower()
    return _ALIASES.get(u, u)


def convert(value: float, from_unit: str, to_unit: str) -> float:
    """Convert `value` between two supported units.

    Raises ValueError for unknown units or unsupported pairs.
    """
    a, b = _canonical(from_unit), _canonical(to_unit)
    if a == b:
        return value
    try:
        return value * _FACTORS[(a, b)]
    except KeyError:
        raise ValueError(f"no conversion from {from_unit!r} to {to_unit!r}") from None


def ev_to_hartree(e_ev: float) -> float:
    return e_ev / HARTREE_EV


def hartree_to_ev(e_ha: float) -> float:
    return e_ha * HARTREE_EV


def um_to_bohr(x_um: float) -> float:
    return x_um / BOHR_UM


def bohr_to_um(x_bohr: float) -> float:
    return x_bohr * BOHR_UM


def s_to_au(t_s: float) -> float:
    return t_s / AU_TIME_S


def au_to_s(t_au: float) -> float:
    return t_au * AU_TIME_S


def hz_to_au_omega(f_hz: float) -> float:
    """Angular frequency in atomic units from an ordinary frequency in Hz."""
    return 2.0 * math.pi * f_hz * AU_TIME_S


def au_omega_to_hz(omega_au: float) -> float:
    return omega_au / (2.0 * math.pi * AU_TIME_S)
