"""Molecular and atomic parameter registry.

Molecular constants (rotational constant B, dipole moment D, polarizability
anisotropy, perpendicular polarizability, quadrupole moment Q_Z) are stored in
Hartree atomic units.  Masses are in electron masses.  A `CollisionSystem`
bundles a molecule with its coolant atom and the derived reduced mass and mass
ratio.

The tabulated reduced masses for the built-in systems are kept as published;
the mass ratio xi is always recomputed from the isotope masses.  A deviation
of more than 1% between the tabulated and recomputed reduced mass raises a
warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .units import AMU_ME

# isotope masses, amu
_M_H = 1.00782503207
_M_D = 2.01410177785
_M_BE9 = 9.0121831
_M_N14 = 14.0030740048
_M_MG24 = 23.985041697
_M_CA48 = 47.95252276
_M_I127 = 126.9044719


class MissingParameterError(ValueError):
    """A molecular constant required by the requested operation is absent."""


@dataclass(frozen=True)
class MoleculeSpec:
    """Constants of one molecular ion, all in Hartree atomic units.

    `alpha_perp` may be None when no literature value exists; operations that
    need it must fail loudly rather than assume a default.
    """

    name: str
    B: float                    # rotational constant, Hartree
    D: float                    # dipole moment, atomic units (0 for apolar)
    delta_alpha: float          # polarizability anisotropy, atomic units
    alpha_perp: float | None    # perpendicular polarizability, atomic units
    Q_Z: float                  # quadrupole moment zz component, atomic units
    M_mol: float                # molecular mass, electron masses
    polarity: str               # "polar" | "apolar"

    def __post_init__(self):
        if self.B <= 0:
            raise ValueError(f"{self.name}: rotational constant must be positive")
        if self.M_mol <= 0:
            raise ValueError(f"{self.name}: molecular mass must be positive")
        if self.polarity not in ("polar", "apolar"):
            raise ValueError(f"{self.name}: polarity must be 'polar' or 'apolar'")
        if self.polarity == "polar" and self.D <= 0:
            raise ValueError(f"{self.name}: polar molecule needs D > 0")
        if self.polarity == "apolar" and self.D != 0:
            raise ValueError(f"{self.name}: apolar molecule must have D = 0")

    def require_alpha_perp(self) -> float:
        if self.alpha_perp is None:
            raise MissingParameterError(
                f"{self.name}: perpendicular polarizability is not available"
            )
        return self.alpha_perp


@dataclass(frozen=True)
class CollisionSystem:
    """A molecular ion paired with its laser-cooled coolant atom."""

    molecule: MoleculeSpec
    M_atom: float               # coolant mass, electron masses
    mu: float = field(default=0.0)   # reduced mass, electron masses
    xi: float = field(default=0.0)   # mass ratio M_mol / M_atom

    def __post_init__(self):
        if self.M_atom <= 0:
            raise ValueError("coolant mass must be positive")
        mu_masses = self.molecule.M_mol * self.M_atom / (self.molecule.M_mol + self.M_atom)
        if self.mu == 0.0:
            object.__setattr__(self, "mu", mu_masses)
        elif abs(self.mu / mu_masses - 1.0) > 0.01:
            warnings.warn(
                f"{self.molecule.name}: tabulated reduced mass {self.mu:.2f} deviates "
                f"more than 1% from the mass-derived value {mu_masses:.2f}",
                stacklevel=2,
            )
        object.__setattr__(self, "xi", self.molecule.M_mol / self.M_atom)

    @property
    def name(self) -> str:
        return self.molecule.name

    @property
    def lab_over_cm(self) -> float:
        """E_lab / E_cm = M_mol / mu = 1 + xi."""
        return self.molecule.M_mol / self.mu


@dataclass(frozen=True)
class SingleAtom:
    """Cooling by a single trapped atomic ion at angular trap frequency omega (a.u.)."""

    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("trap frequency must be positive")


@dataclass(frozen=True)
class CoulombCrystal:
    """Cooling inside a Coulomb crystal with lattice spacing d (Bohr)."""

    d: float

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("lattice spacing must be positive")

    @property
    def b_max(self) -> float:
        return self.d / 2.0


TrapScenario = SingleAtom | CoulombCrystal


def _me(amu: float) -> float:
    return amu * AMU_ME


def builtin_registry() -> list[CollisionSystem]:
    """The five built-in molecule/coolant systems with published constants."""
    mgh = MoleculeSpec("MgH+", B=2.88e-5, D=1.18, delta_alpha=0.0, alpha_perp=0.0,
                       Q_Z=0.562, M_mol=_me(_M_MG24 + _M_H), polarity="polar")
    hd = MoleculeSpec("HD+", B=9.96e-5, D=0.34, delta_alpha=0.0, alpha_perp=0.0,
                      Q_Z=1.39, M_mol=_me(_M_H + _M_D), polarity="polar")
    n2 = MoleculeSpec("N2+", B=0.90e-5, D=0.0, delta_alpha=9.12, alpha_perp=9.62,
                      Q_Z=1.741, M_mol=_me(2 * _M_N14), polarity="apolar")
    h2 = MoleculeSpec("H2+", B=12.69e-5, D=0.0, delta_alpha=3.72, alpha_perp=1.71,
                      Q_Z=1.39, M_mol=_me(2 * _M_H), polarity="apolar")
    i2 = MoleculeSpec("I2+", B=0.015e-5, D=0.0, delta_alpha=55.64, alpha_perp=None,
                      Q_Z=11.211, M_mol=_me(2 * _M_I127), polarity="apolar")
    return [
        CollisionSystem(mgh, M_atom=_me(_M_MG24), mu=22473.21),
        CollisionSystem(hd, M_atom=_me(_M_BE9), mu=4155.36),
        CollisionSystem(n2, M_atom=_me(_M_CA48), mu=32463.57),
        CollisionSystem(h2, M_atom=_me(_M_BE9), mu=3024.57),
        CollisionSystem(i2, M_atom=_me(_M_CA48), mu=74056.55),
    ]


def lookup(name: str) -> CollisionSystem:
    """Find a built-in system by molecule name (case-insensitive)."""
    for system in builtin_registry():
        if system.name.lower() == name.lower():
            return system
    known = ", ".join(s.name for s in builtin_registry())
    raise KeyError(f"unknown system {name!r}; built-in systems: {known}")


_FILE_KEYS = ("name", "B_au", "D_au", "dalpha_au", "alphaperp_au",
              "QZ_au", "Mmol_me", "Matom_me")


def load_molecule_file(path: str) -> CollisionSystem:
    """Read a user molecule definition (key=value per line, '#' comments).

    Required keys: name, B_au, D_au, dalpha_au, alphaperp_au, QZ_au,
    Mmol_me, Matom_me.  alphaperp_au may be given as 'none' to mark it
    unavailable.  Polarity is inferred from D_au.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    missing = [k for k in _FILE_KEYS if k not in entries]
    if missing:
        raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
    alpha_perp: float | None
    if entries["alphaperp_au"].lower() in ("none", "nan", "xx"):
        alpha_perp = None
    else:
        alpha_perp = float(entries["alphaperp_au"])
    d_val = float(entries["D_au"])
    molecule = MoleculeSpec(
        name=entries["name"],
        B=float(entries["B_au"]),
        D=d_val,
        delta_alpha=float(entries["dalpha_au"]),
        alpha_perp=alpha_perp,
        Q_Z=float(entries["QZ_au"]),
        M_mol=float(entries["Mmol_me"]),
        polarity="polar" if d_val > 0 else "apolar",
    )
    return CollisionSystem(molecule, M_atom=float(entries["Matom_me"]))
