"""rotcool: rotational state change of molecular ions under sympathetic cooling.

Classical Coulomb collision kinematics, transient-field rotor dynamics, and
closed-form excitation estimators for polar and apolar diatomic ions cooled
by laser-cooled atomic ions.
"""

from .params import (
    CollisionSystem,
    CoulombCrystal,
    MissingParameterError,
    MoleculeSpec,
    SingleAtom,
    builtin_registry,
    load_molecule_file,
    lookup,
)

__version__ = "0.1.0"

__all__ = [
    "CollisionSystem",
    "CoulombCrystal",
    "MissingParameterError",
    "MoleculeSpec",
    "SingleAtom",
    "builtin_registry",
    "load_molecule_file",
    "lookup",
    "__version__",
]
