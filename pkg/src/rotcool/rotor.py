"""Truncated (J, m) rotor basis, angular coupling matrix elements, and the
time propagation of the rotational state through one collision.

Matrix elements of the angular factors cos(theta), sin(theta)cos(phi),
cos^2(theta), cos(theta)sin(theta)cos(phi) and sin^2(theta)cos^2(phi) are
computed in closed form by expanding each operator in spherical harmonics and
using Wigner 3j symbols (Condon-Shortley phases; all elements real).

The excitation observable of one collision is the population left outside
the rotational ground state, evaluated in the bare basis at the end of the
integration window where the field is negligible.  It is accumulated as the
sum of excited-state populations, which is identical to 1 - P0 for a
normalized state but immune to cancellation when the excitation is tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .params import CollisionSystem
from .trajectory import CollisionGeometry, integration_span

DEFAULT_JMAX_POLAR = 16
DEFAULT_JMAX_APOLAR = 8

COS_THETA = "cos_theta"
SIN_COS_PHI = "sin_theta_cos_phi"
COS2_THETA = "cos2_theta"
COS_SIN_COS_PHI = "cos_sin_cos_phi"
SIN2_COS2_PHI = "sin2_cos2_phi"

_SQ = math.sqrt
# operator -> (scalar part, [(coefficient, l, q), ...]) in a Y_{lq} expansion
_EXPANSIONS = {
    COS_THETA: (0.0, [(_SQ(4 * math.pi / 3), 1, 0)]),
    SIN_COS_PHI: (0.0, [(_SQ(2 * math.pi / 3), 1, -1),
                        (-_SQ(2 * math.pi / 3), 1, 1)]),
    COS2_THETA: (1 / 3, [((4 / 3) * _SQ(math.pi / 5), 2, 0)]),
    COS_SIN_COS_PHI: (0.0, [(_SQ(2 * math.pi / 15), 2, -1),
                            (-_SQ(2 * math.pi / 15), 2, 1)]),
    SIN2_COS2_PHI: (1 / 3, [(-(2 / 3) * _SQ(math.pi / 5), 2, 0),
                            (_SQ(2 * math.pi / 15), 2, 2),
                            (_SQ(2 * math.pi / 15), 2, -2)]),
}

POLAR_OPS = (COS_THETA, SIN_COS_PHI)
APOLAR_OPS = (COS2_THETA, COS_SIN_COS_PHI, SIN2_COS2_PHI)


def wigner_3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol for integer arguments (Racah's formula)."""
    if m1 + m2 + m3 != 0:
        return 0.0
    if not (abs(j1 - j2) <= j3 <= j1 + j2):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    f = math.factorial
    delta = (f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3)
             / f(j1 + j2 + j3 + 1))
    norm = math.sqrt(delta * f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2)
                     * f(j3 + m3) * f(j3 - m3))
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        total += (-1) ** k / (f(k) * f(j1 + j2 - j3 - k) * f(j1 - m1 - k)
                              * f(j2 + m2 - k) * f(j3 - j2 + m1 + k)
                              * f(j3 - j1 - m2 + k))
    return (-1) ** (j1 - j2 - m3) * norm * total


def _ylm_element(Jp: int, mp: int, l: int, q: int, J: int, m: int) -> float:
    """<J' m'| Y_{l q} |J m> (Gaunt integral)."""
    pref = math.sqrt((2 * Jp + 1) * (2 * l + 1) * (2 * J + 1) / (4 * math.pi))
    return ((-1) ** mp * pref * wigner_3j(Jp, l, J, 0, 0, 0)
            * wigner_3j(Jp, l, J, -mp, q, m))


def matrix_element(kind: str, Jp: int, mp: int, J: int, m: int) -> float:
    """Closed-form <J' m'| op |J m> for the supported angular operators."""
    try:
        scalar, terms = _EXPANSIONS[kind]
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}") from None
    val = scalar if (Jp == J and mp == m) else 0.0
    for coef, l, q in terms:
        val += coef * _ylm_element(Jp, mp, l, q, J, m)
    return val


@dataclass(frozen=True)
class RotorBasis:
    """Flat indexing of the truncated (J, m) space, |m| <= J <= J_max."""

    J_max: int

    @property
    def dim(self) -> int:
        return (self.J_max + 1) ** 2

    def index(self, J: int, m: int) -> int:
        if not (0 <= J <= self.J_max and -J <= m <= J):
            raise IndexError(f"(J={J}, m={m}) outside basis with J_max={self.J_max}")
        return J * J + J + m

    def quantum_numbers(self, idx: int) -> tuple[int, int]:
        J = int(math.isqrt(idx))
        return J, idx - J * J - J

    @property
    def J_of(self) -> np.ndarray:
        return np.array([self.quantum_numbers(i)[0] for i in range(self.dim)])

    def free_energies(self, B: float) -> np.ndarray:
        j = self.J_of
        return B * j * (j + 1.0)


@dataclass
class RotorState:
    """Complex amplitude vector over a RotorBasis (bare free-rotor states)."""

    basis: RotorBasis
    amplitudes: np.ndarray

    @classmethod
    def ground(cls, basis: RotorBasis) -> "RotorState":
        amp = np.zeros(basis.dim, dtype=np.complex128)
        amp[basis.index(0, 0)] = 1.0
        return cls(basis, amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def populations_by_J(self) -> np.ndarray:
        pops = np.zeros(self.basis.J_max + 1)
        np.add.at(pops, self.basis.J_of, np.abs(self.amplitudes) ** 2)
        return pops

    def population(self, J: int, m: int) -> float:
        return float(np.abs(self.amplitudes[self.basis.index(J, m)]) ** 2)


@dataclass(frozen=True)
class CouplingMatrices:
    """Sparse angular coupling matrices on a basis, stacked for the kernel."""

    basis: RotorBasis
    ops: tuple[str, ...]
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    op_of: np.ndarray

    def dense(self, kind: str) -> np.ndarray:
        k = self.ops.index(kind)
        mat = np.zeros((self.basis.dim, self.basis.dim))
        sel = self.op_of == k
        mat[self.rows[sel], self.cols[sel]] = self.vals[sel]
        return mat


_COUPLING_CACHE: dict[tuple[int, tuple[str, ...]], CouplingMatrices] = {}


def build_couplings(basis: RotorBasis, ops: tuple[str, ...]) -> CouplingMatrices:
    key = (basis.J_max, ops)
    cached = _COUPLING_CACHE.get(key)
    if cached is not None:
        return cached
    rows, cols, vals, op_of = [], [], [], []
    for k, kind in enumerate(ops):
        for idx in range(basis.dim):
            J, m = basis.quantum_numbers(idx)
            for Jp in range(max(0, J - 2), min(basis.J_max, J + 2) + 1):
                for mp in range(max(-Jp, m - 2), min(Jp, m + 2) + 1):
                    idxp = basis.index(Jp, mp)
                    if idxp < idx:
                        continue  # mirrored below: the operators are real
                        # symmetric, so one evaluation serves both triangles
                    val = matrix_element(kind, Jp, mp, J, m)
                    if abs(val) > 1e-14:
                        rows.append(idxp)
                        cols.append(idx)
                        vals.append(val)
                        op_of.append(k)
                        if idxp != idx:
                            rows.append(idx)
                            cols.append(idxp)
                            vals.append(val)
                            op_of.append(k)
    result = CouplingMatrices(
        basis=basis, ops=ops,
        rows=np.array(rows, dtype=np.int64),
        cols=np.array(cols, dtype=np.int64),
        vals=np.array(vals, dtype=np.float64),
        op_of=np.array(op_of, dtype=np.int64),
    )
    _COUPLING_CACHE[key] = result
    return result


def _coupling_scalars(system: CollisionSystem,
                      include_polarizability: bool) -> tuple[int, np.ndarray]:
    mol = system.molecule
    if mol.polarity == "polar":
        return _kernels.MODE_POLAR, np.array([mol.D])
    if include_polarizability:
        alpha_perp = mol.require_alpha_perp()
        return _kernels.MODE_APOLAR, np.array([mol.delta_alpha, alpha_perp, mol.Q_Z])
    return _kernels.MODE_APOLAR, np.array([0.0, 0.0, mol.Q_Z])


def build_hamiltonian(system: CollisionSystem, basis: RotorBasis,
                      eps: float, beta: float,
                      include_polarizability: bool = True) -> np.ndarray:
    """Dense rotor Hamiltonian at field eps and orientation angle beta."""
    mol = system.molecule
    H = np.diag(basis.free_energies(mol.B))
    cb, sb = math.cos(beta), math.sin(beta)
    if mol.polarity == "polar":
        cpl = build_couplings(basis, POLAR_OPS)
        H -= mol.D * eps * (cb * cpl.dense(COS_THETA) + sb * cpl.dense(SIN_COS_PHI))
        return H
    mode, par = _coupling_scalars(system, include_polarizability)
    cpl = build_couplings(basis, APOLAR_OPS)
    e32 = eps * math.sqrt(eps)
    g = -par[0] * eps * eps / 4.0 + 0.75 * par[2] * e32
    h_id = -par[1] * eps * eps / 4.0 + 0.25 * par[2] * e32
    align = (cb * cb * cpl.dense(COS2_THETA)
             + 2.0 * cb * sb * cpl.dense(COS_SIN_COS_PHI)
             + sb * sb * cpl.dense(SIN2_COS2_PHI))
    H += g * align + h_id * np.eye(basis.dim)
    return H


def hamiltonian_time_derivative(system: CollisionSystem, basis: RotorBasis,
                                eps: float, deps_dt: float,
                                beta: float, dbeta_dt: float,
                                include_polarizability: bool = True) -> np.ndarray:
    """dH/dt from the chain rule through eps(t) and beta(t)."""
    mol = system.molecule
    cb, sb = math.cos(beta), math.sin(beta)
    if mol.polarity == "polar":
        cpl = build_couplings(basis, POLAR_OPS)
        c1, s1 = cpl.dense(COS_THETA), cpl.dense(SIN_COS_PHI)
        return -mol.D * (deps_dt * (cb * c1 + sb * s1)
                         + eps * dbeta_dt * (-sb * c1 + cb * s1))
    mode, par = _coupling_scalars(system, include_polarizability)
    cpl = build_couplings(basis, APOLAR_OPS)
    cc, cs, ss = (cpl.dense(COS2_THETA), cpl.dense(COS_SIN_COS_PHI),
                  cpl.dense(SIN2_COS2_PHI))
    e32 = eps * math.sqrt(eps)
    g = -par[0] * eps * eps / 4.0 + 0.75 * par[2] * e32
    dg = (-par[0] * eps / 2.0 + 1.125 * par[2] * math.sqrt(eps)) * deps_dt
    dh = (-par[1] * eps / 2.0 + 0.375 * par[2] * math.sqrt(eps)) * deps_dt
    align = cb * cb * cc + 2.0 * cb * sb * cs + sb * sb * ss
    dalign = dbeta_dt * (-2.0 * cb * sb * cc + 2.0 * (cb * cb - sb * sb) * cs
                         + 2.0 * sb * cb * ss)
    return dg * align + g * dalign + dh * np.eye(basis.dim)


class PropagationError(RuntimeError):
    """Quantum propagation failed; message carries (E, b) context."""


@dataclass(frozen=True)
class CollisionOptions:
    """Knobs for one collision propagation (defaults depend on polarity)."""

    J_max: int | None = None
    rtol: float | None = None       # polar 1e-9, apolar 1e-12
    atol: float | None = None       # polar 1e-12, apolar 1e-17
    field_model: str = "exact"      # "exact" | "lorentzian"
    include_polarizability: bool = True
    trace: bool = False
    trace_cap: int = 40000
    auto_escalate: bool = True
    max_escalations: int = 3
    top_shell_threshold: float = 1e-8
    max_steps: int = 50_000_000
    classical_tol: float = 1e-10

    def resolved(self, polarity: str) -> "CollisionOptions":
        upd = {}
        if self.J_max is None:
            upd["J_max"] = DEFAULT_JMAX_POLAR if polarity == "polar" else DEFAULT_JMAX_APOLAR
        if self.rtol is None:
            upd["rtol"] = 1e-9 if polarity == "polar" else 1e-12
        if self.atol is None:
            upd["atol"] = 1e-12 if polarity == "polar" else 1e-17
        return replace(self, **upd) if upd else self


@dataclass
class CollisionResult:
    """Outcome of propagating one collision."""

    geometry: CollisionGeometry
    final_state: RotorState
    excitation: float          # population outside the initial (ground) state
    norm_drift: float
    t_span: float
    n_steps: int
    J_max: int
    trace: tuple[np.ndarray, np.ndarray] | None = None   # (t, P_J columns)


def propagate_between(system: CollisionSystem, E: float, b: float, *,
                      J_max: int, t_from: float, t_to: float,
                      phi: np.ndarray, classical: tuple[float, float, float],
                      rtol: float, atol: float, field_model: str = "exact",
                      include_polarizability: bool = True,
                      record: bool = False, trace_cap: int = 40000,
                      max_steps: int = 50_000_000):
    """Low-level window propagation in the interaction picture.

    `classical` is (r, p_r, beta) at t_from.  Returns (phi, classical,
    norm_drift, n_steps, trace-or-None).
    """
    mol = system.molecule
    basis = RotorBasis(J_max)
    mode, par = _coupling_scalars(system, include_polarizability)
    ops = POLAR_OPS if mode == _kernels.MODE_POLAR else APOLAR_OPS
    cpl = build_couplings(basis, ops)
    geo = CollisionGeometry.build(E, b, system.mu)
    fmodel = {"exact": _kernels.FIELD_EXACT,
              "lorentzian": _kernels.FIELD_LORENTZIAN}[field_model]
    j_of = basis.J_of.astype(np.int64)
    n_j = basis.J_max + 1
    if record:
        trace_t = np.empty(trace_cap)
        trace_p = np.empty((trace_cap, n_j))
    else:
        trace_t = np.empty(1)
        trace_p = np.empty((1, n_j))
    r_i, pr_i, beta_i = classical
    status, n_steps, n_trace, phi_out, r, pr, beta, norm_dev = _kernels.propagate(
        np.ascontiguousarray(phi, dtype=np.complex128),
        basis.free_energies(mol.B),
        cpl.rows, cpl.cols, cpl.vals, cpl.op_of, mode, par,
        fmodel, geo.eps0, geo.tau, E, b, system.mu,
        t_from, t_to, r_i, pr_i, beta_i,
        rtol, atol, max_steps,
        record, j_of, n_j, trace_t, trace_p)
    if status == _kernels.STATUS_DT_UNDERFLOW:
        raise PropagationError(f"step-size underflow (E={E}, b={b})")
    if status == _kernels.STATUS_MAX_STEPS:
        raise PropagationError(f"step budget exhausted (E={E}, b={b})")
    trace = None
    if record:
        trace = (trace_t[:n_trace].copy(), trace_p[:n_trace].copy())
    return phi_out, (r, pr, beta), norm_dev, n_steps, trace


def propagate_collision(system: CollisionSystem, E: float, b: float,
                        options: CollisionOptions = CollisionOptions(),
                        initial_state: RotorState | None = None) -> CollisionResult:
    """Solve the rotor Schroedinger equation across one full collision.

    Starts from |0,0> unless `initial_state` is given.  The basis is enlarged
    automatically while the top two J shells hold more than the configured
    population threshold.
    """
    mol = system.molecule
    opts = options.resolved(mol.polarity)
    geo = CollisionGeometry.build(E, b, system.mu)
    T, r_T, pr_T, beta_T = integration_span(E, b, system.mu, opts.classical_tol)
    classical0 = (r_T, -pr_T, 2 * geo.beta_half - beta_T)

    J_max = opts.J_max
    for attempt in range(opts.max_escalations + 1):
        basis = RotorBasis(J_max)
        if initial_state is None:
            psi0 = RotorState.ground(basis).amplitudes
            ground_idx = basis.index(0, 0)
        else:
            if initial_state.basis.J_max != J_max:
                amp = np.zeros(basis.dim, dtype=np.complex128)
                n_copy = min(len(initial_state.amplitudes), basis.dim)
                amp[:n_copy] = initial_state.amplitudes[:n_copy]
                psi0 = amp
            else:
                psi0 = initial_state.amplitudes.copy()
            ground_idx = int(np.argmax(np.abs(psi0)))
        E0 = basis.free_energies(mol.B)
        phi0 = psi0 * np.exp(1j * E0 * (-T))
        phi, classical, norm_dev, n_steps, trace = propagate_between(
            system, E, b, J_max=J_max, t_from=-T, t_to=T,
            phi=phi0, classical=classical0,
            rtol=opts.rtol, atol=opts.atol, field_model=opts.field_model,
            include_polarizability=opts.include_polarizability,
            record=opts.trace, trace_cap=opts.trace_cap,
            max_steps=opts.max_steps)
        psi = phi * np.exp(-1j * E0 * T)
        state = RotorState(basis, psi)
        pops = state.populations_by_J()
        top_two = float(pops[-2:].sum()) if J_max >= 1 else 0.0
        if not opts.auto_escalate or top_two <= opts.top_shell_threshold:
            mask = np.ones(basis.dim, dtype=bool)
            mask[ground_idx] = False
            excitation = float(np.sum(np.abs(psi[mask]) ** 2))
            return CollisionResult(
                geometry=geo, final_state=state, excitation=excitation,
                norm_drift=norm_dev, t_span=T, n_steps=n_steps,
                J_max=J_max, trace=trace)
        J_max += 4
    raise PropagationError(
        f"basis not converged at J_max={J_max} (E={E}, b={b}): "
        f"top shells hold {top_two:.2e}")
