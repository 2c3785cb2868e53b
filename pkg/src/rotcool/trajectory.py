"""Classical two-body Coulomb trajectory and the transient electric field.

The molecule experiences the Coulomb field of the passing atomic ion,
eps(t) = 1/r(t)^2 in atomic units, with peak value eps0 = 1/r0^2 at the
distance of closest approach r0.  The exact pulse is well approximated by a
Lorentzian of FWHM tau = 1.86 sqrt(mu / E^3).

Time zero is always the instant of closest approach; r(t) is even in t and
the orientation angle beta(t) grows monotonically from 0 to pi - theta_sc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .kinematics import scattering_angle

TAU_FWHM_CONST = 1.86     # FWHM of the field pulse in units of sqrt(mu/E^3)

#: integration window: |t| <= max(8 tau, time until eps < EPS_CUTOFF * eps0)
EPS_CUTOFF = 1e-6
TAU_SPAN_FACTOR = 8.0


class TrajectoryError(RuntimeError):
    """Classical integration failed (step underflow or budget exhausted)."""


def closest_approach(E: float, b: float) -> float:
    """Distance of closest approach, r0 = 1/(2E) + sqrt((1/(2E))^2 + b^2)."""
    if E <= 0:
        raise ValueError("energy must be positive")
    if b < 0:
        raise ValueError("impact parameter must be nonnegative")
    a = 1.0 / (2.0 * E)
    return a + math.hypot(a, b)


def pulse_fwhm(E: float, mu: float) -> float:
    """FWHM of the transient field pulse, tau = 1.86 sqrt(mu/E^3)."""
    return TAU_FWHM_CONST * math.sqrt(mu / E**3)


@dataclass(frozen=True)
class CollisionGeometry:
    """Derived geometry of one scattering event (atomic units throughout)."""

    E: float          # CM energy
    b: float          # impact parameter
    r0: float         # closest approach
    theta_sc: float   # deflection angle
    eps0: float       # peak field, 1/r0^2
    tau: float        # Lorentzian FWHM

    @classmethod
    def build(cls, E: float, b: float, mu: float) -> "CollisionGeometry":
        r0 = closest_approach(E, b)
        return cls(E=E, b=b, r0=r0, theta_sc=scattering_angle(E, b),
                   eps0=1.0 / r0**2, tau=pulse_fwhm(E, mu))

    @property
    def beta_half(self) -> float:
        """Orientation angle accumulated from t=-inf to closest approach."""
        return 0.5 * (math.pi - self.theta_sc)


def lorentzian_field(E: float, b: float, mu: float, t) -> np.ndarray:
    """Model field eps(t) = eps0 (tau/2)^2 / (t^2 + (tau/2)^2)."""
    geo = CollisionGeometry.build(E, b, mu)
    half = 0.5 * geo.tau
    t = np.asarray(t, dtype=float)
    return geo.eps0 * half**2 / (t**2 + half**2)


def integration_span(E: float, b: float, mu: float,
                     tol: float = 1e-10) -> tuple[float, float, float, float]:
    """Half-span T of the collision window and the classical state at +T.

    T satisfies T >= 8 tau and eps(T) < 1e-6 eps0.  Returns
    (T, r(T), p_r(T), beta(T)) with beta measured from t = -inf.
    """
    geo = CollisionGeometry.build(E, b, mu)
    r_stop = geo.r0 / math.sqrt(EPS_CUTOFF)
    t_min = TAU_SPAN_FACTOR * geo.tau
    status, t_end, r, pr, beta_rel = _kernels.classical_extent(
        E, b, mu, geo.r0, r_stop, t_min, tol, 20_000_000)
    if status == _kernels.STATUS_DT_UNDERFLOW:
        raise TrajectoryError(
            f"step-size underflow near closest approach (E={E}, b={b})")
    if status != _kernels.STATUS_OK:
        raise TrajectoryError(f"classical step budget exhausted (E={E}, b={b})")
    return t_end, r, pr, geo.beta_half + beta_rel


@dataclass(frozen=True)
class TrajectorySamples:
    """r(t), beta(t) and field magnitude along one collision."""

    E: float
    b: float
    mu: float
    t: np.ndarray
    r: np.ndarray
    beta: np.ndarray

    @property
    def eps(self) -> np.ndarray:
        return 1.0 / self.r**2


def propagate_trajectory(E: float, b: float, mu: float,
                         t_span: float | None = None,
                         tol: float = 1e-10,
                         n_samples: int = 2001) -> TrajectorySamples:
    """Integrate the planar two-body motion and sample it on a uniform grid.

    The window is symmetric about closest approach; initial conditions at -T
    come from the forward half by time-reversal symmetry (r even, p_r odd,
    beta(-t) = 2 beta(0) - beta(t)).
    """
    geo = CollisionGeometry.build(E, b, mu)
    T, r_T, pr_T, beta_T = integration_span(E, b, mu, tol)
    if t_span is not None:
        if t_span > T:
            raise ValueError(f"requested span {t_span} exceeds computed window {T}")
        # walk the endpoint inward on the already-validated window
        ts_pre = np.array([-T, -t_span])
        status, r_a, pr_a, beta_a = _kernels.sample_classical(
            E, b, mu, r_T, -pr_T, 2 * geo.beta_half - beta_T, ts_pre, tol, 20_000_000)
        if status != _kernels.STATUS_OK:
            raise TrajectoryError(f"classical integration failed (E={E}, b={b})")
        T0, r_i, pr_i, beta_i = t_span, r_a[1], pr_a[1], beta_a[1]
    else:
        T0, r_i, pr_i, beta_i = T, r_T, -pr_T, 2 * geo.beta_half - beta_T
    ts = np.linspace(-T0, T0, n_samples)
    status, r_out, pr_out, beta_out = _kernels.sample_classical(
        E, b, mu, r_i, pr_i, beta_i, ts, tol, 20_000_000)
    if status == _kernels.STATUS_DT_UNDERFLOW:
        raise TrajectoryError(
            f"step-size underflow near closest approach (E={E}, b={b})")
    if status != _kernels.STATUS_OK:
        raise TrajectoryError(f"classical step budget exhausted (E={E}, b={b})")
    return TrajectorySamples(E=E, b=b, mu=mu, t=ts, r=r_out, beta=beta_out)
