"""Single-mode dynamics in wavevector space.

Natural units throughout: the transition frequency, the speed of light and
hbar are all 1, so wavenumbers are measured in omega/c, lengths in c/omega
and times in 1/omega.  A mode is labelled by its wavenumber ``k`` and the
angle ``alpha`` between the atomic polarisation and the normal to the
photon polarisation plane; the exciton-photon coupling of that mode is
``U*sqrt(k)*sin(alpha)``.

The source term ``delta(t)/(2*pi)**3`` that places the excitation at the
origin is kept explicitly, so every amplitude carries the ``(2*pi)**-3``
normalisation.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError, WeakCouplingWarning

MODE_NORM = (2.0 * np.pi) ** -3
WEAK_COUPLING_LIMIT = 0.1

# CGS value, erg * s
HBAR_CGS = 1.054571817e-27


@dataclass(frozen=True)
class SimParams:
    """Coupling ``U`` (dimensionless) and evolution time ``t`` (units 1/omega)."""

    U: float
    t: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.U) or self.U < 0:
            raise DomainError(f"coupling U must be >= 0, got {self.U}")
        if not np.isfinite(self.t) or self.t < 0:
            raise DomainError(f"time t must be >= 0, got {self.t}")
        if self.U > WEAK_COUPLING_LIMIT:
            warnings.warn(
                f"U = {self.U} exceeds {WEAK_COUPLING_LIMIT}; the long-range "
                "kernels are first order in U",
                WeakCouplingWarning,
                stacklevel=3,
            )

    @property
    def T(self):
        """Redistribution time ``t*U**2``."""
        return self.t * self.U**2

    @property
    def TU_scale(self):
        """The product ``T*U = t*U**3`` used to label radial profiles."""
        return self.T * self.U

    @property
    def weakly_coupled(self):
        return self.U <= WEAK_COUPLING_LIMIT

    @classmethod
    def from_T(cls, U, T):
        if U <= 0:
            raise DomainError("U must be positive to convert T into t")
        return cls(U=U, t=T / U**2)

    @classmethod
    def from_TU(cls, U, TU):
        if U <= 0:
            raise DomainError("U must be positive to convert TU into t")
        return cls(U=U, t=TU / U**3)


@dataclass(frozen=True)
class ModeState:
    psi_k: complex
    phi_k: complex
    k: float
    alpha: float

    @property
    def norm(self):
        return abs(self.psi_k) ** 2 + abs(self.phi_k) ** 2


@dataclass(frozen=True)
class BranchPair:
    k_plus: complex
    k_minus: complex
    valid: bool = True


def _coupling_sq(k, alpha, U):
    return k * (U * np.sin(alpha)) ** 2


def omega_squared(k, alpha, params):
    """Squared Rabi frequency; ``k`` may be complex (analytic continuation)."""
    return ((1.0 - k) / 2.0) ** 2 + _coupling_sq(k, alpha, params.U)


def rabi_frequency(k, alpha, params):
    """Rabi frequency ``sqrt(((1-k)/2)**2 + k*U**2*sin(alpha)**2)``."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError("wavenumber k must be non-negative")
    out = np.sqrt(omega_squared(k, alpha, params))
    return float(out) if out.ndim == 0 else out


def mode_amplitudes(k, alpha, params):
    """Exact exciton and photon amplitudes of mode ``(k, alpha)`` at time ``params.t``.

    Accepts numpy arrays for ``k`` and ``alpha`` (broadcast together), in
    which case the fields of the returned ``ModeState`` are arrays.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise DomainError("wavenumber k must be non-negative")
    t = params.t
    half_detuning = (1.0 - k_arr) / 2.0
    g = params.U * np.sqrt(k_arr) * np.sin(alpha)
    omega = np.sqrt(half_detuning**2 + g**2)
    # sin(omega t)/omega, finite as omega -> 0
    sinc_t = t * np.sinc(omega * t / np.pi)
    phase = np.exp(1j * t * half_detuning)
    psi = -phase * (1j * np.cos(omega * t) + half_detuning * sinc_t) * MODE_NORM
    phi = -g * phase * sinc_t * MODE_NORM
    if np.ndim(psi) == 0:
        return ModeState(complex(psi), complex(phi), float(k_arr), float(alpha))
    return ModeState(psi, phi, k_arr, alpha)


def branch_points(alpha, params):
    """Zeros of the continued ``Omega**2`` in the complex ``k`` plane.

    For ``U*sin(alpha) > 1`` the pair becomes real and lies outside the
    weak-coupling model; it is returned with ``valid=False``.
    """
    if not 0.0 <= alpha <= np.pi:
        raise DomainError("alpha must lie in [0, pi]")
    ua = params.U * np.sin(alpha)
    a = ua * ua
    centre = 1.0 - 2.0 * a
    root = np.sqrt(complex(1.0 - a))
    k_plus = centre + 2j * ua * root
    k_minus = centre - 2j * ua * root
    return BranchPair(complex(k_plus), complex(k_minus), valid=bool(ua <= 1.0))


def steady_amplitude(eps, k, alpha, params):
    """Photon amplitude of mode ``(k, alpha)`` at energy ``eps`` (frequency domain)."""
    g2 = _coupling_sq(k, alpha, params.U)
    terms = (-eps * eps, k * eps, -eps, g2)
    denom = sum(terms)
    # zero up to the rounding of its own terms counts as on the pole
    if abs(denom) <= 16 * np.finfo(float).eps * sum(abs(x) for x in terms):
        if eps + params.U**2 * np.sin(alpha) ** 2 != 0:
            pole = eps * (eps + 1.0) / (eps + params.U**2 * np.sin(alpha) ** 2)
        else:
            pole = None
        raise SingularityError(
            f"eps={eps} sits on the real pole of mode alpha={alpha} at k={pole}",
            pole=pole,
        )
    return complex(-np.sqrt(k) * params.U * np.sin(alpha) / (8.0 * np.pi**3 * denom))


def coupling_from_physical(d, n_density, omega, hbar=HBAR_CGS):
    """Dimensionless coupling from a dipole moment, density and frequency.

    Gaussian units: ``d`` in statC*cm, ``n_density`` in cm^-3, ``omega`` in
    rad/s.  Returns ``U`` with ``U**2 = 4*pi*d**2*n/(hbar*omega)``.
    """
    for name, value in (("d", d), ("n_density", n_density), ("omega", omega), ("hbar", hbar)):
        if not np.isfinite(value) or value <= 0:
            raise DomainError(f"{name} must be positive, got {value}")
    return float(np.sqrt(4.0 * np.pi * d * d * n_density / (hbar * omega)))


def physical_scales(U, omega):
    """Redistribution rate ``U**2*omega`` and spectral width ``U*omega`` in rad/s."""
    return {"redistribution_rate": U * U * omega, "spectral_width": U * omega}
