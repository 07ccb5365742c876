"""Real-space excitation and photon amplitudes of the long-range exchange.

Coordinates: the polarisation axis is ``z``; a field point is given by its
distance ``r`` from the initially excited site and the angle ``theta`` to
the polarisation, so ``z = r*cos(theta)`` and ``rho = r*sin(theta)``.
Everything depends on ``(r, theta)`` only (cylindrical symmetry).

Three models are available:

``full``
    Numerical solid-angle integral of the contour-reduced kernels
    (J1 kernel for the excitation, J0 kernel for the photon).
``short_time``
    Closed form valid for ``t*U**2 << 1`` and ``r << t``.
``asymptotic``
    Two-term J0 closed form for ``t*U**2 >> 1``.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .kspace import SimParams
from .quadrature import DEFAULT_SPEC, QuadratureSpec, _sin2_alpha, integrate_hemisphere
from .specfun import j0, j1_ratio

MODELS = ("full", "short_time", "asymptotic")

SHORT_TIME_MAX_T = 0.1
ASYMPTOTIC_MIN_T = 10.0
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 30


@dataclass(frozen=True)
class FieldPoint:
    r: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0):
            raise DomainError(f"r must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def z(self):
        return self.r * math.cos(self.theta)

    @property
    def rho(self):
        return self.r * math.sin(self.theta)

    @classmethod
    def from_cylindrical(cls, z, rho):
        r = math.hypot(z, rho)
        theta = math.atan2(abs(rho), z) if r > 0 else 0.0
        return cls(r, theta)


# --- full numerical model ----------------------------------------------------

def _light_cone(point, params):
    if params.t == 0.0:
        return 0.0
    if point.r <= params.t:
        return 1.0
    return params.t / point.r


def _bessel_arg_max(point, params, cut):
    """Largest value of ``2*U*sqrt(r_T*(t - r_T))`` on the domain."""
    r_top = point.r * cut
    peak = params.t / 2 if r_top >= params.t / 2 else r_top
    return 2.0 * params.U * math.sqrt(max(peak * (params.t - peak), 0.0))


def _kernel(point, params, photon):
    cos_t, sin_t = math.cos(point.theta), math.sin(point.theta)
    r, t, U2 = point.r, params.t, params.U**2
    pref = 1.0 / (2.0 * math.pi**2)

    def integrand(Theta, Phi):
        x = np.cos(Theta)
        s2 = _sin2_alpha(cos_t, sin_t, x, np.sin(Theta), np.cos(Phi))
        ua2 = U2 * s2
        r_T = r * x
        lag = t - r_T
        inside = lag >= 0.0
        lag = np.where(inside, lag, 0.0)
        z = 2.0 * np.sqrt(ua2 * r_T * lag)
        phase = np.exp(-1j * (r_T - t * ua2))
        if photon:
            val = 1j * np.sqrt(ua2) * j0(z) * phase
        else:
            val = ua2 * lag * j1_ratio(z) * phase
        return pref * np.where(inside, val, 0.0)

    return integrand


def _integrate(point, params, spec, photon, domain_cut=None):
    if params.U == 0.0 or params.t == 0.0:
        return 0j, 0.0
    cone = _light_cone(point, params)
    cut = cone if domain_cut is None else domain_cut
    zmax = _bessel_arg_max(point, params, cut)
    res = integrate_hemisphere(
        _kernel(point, params, photon),
        cut,
        spec,
        phase_rate=point.r + zmax,
        phi_bandwidth=params.T + zmax,
        breakpoints=(cone,) if cut > cone else (),
        phi_even=True,
    )
    return res.value, res.error


def excited_amplitude(point, params, spec=DEFAULT_SPEC, *, domain_cut=None):
    """Excitation amplitude at ``point`` from the J1 kernel.

    ``domain_cut`` widens the ``cos(Theta)`` domain beyond the light cone;
    the kernel vanishes there, so the result must not change.
    """
    return excited_amplitude_with_error(point, params, spec, domain_cut=domain_cut)[0]


def excited_amplitude_with_error(point, params, spec=DEFAULT_SPEC, *, domain_cut=None):
    return _integrate(point, params, spec, photon=False, domain_cut=domain_cut)


def photon_amplitude(point, params, spec=DEFAULT_SPEC, *, domain_cut=None):
    """Photon amplitude at ``point`` from the J0 kernel."""
    return _integrate(point, params, spec, photon=True, domain_cut=domain_cut)[0]


# --- short-time closed form --------------------------------------------------

def _short_time_series(r):
    """Radial factors (isotropic, cos 2theta) by their power series in r."""
    n = np.arange(_SERIES_TERMS)
    coeff = (-1j) ** n / np.array([math.factorial(k) for k in n], dtype=float)
    iso = -np.sum(coeff * (3.0 / (n + 1) - 1.0 / (n + 3)) * r**n)
    aniso = -np.sum(coeff * (1.0 / (n + 1) - 3.0 / (n + 3)) * r**n)
    return iso, aniso


def _short_time_factors(r):
    if r < _SERIES_RADIUS:
        return _short_time_series(r)
    e = np.exp(-1j * r)
    r2, r3 = r * r, r**3
    iso = 1j * (3 * r2 - 2 * e * (r2 + 1j * r + 1) + 2) / r3
    aniso = 1j * (r2 + 2 * e * (r2 - 3j * r - 3) + 6) / r3
    return iso, aniso


def short_time_amplitude(point, params):
    """Closed-form excitation amplitude for ``t*U**2 << 1``.

    Population grows as ``t**2`` and falls off as ``r**-2``; the origin value
    is ``-2*t*U**2/(3*pi)``.
    """
    iso, aniso = _short_time_factors(point.r)
    return complex(params.T / (4 * math.pi) * (iso + aniso * math.cos(2 * point.theta)))


def short_time_integrand_check(point, params, spec=DEFAULT_SPEC):
    """First-order solid-angle integral behind the short-time closed form.

    Integrates ``-(t*U**2/(2*pi**2)) * sin(alpha)**2 * exp(-i r cos(Theta))``
    over the forward hemisphere.  This sign and phase convention is the one
    under which the closed form is the exact value of the integral.
    """
    cos_t, sin_t = math.cos(point.theta), math.sin(point.theta)
    r = point.r
    pref = -params.T / (2.0 * math.pi**2)

    def integrand(Theta, Phi):
        x = np.cos(Theta)
        s2 = _sin2_alpha(cos_t, sin_t, x, np.sin(Theta), np.cos(Phi))
        return pref * s2 * np.exp(-1j * r * x)

    return integrate_hemisphere(integrand, 1.0, spec, phase_rate=r, phi_even=True).value


# --- long-time asymptotics ---------------------------------------------------

def asymptotic_amplitude(point, params):
    """Two-term J0 asymptotic form of the excitation amplitude (``T >> 1``)."""
    if point.r == 0.0:
        raise DomainError("the asymptotic form diverges at r = 0")
    z, rho = point.z, point.rho
    r2 = z * z + rho * rho
    T = params.T
    shape = (2 * z * z + rho * rho) / r2
    pref = 1j / (2 * math.pi * math.sqrt(r2))
    first = np.exp(-1j * T / 2 * shape) * j0(T * rho * rho / (2 * r2))
    second = np.exp(-1j * T * shape) * j0(T * rho * rho / r2)
    return complex(pref * (first - second))


def angular_profile(theta, T):
    """Angular factor of the asymptotic population, vectorised over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi) or T < 0:
        raise DomainError("need theta in [0, pi] and T >= 0")
    s2 = np.sin(theta) ** 2
    val = np.exp(0.5j * T * (2 - s2)) * j0(0.5 * T * s2) - j0(T * s2)
    out = np.abs(val) ** 2
    return float(out) if out.ndim == 0 else out


# --- maps ----------------------------------------------------------------------

@dataclass
class FieldMap:
    r: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    population: np.ndarray
    error: np.ndarray
    valid: np.ndarray
    status: np.ndarray
    params: SimParams
    quad_spec: QuadratureSpec
    model: str
    phi: np.ndarray = None
    flags: dict = field(default_factory=dict)

    @property
    def converged(self):
        return bool(np.all(self.status == "ok"))


def regime_flags(params):
    return {
        "short_time": params.T <= SHORT_TIME_MAX_T,
        "asymptotic": params.T >= ASYMPTOTIC_MIN_T,
        "weak_coupling": params.weakly_coupled,
    }


def _point_valid(point, params, model, flags):
    if model == "short_time":
        return flags["short_time"] and point.r < params.t
    if model == "asymptotic":
        return flags["asymptotic"] and 0 < point.r < params.t
    return flags["weak_coupling"]


def _evaluate_point(args):
    r, theta, params, spec, model, include_photon = args
    point = FieldPoint(r, theta)
    phi = None
    try:
        if model == "short_time":
            psi, err = short_time_amplitude(point, params), 0.0
        elif model == "asymptotic":
            psi, err = asymptotic_amplitude(point, params), 0.0
        else:
            psi, err = excited_amplitude_with_error(point, params, spec)
            if include_photon:
                phi = photon_amplitude(point, params, spec)
        status = "ok"
    except ConvergenceError as exc:
        psi, err, status = exc.estimate, exc.error, "no_convergence"
    except DomainError:
        psi, err, status = complex("nan"), float("nan"), "domain_error"
    return psi, err, status, phi


def field_map(r, theta, params, spec=DEFAULT_SPEC, model="full", *,
              include_photon=False, n_jobs=1):
    """Evaluate a model on a grid of points.

    ``r`` and ``theta`` are broadcast together (pass ``np.meshgrid`` output
    for a rectangular grid).  Points that fail to converge keep their best
    estimate and are marked in ``status``; they never abort the map.
    """
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; choose from {MODELS}")
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    flat = [(float(a), float(b), params, spec, model, include_photon)
            for a, b in zip(r.ravel(), theta.ravel())]
    if n_jobs > 1 and model == "full":
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_evaluate_point, flat, chunksize=1))
    else:
        results = [_evaluate_point(args) for args in flat]

    psi = np.array([res[0] for res in results], dtype=complex).reshape(r.shape)
    err = np.array([res[1] for res in results], dtype=float).reshape(r.shape)
    status = np.array([res[2] for res in results], dtype=object).reshape(r.shape)
    phi = None
    if include_photon and model == "full":
        phi = np.array([res[3] if res[3] is not None else np.nan for res in results],
                       dtype=complex).reshape(r.shape)
    flags = regime_flags(params)
    valid = np.array([
        st == "ok" and _point_valid(FieldPoint(a, b), params, model, flags)
        for a, b, st in zip(r.ravel(), theta.ravel(), status.ravel())
    ]).reshape(r.shape)
    return FieldMap(
        r=r.copy(), theta=theta.copy(), psi=psi, population=np.abs(psi) ** 2,
        error=err, valid=valid, status=status, params=params, quad_spec=spec,
        model=model, phi=phi, flags=flags,
    )


def radial_samples(r_max, dr):
    if dr <= 0 or r_max <= 0:
        raise DomainError("r_max and dr must be positive")
    n = int(math.floor(r_max / dr + 1e-9))
    return dr * np.arange(1, n + 1)


def radial_profile(theta, r_max, params, spec=DEFAULT_SPEC, *, dr=None, n_jobs=1):
    """Population along a fixed-``theta`` ray at ``r = dr, 2*dr, ... <= r_max``.

    Samples do not depend on ``r_max`` beyond its truncation of the list.
    """
    if dr is None:
        dr = r_max / 200.0
    r = radial_samples(r_max, dr)
    return field_map(r, np.full_like(r, theta), params, spec, "full", n_jobs=n_jobs)
