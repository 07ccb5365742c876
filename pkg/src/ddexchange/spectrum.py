"""Emission spectrum of a finite cloud.

The cloud density ``n(r)`` enters through its normalised 3D radial Fourier
transform::

    n(kappa) = int n(r) sin(kappa r)/(kappa r) r^2 dr / int n(r) r^2 dr

tabulated once per profile and interpolated with a cubic spline.  Below a
floor of ``TABLE_FLOOR`` the transform is indistinguishable from quadrature
noise; the table support ends there and ``n`` is taken as zero beyond it.

Frequencies are expressed through the scaled detuning
``delta_omega = eps/(U*sin(alpha))``, and the wavenumber offset ``kappa``
of the profile transform is measured in the same units (multiples of
``U*sin(alpha)``).  In these units the pole of the averaged amplitude sits
at ``kappa_0 = delta_omega - 1/delta_omega``.
"""

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, TruncationWarning
from .kspace import SimParams
from .quadrature import integrate_panels

SHAPES = ("sech2", "gaussian", "tabulated")
TABLE_FLOOR = 1e-12
_TABLE_POINTS = 4001
_GL_ORDER = 20


@dataclass(frozen=True)
class DensityProfile:
    """Radial density of the cloud, ``n(0) = 1``.

    ``shape`` is ``"sech2"`` (``1/cosh(r/L)**2``), ``"gaussian"``
    (``exp(-(r/L)**2)``) or ``"tabulated"``, in which case ``samples``
    holds ``(r_values, n_values)`` and ``L`` only sets the panel size.
    """

    L: float = 4.0
    shape: str = "sech2"
    samples: tuple = None

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise DomainError(f"profile size L must be positive, got {self.L}")
        if self.shape not in SHAPES:
            raise DomainError(f"unknown profile shape {self.shape!r}")
        if self.shape == "tabulated":
            if self.samples is None:
                raise DomainError("a tabulated profile needs samples")
            r, n = (np.asarray(v, dtype=float) for v in self.samples)
            if r.ndim != 1 or r.shape != n.shape or r[0] != 0 or np.any(np.diff(r) <= 0):
                raise DomainError("samples must be increasing radii from 0 with matching values")
            object.__setattr__(self, "samples", (tuple(r), tuple(n)))

    def density(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.shape == "sech2":
            return np.cosh(np.minimum(r / self.L, 350.0)) ** -2
        if self.shape == "gaussian":
            return np.exp(-((r / self.L) ** 2))
        rs, ns = (np.asarray(v) for v in self.samples)
        return np.interp(r, rs, ns / ns[0], right=0.0)

    @property
    def r_max(self):
        if self.shape == "sech2":
            return 40.0 * self.L
        if self.shape == "gaussian":
            return 8.0 * self.L
        return float(self.samples[0][-1])

    @property
    def kappa_max(self):
        return 60.0 / self.L

    def _transform(self, kappa):
        """Unnormalised radial transform by composite Gauss-Legendre."""
        width = min(self.L / 4.0, 8.0 / self.kappa_max)
        edges = np.linspace(0.0, self.r_max, int(math.ceil(self.r_max / width)) + 1)
        x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
        a, b = edges[:-1], edges[1:]
        half = 0.5 * (b - a)
        r = ((0.5 * (a + b))[:, None] + half[:, None] * x[None, :]).ravel()
        wr = (half[:, None] * w[None, :]).ravel() * r * r * self.density(r)
        out = np.empty(kappa.size)
        for s in range(0, kappa.size, 256):
            kr = np.outer(kappa[s:s + 256], r)
            out[s:s + 256] = np.sum(np.sinc(kr / np.pi) * wr[None, :], axis=1)
        return out

    @cached_property
    def ft_table(self):
        """``(kappa, n(kappa))`` on a uniform grid over ``[0, kappa_max]``."""
        kappa = np.linspace(0.0, self.kappa_max, _TABLE_POINTS)
        values = self._transform(kappa)
        return kappa, values / values[0]

    @cached_property
    def support(self):
        """Largest ``kappa`` before the table first drops below ``TABLE_FLOOR``."""
        kappa, values = self.ft_table
        below = np.nonzero(np.abs(values) < TABLE_FLOOR)[0]
        return float(kappa[below[0]]) if below.size else float(kappa[-1])

    @cached_property
    def _spline(self):
        kappa, values = self.ft_table
        keep = kappa <= self.support
        return CubicSpline(kappa[keep], values[keep], bc_type=((1, 0.0), "not-a-knot"))

    def ft(self, kappa):
        kappa = np.abs(np.asarray(kappa, dtype=float))
        inside = kappa <= self.support
        out = np.where(inside, self._spline(np.where(inside, kappa, 0.0)), 0.0)
        out = np.where(kappa == 0.0, 1.0, out)
        return float(out) if out.ndim == 0 else out


def density_ft(profile, kappa):
    """Normalised Fourier transform ``n(kappa)`` of the cloud density."""
    return profile.ft(kappa)


@dataclass(frozen=True)
class SpectrumPoint:
    delta_omega: float
    intensity: float


def spectral_intensity(delta_omega, profile, *, zero_limit=False):
    """Two-peak photon spectrum ``n(dw - 1/dw)**2 / (16 pi^4 dw^2)``.

    ``delta_omega = 0`` raises unless ``zero_limit`` is set, in which case
    the limit value 0 is returned there.
    """
    dw = np.asarray(delta_omega, dtype=float)
    zero = dw == 0.0
    if np.any(zero) and not zero_limit:
        raise DomainError("spectral intensity is undefined at delta_omega = 0")
    a = np.abs(np.where(zero, 1.0, dw))
    n = profile.ft(a - 1.0 / a)
    out = np.where(zero, 0.0, n * n / (16.0 * math.pi**4 * a * a))
    return float(out) if out.ndim == 0 else out


def spectrum(delta_omegas, profile, *, zero_limit=True):
    values = spectral_intensity(np.asarray(delta_omegas, float), profile, zero_limit=zero_limit)
    return [SpectrumPoint(float(d), float(v)) for d, v in zip(np.atleast_1d(delta_omegas),
                                                              np.atleast_1d(values))]


def _principal_value(profile, pole):
    """``PV int n(kappa)/(kappa - pole) dkappa`` over the table support."""
    K = profile.support
    n_panels = max(8, int(math.ceil(2 * K / 0.01)))
    if abs(pole) < K:
        n0 = profile.ft(pole)
        left = np.linspace(-K, pole, max(2, int(n_panels * (pole + K) / (2 * K))) + 1)
        right = np.linspace(pole, K, max(2, int(n_panels * (K - pole) / (2 * K))) + 1)

        def regular(u):
            return (profile.ft(u) - n0) / (u - pole)

        body = integrate_panels(regular, left, 10) + integrate_panels(regular, right, 10)
        return body + n0 * math.log((K - pole) / (K + pole))
    edges = np.linspace(-K, K, n_panels + 1)
    return integrate_panels(lambda u: profile.ft(u) / (u - pole), edges, 10)


def averaged_amplitude(eps, alpha, params, profile):
    """Photon amplitude at energy ``eps`` averaged over the cloud's wavenumber spread.

    The wavenumber integral runs along the real axis with the retarded
    prescription ``eps -> eps + i0``: principal value plus half the residue
    at the real pole.
    """
    if not 0.0 < alpha < math.pi:
        raise DomainError("alpha must lie strictly inside (0, pi)")
    g = params.U * math.sin(alpha)
    if g <= 0.0:
        raise DomainError("need U*sin(alpha) > 0")
    if eps == 0.0:
        raise DomainError("eps = 0 puts the pole at infinity")
    dw = eps / g
    pole = dw - 1.0 / dw
    if abs(pole) >= profile.support:
        warnings.warn(
            f"pole {pole:.4g} lies outside the tabulated support "
            f"{profile.support:.4g}; |n| there is below {TABLE_FLOOR:g}",
            TruncationWarning,
            stacklevel=2,
        )
    pv = _principal_value(profile, pole)
    residue = math.pi * profile.ft(pole)
    return complex(-(pv + 1j * residue) / (8.0 * math.pi**3 * dw))


def averaged_spectrum(delta_omegas, profile, U=0.05, alpha=math.pi / 2):
    """``|averaged_amplitude|**2`` on a grid of scaled detunings."""
    params = SimParams(U=U)
    g = U * math.sin(alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return np.array([abs(averaged_amplitude(d * g, alpha, params, profile)) ** 2
                         for d in np.asarray(delta_omegas, float)])
