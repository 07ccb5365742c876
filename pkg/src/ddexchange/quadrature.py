"""Solid-angle quadrature over the photon-direction hemisphere.

Photon directions are described in the frame of the radius vector: ``Theta``
is the polar angle measured from ``r`` and ``Phi`` the azimuth around it.
The light cone restricts the domain to ``0 < cos(Theta) <= cone_cut``.

The engine is a tensor product of

* adaptive Gauss-Kronrod (7/15) panels in ``Theta``, with an initial
  partition fine enough that the phase ``phase_rate * d(cos Theta)``
  accumulated across one panel never exceeds ``oscillation_panel_cap``, and
* the periodic trapezoidal rule in ``Phi`` with node doubling.

Integrands are called on broadcastable arrays ``(Theta[:, None],
Phi[None, :])`` and must return complex (or real) arrays of the broadcast
shape.  Summation order is fixed, so identical calls give bit-identical
results.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]

# cap on integrand evaluations per vectorised call
_CHUNK = 2_000_000
_MAX_SWEEPS = 400


@dataclass(frozen=True)
class QuadratureSpec:
    base_panels_theta: int = 4
    base_panels_phi: int = 32
    max_refinement_depth: int = 12
    rel_tol: float = 1e-7
    abs_tol: float = 1e-12
    oscillation_panel_cap: float = math.pi / 4

    def __post_init__(self):
        if self.base_panels_theta < 1 or self.base_panels_phi < 4:
            raise DomainError("need at least 1 Theta panel and 4 Phi nodes")
        if self.max_refinement_depth < 0:
            raise DomainError("max_refinement_depth must be >= 0")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not 0 < self.oscillation_panel_cap <= math.pi / 4:
            raise DomainError("oscillation_panel_cap must lie in (0, pi/4]")

    def to_dict(self):
        return dict(self.__dict__)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    evaluations: int = 0
    panels: int = 0
    phi_nodes: int = 0


# --- frame relations -----------------------------------------------------

def _check_angle(name, value, upper):
    value = np.asarray(value, dtype=float)
    slack = 1e-12
    if np.any(value < -slack) or np.any(value > upper + slack):
        raise DomainError(f"{name} outside [0, {upper:.6g}]")
    return value


def sin2_alpha_from_r_frame(theta, Theta, Phi):
    """``sin(alpha)**2`` for a photon direction given in the radius-vector frame.

    ``theta`` is the angle between polarisation and radius vector.
    """
    theta = _check_angle("theta", theta, math.pi)
    Theta = _check_angle("Theta", Theta, math.pi)
    Phi = _check_angle("Phi", Phi, 2 * math.pi)
    return _sin2_alpha(np.cos(theta), np.sin(theta), np.cos(Theta), np.sin(Theta), np.cos(Phi))


def _sin2_alpha(cos_t, sin_t, cos_T, sin_T, cos_P):
    c = cos_t * cos_T + sin_t * sin_T * cos_P
    return np.clip(1.0 - c * c, 0.0, 1.0)


def cos_Theta_from_d_frame(theta, alpha, phi):
    """``cos(Theta)`` for a photon direction given in the polarisation frame."""
    theta = _check_angle("theta", theta, math.pi)
    alpha = _check_angle("alpha", alpha, math.pi)
    phi = _check_angle("phi", phi, 2 * math.pi)
    c = np.cos(theta) * np.cos(alpha) + np.sin(theta) * np.sin(alpha) * np.cos(phi)
    return np.clip(c, -1.0, 1.0)


# --- 1D composite rules --------------------------------------------------

def integrate_panels(f, edges, order=20):
    """Composite Gauss-Legendre integral of a vectorised ``f`` over ``edges``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    vals = f(nodes)
    return np.sum(np.sum(vals * w[None, :], axis=1) * half)


# --- hemisphere engine ---------------------------------------------------

def _phi_rule(n, even):
    """Nodes and weights of the N-point periodic trapezoid (N a power of two)."""
    if even:
        j = np.arange(n // 2 + 1)
        w = np.full(j.size, 2.0)
        w[0] = w[-1] = 1.0
    else:
        j = np.arange(n)
        w = np.ones(j.size)
    return 2.0 * math.pi * j / n, w * (2.0 * math.pi / n)


def _initial_partition(lo_theta, cone_cut, spec, phase_rate, breakpoints):
    breaks = list(np.linspace(lo_theta, math.pi / 2, spec.base_panels_theta + 1))
    n_phase = math.ceil(abs(phase_rate) * cone_cut / spec.oscillation_panel_cap)
    if n_phase > 1:
        cos_breaks = np.linspace(0.0, cone_cut, n_phase + 1)[1:-1]
        breaks.extend(np.arccos(cos_breaks))
    for c in breakpoints:
        if 0.0 < c < cone_cut:
            breaks.append(math.acos(c))
    breaks = np.unique(np.asarray(breaks))
    keep = np.concatenate([[True], np.diff(breaks) > 1e-14])
    return breaks[keep]


class _Panels:
    """Per-panel Kronrod/Gauss sums at the current Phi resolution."""

    def __init__(self, integrand, n_phi, phi_even):
        self.integrand = integrand
        self.phi, self.w_full = _phi_rule(n_phi, phi_even)
        _, w_half = _phi_rule(n_phi // 2, phi_even)
        self.w_half = np.zeros_like(self.w_full)
        self.w_half[::2] = w_half
        self.evaluations = 0

    def evaluate(self, a, b):
        """Return (kronrod, gauss, kronrod at half Phi resolution) per panel."""
        out_k = np.empty(a.size, dtype=complex)
        out_g = np.empty(a.size, dtype=complex)
        out_h = np.empty(a.size, dtype=complex)
        per_panel = 15 * self.phi.size
        step = max(1, _CHUNK // per_panel)
        for s in range(0, a.size, step):
            aa, bb = a[s:s + step], b[s:s + step]
            half = 0.5 * (bb - aa)
            theta = (0.5 * (aa + bb))[:, None] + half[:, None] * KRONROD_NODES[None, :]
            vals = np.asarray(
                self.integrand(theta.reshape(-1, 1), self.phi[None, :]), dtype=complex
            )
            vals = np.broadcast_to(vals, (theta.size, self.phi.size))
            self.evaluations += vals.size
            jac = (np.sin(theta) * half[:, None]).reshape(-1)
            full = np.sum(vals * self.w_full[None, :], axis=1) * jac
            coarse = np.sum(vals * self.w_half[None, :], axis=1) * jac
            full = full.reshape(-1, 15)
            coarse = coarse.reshape(-1, 15)
            out_k[s:s + step] = np.sum(full * KRONROD_WEIGHTS, axis=1)
            out_g[s:s + step] = np.sum(full * GAUSS_WEIGHTS, axis=1)
            out_h[s:s + step] = np.sum(coarse * KRONROD_WEIGHTS, axis=1)
        return out_k, out_g, out_h


def _next_pow2(n):
    return 1 << max(3, math.ceil(math.log2(max(n, 8))))


def integrate_hemisphere(
    integrand,
    cone_cut=1.0,
    spec=DEFAULT_SPEC,
    *,
    phase_rate=0.0,
    phi_bandwidth=0.0,
    breakpoints=(),
    phi_even=False,
):
    """Integrate ``integrand(Theta, Phi)`` over ``0 < cos(Theta) <= cone_cut``.

    Parameters
    ----------
    integrand : callable
        Vectorised, pure function of ``(Theta, Phi)``.  The solid-angle
        Jacobian ``sin(Theta)`` is applied by the engine.
    cone_cut : float
        Upper bound on ``cos(Theta)`` in ``[0, 1]``; ``0`` gives an empty
        domain and an exact zero.
    spec : QuadratureSpec
    phase_rate : float
        Oscillation rate of the integrand in ``cos(Theta)`` (radians per
        unit), used to size the initial panels.
    phi_bandwidth : float
        Rough highest Fourier harmonic in ``Phi``; sets the starting number
        of azimuthal nodes.
    breakpoints : sequence of float
        Extra ``cos(Theta)`` values that must be panel edges, e.g. where the
        integrand has a kink or jump.
    phi_even : bool
        Declare ``integrand(Theta, Phi) == integrand(Theta, 2*pi - Phi)``;
        halves the work without changing the rule.

    Returns
    -------
    QuadResult

    Raises
    ------
    ConvergenceError
        When the refinement budget runs out before
        ``error <= max(abs_tol, rel_tol*|value|)``.
    """
    if not 0.0 <= cone_cut <= 1.0:
        raise DomainError(f"cone_cut must lie in [0, 1], got {cone_cut}")
    if cone_cut == 0.0:
        return QuadResult(0j, 0.0)

    lo_theta = math.acos(cone_cut)
    breaks = _initial_partition(lo_theta, cone_cut, spec, phase_rate, breakpoints)
    a0, b0 = breaks[:-1], breaks[1:]
    n_phi = max(_next_pow2(spec.base_panels_phi), _next_pow2(2 * phi_bandwidth + 16))
    max_phi = n_phi << spec.max_refinement_depth

    a, b = a0.copy(), b0.copy()
    depth = np.zeros(a.size, dtype=int)
    rule = _Panels(integrand, n_phi, phi_even)
    kron, gauss, coarse = rule.evaluate(a, b)
    evaluations = rule.evaluations

    for _ in range(_MAX_SWEEPS):
        total = np.sum(kron)
        err_theta = float(np.sum(np.abs(kron - gauss)))
        err_phi = float(abs(total - np.sum(coarse)))
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if err_theta + err_phi <= tol:
            return QuadResult(complex(total), err_theta + err_phi, evaluations, a.size, n_phi)

        if err_phi > 0.5 * tol and n_phi < max_phi:
            n_phi *= 2
            rule = _Panels(integrand, n_phi, phi_even)
            kron, gauss, coarse = rule.evaluate(a, b)
            evaluations += rule.evaluations
            continue

        budget = max(tol - err_phi, 0.5 * tol)
        width = b - a
        local = np.abs(kron - gauss)
        split = (local > budget * width / np.sum(width)) & (depth < spec.max_refinement_depth)
        if not np.any(split):
            worst = np.argmax(np.where(depth < spec.max_refinement_depth, local, -1.0))
            if depth[worst] >= spec.max_refinement_depth or err_phi > 0.5 * tol:
                break
            split[worst] = True

        mid = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[split], mid])
        new_b = np.concatenate([mid, b[split]])
        new_depth = np.concatenate([depth[split], depth[split]]) + 1
        k_new, g_new, c_new = rule.evaluate(new_a, new_b)
        evaluations += 15 * rule.phi.size * new_a.size

        keep = ~split
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        depth = np.concatenate([depth[keep], new_depth])
        kron = np.concatenate([kron[keep], k_new])
        gauss = np.concatenate([gauss[keep], g_new])
        coarse = np.concatenate([coarse[keep], c_new])
        order = np.argsort(a, kind="stable")
        a, b, depth = a[order], b[order], depth[order]
        kron, gauss, coarse = kron[order], gauss[order], coarse[order]

    total = complex(np.sum(kron))
    error = float(np.sum(np.abs(kron - gauss)) + abs(total - np.sum(coarse)))
    raise ConvergenceError(
        f"hemisphere quadrature did not reach tolerance: error {error:.3e}, "
        f"value {total:.6e}",
        estimate=total,
        error=error,
    )
