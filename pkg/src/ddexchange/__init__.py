"""Single-excitation redistribution in a polarized two-level medium.

Natural units: transition frequency, speed of light and hbar equal 1.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DomainError,
    SingularityError,
    TruncationWarning,
    WeakCouplingWarning,
)
from .specfun import BesselEval, bessel_eval, bessel_j0, bessel_j1, j0, j1
from .kspace import (
    BranchPair,
    ModeState,
    SimParams,
    branch_points,
    coupling_from_physical,
    mode_amplitudes,
    omega_squared,
    rabi_frequency,
    steady_amplitude,
)
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    QuadResult,
    cos_Theta_from_d_frame,
    integrate_hemisphere,
    sin2_alpha_from_r_frame,
)
from .dynamics import (
    FieldMap,
    FieldPoint,
    angular_profile,
    asymptotic_amplitude,
    excited_amplitude,
    field_map,
    photon_amplitude,
    radial_profile,
    short_time_amplitude,
    short_time_integrand_check,
)
from .spectrum import (
    DensityProfile,
    SpectrumPoint,
    averaged_amplitude,
    density_ft,
    spectral_intensity,
    spectrum,
)
