"""Phonon null geodesics and analogue lensing around a particle sink in a photon BEC."""

from .errors import (
    AcousticLensError,
    CapturedOrbitError,
    ConvergenceError,
    DomainError,
    HorizonCrossingError,
    NoLensingSolutionError,
    NoPeakError,
)
from .geodesic import (
    Classification,
    ConservedCharges,
    IntegratorConfig,
    PhononState,
    Trajectory,
    classify,
    critical_impact_parameter,
    effective_potential,
    potential_peak,
    swept_angle_residual,
    trace,
    turning_point,
)
from .lensing import (
    LensGeometry,
    deflection_exact,
    deflection_series,
    deflection_sweep,
    einstein_angle,
    focal_length,
    lens_solve,
    max_deflection,
)
from .metric import AcousticMetric, flow_velocity, kretschmann, lab_time_correction, ricci_scalar, warp_factor
from .units import DerivedScales, PhysicalParams, derive_scales, to_dimensionless, to_physical

__version__ = "0.1.0"
