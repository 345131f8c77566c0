"""Continuous-time MMSE detection for MIMO systems as a gradient-flow ODE."""

__version__ = "0.1.0"

from .analysis import (
    FunctionalResult,
    MseCurve,
    Provenance,
    analytical_mse,
    asymptotic_mse,
    convergence_functional,
    grid_search_alpha,
    mmse_mse,
    mse_curve,
    tode_analytical_mse,
    trace_terms,
)
from .detectors import (
    ClosedFormState,
    EulerConfig,
    equilibrium_point,
    euler_trajectory,
    mmse_estimate,
    ode_trajectory_at,
    tode_trajectory_at,
)
from .model import (
    ChannelMatrix,
    SystemConfig,
    TransmissionSample,
    load_channel,
    make_rng,
    objective_value,
    sample_channel,
    sample_transmission,
    save_channel,
)
from .montecarlo import (
    EmpiricalMse,
    EulerMethod,
    MmseMethod,
    MonteCarloConfig,
    OdeMethod,
    TodeMethod,
    arithmetic_mse,
)
from .schedules import Constant, InverseTime, Tabulated, XiValue, eta_at, xi_at
from .spectral import GramEigenSystem, gram_eigensystem, stability_margin
