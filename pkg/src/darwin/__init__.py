"""Double AR(1) model without intercept.

y_t = phi y_{t-1} + eta_t sqrt(alpha y_{t-1}^2)

Simulation in log-modulus form, the Lyapunov exponent and its calibration,
closed-form quasi maximum likelihood with a stability test, and Monte Carlo
studies of both.
"""

__version__ = "0.1.0"

from .estimate import (
    DarFit,
    PluginEstimate,
    QmleFit,
    StabilityReport,
    WaldReport,
    dar_qmle_fit,
    log_volatility,
    lyapunov_estimate,
    plugin_lyapunov,
    qmle_fit,
    residual_acf,
    residual_pacf,
    wald_test,
)
from .estimators import DarQMLE, DarwinQMLE, LyapunovStabilityTest
from .exceptions import (
    DataError,
    DegenerateEstimateError,
    NoStabilityBoundaryError,
    NotFittedError,
    PathOverflowError,
)
from .innovations import Innovation
from .process import (
    DarParams,
    DarwinParams,
    Path,
    simulate_auxiliary,
    simulate_dar,
    simulate_darwin,
    simulate_darwin_batch,
    to_levels,
)
from .theory import (
    LyapunovProfile,
    asymptotic_sd,
    calibrate_alpha,
    clt_path_check,
    lyapunov_exponent,
    lyapunov_moments,
)

__all__ = [
    "DarFit",
    "DarParams",
    "DarQMLE",
    "DarwinParams",
    "DarwinQMLE",
    "DataError",
    "DegenerateEstimateError",
    "Innovation",
    "LyapunovProfile",
    "LyapunovStabilityTest",
    "NoStabilityBoundaryError",
    "NotFittedError",
    "Path",
    "PathOverflowError",
    "PluginEstimate",
    "QmleFit",
    "StabilityReport",
    "WaldReport",
    "asymptotic_sd",
    "calibrate_alpha",
    "clt_path_check",
    "dar_qmle_fit",
    "log_volatility",
    "lyapunov_estimate",
    "lyapunov_exponent",
    "lyapunov_moments",
    "plugin_lyapunov",
    "qmle_fit",
    "residual_acf",
    "residual_pacf",
    "simulate_auxiliary",
    "simulate_dar",
    "simulate_darwin",
    "simulate_darwin_batch",
    "to_levels",
    "wald_test",
]
