"""Asymptotic approximations for maxima of bivariate Gaussian triangular
arrays under power and linear normalization: exact reference values through
a high-accuracy bivariate normal kernel, first- and second-order
approximants, reproduction of the bundled error tables, and a numerical
harness verifying the convergence statements behind the approximants."""

from .actuals import ActualValue, max_cdf_linear, max_cdf_power, univariate_max_cdf_power
from .expansions import (
    DEFAULT_KAPPA_VARIANT,
    KAPPA_VARIANTS,
    Approximant,
    anchored_joint_correction,
    approximant_linear,
    approximant_power,
    linear_correction,
    linear_joint_correction,
    log_weighted_tail_integral,
    power_correction,
    power_joint_correction,
)
from .limits import frechet_cdf, husler_reiss_cdf, husler_reiss_power_cdf
from .norming import (
    CorrelationModel,
    FixedRho,
    NormingConstant,
    RegimeParams,
    RhoResult,
    SecondOrderRho,
    SequenceRho,
    hr_lambda,
    linear_norm,
    power_norm,
    rho_of_n,
    solve_bn,
)
from .special import (
    bvn_cdf,
    bvn_survival,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_tail,
)

__version__ = "0.1.0"
