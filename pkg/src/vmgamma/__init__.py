"""Multivariate variance-Gamma Lévy models with finitely supported Thorin measures."""
from .errors import ConvergenceError, DomainError, LatticeError, ValidationError, VMGammaError
from .process import (
    GammaMarginalReport,
    ThorinAtoms,
    VMGammaParams,
    from_guillaume,
    from_semeraro,
    from_thorin_atoms,
    from_vg,
    gamma_d_polar_pair,
    has_gamma_marginal,
    is_gamma_d_subordinator,
    new_vmgamma,
    thorin_atoms,
)
from .transforms import (
    EsscherSolution,
    MarketModel,
    char_exponent,
    correlation_sqrt,
    cov_R,
    domain_contains,
    esscher_transform,
    kappa_of,
    laplace_exponent,
    mean_R,
    moment_summary,
    risk_neutral_market,
    solve_esscher,
)
from .presets import baseline_market, baseline_params
from .density import (DensityGrid, StructuredParams, density_R_fft, density_T_quadrature,
                      density_Y_quadrature, structured, vg1_density)
from .simulation import sample_R, sample_Y

__version__ = "0.1.0"
