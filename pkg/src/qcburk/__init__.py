"""Burkholder functionals, radial and piecewise radial maps, a spectral
Beltrami solver, and numerical checks of sharp integral inequalities and of
an interpolation lemma for analytic non-vanishing families."""
from .errors import (
    ClassError,
    DistortionBound,
    DomainError,
    InvalidFamily,
    InvalidInput,
    InvalidSpec,
    NonConvergence,
    QCError,
)
from .functionals import PlanarDeriv, burkholder, burkholder_p, inverse_functional, rank_one_probe
from .radial import RadialCoefficient, RadialProfile, classify_profile, closed_form_energy, radial_deriv, rho_from_alpha
from .packing import Domain, PackingNode, PiecewiseRadialMap, build_packing, load_packing
from .beltrami import (
    BeltramiCoefficient,
    GridField,
    GridSpec,
    PrincipalSolution,
    beurling,
    cauchy,
    deform_family,
    phi_field,
    solve_principal,
)
from .inequalities import (
    area_check,
    check_burkholder_energy,
    check_expint,
    check_llogl,
    check_loginv,
    check_lp_mean,
    check_main_inequality,
)
from .interpolation import (
    AnalyticFamily,
    check_interpolation_bound,
    counterexample_demo,
    family_norms,
    p_interp,
    support_line,
)
from .reports import InterpolationReport, QuadratureReport

__version__ = "0.1.0"
