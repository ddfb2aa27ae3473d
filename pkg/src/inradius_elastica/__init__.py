"""Optimal convex domains for the elastic energy at fixed inradius, and numerical checks of their properties."""

from .analysis import (
    E_prime,
    E_second,
    R_alpha,
    R_prime,
    contact_split,
    ealpha_table,
    energy_deficit,
    h_alpha,
    inequality_suite,
    random_smooth_body,
    subadditivity_scan,
)
from .elastica_solver import (
    ElasticaProblem,
    ElasticaSolution,
    kkt_residual,
    shoot_pendulum,
    solve_bvp_via_shooting,
    solve_fixed_length,
    solve_free_length,
)
from .geom_kernel import (
    ConvexBody,
    FunctionalsReport,
    TangentAngleArc,
    area,
    circumradius,
    diameter,
    elastic_energy,
    functionals,
    inradius,
    perimeter,
    polygon_energy,
    reconstruct_curve,
)
from .optimal_arc import (
    OptimalArcSpec,
    OptimalDomain,
    arc_length,
    build_arc,
    build_omega_star,
    constant_a,
    energy_closed_form,
    multipliers,
)
from .quadrature import QuadResult, elliptic_F, int_inv_sqrt_cos, int_sqrt_cos, invert_monotone, jacobi_am

__version__ = "0.1.0"
