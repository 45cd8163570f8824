"""Finite-dimensional Poisson mechanics of a charged particle in gauge fields."""

from .algebra import CoadjointElement, LieAlgebraSpec, ad_invariance_check
from .fields import (
    GaugeFieldSpec,
    abelian_bianchi_residual,
    constant_B,
    landau_B,
    perturbed_curvature,
    radial_B,
    smooth_abelian,
    su2_curved,
    su2_pure_gauge,
    ym_field_residual,
    zero_field,
)
from .particle import (
    ChartComparison,
    Trajectory,
    chart_equivalence,
    gyro_period,
    gyroradius_error,
    integrate_particle,
    kinetic_hamiltonian,
)
from .poisson import (
    PhasePoint,
    PoissonStructure,
    bracket,
    canonical_structure,
    coordinate,
    jacobi_residual,
    jacobi_tensor,
    minimal_coupling,
    minimal_decoupling,
    reduced_two_form,
    twisted_structure,
)
