"""Exact jet algebra for reticular unfoldings and the fronts they generate."""
from .jetalg import (
    JetPoly,
    Monomial,
    RingContext,
    SubspaceBasis,
    contains,
    module_span,
    mul_truncated,
    parse_jet,
    partial,
    quotient_cobasis,
)
from .equivalence import (
    K_codimension,
    determinacy_order,
    is_K_l_determined,
    reticular_K_tangent,
    reticular_PK_orbit_tangent,
)
from .stability import (
    UnfoldingSpec,
    check_generating_family_stable,
    family_context,
    is_C_nondegenerate,
    is_infinitesimally_stable,
    is_infinitesimally_versal,
    is_PC_nondegenerate,
    transversal_order,
)

__version__ = "0.1.0"
