"""Discrete subgroups of PU(1,n) acting on complex projective space."""

from chg.catalog import catalog
from chg.hermitian import cartan_invariant, hermitian_matrix, herm
from chg.limitset import (
    chen_greenberg_estimate,
    equicontinuity_modulus,
    hausdorff_distance,
    kulkarni_direct_estimate,
    kulkarni_from_cg,
    verify_main_theorem,
)
from chg.orbit import GroupPresentation, orbit_bfs
from chg.projective import ProjectivePoint, ProjectiveSubspace, fs_distance, normalize_point, span
from chg.pu1n import GroupElement, cartan_decompose, is_in_u1n, random_group_element

__version__ = "0.1.0"
