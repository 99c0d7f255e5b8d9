"""Numerical laboratory for wedge-local fields built from factorizing S-matrices with bound states."""

from .errors import *  # noqa: F401,F403
from .fields import (
    apply_chi,
    apply_fct,
    apply_J,
    apply_phi,
    apply_poincare,
    apply_z,
    apply_zdagger,
    chi_in_place,
    momentum_fusion_residual,
)
from .fock import Atom, FockVector, inner_product, norm, symmetrize, vacuum
from .quadrature import QuadratureSpec
from .smatrix import (
    SMatrix,
    build_bullough_dodd,
    build_general,
    check_axioms,
    elementary,
    eval,
    product,
    residue,
)
from .verify import (
    CheckReport,
    cancellation_pair,
    contour_shift_check,
    proposition_suite,
    weak_commutator,
)
from .wedgefn import fourier_pm, klein_gordon_apply, make_bump, reflect, transform

__version__ = "0.1.0"
