"""Computations on the symmetrized polydisc Gamma_n and its operator theory."""
from ._backend import NAME as BACKEND
from .blh import InnerSymbol, innerness_defect, intertwine_solve, invariant_subspace_verdict, unitary_equiv
from .classifiers import (
    Budget,
    SupResult,
    contraction_verdict,
    is_gamma_coisometry,
    is_gamma_isometry,
    is_gamma_unitary,
    product_unitary_promotion,
    sup_on_gamma,
    unitary_generators,
    vn_margin,
)
from .geometry import (
    GammaPoint,
    boundary_from_mu,
    embed,
    fiber,
    in_gamma,
    on_boundary,
    project,
    sample,
)
from .hardy import (
    MatrixSymbol,
    ModelTuple,
    StructuredTuple,
    SymbolTuple,
    apply_poly,
    build_pure_isometry,
    check_symbol_conditions,
    fundamental_invariant,
    make_direct_sum,
    symbol_sup_norm,
    truncate,
    wold_decompose,
)
from .operators import MatrixTuple, joint_spectrum, symmetrize_tuple
from .polynomials import MultiPoly, elem_sym, reduce_symmetric
from .verdict import ConvergenceError, GammaError, Verdict

__version__ = "0.1.0"
