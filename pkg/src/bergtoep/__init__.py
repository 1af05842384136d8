"""Toeplitz operators on the Bergman space of the unit disk with form-defined symbols."""

from .core import (
    AnalyticPoly,
    EuclideanDisk,
    QuadratureRule,
    bergman_disk,
    disk_quadrature,
    eval_basis,
    inner_product,
    kernel,
    poly_derivative,
    truncated_kernel,
)
from .operators import (
    TruncatedOperator,
    adjoint,
    add,
    compose,
    compress,
    op_norm,
    singular_values,
    weak_convergence_check,
)
from .symbols import (
    BoundedRadial,
    CircleEntry,
    CircleMeasure,
    DerivativeDeltaCollection,
    DiscreteMeasure,
    FiniteRankForm,
    SpectralSequence,
    assemble,
    derivative_delta_apply,
    finite_rank_form,
    form_eval,
    matrix_element,
    phi_pq,
)

__version__ = "0.1.0"
