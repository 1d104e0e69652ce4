"""Data analysis with matrix-valued kernels over the algebra of m x m
complex matrices: thresholded orthonormalization and QR, kernel PCA with
block coefficients, and transfer-operator estimation for interacting
dynamics."""

from .algebra import (
    BlockMatrix,
    BlockVector,
    flatten,
    herm_eig,
    strict_upper_inverse,
    unflatten,
)
from .datagen import GeneratorSpec, gen_clusters, gen_interacting
from .dynamics import (
    ModalDecomposition,
    PfModel,
    delay_embed,
    invariant_term,
    modal_decompose,
    perturb,
    pf_fit,
    pf_fit_from_gram,
    predict_error,
    predict_error_from_columns,
    prediction_coordinates,
    sweep_prediction_errors,
)
from .kernels import (
    GramMatrix,
    ScalarKernelSpec,
    StructuredSample,
    center_gram,
    cross_gram,
    gram,
    gram_from_flat,
    kernel_column,
    matrix_kernel_eval,
    scalar_kernel_eval,
)
from .orthonorm import (
    NormalizationResult,
    QRFactors,
    normalize_block,
    orthonormalized_gram,
    project_coeffs,
    qr_diagnostics,
    rkhm_qr,
)
from .pca import (
    PcaModel,
    axis_inner,
    axis_self_inner,
    pc_coefficient,
    pc_coefficient_norm,
    pc_first_row,
    pca_fit,
    reconstruction_error_trace,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
