"""Kernel principal component analysis with matrix-valued coefficients.

Principal axes come from the eigendecomposition of the flat Gram matrix;
the s-th axis pairs with a query feature vector through an m x m
coefficient block whose only nonzero row is the first one.  That first
row doubles as a flat R^m embedding of the query, and its Euclidean norm
equals the coefficient block's operator norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockVector
from .errors import AllZeroGram, AxisOutOfRange, DimensionMismatch
from .kernels import GramMatrix, center_gram

# Eigenvalues at or below RANK_CUTOFF_RTOL * max(sigma_1, 1) count as zero.
RANK_CUTOFF_RTOL = 1e-10


@dataclass(frozen=True)
class PcaModel:
    """Fitted principal axes of a block Gram matrix.

    sigma holds the retained (positive, descending) eigenvalues of the
    flat Gram matrix; axes_flat the matching orthonormal eigenvector
    columns.  For a centered fit, query columns are re-centered with the
    stored training block means before any coefficient is formed.
    """

    sigma: np.ndarray
    axes_flat: np.ndarray
    m: int
    n: int
    l: int
    centered: bool
    gram: GramMatrix
    fit_flat: np.ndarray
    row_means: np.ndarray
    total_mean: np.ndarray

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.l:
            raise AxisOutOfRange(f"axis {axis} outside fitted range [0, {self.l})")


def pca_fit(g: GramMatrix, centered: bool = False) -> PcaModel:
    """Eigendecompose the (optionally centered) flat Gram matrix.

    Raises AllZeroGram when no eigenvalue clears the rank cutoff.
    """
    used = center_gram(g) if centered else g
    flat = used.flatten()
    flat = 0.5 * (flat + flat.conj().T)
    lam, v = np.linalg.eigh(flat)
    lam, v = lam[::-1], v[:, ::-1]
    cutoff = RANK_CUTOFF_RTOL * max(float(lam[0]), 1.0)
    keep = lam > cutoff
    l = int(np.sum(keep))
    if l == 0:
        raise AllZeroGram("Gram matrix has no eigenvalue above the rank cutoff")
    return PcaModel(
        sigma=np.ascontiguousarray(lam[:l]),
        axes_flat=np.ascontiguousarray(v[:, :l]),
        m=g.m,
        n=g.n,
        l=l,
        centered=centered,
        gram=g,
        fit_flat=flat,
        row_means=g.g.data.mean(axis=1),
        total_mean=g.g.data.mean(axis=(0, 1)),
    )


def _query_flat(model: PcaModel, g_col: BlockVector) -> np.ndarray:
    """Flat (m*n, m) query column, re-centered for centered models."""
    if g_col.n != model.n or g_col.m != model.m:
        raise DimensionMismatch("query column does not match the fitted Gram")
    cols = g_col.data
    if model.centered:
        cols = cols - cols.mean(axis=0) - model.row_means + model.total_mean
    return BlockVector(cols).flatten()


def pc_coefficient(model: PcaModel, axis: int, g_col: BlockVector) -> np.ndarray:
    """Matrix-valued coefficient of a query on one principal axis.

    g_col must hold k(x_t, x) for the query x against the training
    samples.  The result is an m x m block whose first row is
    sigma_axis^{-1/2} v_axis* applied to the flat query column and whose
    remaining rows are exactly zero.
    """
    model._check_axis(axis)
    row = pc_first_row(model, axis, g_col)
    out = np.zeros((model.m, model.m), dtype=np.complex128)
    out[0, :] = row
    return out


def pc_first_row(model: PcaModel, axis: int, g_col: BlockVector) -> np.ndarray:
    """The (only) nonzero row of the axis coefficient as a length-m vector."""
    model._check_axis(axis)
    flat = _query_flat(model, g_col)
    return model.axes_flat[:, axis].conj() @ flat / np.sqrt(model.sigma[axis])


def pc_coefficient_norm(model: PcaModel, axis: int, g_col: BlockVector) -> float:
    """Operator norm of the coefficient block (= Euclidean norm of its row)."""
    return float(np.linalg.norm(pc_first_row(model, axis, g_col)))


def training_column(model: PcaModel, t: int) -> BlockVector:
    """Raw kernel column of training sample t (centering happens later)."""
    if not 0 <= t < model.n:
        raise AxisOutOfRange(f"training index {t} outside [0, {model.n})")
    return model.gram.column(t)


def reconstruction_error_trace(model: PcaModel, s: int) -> float:
    """Trace of the summed squared residual after keeping s leading axes.

    Computed in coefficient space: the total trace of the fitted Gram
    minus the squared coefficient rows of every training sample on the
    first s axes.  Equals the eigenvalue tail sum beyond s.
    """
    if not 0 <= s <= model.l:
        raise AxisOutOfRange(f"axis count {s} outside [0, {model.l}]")
    total = float(np.trace(model.fit_flat).real)
    if s == 0:
        return total
    # rows of all training columns on the first s axes in one product:
    # fit_flat columns are the (already centered) training query columns.
    proj = model.axes_flat[:, :s].conj().T @ model.fit_flat
    captured = float(np.sum(np.abs(proj) ** 2 / model.sigma[:s, None]))
    return total - captured


def axis_inner(model: PcaModel, s: int, j: int) -> np.ndarray:
    """Pairing <p_s, p_j> of two principal axes as an m x m block.

    The self pairing is the rank-one projection diag(1, 0, ..., 0);
    distinct axes pair to zero.
    """
    model._check_axis(s)
    model._check_axis(j)
    m = model.m
    vs = model.axes_flat[:, s]
    vj = model.axes_flat[:, j]
    scale = 1.0 / np.sqrt(model.sigma[s] * model.sigma[j])
    out = np.zeros((m, m), dtype=np.complex128)
    out[0, 0] = scale * (vs.conj() @ (model.fit_flat @ vj))
    return out


def axis_self_inner(model: PcaModel, s: int) -> np.ndarray:
    return axis_inner(model, s, s)
