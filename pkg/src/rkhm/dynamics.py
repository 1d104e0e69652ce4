"""Transfer-operator estimation for interacting dynamics, with matrix-valued
prediction errors and an eigenpair-based modal decomposition.

A time series x_0..x_T is embedded through the matrix-valued kernel; the
operator advancing feature vectors one step is represented on the
orthonormalized basis of the first T snapshots as a T x T block matrix
k_matrix = r_inv* g_shift r_inv, where g_shift pairs the basis with the
shifted snapshots.  Everything downstream (prediction residuals, modal
coefficients, the time-invariant similarity block) is expressed through
kernel blocks only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._rand import normal, philox
from .algebra import BlockMatrix, BlockVector, opnorm
from .errors import (
    DimensionMismatch,
    InsufficientData,
    SeriesTooShort,
    SingularEigvecMatrix,
)
from .kernels import (
    GramMatrix,
    ScalarKernelSpec,
    StructuredSample,
    cross_gram,
    gram,
    gram_from_flat,
    kernel_column,
    matrix_kernel_eval,
)
from .orthonorm import QRFactors, rkhm_qr


@dataclass(frozen=True)
class PfModel:
    """Fitted one-step evolution operator in orthonormalized coordinates."""

    k_matrix: BlockMatrix
    qr: QRFactors
    gram: GramMatrix
    training: tuple[StructuredSample, ...] | None
    spec: ScalarKernelSpec | None
    epsilon: float

    @property
    def m(self) -> int:
        return self.k_matrix.m

    @property
    def basis_size(self) -> int:
        return self.k_matrix.n_rows


@dataclass(frozen=True)
class ModalDecomposition:
    """Eigenpairs of the flat operator plus initial-state coefficients.

    coeff_rows[t] is the first row of the block coefficient attached to
    eigenvector t when the initial orthonormalized state is expanded over
    the eigenvector system; the remaining rows of each block are zero by
    construction.
    """

    eigenvalues: np.ndarray
    eigvec_matrix: np.ndarray
    coeff_rows: np.ndarray
    unit_circle_tol: float

    @property
    def m(self) -> int:
        return self.coeff_rows.shape[1]


def pf_fit(spec: ScalarKernelSpec, series: list[StructuredSample], epsilon: float) -> PfModel:
    """Fit the evolution operator from snapshots x_0..x_T (T = len - 1).

    The basis is built from the first T snapshots; the caller is
    responsible for element distinctness (see :func:`perturb`).
    """
    if len(series) < 2:
        raise InsufficientData("need at least two snapshots (T >= 1)")
    basis = list(series[:-1])
    shifted = list(series[1:])
    g = gram(spec, basis)
    g_shift = cross_gram(spec, basis, shifted)
    model = pf_fit_from_gram(g, g_shift, epsilon, spec=spec, training=series)
    return model


def pf_fit_from_gram(g: GramMatrix, g_shift: BlockMatrix, epsilon: float,
                     spec: ScalarKernelSpec | None = None,
                     training: list[StructuredSample] | None = None) -> PfModel:
    """Fit from precomputed Gram blocks (the kernel-free entry point)."""
    if g_shift.n_rows != g.n or g_shift.n_cols != g.n or g_shift.m != g.m:
        raise DimensionMismatch("shifted Gram must match the basis Gram")
    qr = rkhm_qr(g, epsilon)
    k_matrix = qr.r_inv.h @ g_shift @ qr.r_inv
    return PfModel(k_matrix=k_matrix, qr=qr, gram=g,
                   training=tuple(training) if training is not None else None,
                   spec=spec, epsilon=float(epsilon))


def prediction_coordinates(model: PfModel, g_prev: BlockVector) -> BlockVector:
    """Coordinates c_t over the basis features of the one-step prediction.

    g_prev must hold k(x_t, x_prev) against the basis samples; the
    predicted vector is sum_t phi(x_t) c_t.
    """
    if g_prev.n != model.basis_size or g_prev.m != model.m:
        raise DimensionMismatch("g_prev does not match the fitted basis")
    u = model.qr.r_inv.h @ g_prev
    return model.qr.r_inv @ (model.k_matrix @ u)


def psd_clamp(a: np.ndarray) -> np.ndarray:
    """Hermitian part with negative eigenvalues clamped to zero."""
    a = 0.5 * (a + a.conj().T)
    lam, u = np.linalg.eigh(a)
    lam = np.clip(lam, 0.0, None)
    return (u * lam) @ u.conj().T


def predict_error_from_columns(model: PfModel, g_prev: BlockVector,
                               g_now: BlockVector, k_now: np.ndarray) -> np.ndarray:
    """Matrix-valued squared prediction residual from kernel columns.

    g_prev/g_now hold k(x_t, x_prev) and k(x_t, x_now); k_now is
    k(x_now, x_now).  The result is Hermitian positive semidefinite up to
    clamping of round-off negatives.
    """
    c = prediction_coordinates(model, g_prev)
    cf = c.flatten()
    gnf = g_now.flatten()
    cross = cf.conj().T @ gnf
    quad = cf.conj().T @ (model.gram.flatten() @ cf)
    return psd_clamp(np.asarray(k_now) - cross - cross.conj().T + quad)


def predict_error(model: PfModel, x_prev: StructuredSample, x_now: StructuredSample) -> np.ndarray:
    """Squared residual of predicting phi(x_now) from phi(x_prev)."""
    if model.spec is None or model.training is None:
        raise DimensionMismatch("model was fitted from raw Grams; use predict_error_from_columns")
    basis = list(model.training[: model.basis_size])
    g_prev = kernel_column(model.spec, basis, x_prev)
    g_now = kernel_column(model.spec, basis, x_now)
    k_now = matrix_kernel_eval(model.spec, x_now, x_now)
    return predict_error_from_columns(model, g_prev, g_now, k_now)


def modal_decompose(model: PfModel, unit_circle_tol: float = 0.01,
                    cond_limit: float = 1e12) -> ModalDecomposition:
    """Eigen-decompose the flat operator and expand the initial state.

    Eigenpairs are ordered by descending magnitude (ties by angle).  The
    expansion solves eigvec_matrix @ coeff_rows = flat initial
    coordinates; a numerically singular eigenvector matrix is reported,
    not regularized.
    """
    a = model.k_matrix.flatten()
    lam, v = np.linalg.eig(a)
    order = np.lexsort((np.angle(lam), -np.abs(lam)))
    lam, v = lam[order], v[:, order]
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond >= cond_limit:
        raise SingularEigvecMatrix(
            f"eigenvector matrix condition number {cond:.3e} exceeds {cond_limit:.0e}"
        )
    g0 = model.gram.column(0)
    init = model.qr.r_inv.flatten().conj().T @ g0.flatten()
    coeff_rows = np.linalg.solve(v, init)
    return ModalDecomposition(eigenvalues=lam, eigvec_matrix=v,
                              coeff_rows=coeff_rows,
                              unit_circle_tol=float(unit_circle_tol))


def unit_circle_set(md: ModalDecomposition, delta: float | None = None) -> np.ndarray:
    """Indices of eigenvalues within delta of the unit circle."""
    delta = md.unit_circle_tol if delta is None else delta
    return np.flatnonzero(np.abs(np.abs(md.eigenvalues) - 1.0) <= delta)


def invariant_term(md: ModalDecomposition, delta: float | None = None) -> np.ndarray:
    """Time-invariant similarity block from unit-circle eigendirections.

    Sums ||v_t||^2 row_t* row_t over eigenvalues in the unit band; the
    result is Hermitian PSD and independent of the evolution power
    because the band magnitudes are treated as exactly one.  An empty
    band yields a zero block (with a warning).
    """
    sel = unit_circle_set(md, delta)
    m = md.m
    out = np.zeros((m, m), dtype=np.complex128)
    if sel.size == 0:
        warnings.warn("no eigenvalue within the unit-circle band; zero block returned")
        return out
    for t in sel:
        row = md.coeff_rows[t]
        weight = float(np.real(md.eigvec_matrix[:, t].conj() @ md.eigvec_matrix[:, t]))
        out += weight * np.outer(row.conj(), row)
    return out


def delay_embed(y, window: int) -> list[StructuredSample]:
    """Stack ``window`` consecutive multichannel observations per sample.

    Each output sample has m = channels * window one-dimensional
    elements, ordered channel-fastest within each time step (all channels
    at offset 0, then all channels at offset 1, ...).
    """
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"series must be (steps, channels), got {arr.shape}")
    if window < 1:
        raise DimensionMismatch("window must be >= 1")
    if arr.shape[0] < window:
        raise SeriesTooShort(f"series length {arr.shape[0]} < window {window}")
    return [
        StructuredSample(arr[t : t + window].reshape(-1, 1).copy())
        for t in range(arr.shape[0] - window + 1)
    ]


def perturb(samples: list[StructuredSample], sigma: float, seed: int) -> list[StructuredSample]:
    """Add seeded i.i.d. Gaussian noise to every scalar entry.

    Used to enforce pairwise-distinct elements before fitting; on the
    (measure-zero) event of a post-noise collision the draw is retried,
    at most three times.  sigma = 0 returns the samples unchanged.
    """
    if sigma < 0:
        raise DimensionMismatch("sigma must be >= 0")
    if sigma == 0.0:
        return list(samples)
    rng = philox(seed)
    for _ in range(3):
        out = [
            StructuredSample(x.elements + sigma * normal(rng, x.elements.shape))
            for x in samples
        ]
        seen = set()
        collision = False
        for x in out:
            for elem in x.elements:
                key = elem.tobytes()
                if key in seen:
                    collision = True
                    break
                seen.add(key)
            if collision:
                break
        if not collision:
            return out
    return out


def sweep_prediction_errors(series: list[StructuredSample], spec: ScalarKernelSpec,
                            epsilon: float, s_index: int, t_values: list[int],
                            gram_jitter: float = 0.0, jitter_seed: int = 0) -> dict:
    """Prediction residuals at snapshot ``s_index`` for growing basis sizes.

    Fits one QR on the largest basis and reuses its leading factors for
    every T in ``t_values`` (Gram-Schmidt factors of a prefix are the
    leading blocks of the full factors).  ``gram_jitter`` applies a
    seeded entrywise relative perturbation to the full Gram matrix first,
    emulating reduced-precision kernel evaluations.

    Returns a dict with per-T error blocks, their traces and operator
    norms.
    """
    t_values = sorted(set(int(t) for t in t_values))
    if not t_values or t_values[0] < 1:
        raise DimensionMismatch("basis sizes must be >= 1")
    t_max = t_values[-1]
    if s_index < 1:
        raise DimensionMismatch("s_index must be >= 1")
    needed = max(t_max, s_index) + 1
    if len(series) < needed:
        raise InsufficientData(f"series length {len(series)} < required {needed}")

    full = gram(spec, list(series[:needed]))
    flat = full.flatten()
    if gram_jitter > 0.0:
        rng = philox(jitter_seed)
        e = gram_jitter * normal(rng, flat.shape)
        e = 0.5 * (e + e.T)
        flat = flat * (1.0 + e)
    m = full.m

    g_basis = gram_from_flat(flat[: t_max * m, : t_max * m], m)
    qr_full = rkhm_qr(g_basis, epsilon)
    r_inv_flat = qr_full.r_inv.flatten()

    k_now = flat[s_index * m : (s_index + 1) * m, s_index * m : (s_index + 1) * m]
    errors: dict[int, np.ndarray] = {}
    for t in t_values:
        mt = t * m
        rinv = r_inv_flat[:mt, :mt]
        g_t = flat[:mt, :mt]
        g_shift = flat[:mt, m : mt + m]
        g_prev = flat[:mt, (s_index - 1) * m : s_index * m]
        g_now = flat[:mt, s_index * m : (s_index + 1) * m]
        u = rinv.conj().T @ g_prev
        u = rinv @ u
        u = g_shift @ u
        u = rinv.conj().T @ u
        c = rinv @ u
        cross = c.conj().T @ g_now
        a = psd_clamp(k_now - cross - cross.conj().T + c.conj().T @ (g_t @ c))
        errors[t] = a

    return {
        "t_values": t_values,
        "errors": errors,
        "traces": {t: float(np.trace(errors[t]).real) for t in t_values},
        "norms": {t: opnorm(errors[t]) for t in t_values},
        "ranks": list(qr_full.ranks),
    }
