"""Scalar kernels, the induced matrix-valued kernel, and Gram assembly.

For samples composed of m elements of R^d, the matrix-valued kernel has
(i, j) entry equal to the scalar kernel between element i of the first
sample and element j of the second.  The flat Gram matrix over n samples
is therefore exactly the scalar kernel matrix of the n*m stacked elements,
which is how it is assembled here.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .algebra import BlockMatrix, BlockVector, unflatten
from .errors import DimensionMismatch, EmptyInput, NonFinite

_METRIC = {"laplacian": "cityblock", "gaussian": "sqeuclidean"}


@dataclass(frozen=True)
class ScalarKernelSpec:
    """Scalar positive definite kernel: exp(-gamma * dist(x, y)).

    family 'laplacian' uses the L1 distance, 'gaussian' the squared
    Euclidean distance.  gamma=1 with the Laplacian family is the default
    used throughout the shipped experiment drivers.
    """

    family: str = "laplacian"
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in _METRIC:
            raise DimensionMismatch(f"unknown kernel family {self.family!r}")
        if not self.gamma > 0:
            raise DimensionMismatch("kernel bandwidth gamma must be > 0")


@dataclass(frozen=True)
class StructuredSample:
    """One data point: m elements, each a d-dimensional real vector."""

    elements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=np.float64)
        if e.ndim == 1:
            e = e[:, None]
        if e.ndim != 2:
            raise DimensionMismatch(f"elements must be (m, d), got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise NonFinite("sample contains NaN or Inf entries")
        object.__setattr__(self, "elements", e)

    @property
    def m(self) -> int:
        return self.elements.shape[0]

    @property
    def d(self) -> int:
        return self.elements.shape[1]


@dataclass(frozen=True)
class GramMatrix:
    """Block-Hermitian n x n Gram matrix of m x m kernel blocks."""

    g: BlockMatrix
    samples_fingerprint: str
    m: int
    n: int

    def flatten(self) -> np.ndarray:
        return self.g.flatten()

    def block(self, s: int, t: int) -> np.ndarray:
        return self.g.block(s, t)

    def column(self, t: int) -> BlockVector:
        return self.g.column(t)


def _check_same_space(samples: list[StructuredSample]):
    m, d = samples[0].m, samples[0].d
    for x in samples[1:]:
        if x.m != m or x.d != d:
            raise DimensionMismatch("samples do not share (m, d)")
    return m, d


def _stack(samples: list[StructuredSample]) -> np.ndarray:
    return np.concatenate([x.elements for x in samples], axis=0)


def samples_fingerprint(samples: list[StructuredSample]) -> str:
    h = hashlib.sha256()
    for x in samples:
        h.update(np.ascontiguousarray(x.elements).tobytes())
        h.update(repr(x.elements.shape).encode())
    return h.hexdigest()


def scalar_kernel_eval(spec: ScalarKernelSpec, x, y) -> float:
    """Evaluate the scalar kernel on a single pair of R^d points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise DimensionMismatch(f"point shapes differ: {x.shape} vs {y.shape}")
    if spec.family == "laplacian":
        dist = np.sum(np.abs(x - y))
    else:
        dist = np.sum((x - y) ** 2)
    return float(np.exp(-spec.gamma * dist))


def scalar_kernel_matrix(spec: ScalarKernelSpec, xs: np.ndarray, ys: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix between rows of xs and ys (ys=None: symmetric case).

    The symmetric case evaluates each pair once and mirrors it, so the
    result is exactly symmetric.
    """
    metric = _METRIC[spec.family]
    if ys is None:
        d = squareform(pdist(xs, metric=metric))
    else:
        d = cdist(xs, ys, metric=metric)
    return np.exp(-spec.gamma * d)


def matrix_kernel_eval(spec: ScalarKernelSpec, x1: StructuredSample, x2: StructuredSample) -> np.ndarray:
    """m x m kernel block with (i, j) entry k~(x1[i], x2[j])."""
    if x1.m != x2.m or x1.d != x2.d:
        raise DimensionMismatch("samples do not share (m, d)")
    return scalar_kernel_matrix(spec, x1.elements, x2.elements).astype(np.complex128)


def gram(spec: ScalarKernelSpec, samples: list[StructuredSample]) -> GramMatrix:
    """Assemble the n x n block Gram matrix of a sample list."""
    if not samples:
        raise EmptyInput("gram() needs at least one sample")
    m, _ = _check_same_space(samples)
    flat = scalar_kernel_matrix(spec, _stack(samples)).astype(np.complex128)
    return GramMatrix(
        g=unflatten(flat, m),
        samples_fingerprint=samples_fingerprint(samples),
        m=m,
        n=len(samples),
    )


def cross_gram(spec: ScalarKernelSpec, rows: list[StructuredSample], cols: list[StructuredSample]) -> BlockMatrix:
    """Rectangular block matrix with (s, t) block k(rows[s], cols[t])."""
    if not rows or not cols:
        raise EmptyInput("cross_gram() needs nonempty sample lists")
    m, d = _check_same_space(rows)
    mc, dc = _check_same_space(cols)
    if (m, d) != (mc, dc):
        raise DimensionMismatch("row and column samples do not share (m, d)")
    flat = scalar_kernel_matrix(spec, _stack(rows), _stack(cols)).astype(np.complex128)
    return unflatten(flat, m)


def kernel_column(spec: ScalarKernelSpec, samples: list[StructuredSample], x: StructuredSample) -> BlockVector:
    """Block vector with t-th block k(samples[t], x), for projections."""
    return cross_gram(spec, samples, [x]).column(0)


def gram_from_flat(flat: np.ndarray, m: int, fingerprint: str = "synthetic") -> GramMatrix:
    """Wrap an existing Hermitian flat matrix as a GramMatrix.

    Used for synthetic Grams in diagnostics and tests; Hermitian structure
    is required, positive semidefiniteness is the caller's responsibility.
    """
    flat = np.asarray(flat, dtype=np.complex128)
    if flat.shape[0] != flat.shape[1] or flat.shape[0] % m:
        raise DimensionMismatch(f"flat Gram shape {flat.shape} incompatible with m={m}")
    scale = np.max(np.abs(flat)) if flat.size else 0.0
    if np.max(np.abs(flat - flat.conj().T)) > 1e-10 * (1.0 + scale):
        raise DimensionMismatch("flat Gram is not Hermitian")
    return GramMatrix(g=unflatten(flat, m), samples_fingerprint=fingerprint,
                      m=m, n=flat.shape[0] // m)


def center_gram(g: GramMatrix) -> GramMatrix:
    """Gram matrix of the samples after subtracting their feature mean.

    Output block (s, t) is g[s][t] - mean_j g[j][t] - mean_j g[s][j]
    + mean_{i,j} g[i][j]; block row sums of the result vanish.
    """
    d = g.g.data
    row_mean = d.mean(axis=0, keepdims=True)
    col_mean = d.mean(axis=1, keepdims=True)
    total = d.mean(axis=(0, 1), keepdims=True)
    return GramMatrix(
        g=BlockMatrix(d - row_mean - col_mean + total),
        samples_fingerprint=g.samples_fingerprint,
        m=g.m,
        n=g.n,
    )
