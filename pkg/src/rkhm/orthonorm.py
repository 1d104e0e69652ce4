"""Threshold-truncated normalization, Gram-Schmidt and QR in coefficient space.

Feature-space vectors are never materialized: every quantity is expressed
through kernel blocks, so orthonormalizing n samples costs n x n block
operations.  A vector q is "normalized" when <q, q> is a nonzero Hermitian
idempotent (a projection), which in general has rank below m; the
truncation threshold epsilon trades reconstruction accuracy against the
conditioning of the normalizing blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockMatrix, BlockVector, as_block, herm_eig, strict_upper_inverse
from .errors import DimensionMismatch, NegativeEpsilon
from .kernels import GramMatrix


@dataclass(frozen=True)
class NormalizationResult:
    """Normalizing block pair for one Gram block.

    b_hat scales the raw vector onto a rank-``rank`` projection; b is its
    pseudo-inverse square-root partner, so b_hat @ gram_qq @ b_hat is the
    spectral projection onto the retained eigenspace and gram_qq ~ b @ b
    up to the truncated tail (at most epsilon^2 in operator norm).
    """

    b_hat: np.ndarray
    b: np.ndarray
    rank: int
    eigenvalues: np.ndarray


def normalize_block(gram_qq: np.ndarray, epsilon: float) -> NormalizationResult:
    """Truncated inverse/forward square roots of a PSD block.

    Eigendirections with eigenvalue > epsilon**2 are retained; the rest
    are zeroed out.  With rank > 0 the inverse-root factor has operator
    norm strictly below 1/epsilon.
    """
    if epsilon < 0:
        raise NegativeEpsilon(f"epsilon must be >= 0, got {epsilon}")
    gram_qq = as_block(gram_qq)
    lam, u = herm_eig(gram_qq)
    rank = int(np.sum(lam > epsilon**2))
    inv_root = np.zeros_like(lam)
    root = np.zeros_like(lam)
    inv_root[:rank] = 1.0 / np.sqrt(lam[:rank])
    root[:rank] = np.sqrt(lam[:rank])
    b_hat = (u * inv_root) @ u.conj().T
    b = (u * root) @ u.conj().T
    return NormalizationResult(b_hat=b_hat, b=b, rank=rank, eigenvalues=lam)


@dataclass(frozen=True)
class QRFactors:
    """Coefficient-space QR factors of a block Gram matrix.

    r is block upper triangular with the normalizing roots on the
    diagonal; r_inv maps sample coordinates to orthonormal-system
    coordinates (q_t = sum_u w_u r_inv[u, t]).  ranks[t] is the retained
    rank of direction t; a fully truncated direction contributes zero
    rows/columns throughout.
    """

    r: BlockMatrix
    r_inv: BlockMatrix
    b: BlockMatrix
    b_hat: BlockMatrix
    ranks: tuple[int, ...]
    epsilon: float

    @property
    def n(self) -> int:
        return self.r.n_rows

    @property
    def m(self) -> int:
        return self.r.m


def rkhm_qr(g: GramMatrix | BlockMatrix, epsilon: float = 0.0) -> QRFactors:
    """Gram-Schmidt QR of the sample family underlying a block Gram matrix.

    The recurrences are r[i, t] = b_hat_i (g[i, t] - sum_{j<i} r[j, i]*
    r[j, t]) above the diagonal and r[t, t] = b_t from normalizing the
    residual block d_t = g[t, t] - sum_{j<t} r[j, t]* r[j, t].  The
    coordinate transformation r_inv = b_hat (I + (r - b) b_hat)^{-1} comes
    from back-substitution on the strictly-upper nilpotent part.
    """
    bm = g.g if isinstance(g, GramMatrix) else g
    if bm.n_rows != bm.n_cols:
        raise DimensionMismatch("Gram matrix must be square")
    n, m = bm.n_rows, bm.m

    # Right-looking elimination: work holds the Gram of the residual
    # vectors after removing the directions already orthonormalized, so
    # its diagonal block at step t is d_t and the scaled row gives
    # r[t, u] = b_hat_t work[t, u] for u > t.  Eliminating a row updates
    # the trailing Gram by work[i, j] -= r[t, i]* r[t, j], keeping the
    # recurrences identical to column-by-column Gram-Schmidt.
    work = bm.flatten().copy()
    r = BlockMatrix.zeros(n, n, m)
    rd = r.data
    b_hats = np.zeros((n, m, m), dtype=np.complex128)
    bs: list[np.ndarray] = []
    ranks: list[int] = []
    for t in range(n):
        tm = t * m
        nr = normalize_block(work[tm : tm + m, tm : tm + m], epsilon)
        rd[t, t] = nr.b
        b_hats[t] = nr.b_hat
        bs.append(nr.b)
        ranks.append(nr.rank)
        if t < n - 1:
            row = nr.b_hat @ work[tm : tm + m, tm + m :]
            rd[t, t + 1 :] = row.reshape(m, n - t - 1, m).transpose(1, 0, 2)
            work[tm + m :, tm + m :] -= row.conj().T @ row

    b = BlockMatrix.block_diag(bs)
    b_hat = BlockMatrix.block_diag(list(b_hats))
    nilpotent = _scale_block_cols(r - b, b_hats)
    r_inv = _scale_block_rows(b_hats, strict_upper_inverse(nilpotent))
    return QRFactors(r=r, r_inv=r_inv, b=b, b_hat=b_hat,
                     ranks=tuple(ranks), epsilon=float(epsilon))


def _scale_block_cols(bm: BlockMatrix, diag: np.ndarray) -> BlockMatrix:
    """Right-multiply by a block diagonal: out[i, j] = bm[i, j] @ diag[j]."""
    out = np.empty_like(bm.data)
    for j in range(bm.n_cols):
        out[:, j] = bm.data[:, j] @ diag[j]
    return BlockMatrix(out)


def _scale_block_rows(diag: np.ndarray, bm: BlockMatrix) -> BlockMatrix:
    """Left-multiply by a block diagonal: out[i, j] = diag[i] @ bm[i, j]."""
    out = np.empty_like(bm.data)
    for i in range(bm.n_rows):
        out[i] = np.matmul(diag[i], bm.data[i])
    return BlockMatrix(out)


def project_coeffs(qr: QRFactors, g_col: BlockVector) -> BlockVector:
    """Orthonormal-system coordinates <q_t, v> of a vector v.

    g_col must hold the sample-side pairings <w_t, v> (kernel evaluations
    k(x_t, x) when v is a feature vector).
    """
    if g_col.n != qr.n or g_col.m != qr.m:
        raise DimensionMismatch("coefficient column does not match the factorization")
    return qr.r_inv.h @ g_col


def orthonormalized_gram(qr: QRFactors, g: GramMatrix | BlockMatrix) -> BlockMatrix:
    """The pairwise inner products <q_s, q_t> = (r_inv* g r_inv)[s, t]."""
    bm = g.g if isinstance(g, GramMatrix) else g
    return qr.r_inv.h @ bm @ qr.r_inv


def qr_diagnostics(qr: QRFactors, g: GramMatrix | BlockMatrix) -> dict:
    """Residuals certifying the orthonormal-system and reconstruction claims.

    Returns max off-diagonal block norm of <q_s, q_t>, the worst diagonal
    idempotency/Hermitian defect, the worst diagonal rank mismatch, and
    the operator norm of g - r* (q*q) r.
    """
    qq = orthonormalized_gram(qr, g)
    off = qq.max_block_norm("offdiag")
    idem = 0.0
    herm = 0.0
    rank_err = 0
    for t in range(qq.n_rows):
        p = qq.block(t, t)
        idem = max(idem, float(np.linalg.norm(p @ p - p, 2)))
        herm = max(herm, float(np.max(np.abs(p - p.conj().T))))
        eigs = np.linalg.eigvalsh(0.5 * (p + p.conj().T))
        rank_err = max(rank_err, abs(int(np.sum(eigs > 0.5)) - qr.ranks[t]))
    bm = g.g if isinstance(g, GramMatrix) else g
    recon = (bm - qr.r.h @ qq @ qr.r).norm()
    return {
        "ranks": list(qr.ranks),
        "max_offdiag_norm": off,
        "max_idempotency_defect": idem,
        "max_hermitian_defect": herm,
        "max_rank_mismatch": rank_err,
        "reconstruction_residual": recon,
        "gram_norm": bm.norm(),
        "epsilon": qr.epsilon,
    }
