import numpy as np
import pytest

from conftest import random_gram, random_samples, truncating_gram
from rkhm.algebra import BlockVector, opnorm
from rkhm.errors import NegativeEpsilon
from rkhm.kernels import gram, gram_from_flat, kernel_column
from rkhm.orthonorm import (
    normalize_block,
    orthonormalized_gram,
    project_coeffs,
    qr_diagnostics,
    rkhm_qr,
)


def unitary(rng, m):
    return np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))[0]


# ------------------------------------------------------------ normalize_block

def test_normalize_identity():
    nr = normalize_block(np.eye(2), 0.0)
    assert nr.rank == 2
    assert np.max(np.abs(nr.b_hat - np.eye(2))) < 1e-14
    assert np.max(np.abs(nr.b - np.eye(2))) < 1e-14


def test_normalize_diagonal_with_truncation():
    nr = normalize_block(np.diag([4.0, 0.0]), 1e-3)
    assert nr.rank == 1
    assert np.max(np.abs(nr.b_hat - np.diag([0.5, 0.0]))) < 1e-14
    assert np.max(np.abs(nr.b - np.diag([2.0, 0.0]))) < 1e-14
    proj = nr.b_hat @ np.diag([4.0, 0.0]) @ nr.b_hat
    assert np.max(np.abs(proj - np.diag([1.0, 0.0]))) < 1e-14


def test_normalize_random_psd_with_small_tail(rng):
    u = unitary(rng, 3)
    lam = np.array([2.0, 0.5, 1e-6])
    g = (u * lam) @ u.conj().T
    nr = normalize_block(g, epsilon=1e-2)  # epsilon^2 = 1e-4
    assert nr.rank == 2
    proj = nr.b_hat @ g @ nr.b_hat
    assert opnorm(proj @ proj - proj) < 1e-10
    assert np.max(np.abs(proj - proj.conj().T)) < 1e-12
    assert opnorm(g - nr.b @ nr.b) == pytest.approx(1e-6, rel=1e-6)
    # b_hat b = b b_hat = the spectral projection onto the retained space
    bb = nr.b_hat @ nr.b
    assert np.max(np.abs(bb - nr.b @ nr.b_hat)) < 1e-12
    assert opnorm(bb @ bb - bb) < 1e-12
    assert np.max(np.abs(bb - proj)) < 1e-10


def test_normalize_norm_bound(rng):
    # retained inverse-root factor stays strictly below 1/epsilon
    for _ in range(10):
        u = unitary(rng, 3)
        lam = 10.0 ** rng.uniform(-6, 1, size=3)
        g = (u * lam) @ u.conj().T
        eps = 10.0 ** rng.uniform(-3, -0.5)
        nr = normalize_block(g, eps)
        if nr.rank > 0:
            assert opnorm(nr.b_hat) < 1.0 / eps


def test_normalize_full_truncation():
    nr = normalize_block(np.diag([1e-8, 1e-9]), epsilon=1e-3)
    assert nr.rank == 0
    assert np.max(np.abs(nr.b_hat)) == 0.0
    assert np.max(np.abs(nr.b)) == 0.0


def test_normalize_rejects_negative_epsilon():
    with pytest.raises(NegativeEpsilon):
        normalize_block(np.eye(2), -1.0)


# ------------------------------------------------------------------- rkhm_qr

def test_qr_single_identity_block():
    g = gram_from_flat(np.eye(2), 2)
    qr = rkhm_qr(g, 0.0)
    assert np.max(np.abs(qr.r.flatten() - np.eye(2))) < 1e-14
    assert np.max(np.abs(qr.r_inv.flatten() - np.eye(2))) < 1e-14


def test_qr_m1_matches_classical_cholesky(rng, laplacian):
    samples = random_samples(rng, 6, 1, d=2)
    g = gram(laplacian, samples)
    qr = rkhm_qr(g, 0.0)
    chol_upper = np.linalg.cholesky(g.flatten()).conj().T
    assert opnorm(qr.r.flatten() - chol_upper) < 1e-8
    assert opnorm(qr.r_inv.flatten() - np.linalg.inv(chol_upper)) < 1e-8


def test_qr_orthonormal_system(rng, laplacian):
    g = gram(laplacian, random_samples(rng, 6, 3))
    qr = rkhm_qr(g, 0.0)
    diag = qr_diagnostics(qr, g)
    assert diag["max_offdiag_norm"] <= 1e-8
    assert diag["max_idempotency_defect"] <= 1e-8
    assert diag["max_hermitian_defect"] <= 1e-8
    assert diag["max_rank_mismatch"] == 0
    assert diag["reconstruction_residual"] <= 1e-8


def test_qr_prefix_factors_match_subgram(rng, laplacian):
    g = gram(laplacian, random_samples(rng, 8, 3, d=1))
    for eps in (0.0, 1e-2):
        full = rkhm_qr(g, eps)
        sub = rkhm_qr(gram_from_flat(g.flatten()[:15, :15], 3), eps)
        assert np.max(np.abs(full.r.data[:5, :5] - sub.r.data)) < 1e-12
        assert np.max(np.abs(full.r_inv.data[:5, :5] - sub.r_inv.data)) < 1e-12
        assert full.ranks[:5] == sub.ranks


def test_qr_truncated_directions_are_annihilated(rng, laplacian):
    base = random_samples(rng, 3, 2)
    g = gram(laplacian, base + base)  # exact duplicates
    qr = rkhm_qr(g, 1e-3)
    assert all(r == 0 for r in qr.ranks[3:])
    assert np.max(np.abs(qr.r_inv.data[3:, :])) == 0.0
    diag = qr_diagnostics(qr, g)
    assert diag["max_offdiag_norm"] <= 1e-8


def test_qr_reconstruction_bound(rng):
    # ||G - R* (Q*Q) R|| <= 2 eps ||W|| + eps^2, with float slack at eps=0
    for eps in (0.0, 1e-3, 1e-1):
        for trial in range(6):
            g = random_gram(rng, 5, 3, kind="kernel" if trial % 2 else "spectrum")
            qr = rkhm_qr(g, eps)
            qq = orthonormalized_gram(qr, g)
            resid = (g.g - qr.r.h @ qq @ qr.r).norm()
            w_norm = np.sqrt(g.g.norm())
            assert resid <= eps * (2.0 * w_norm + eps) + 1e-10 * (1.0 + g.g.norm())


def test_qr_epsilon_bound_sqrt_form(rng, laplacian):
    # sqrt of the flat residual against eps (2 sqrt||G|| + eps), exercised
    # on instances whose spectra genuinely cross the truncation threshold
    for eps in (1e-3, 1e-1):
        for trial in range(9):
            g = truncating_gram(rng, eps, trial % 3, spec=laplacian)
            qr = rkhm_qr(g, eps)
            qq = orthonormalized_gram(qr, g)
            resid = (g.g - qr.r.h @ qq @ qr.r).norm()
            assert np.sqrt(resid) <= eps * (2.0 * np.sqrt(g.g.norm()) + eps)


# ------------------------------------------------------------- project_coeffs

def expansion_residual_trace(g_flat, k_qq, coeff_flat, g_col_flat):
    """tr |v - W c|^2 via Gram expansion, v the vector behind g_col."""
    cross = coeff_flat.conj().T @ g_col_flat
    quad = coeff_flat.conj().T @ g_flat @ coeff_flat
    resid = k_qq - cross - cross.conj().T + quad
    return float(np.trace(resid).real)


def test_project_coeffs_reproduces_spanned_vector(rng, laplacian):
    samples = random_samples(rng, 5, 2)
    g = gram(laplacian, samples)
    qr = rkhm_qr(g, 0.0)
    g_col = kernel_column(laplacian, samples, samples[0])
    coords = project_coeffs(qr, g_col)
    c = qr.r_inv @ coords  # sample-basis coefficients of the projection
    tr = expansion_residual_trace(
        g.flatten(), g.block(0, 0), c.flatten(), g_col.flatten()
    )
    assert abs(tr) < 1e-8


def test_project_coeffs_zero_column(rng, laplacian):
    g = gram(laplacian, random_samples(rng, 4, 2))
    qr = rkhm_qr(g, 0.0)
    out = project_coeffs(qr, BlockVector.zeros(4, 2))
    assert np.max(np.abs(out.data)) == 0.0


def test_project_coeffs_identity_gram():
    g = gram_from_flat(np.eye(2), 2)
    qr = rkhm_qr(g, 0.0)
    col = BlockVector(np.array([[[0.3, 0.1], [0.2, 0.5]]], dtype=complex))
    out = project_coeffs(qr, col)
    assert np.max(np.abs(out.data - col.data)) < 1e-14


def test_projection_minimality_against_competitors(rng, laplacian):
    # the orthogonal projection beats every competitor in the span (PSD order)
    samples = random_samples(rng, 5, 2)
    g = gram(laplacian, samples)
    g_flat = g.flatten()
    qr = rkhm_qr(g, 0.0)
    c_v = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
    g_col = BlockVector.from_flat(g_flat @ c_v, 2)  # v = W c_v
    k_vv = c_v.conj().T @ g_flat @ c_v
    c_p = (qr.r_inv @ project_coeffs(qr, g_col)).flatten()

    def residual(c):
        cross = c.conj().T @ g_flat @ c_v
        return k_vv - cross - cross.conj().T + c.conj().T @ g_flat @ c

    r_proj = residual(c_p)
    assert np.linalg.eigvalsh(0.5 * (r_proj + r_proj.conj().T)).min() >= -1e-8
    for _ in range(20):
        c_u = c_p + rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
        gap = residual(c_u) - r_proj
        assert np.linalg.eigvalsh(0.5 * (gap + gap.conj().T)).min() >= -1e-8
