import numpy as np
import pytest

from conftest import random_gram, random_samples
from rkhm.algebra import BlockVector
from rkhm.errors import AllZeroGram, AxisOutOfRange
from rkhm.kernels import (
    StructuredSample,
    center_gram,
    gram,
    gram_from_flat,
    kernel_column,
)
from rkhm.pca import (
    axis_inner,
    axis_self_inner,
    pc_coefficient,
    pc_coefficient_norm,
    pc_first_row,
    pca_fit,
    reconstruction_error_trace,
)


# -------------------------------------------------- classical kernel PCA oracle

def classical_kpca(k_matrix, centered=False):
    """Standard scalar kernel PCA on a precomputed kernel matrix."""
    k = np.asarray(k_matrix, dtype=float)
    n = k.shape[0]
    if centered:
        h = np.eye(n) - np.ones((n, n)) / n
        k = h @ k @ h
    lam, v = np.linalg.eigh(k)
    lam, v = lam[::-1], v[:, ::-1]
    keep = lam > 1e-10 * max(lam[0], 1.0)
    return lam[keep], v[:, keep]


def classical_scores(lam, v, k_cols):
    """Score of each column: sigma_s^{-1/2} v_s^T k_col."""
    return (v.T @ k_cols) / np.sqrt(lam)[:, None]


# ------------------------------------------------------------------------ fit

def test_fit_scalar_unit_gram():
    model = pca_fit(gram_from_flat(np.eye(1), 1))
    assert model.l == 1
    assert model.sigma[0] == pytest.approx(1.0)


def test_fit_duplicated_samples_keep_rank(rng, laplacian):
    base = random_samples(rng, 4, 2)
    single = pca_fit(gram(laplacian, base))
    doubled = pca_fit(gram(laplacian, base + base))
    assert doubled.l == single.l


def test_fit_rejects_zero_gram(laplacian):
    x = StructuredSample(np.array([[0.0], [1.0]]))
    with pytest.raises(AllZeroGram):
        pca_fit(gram(laplacian, [x, x, x]), centered=True)


@pytest.mark.parametrize("centered", [False, True])
def test_m1_pipeline_matches_classical_kernel_pca(rng, laplacian, centered):
    samples = random_samples(rng, 10, 1, d=2)
    g = gram(laplacian, samples)
    model = pca_fit(g, centered=centered)
    lam, v = classical_kpca(g.flatten().real, centered=centered)
    assert model.l == len(lam)
    assert np.max(np.abs(model.sigma - lam)) < 1e-8

    k = g.flatten().real
    if centered:
        h = np.eye(10) - np.ones((10, 10)) / 10
        cols = (h @ k @ h)
    else:
        cols = k
    ref = classical_scores(lam, v, cols)
    for t in range(10):
        g_col = kernel_column(laplacian, samples, samples[t])
        ours = np.array([pc_first_row(model, s, g_col)[0] for s in range(model.l)])
        assert np.max(np.abs(np.abs(ours) - np.abs(ref[:, t]))) < 1e-8
    for s in range(model.l + 1):
        ours_err = reconstruction_error_trace(model, s)
        assert ours_err == pytest.approx(float(np.sum(lam[s:])), abs=1e-8)


# ----------------------------------------------------------------- coefficients

def test_coefficient_zero_column(rng, laplacian):
    model = pca_fit(gram(laplacian, random_samples(rng, 5, 3)))
    out = pc_coefficient(model, 0, BlockVector.zeros(5, 3))
    assert np.max(np.abs(out)) == 0.0


def test_coefficient_block_structure(rng, laplacian):
    samples = random_samples(rng, 5, 3)
    model = pca_fit(gram(laplacian, samples))
    g_col = kernel_column(laplacian, samples, samples[2])
    block = pc_coefficient(model, 0, g_col)
    assert np.max(np.abs(block[1:, :])) == 0.0
    assert np.array_equal(block[0], pc_first_row(model, 0, g_col))
    assert pc_coefficient_norm(model, 0, g_col) == pytest.approx(
        float(np.linalg.norm(block, 2))
    )


def test_full_rank_reconstruction_of_training_samples(rng, laplacian):
    samples = random_samples(rng, 6, 2)
    g = gram(laplacian, samples)
    model = pca_fit(g)
    g_flat = g.flatten()
    mn = model.n * model.m
    for t in range(model.n):
        g_col = kernel_column(laplacian, samples, samples[t])
        coords = np.zeros((mn, model.m), dtype=complex)
        for s in range(model.l):
            v1 = np.zeros((mn, model.m), dtype=complex)
            v1[:, 0] = model.axes_flat[:, s]
            coords += v1 @ pc_coefficient(model, s, g_col) / np.sqrt(model.sigma[s])
        e_t = np.zeros((mn, model.m), dtype=complex)
        e_t[t * model.m : (t + 1) * model.m] = np.eye(model.m)
        diff = coords - e_t
        resid = diff.conj().T @ g_flat @ diff
        assert float(np.trace(resid).real) < 1e-8


def test_axis_out_of_range(rng, laplacian):
    model = pca_fit(gram(laplacian, random_samples(rng, 3, 2)))
    with pytest.raises(AxisOutOfRange):
        pc_first_row(model, model.l, BlockVector.zeros(3, 2))
    with pytest.raises(AxisOutOfRange):
        reconstruction_error_trace(model, model.l + 1)


# ----------------------------------------------------------- error trace / axes

def test_error_trace_endpoints(rng):
    g = random_gram(rng, 8, 2, kind="spectrum")
    model = pca_fit(g)
    assert reconstruction_error_trace(model, model.l) == pytest.approx(0.0, abs=1e-8)
    assert reconstruction_error_trace(model, 0) == pytest.approx(
        float(np.trace(g.flatten()).real), rel=1e-12
    )


def test_error_trace_tail_identity_and_monotone(rng):
    g = random_gram(rng, 8, 2, kind="kernel")
    model = pca_fit(g)
    values = [reconstruction_error_trace(model, s) for s in range(model.l + 1)]
    for s, val in enumerate(values):
        tail = float(np.sum(model.sigma[s:]))
        assert val == pytest.approx(tail, rel=1e-8, abs=1e-8)
    assert all(a >= b - 1e-10 for a, b in zip(values, values[1:]))


def test_error_trace_matches_expansion_oracle(rng, laplacian):
    # residual trace recomputed by brute-force Gram expansion at s=3
    samples = random_samples(rng, 8, 2)
    g = gram(laplacian, samples)
    model = pca_fit(g)
    g_flat = g.flatten()
    s = 3
    mn = model.n * model.m
    total = 0.0
    for t in range(model.n):
        g_col = kernel_column(laplacian, samples, samples[t])
        coords = np.zeros((mn, model.m), dtype=complex)
        for j in range(s):
            v1 = np.zeros((mn, model.m), dtype=complex)
            v1[:, 0] = model.axes_flat[:, j]
            coords += v1 @ pc_coefficient(model, j, g_col) / np.sqrt(model.sigma[j])
        e_t = np.zeros((mn, model.m), dtype=complex)
        e_t[t * model.m : (t + 1) * model.m] = np.eye(model.m)
        diff = coords - e_t
        total += float(np.trace(diff.conj().T @ g_flat @ diff).real)
    assert reconstruction_error_trace(model, s) == pytest.approx(total, rel=1e-8)


def test_axis_self_inner_is_rank_one_projection(rng, laplacian):
    model = pca_fit(gram(laplacian, random_samples(rng, 6, 3)))
    e11 = np.zeros((3, 3))
    e11[0, 0] = 1.0
    for s in range(model.l):
        assert np.max(np.abs(axis_self_inner(model, s) - e11)) <= 1e-9


def test_axis_cross_inner_vanishes(rng, laplacian):
    model = pca_fit(gram(laplacian, random_samples(rng, 5, 2)))
    for s in range(min(4, model.l)):
        for j in range(min(4, model.l)):
            if s != j:
                assert np.max(np.abs(axis_inner(model, s, j))) <= 1e-9


def test_axis_self_inner_m1_is_scalar_one(rng, laplacian):
    model = pca_fit(gram(laplacian, random_samples(rng, 5, 1)))
    assert axis_self_inner(model, 0)[0, 0] == pytest.approx(1.0, abs=1e-9)


# --------------------------------------------------------------- special cases

def test_permuting_query_elements_permutes_row_and_preserves_norm(rng, laplacian):
    samples = random_samples(rng, 6, 3)
    model = pca_fit(gram(laplacian, samples))
    x = random_samples(rng, 1, 3)[0]
    perm = [2, 0, 1]
    x_perm = StructuredSample(x.elements[perm])
    row = pc_first_row(model, 0, kernel_column(laplacian, samples, x))
    row_p = pc_first_row(model, 0, kernel_column(laplacian, samples, x_perm))
    assert np.max(np.abs(row_p - row[perm])) < 1e-12
    assert np.linalg.norm(row_p) == pytest.approx(np.linalg.norm(row), rel=1e-12)


def test_centered_coefficients_sum_to_zero_over_training(rng, laplacian):
    # centered features sum to zero, so do their axis coefficients
    samples = random_samples(rng, 7, 2)
    model = pca_fit(gram(laplacian, samples), centered=True)
    for s in range(min(3, model.l)):
        total = np.zeros(model.m, dtype=complex)
        for t in range(model.n):
            total += pc_first_row(model, s, kernel_column(laplacian, samples, samples[t]))
        assert np.max(np.abs(total)) < 1e-9


def test_centered_model_matches_centered_gram_eigenvalues(rng, laplacian):
    g = gram(laplacian, random_samples(rng, 6, 2))
    model = pca_fit(g, centered=True)
    lam = np.linalg.eigvalsh(center_gram(g).flatten())[::-1]
    assert np.max(np.abs(model.sigma - lam[: model.l])) < 1e-10
