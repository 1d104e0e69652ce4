import numpy as np
import pytest

from rkhm.kernels import ScalarKernelSpec, StructuredSample, gram, gram_from_flat


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def laplacian():
    return ScalarKernelSpec()


def random_samples(rng, n, m, d=2, scale=1.0):
    return [StructuredSample(scale * rng.normal(size=(m, d))) for _ in range(n)]


def random_psd_flat(rng, dim, log_spread=(-8, 1)):
    """Hermitian PSD matrix with eigenvalues spanning the given decades."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u = np.linalg.qr(a)[0]
    lam = 10.0 ** rng.uniform(*log_spread, size=dim)
    return (u * lam) @ u.conj().T


def truncating_gram(rng, eps, kind, spec=None):
    """Random Gram matrices whose spectra genuinely cross the threshold:
    a generic bulk plus a few sub-eps^2 eigenvalues, near-duplicate
    samples at the eps^2 scale, or exact duplicates."""
    spec = spec or ScalarKernelSpec()
    if kind == 0:
        n, m = 6, 3
        dim = n * m
        k = int(rng.integers(1, 4))
        lam = np.concatenate([
            rng.uniform(0.5, 2.0, size=dim - k),
            10.0 ** rng.uniform(np.log10(eps**2) - 2, np.log10(eps**2), size=k),
        ])
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        u = np.linalg.qr(a)[0]
        return gram_from_flat((u * lam) @ u.conj().T, m)
    if kind == 1:
        base = random_samples(rng, 3, 3)
        near = [
            StructuredSample(b.elements + 0.1 * eps**2 * rng.normal(size=b.elements.shape))
            for b in base
        ]
        return gram(spec, base + near)
    base = random_samples(rng, int(rng.integers(2, 5)), int(rng.integers(1, 5)))
    return gram(spec, base + base)


def random_gram(rng, n, m, kind="kernel", spec=None, log_spread=(-8, 1)):
    """Random block Gram matrix.

    kind 'kernel': Gram of random samples; 'wishart': a*a for square
    Gaussian a (generic conditioning); 'spectrum': eigenvalues drawn
    log-uniformly over the given decades (can be made near-singular).
    """
    if kind == "kernel":
        return gram(spec or ScalarKernelSpec(), random_samples(rng, n, m))
    if kind == "wishart":
        dim = n * m
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return gram_from_flat(a.conj().T @ a / dim, m)
    return gram_from_flat(random_psd_flat(rng, n * m, log_spread), m)
