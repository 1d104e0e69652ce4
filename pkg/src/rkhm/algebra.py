"""Dense linear algebra over the matrix algebra of m x m complex matrices.

A "block" is a plain (m, m) complex128 ndarray.  :class:`BlockMatrix` and
:class:`BlockVector` hold rectangular arrays of blocks of uniform size and
are the carriers for Gram matrices, triangular factors and coordinate
vectors.  Every block computation is equivalent to the corresponding flat
computation on (m*n) x (m*n) complex matrices; :func:`flatten` and
:func:`unflatten` convert between the two pictures bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonFinite, NonHermitianInput, NotStrictlyUpper

# Relative tolerance of the Hermitian input check (entrywise).
HERMITIAN_RTOL = 1e-12
# Eigenvalues of magnitude below this (relative to max(lambda_max, 1)) are
# treated as exact zeros of a positive semidefinite block.
EIG_CLAMP_RTOL = 1e-12


def as_block(a, m: int | None = None) -> np.ndarray:
    """Coerce ``a`` to a square complex128 block, checking finiteness."""
    b = np.asarray(a, dtype=np.complex128)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionMismatch(f"block must be square, got shape {b.shape}")
    if m is not None and b.shape[0] != m:
        raise DimensionMismatch(f"expected {m}x{m} block, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise NonFinite("block contains NaN or Inf entries")
    return b


def opnorm(a: np.ndarray) -> float:
    """Operator (spectral) norm of a complex matrix."""
    return float(np.linalg.norm(a, 2))


class BlockMatrix:
    """n_rows x n_cols array of m x m complex blocks."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != 4 or data.shape[2] != data.shape[3]:
            raise DimensionMismatch(
                f"BlockMatrix data must have shape (nr, nc, m, m), got {data.shape}"
            )
        self.data = data

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, n_rows: int, n_cols: int, m: int) -> "BlockMatrix":
        return cls(np.zeros((n_rows, n_cols, m, m), dtype=np.complex128))

    @classmethod
    def identity(cls, n: int, m: int) -> "BlockMatrix":
        out = cls.zeros(n, n, m)
        eye = np.eye(m, dtype=np.complex128)
        for t in range(n):
            out.data[t, t] = eye
        return out

    @classmethod
    def block_diag(cls, blocks: list[np.ndarray]) -> "BlockMatrix":
        m = blocks[0].shape[0]
        out = cls.zeros(len(blocks), len(blocks), m)
        for t, b in enumerate(blocks):
            out.data[t, t] = as_block(b, m)
        return out

    @classmethod
    def from_flat(cls, cm: np.ndarray, m: int) -> "BlockMatrix":
        return unflatten(cm, m)

    # -- structure ----------------------------------------------------
    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @property
    def m(self) -> int:
        return self.data.shape[2]

    def block(self, i: int, j: int) -> np.ndarray:
        return self.data[i, j]

    def submatrix(self, rows: slice, cols: slice) -> "BlockMatrix":
        return BlockMatrix(self.data[rows, cols])

    def column(self, j: int) -> "BlockVector":
        return BlockVector(self.data[:, j].copy())

    def flatten(self) -> np.ndarray:
        return flatten(self)

    def copy(self) -> "BlockMatrix":
        return BlockMatrix(self.data.copy())

    # -- algebra -------------------------------------------------------
    @property
    def h(self) -> "BlockMatrix":
        """Adjoint: block transpose with entrywise conjugate transpose."""
        return BlockMatrix(self.data.conj().transpose(1, 0, 3, 2))

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        return BlockMatrix(self.data + other.data)

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        return BlockMatrix(self.data - other.data)

    def __matmul__(self, other):
        if isinstance(other, BlockVector):
            return self.matvec(other)
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        if self.n_cols != other.n_rows or self.m != other.m:
            raise DimensionMismatch(
                f"cannot multiply {self.n_rows}x{self.n_cols} by "
                f"{other.n_rows}x{other.n_cols} blocks"
            )
        return unflatten(self.flatten() @ other.flatten(), self.m)

    def matvec(self, v: "BlockVector") -> "BlockVector":
        if self.n_cols != v.n or self.m != v.m:
            raise DimensionMismatch("block matrix / vector size mismatch")
        return BlockVector.from_flat(self.flatten() @ v.flatten(), self.m)

    def norm(self) -> float:
        """Operator norm of the flattened matrix."""
        return opnorm(self.flatten())

    def max_block_norm(self, which: str = "all") -> float:
        """Max operator norm over blocks: 'all', 'diag' or 'offdiag'."""
        best = 0.0
        for i in range(self.n_rows):
            for j in range(self.n_cols):
                if which == "diag" and i != j:
                    continue
                if which == "offdiag" and i == j:
                    continue
                best = max(best, opnorm(self.data[i, j]))
        return best


class BlockVector:
    """Length-n array of m x m complex blocks (an element of A^n)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise DimensionMismatch(
                f"BlockVector data must have shape (n, m, m), got {data.shape}"
            )
        self.data = data

    @classmethod
    def zeros(cls, n: int, m: int) -> "BlockVector":
        return cls(np.zeros((n, m, m), dtype=np.complex128))

    @classmethod
    def from_flat(cls, fm: np.ndarray, m: int) -> "BlockVector":
        fm = np.asarray(fm, dtype=np.complex128)
        if fm.ndim != 2 or fm.shape[1] != m or fm.shape[0] % m:
            raise DimensionMismatch(f"flat vector shape {fm.shape} incompatible with m={m}")
        return cls(fm.reshape(-1, m, m))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def block(self, t: int) -> np.ndarray:
        return self.data[t]

    def flatten(self) -> np.ndarray:
        """Stack blocks vertically into an (m*n, m) complex matrix."""
        return self.data.reshape(self.n * self.m, self.m)

    def copy(self) -> "BlockVector":
        return BlockVector(self.data.copy())

    def __add__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector(self.data + other.data)

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector(self.data - other.data)

    def inner(self, other: "BlockVector") -> np.ndarray:
        """A-valued pairing sum_t self[t]* other[t] as an m x m block."""
        if self.n != other.n or self.m != other.m:
            raise DimensionMismatch("block vector size mismatch")
        return self.flatten().conj().T @ other.flatten()


def flatten(bm: BlockMatrix) -> np.ndarray:
    """Place blocks into a single (m*n_rows) x (m*n_cols) complex matrix."""
    nr, nc, m, _ = bm.data.shape
    return bm.data.transpose(0, 2, 1, 3).reshape(nr * m, nc * m)


def unflatten(cm: np.ndarray, m: int) -> BlockMatrix:
    """Inverse of :func:`flatten`; bit-exact round trip."""
    cm = np.asarray(cm, dtype=np.complex128)
    if cm.ndim != 2 or cm.shape[0] % m or cm.shape[1] % m:
        raise DimensionMismatch(f"matrix shape {cm.shape} not divisible by m={m}")
    nr, nc = cm.shape[0] // m, cm.shape[1] // m
    return BlockMatrix(cm.reshape(nr, m, nc, m).transpose(0, 2, 1, 3))


def herm_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian block, eigenvalues descending.

    Returns ``(lam, u)`` with ``h = u @ diag(lam) @ u*`` up to round-off.
    Eigenvalues of magnitude at most ``EIG_CLAMP_RTOL * max(lam_max, 1)``
    are clamped to exactly 0, so blocks that are positive semidefinite up
    to round-off come back with nonnegative spectra.
    """
    h = as_block(h)
    scale = np.max(np.abs(h)) if h.size else 0.0
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_RTOL * (1.0 + scale):
        raise NonHermitianInput("input is not Hermitian within tolerance")
    h = 0.5 * (h + h.conj().T)
    lam, u = np.linalg.eigh(h)
    lam, u = lam[::-1].copy(), u[:, ::-1].copy()
    tol = EIG_CLAMP_RTOL * max(lam[0] if lam.size else 0.0, 1.0)
    lam[np.abs(lam) <= tol] = 0.0
    return lam, u


def strict_upper_inverse(nilpotent_part: BlockMatrix) -> BlockMatrix:
    """Invert I + N for a strictly block upper triangular N.

    The flat form of I + N is upper triangular with unit diagonal, so the
    inverse comes from a triangular back-substitution solve; no general
    dense inversion and no conditioning check are needed (the Neumann
    series of a nilpotent N is finite).
    """
    from scipy.linalg import solve_triangular

    n, m = nilpotent_part.n_rows, nilpotent_part.m
    if nilpotent_part.n_cols != n:
        raise DimensionMismatch("nilpotent part must be square")
    nd = nilpotent_part.data
    for i in range(n):
        for j in range(i + 1):
            if np.max(np.abs(nd[i, j]), initial=0.0) > 1e-14:
                raise NotStrictlyUpper(
                    f"block ({i}, {j}) on or below the diagonal is nonzero"
                )
    flat = flatten(nilpotent_part) + np.eye(n * m, dtype=np.complex128)
    inv = solve_triangular(flat, np.eye(n * m, dtype=np.complex128),
                           lower=False, unit_diagonal=True)
    return unflatten(inv, m)
