"""Dense complex matrix kernel: Kronecker products, spectral routines, Schatten norms.

Every matrix handled by this package is a square complex128 numpy array of
dimension 2**m.  Tensor factor 0 is always the leftmost (major) Kronecker
operand, so the row index of a 2**m dimensional matrix reads as an m-bit
string with the factor-0 bit in the most significant position.  This
convention is normative for every module that builds on this one.
"""

from __future__ import annotations

import numpy as np

MAX_LEVEL = 8
MAX_KRON_DIM = 2**16
HERMITICITY_TOL = 1e-12

__all__ = [
    "MAX_LEVEL",
    "as_matrix",
    "level_of_dim",
    "kron",
    "dagger",
    "hermitian_eig",
    "singular_values",
    "schatten_norm",
    "psd_power",
    "gns_inner",
    "matrix_to_json",
    "matrix_from_json",
    "apply_factor_maps",
    "gaussian_matrix",
    "task_rng",
]


def as_matrix(x) -> np.ndarray:
    """Coerce to a square complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def level_of_dim(dim: int) -> int:
    """Return m with dim == 2**m, rejecting non powers of two."""
    dim = int(dim)
    m = dim.bit_length() - 1
    if dim <= 0 or (1 << m) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product with the left operand as the major (slow) index."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_KRON_DIM:
        raise ValueError(
            f"kron dimension {a.shape[0] * b.shape[0]} exceeds {MAX_KRON_DIM}"
        )
    return np.kron(a, b)


def dagger(x) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(x).conj().T


def hermitian_eig(h, tol: float = HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with w real ascending and v orthonormal columns.  Rejects
    inputs whose Hermiticity residual max|h - h*| exceeds ``tol``.
    """
    h = as_matrix(h)
    residual = np.max(np.abs(h - h.conj().T))
    if residual > tol:
        raise ValueError(f"matrix is not Hermitian (residual {residual:.3e})")
    return np.linalg.eigh(h)


def singular_values(x) -> np.ndarray:
    """Singular values in descending order, via eigendecomposition of x*x."""
    x = as_matrix(x)
    w = np.linalg.eigvalsh(x.conj().T @ x)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def schatten_norm(x, p: float) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)**(1/p).

    ``p = inf`` returns the operator norm.  Exponents below 1 are rejected.
    """
    if p < 1:
        raise ValueError(f"Schatten exponent must satisfy p >= 1, got {p}")
    s = singular_values(x)
    if np.isinf(p):
        return float(s[0]) if s.size else 0.0
    if p == 1:
        return float(s.sum())
    if p == 2:
        return float(np.sqrt((s * s).sum()))
    return float((s**p).sum() ** (1.0 / p))


def psd_power(h, t) -> np.ndarray:
    """Spectral power h**t of a Hermitian positive semidefinite matrix.

    ``t`` may be real or pure imaginary.  Exponents that require inverting or
    rotating the spectrum (t.real < 0 or t.imag != 0) demand a positive
    definite input.
    """
    tc = complex(t)
    w, v = hermitian_eig(h)
    needs_pd = tc.real < 0 or tc.imag != 0
    if needs_pd and w.min() <= HERMITICITY_TOL:
        raise ValueError(
            f"exponent {tc} requires a positive definite matrix "
            f"(min eigenvalue {w.min():.3e})"
        )
    w = np.clip(w, 0.0, None)
    if tc.imag == 0:
        powered = w ** tc.real
    else:
        powered = w.astype(np.complex128) ** tc
    return (v * powered) @ v.conj().T


def gns_inner(x, y, a) -> complex:
    """Sesquilinear coupling Tr(x* y a) of two matrices against a density a."""
    x, y, a = as_matrix(x), as_matrix(y), as_matrix(a)
    if not (x.shape == y.shape == a.shape):
        raise ValueError(
            f"dimension mismatch: {x.shape} vs {y.shape} vs {a.shape}"
        )
    return complex(np.einsum("ji,jk,ki->", x.conj(), y, a))


def matrix_to_json(x) -> dict:
    """Encode a matrix as {"m": level, "re": rows, "im": rows}."""
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    return {"m": m, "re": x.real.tolist(), "im": x.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    """Decode the matrix JSON schema back into an array."""
    m = int(obj["m"])
    dim = 1 << m
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(
            f"matrix payload shape {re.shape}/{im.shape} does not match m={m}"
        )
    return re + 1j * im


def _to_factor_tensor(x: np.ndarray, m: int) -> np.ndarray:
    """Reshape a 2**m matrix into a (4,)*m tensor, axis i = (row bit, col bit) of factor i."""
    t = x.reshape((2,) * (2 * m))
    order = []
    for i in range(m):
        order += [i, m + i]
    return t.transpose(order).reshape((4,) * m)


def _from_factor_tensor(t: np.ndarray, m: int) -> np.ndarray:
    t = t.reshape((2,) * (2 * m))
    rows = list(range(0, 2 * m, 2))
    cols = list(range(1, 2 * m, 2))
    return t.transpose(rows + cols).reshape(1 << m, 1 << m)


def apply_factor_maps(x, maps: dict, m: int | None = None) -> np.ndarray:
    """Apply 4x4 linear maps to chosen tensor factors of a 2**m matrix.

    ``maps`` sends factor indices to 4x4 arrays acting on the (row bit,
    col bit) pair of that factor, ordered (00, 01, 10, 11); omitted factors
    are left alone.  This is the shared kernel behind coefficient transforms
    and slice/pinch channels.
    """
    x = as_matrix(x)
    if m is None:
        m = level_of_dim(x.shape[0])
    if m == 0:
        return x.copy()
    t = _to_factor_tensor(x, m)
    for j, k4 in maps.items():
        if not 0 <= j < m:
            raise ValueError(f"factor index {j} out of range for m={m}")
        t = np.moveaxis(np.tensordot(np.asarray(k4, dtype=np.complex128), t, axes=(1, j)), 0, j)
    return _from_factor_tensor(t, m)


def gaussian_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Complex standard Gaussian matrix (independent re/im parts)."""
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)


def task_rng(seed: int, *ids: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, task ids).

    Streams depend only on the key, never on draw order across tasks, so
    sweeps give identical results for any worker count.
    """
    mask = 0xFFFFFFFFFFFFFFFF
    word = 0
    for i in ids:
        word = ((word * 0x9E3779B97F4A7C15) + int(i) + 1) & mask
    key = np.array([int(seed) & mask, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
