"""Matrix Walsh system: 2x2 generators, tensor Walsh matrices, sign relations,
and the fast transform between matrices and coefficient arrays.

Indexing: a Walsh index n < 4**m decomposes into binary digits
n = sum gamma_i 2**i; the pair (gamma_{2i}, gamma_{2i+1}) selects the 2x2
generator placed at tensor factor i, equivalently the base-4 digit
q_i = gamma_{2i} + 2*gamma_{2i+1} of n.
"""

from __future__ import annotations

import numpy as np

from .linalg import (
    _from_factor_tensor,
    _to_factor_tensor,
    apply_factor_maps,
    as_matrix,
    dagger,
    kron,
    level_of_dim,
)

PAPER = "paper"
MEANZERO = "meanzero"
MODES = (PAPER, MEANZERO)

# The four 2x2 generators, indexed by q = g0 + 2*g1.
GEN_IDENTITY = np.eye(2, dtype=np.complex128)
GEN_DIAG = np.array([[1, 0], [0, -1]], dtype=np.complex128)
GEN_FLIP = np.array([[0, 1], [1, 0]], dtype=np.complex128)
GEN_ROT = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
GENERATORS = (GEN_IDENTITY, GEN_DIAG, GEN_FLIP, GEN_ROT)

# Per-factor analysis kernel: entries (x00, x01, x10, x11) -> coefficients
# against the generators above; SYNTHESIS_KERNEL is its exact inverse.
ANALYSIS_KERNEL = 0.5 * np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=np.complex128,
)
SYNTHESIS_KERNEL = np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [0, 0, 1, -1],
        [1, -1, 0, 0],
    ],
    dtype=np.complex128,
)


def _sign_table() -> np.ndarray:
    """Product signs s with g_a g_b = s * g_(a XOR b), read off the matrices."""
    table = np.zeros((4, 4), dtype=np.int64)
    for a in range(4):
        for b in range(4):
            prod = GENERATORS[a] @ GENERATORS[b]
            target = GENERATORS[a ^ b]
            if np.array_equal(prod, target):
                table[a, b] = 1
            elif np.array_equal(prod, -target):
                table[a, b] = -1
            else:
                raise AssertionError("generator products left the signed family")
    return table


SIGN_TABLE = _sign_table()


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"bias must lie in (0, 1/2], got {alpha}")
    return alpha


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown generator mode {mode!r}, expected one of {MODES}")
    return mode


def binary_digits(n: int) -> list[int]:
    """Little-endian binary digits of n, empty for n = 0."""
    if n < 0:
        raise ValueError(f"index must be non-negative, got {n}")
    digits = []
    while n:
        digits.append(n & 1)
        n >>= 1
    return digits


def factor_codes(n: int, m: int) -> list[int]:
    """Base-4 digits q_0..q_{m-1} of n; rejects indices outside level m."""
    if not 0 <= n < 4**m:
        raise ValueError(f"Walsh index {n} out of range for level m={m}")
    return [(n >> (2 * i)) & 3 for i in range(m)]


def mean_zero_block(alpha: float) -> np.ndarray:
    """Diagonal generator diag(sqrt((1-a)/a), -sqrt(a/(1-a))) with zero bias mean."""
    alpha = _check_alpha(alpha)
    return np.array(
        [
            [np.sqrt((1 - alpha) / alpha), 0],
            [0, -np.sqrt(alpha / (1 - alpha))],
        ],
        dtype=np.complex128,
    )


def rademacher_block(g0: int, g1: int, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """The 2x2 generator for digit pair (g0, g1) in the requested mode."""
    _check_alpha(alpha)
    _check_mode(mode)
    if g0 not in (0, 1) or g1 not in (0, 1):
        raise ValueError(f"digits must be 0 or 1, got ({g0}, {g1})")
    q = g0 + 2 * g1
    if mode == MEANZERO and q == 1:
        return mean_zero_block(alpha)
    return GENERATORS[q].copy()


def generator_blocks(alpha: float = 0.5, mode: str = PAPER) -> list[np.ndarray]:
    """All four per-factor generators in code order q = 0..3."""
    return [rademacher_block(q & 1, q >> 1, alpha, mode) for q in range(4)]


def walsh_matrix(n: int, m: int, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """Walsh matrix w_n at level m, tensor factor 0 as the major operand."""
    codes = factor_codes(n, m)
    blocks = generator_blocks(alpha, mode)
    out = blocks[codes[0]]
    for q in codes[1:]:
        out = kron(out, blocks[q])
    return out


def rademacher_matrix(s: int, m: int) -> np.ndarray:
    """Filtration generator r_s = w_(2**s); requires s <= 2m - 1."""
    if not 0 <= s <= 2 * m - 1:
        raise ValueError(f"Rademacher step {s} out of range for level m={m}")
    return walsh_matrix(1 << s, m)


def walsh_product_index(n: int, i: int) -> tuple[int, int]:
    """Resolve w_n w_i = sign * w_(n XOR i) from per-factor generator products."""
    if n < 0 or i < 0:
        raise ValueError("Walsh indices must be non-negative")
    sign = 1
    a, b = n, i
    while a or b:
        sign *= SIGN_TABLE[a & 3, b & 3]
        a >>= 2
        b >>= 2
    return n ^ i, int(sign)


def predicted_rademacher_sign(k: int, n: int) -> int:
    """Sign eps in r_k w_n = eps * w_(n - 2**k) for 2**k <= n < 2**(k+1).

    Negative exactly when k is odd and the (k-1)-th digit of n is set.
    """
    if not (1 << k) <= n < (1 << (k + 1)):
        raise ValueError(f"need 2^{k} <= n < 2^{k + 1}, got n={n}")
    if k % 2 == 1 and n >= (1 << k) + (1 << (k - 1)):
        return -1
    return 1


def block_support(s: int) -> tuple[int, int]:
    """Half-open Walsh-index interval [2**s, 2**(s+1)) for filtration step s."""
    if s < 0:
        raise ValueError(f"filtration step must be non-negative, got {s}")
    return 1 << s, 1 << (s + 1)


def _coefficient_order(m: int) -> tuple[int, ...]:
    # factor-tensor axis i carries q_i; the flat slot is n = sum q_i 4**i,
    # so q_0 must vary fastest and the axes are flattened in reverse.
    return tuple(reversed(range(m)))


def walsh_coefficients(x) -> np.ndarray:
    """Coefficients c_n = 2**(-m) Tr(w_n* x) via per-factor 4x4 passes."""
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    y = apply_factor_maps(x, {j: ANALYSIS_KERNEL for j in range(m)}, m)
    return _read_coefficients(y, m)


def _read_coefficients(y: np.ndarray, m: int) -> np.ndarray:
    # apply_factor_maps returns matrix layout; re-read it as the coefficient tensor.
    t = _to_factor_tensor(y, m)
    return np.ascontiguousarray(t.transpose(_coefficient_order(m))).ravel()


def walsh_coefficients_naive(x) -> np.ndarray:
    """Reference transform: one trace per basis element, no factor recursion."""
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    scale = 2.0**-m
    out = np.empty(4**m, dtype=np.complex128)
    for n in range(4**m):
        w = walsh_matrix(n, m)
        out[n] = scale * np.sum(w.conj() * x)
    return out


def walsh_synthesize(c, m: int) -> np.ndarray:
    """Rebuild sum_n c_n w_n from a coefficient array of length 4**m."""
    c = np.asarray(c, dtype=np.complex128).ravel()
    if c.shape[0] != 4**m:
        raise ValueError(f"expected {4 ** m} coefficients for level m={m}, got {c.shape[0]}")
    t = c.reshape((4,) * m).transpose(_coefficient_order(m))
    y = _from_factor_tensor(t, m)
    return apply_factor_maps(y, {j: SYNTHESIS_KERNEL for j in range(m)}, m)


def _mode_kernels(alpha: float, mode: str) -> tuple[np.ndarray, np.ndarray]:
    _check_mode(mode)
    if mode == PAPER:
        return ANALYSIS_KERNEL, SYNTHESIS_KERNEL
    blocks = generator_blocks(alpha, mode)
    synth = np.column_stack([b.reshape(4) for b in blocks])
    return np.linalg.inv(synth), synth


def system_coefficients(x, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """Expansion coefficients of x against the level-m system in the given mode."""
    if mode == PAPER:
        return walsh_coefficients(x)
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    analysis, _ = _mode_kernels(alpha, mode)
    y = apply_factor_maps(x, {j: analysis for j in range(m)}, m)
    return _read_coefficients(y, m)


def system_synthesize(c, m: int, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """Inverse of system_coefficients for the same (alpha, mode)."""
    if mode == PAPER:
        return walsh_synthesize(c, m)
    c = np.asarray(c, dtype=np.complex128).ravel()
    if c.shape[0] != 4**m:
        raise ValueError(f"expected {4 ** m} coefficients for level m={m}, got {c.shape[0]}")
    _, synth = _mode_kernels(alpha, mode)
    t = c.reshape((4,) * m).transpose(_coefficient_order(m))
    y = _from_factor_tensor(t, m)
    return apply_factor_maps(y, {j: synth for j in range(m)}, m)


def coefficients_to_json(c, m: int) -> dict:
    """Encode a coefficient array as {"m": m, "re": [...], "im": [...]} of length 4**m."""
    c = np.asarray(c, dtype=np.complex128).ravel()
    if c.shape[0] != 4**m:
        raise ValueError(f"expected {4 ** m} coefficients for level m={m}, got {c.shape[0]}")
    return {"m": m, "re": c.real.tolist(), "im": c.imag.tolist()}


def coefficients_from_json(obj: dict) -> tuple[np.ndarray, int]:
    m = int(obj["m"])
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64)
    if re.shape != (4**m,) or im.shape != (4**m,):
        raise ValueError(
            f"coefficient payload shape {re.shape}/{im.shape} does not match m={m}"
        )
    return re + 1j * im, m


def gram_matrix(m: int, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """Normalized-trace Gram matrix of the level-m system (orthonormal in paper mode)."""
    dim = 1 << m
    mats = [walsh_matrix(n, m, alpha, mode) for n in range(4**m)]
    g = np.empty((4**m, 4**m), dtype=np.complex128)
    for a, wa in enumerate(mats):
        wad = dagger(wa)
        for b, wb in enumerate(mats):
            g[a, b] = np.trace(wad @ wb) / dim
    return g
