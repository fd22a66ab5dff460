"""Two-factor tensor model: shell enumeration of pair indices, doubly indexed
Walsh matrices, one-factor expectations and projections, and residual checks
for the tensor partial-sum machinery.

Pairs (i, j) are ordered by expanding square shells; shell l fills the index
interval [l**2, (l+1)**2) by walking up column j = l and back down row i = l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import apply_factor_maps, as_matrix, kron, level_of_dim
from .states import (
    LEFT,
    StateSpec,
    slice_kernel,
    state_diagonal,
    weighted_lp_norm,
)
from .states import PINCH_KERNEL
from .walsh import binary_digits, walsh_coefficients, walsh_matrix, walsh_synthesize


@dataclass(frozen=True)
class TensorContext:
    """Pair of biased states acting on the two tensor blocks."""

    first: StateSpec
    second: StateSpec

    @property
    def level(self) -> int:
        return self.first.m + self.second.m

    @property
    def dim(self) -> int:
        return 1 << self.level

    def joint_weights(self) -> np.ndarray:
        return np.kron(state_diagonal(self.first), state_diagonal(self.second))


def shell_index(i: int, j: int) -> int:
    """Position of the pair (i, j) in the shell enumeration."""
    if i < 0 or j < 0:
        raise ValueError("pair entries must be non-negative")
    if i <= j:
        return j * j + i
    return (i + 1) * (i + 1) - j - 1


def shell_pair(n: int) -> tuple[int, int]:
    """Inverse of shell_index."""
    if n < 0:
        raise ValueError("shell position must be non-negative")
    l = math.isqrt(n)
    r = n - l * l
    if r <= l:
        return r, l
    return l, (l + 1) * (l + 1) - n - 1


def max_shell_index(ctx: TensorContext) -> int:
    """Largest shell position reachable inside the truncated index rectangle."""
    imax = 4**ctx.first.m - 1
    jmax = 4**ctx.second.m - 1
    return max(shell_index(min(imax, jmax), jmax), shell_index(imax, 0))


def double_walsh(n: int, ctx: TensorContext) -> np.ndarray:
    """Tensor basis element w_i (x) w_j at shell position n."""
    i, j = shell_pair(n)
    if i >= 4**ctx.first.m or j >= 4**ctx.second.m:
        raise ValueError(
            f"shell position {n} -> pair {(i, j)} outside levels "
            f"({ctx.first.m}, {ctx.second.m})"
        )
    return kron(walsh_matrix(i, ctx.first.m), walsh_matrix(j, ctx.second.m))


def joint_coefficients(x, ctx: TensorContext) -> np.ndarray:
    """Expansion coefficients over pairs, shaped (4**m2, 4**m1), entry [j, i]."""
    x = as_matrix(x)
    if x.shape[0] != ctx.dim:
        raise ValueError(f"matrix dimension {x.shape[0]} does not match context dim {ctx.dim}")
    flat = walsh_coefficients(x)
    return flat.reshape(4**ctx.second.m, 4**ctx.first.m)


def joint_synthesize(coeffs: np.ndarray, ctx: TensorContext) -> np.ndarray:
    return walsh_synthesize(np.asarray(coeffs).ravel(), ctx.level)


def _block_slices(ctx: TensorContext, side: str) -> dict[int, np.ndarray]:
    if side == "first":
        kernel = slice_kernel(ctx.second.alpha)
        return {ctx.first.m + t: kernel for t in range(ctx.second.m)}
    if side == "second":
        kernel = slice_kernel(ctx.first.alpha)
        return {t: kernel for t in range(ctx.first.m)}
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def factor_expectation(x, side: str, ctx: TensorContext) -> np.ndarray:
    """State-preserving expectation onto one tensor block.

    side='first' integrates the second block out against its state (image
    N (x) 1); side='second' mirrors.
    """
    x = as_matrix(x)
    if x.shape[0] != ctx.dim:
        raise ValueError(f"matrix dimension {x.shape[0]} does not match context dim {ctx.dim}")
    return apply_factor_maps(x, _block_slices(ctx, side), ctx.level)


def factor_projection(x, side: str, j: int, ctx: TensorContext) -> np.ndarray:
    """Rank-one-in-one-factor projection (1 (x) w_j) E_first((1 (x) w_j*) x).

    side='second' keeps index j of the second block as written above;
    side='first' mirrors with (w_j (x) 1) and the expectation onto the
    second block.
    """
    x = as_matrix(x)
    if side == "second":
        if not 0 <= j < 4**ctx.second.m:
            raise ValueError(f"index {j} out of range for second-block level {ctx.second.m}")
        v = kron(np.eye(1 << ctx.first.m, dtype=np.complex128), walsh_matrix(j, ctx.second.m))
        inner = factor_expectation(v.conj().T @ x, "first", ctx)
    elif side == "first":
        if not 0 <= j < 4**ctx.first.m:
            raise ValueError(f"index {j} out of range for first-block level {ctx.first.m}")
        v = kron(walsh_matrix(j, ctx.first.m), np.eye(1 << ctx.second.m, dtype=np.complex128))
        inner = factor_expectation(v.conj().T @ x, "second", ctx)
    else:
        raise ValueError(f"side must be 'first' or 'second', got {side!r}")
    return v @ inner


def fsum_partial(x, n: int, ctx: TensorContext, side: str = "second") -> np.ndarray:
    """Sum of the factor projections with index 0..n on the chosen side."""
    out = np.zeros((ctx.dim, ctx.dim), dtype=np.complex128)
    for j in range(n + 1):
        out += factor_projection(x, side, j, ctx)
    return out


def first_truncation(x, s: int, ctx: TensorContext) -> np.ndarray:
    """Keep joint coefficients with first-block index <= s."""
    coeffs = joint_coefficients(x, ctx)
    coeffs[:, s + 1 :] = 0.0
    return joint_synthesize(coeffs, ctx)


def second_truncation(x, s: int, ctx: TensorContext) -> np.ndarray:
    """Keep joint coefficients with second-block index <= s."""
    coeffs = joint_coefficients(x, ctx)
    coeffs[s + 1 :, :] = 0.0
    return joint_synthesize(coeffs, ctx)


def tensor_partial_sum(x, n: int, ctx: TensorContext) -> np.ndarray:
    """Keep the joint coefficients at shell positions 0..n."""
    if not 0 <= n <= max_shell_index(ctx):
        raise ValueError(f"shell position {n} out of range for context (max {max_shell_index(ctx)})")
    coeffs = joint_coefficients(x, ctx)
    kept = np.zeros_like(coeffs)
    imax, jmax = 4**ctx.first.m, 4**ctx.second.m
    for k in range(n + 1):
        i, j = shell_pair(k)
        if i < imax and j < jmax:
            kept[j, i] = coeffs[j, i]
    return joint_synthesize(kept, ctx)


def second_cond_expect(x, s: int, ctx: TensorContext) -> np.ndarray:
    """Expectation id (x) E_s acting inside the second tensor block."""
    x = as_matrix(x)
    m2 = ctx.second.m
    if not -1 <= s <= 2 * m2 - 1:
        raise ValueError(f"filtration step {s} out of range [-1, {2 * m2 - 1}]")
    if s == -1:
        return factor_expectation(x, "first", ctx)
    kept = (s + 2) // 2
    kernel = slice_kernel(ctx.second.alpha)
    maps: dict[int, np.ndarray] = {
        ctx.first.m + t: kernel for t in range(kept, m2)
    }
    if s % 2 == 0:
        maps[ctx.first.m + s // 2] = PINCH_KERNEL
    return apply_factor_maps(x, maps, ctx.level)


def second_mart_diff(x, s: int, ctx: TensorContext) -> np.ndarray:
    """Difference id (x) (E_s - E_{s-1}) on the second block."""
    if not 0 <= s <= 2 * ctx.second.m - 1:
        raise ValueError(f"difference step {s} out of range [0, {2 * ctx.second.m - 1}]")
    return second_cond_expect(x, s, ctx) - second_cond_expect(x, s - 1, ctx)


@dataclass
class ShellDecompositionReport:
    n: int
    shell: int
    residual: float
    square_norms: list[float]
    remainder_norms: list[float]


def shell_decomposition_check(x, n: int, ctx: TensorContext, ps: tuple = (2.0,), side: str = LEFT) -> ShellDecompositionReport:
    """Split the shell partial sum into a full square plus a boundary strip.

    The square part composes the two one-sided coefficient truncations at
    l - 1 with l = isqrt(n); the remainder gathers shell positions l**2..n
    directly.  The identity is exact coefficient bookkeeping for every bias;
    the report carries the weighted norms of both parts.
    """
    x = as_matrix(x)
    if not 0 <= n <= max_shell_index(ctx):
        raise ValueError(f"shell position {n} out of range for context")
    l = math.isqrt(n)
    total = tensor_partial_sum(x, n, ctx)
    if l == 0:
        square = np.zeros_like(total)
    else:
        square = first_truncation(second_truncation(x, l - 1, ctx), l - 1, ctx)
    coeffs = joint_coefficients(x, ctx)
    strip = np.zeros_like(coeffs)
    imax, jmax = 4**ctx.first.m, 4**ctx.second.m
    for k in range(l * l, n + 1):
        i, j = shell_pair(k)
        if i < imax and j < jmax:
            strip[j, i] = coeffs[j, i]
    remainder = joint_synthesize(strip, ctx)
    weights = ctx.joint_weights()
    return ShellDecompositionReport(
        n=n,
        shell=l,
        residual=float(np.max(np.abs(total - square - remainder))),
        square_norms=[weighted_lp_norm(square, weights, p, side) for p in ps],
        remainder_norms=[weighted_lp_norm(remainder, weights, p, side) for p in ps],
    )


@dataclass
class TensorIdentityReport:
    n: int
    residual: np.ndarray
    residual_norms: list[float]
    fsum_gap_norms: list[float]
    fsum_idempotency_residual: float


def tensor_identity_residual(x, n: int, ctx: TensorContext, ps: tuple = (2.0,), side: str = LEFT) -> TensorIdentityReport:
    """Residual of the second-block partial-sum decomposition identity.

    Compares (1 (x) w_n) applied to the second-block coefficient truncation
    of x against the block expectation plus the set-digit differences of
    (1 (x) w_n) x.  The report also measures how far the sum of factor
    projections 0..n drifts from the coefficient truncation (zero in the
    tracial case) and how far that sum is from being idempotent.
    """
    x = as_matrix(x)
    m2 = ctx.second.m
    if not 0 <= n < 4**m2:
        raise ValueError(f"index {n} out of range for second-block level {m2}")
    w = kron(np.eye(1 << ctx.first.m, dtype=np.complex128), walsh_matrix(n, m2))
    truncated = second_truncation(x, n, ctx)
    lhs = w @ truncated
    wx = w @ x
    rhs = second_cond_expect(wx, -1, ctx)
    for s, g in enumerate(binary_digits(n)):
        if g:
            rhs += second_mart_diff(wx, s, ctx)
    residual = lhs - rhs
    fsum = fsum_partial(x, n, ctx, "second")
    fsum2 = fsum_partial(fsum, n, ctx, "second")
    weights = ctx.joint_weights()
    return TensorIdentityReport(
        n=n,
        residual=residual,
        residual_norms=[weighted_lp_norm(residual, weights, p, side) for p in ps],
        fsum_gap_norms=[weighted_lp_norm(fsum - truncated, weights, p, side) for p in ps],
        fsum_idempotency_residual=float(np.max(np.abs(fsum2 - fsum))),
    )
