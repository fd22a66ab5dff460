"""Biased product states, weighted L^p norms, modular flow, and the
state-preserving conditional-expectation filtration with its martingale
differences.

The filtration step s runs over [-1, 2m-1].  Step 2t-1 keeps the first t
tensor factors in full; step 2t additionally admits the diagonal of factor t.
The state-preserving expectation onto step s therefore slices every factor
beyond the kept range with the one-factor state and, at even s, pinches
factor s/2 to its diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    MAX_LEVEL,
    apply_factor_maps,
    as_matrix,
    level_of_dim,
    schatten_norm,
)

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

PINCH_KERNEL = np.diag([1.0, 0.0, 0.0, 1.0]).astype(np.complex128)


@dataclass(frozen=True)
class StateSpec:
    """Bias alpha in (0, 1/2] and ambient level m (dimension 2**m)."""

    alpha: float
    m: int

    def __post_init__(self):
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"bias must lie in (0, 1/2], got {self.alpha}")
        if not 1 <= self.m <= MAX_LEVEL:
            raise ValueError(f"level must lie in [1, {MAX_LEVEL}], got {self.m}")

    @property
    def dim(self) -> int:
        return 1 << self.m

    @property
    def lam(self) -> float:
        """Modular spectrum parameter alpha / (1 - alpha)."""
        return self.alpha / (1.0 - self.alpha)


@dataclass(frozen=True)
class LpContext:
    """Exponent p in [1, inf], state, and injection side for the norm."""

    p: float
    state: StateSpec
    side: str = LEFT

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"norm exponent must satisfy p >= 1, got {self.p}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")


def slice_kernel(alpha: float) -> np.ndarray:
    """4x4 factor map replacing a 2x2 block y by Tr(y diag(a, 1-a)) * I."""
    a = float(alpha)
    return np.array(
        [
            [a, 0, 0, 1 - a],
            [0, 0, 0, 0],
            [0, 0, 0, 0],
            [a, 0, 0, 1 - a],
        ],
        dtype=np.complex128,
    )


def state_diagonal(spec: StateSpec) -> np.ndarray:
    """Diagonal of the product density, factor-0 bit most significant."""
    base = np.array([spec.alpha, 1.0 - spec.alpha])
    diag = base
    for _ in range(spec.m - 1):
        diag = np.kron(diag, base)
    return diag


def state_density(spec: StateSpec) -> np.ndarray:
    """Product density matrix diag(alpha, 1-alpha)**(tensor m)."""
    return np.diag(state_diagonal(spec)).astype(np.complex128)


def rho_value(x, spec: StateSpec) -> complex:
    """State value Tr(x A)."""
    x = as_matrix(x)
    if x.shape[0] != spec.dim:
        raise ValueError(f"matrix dimension {x.shape[0]} does not match level m={spec.m}")
    return complex(np.diag(x) @ state_diagonal(spec))


def weighted_lp_norm(x, weights: np.ndarray, p: float, side: str = LEFT) -> float:
    """Tr(|x A^(1/p)|^p)^(1/p) (left) or the mirrored right version.

    ``weights`` is the diagonal of the density A.  p = inf returns the plain
    operator norm for both sides.
    """
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    x = as_matrix(x)
    if math.isinf(p):
        return schatten_norm(x, np.inf)
    w = np.asarray(weights, dtype=np.float64) ** (1.0 / p)
    scaled = x * w[np.newaxis, :] if side == LEFT else x * w[:, np.newaxis]
    return schatten_norm(scaled, p)


def batched_weighted_lp_norm(xs: np.ndarray, weights: np.ndarray, p: float, side: str = LEFT) -> np.ndarray:
    """weighted_lp_norm over a stack of matrices (batch SVD under the hood)."""
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    xs = np.asarray(xs, dtype=np.complex128)
    if math.isinf(p):
        s = np.linalg.svd(xs, compute_uv=False)
        return s[..., 0]
    w = np.asarray(weights, dtype=np.float64) ** (1.0 / p)
    scaled = xs * w[np.newaxis, np.newaxis, :] if side == LEFT else xs * w[np.newaxis, :, np.newaxis]
    s = np.linalg.svd(scaled, compute_uv=False)
    if p == 2:
        return np.sqrt((s * s).sum(axis=-1))
    return ((s**p).sum(axis=-1)) ** (1.0 / p)


def lp_norm(x, ctx: LpContext) -> float:
    """Weighted norm of x in the given context."""
    x = as_matrix(x)
    if x.shape[0] != ctx.state.dim:
        raise ValueError(
            f"matrix dimension {x.shape[0]} does not match level m={ctx.state.m}"
        )
    return weighted_lp_norm(x, state_diagonal(ctx.state), ctx.p, ctx.side)


def modular_flow(x, t: float, spec: StateSpec) -> np.ndarray:
    """One-parameter flow A^(it) x A^(-it) attached to the state."""
    x = as_matrix(x)
    if x.shape[0] != spec.dim:
        raise ValueError(f"matrix dimension {x.shape[0]} does not match level m={spec.m}")
    phase = np.exp(1j * t * np.log(state_diagonal(spec)))
    return x * np.outer(phase, phase.conj())


def _expectation_maps(s: int, spec: StateSpec) -> dict[int, np.ndarray]:
    kept = (s + 1 + 1) // 2  # ceil((s+1)/2): factors 0..kept-1 stay untouched
    maps: dict[int, np.ndarray] = {j: slice_kernel(spec.alpha) for j in range(kept, spec.m)}
    if s % 2 == 0:
        maps[s // 2] = PINCH_KERNEL
    return maps


def cond_expect(x, s: int, spec: StateSpec) -> np.ndarray:
    """State-preserving conditional expectation onto filtration step s.

    s = -1 collapses to rho(x) * I; s = 2m - 1 is the identity.  The output
    is re-embedded at the full ambient dimension.
    """
    x = as_matrix(x)
    if x.shape[0] != spec.dim:
        raise ValueError(f"matrix dimension {x.shape[0]} does not match level m={spec.m}")
    if not -1 <= s <= 2 * spec.m - 1:
        raise ValueError(f"filtration step {s} out of range [-1, {2 * spec.m - 1}]")
    if s == -1:
        return rho_value(x, spec) * np.eye(spec.dim, dtype=np.complex128)
    if s == 2 * spec.m - 1:
        return x.copy()
    return apply_factor_maps(x, _expectation_maps(s, spec), spec.m)


def mart_diff(x, s: int, spec: StateSpec) -> np.ndarray:
    """Martingale difference between consecutive filtration steps."""
    if not 0 <= s <= 2 * spec.m - 1:
        raise ValueError(f"difference step {s} out of range [0, {2 * spec.m - 1}]")
    return cond_expect(x, s, spec) - cond_expect(x, s - 1, spec)
