"""Commutative picture: the biased dyadic measure, step functions, the
diagonal Walsh subsequence, and the exact match between diagonal-matrix
norms and weighted function-space norms.

A step function at level L is constant on the 2**L dyadic intervals of
[0, 1); interval k is addressed by the binary digits of k read most
significant first, so digit i of k plays the role of tensor factor i.  Sign
changes at scale 2**-(i+1) are driven by digit i of the series index, which
shifts the classical index-to-frequency convention by one so that the
first factor is not degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, level_of_dim, task_rng
from .states import StateSpec, state_diagonal
from .walsh import walsh_matrix

MAX_STEP_LEVEL = 8


@dataclass(frozen=True)
class StepFunction:
    """Complex values on the 2**level dyadic intervals, left to right."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.level <= MAX_STEP_LEVEL:
            raise ValueError(f"level must lie in [1, {MAX_STEP_LEVEL}], got {self.level}")
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (1 << self.level,):
            raise ValueError(
                f"expected {1 << self.level} interval values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DyadicWeightTable:
    """Biased interval masses at one dyadic level."""

    level: int
    alpha: float
    weights: np.ndarray


def mu_weight(k: int, level: int, alpha: float) -> float:
    """Mass of the k-th dyadic interval under the product-Bernoulli measure."""
    if not 0 <= k < (1 << level):
        raise ValueError(f"interval index {k} out of range for level {level}")
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"bias must lie in (0, 1/2], got {alpha}")
    out = 1.0
    for i in range(level):
        bit = (k >> (level - 1 - i)) & 1
        out *= (1 - alpha) if bit else alpha
    return out


def dyadic_weights(level: int, alpha: float) -> DyadicWeightTable:
    """All interval masses at one level (the diagonal of the product density)."""
    return DyadicWeightTable(
        level=level, alpha=alpha, weights=state_diagonal(StateSpec(alpha, level))
    )


def classical_walsh_values(n: int, level: int) -> StepFunction:
    """Values of the n-th classical Walsh function on the level's intervals."""
    if not 0 <= n < (1 << level):
        raise ValueError(f"series index {n} out of range for level {level}")
    ks = np.arange(1 << level)
    values = np.ones(1 << level, dtype=np.complex128)
    for i in range(level):
        if (n >> i) & 1:
            bits = (ks >> (level - 1 - i)) & 1
            values *= 1.0 - 2.0 * bits
    return StepFunction(level=level, values=values)


def diag_to_step(x) -> StepFunction:
    """Read a diagonal matrix as a step function (row index = interval index)."""
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    off = x - np.diag(np.diag(x))
    worst = np.max(np.abs(off)) if off.size else 0.0
    if worst > 1e-12:
        raise ValueError(f"matrix is not diagonal (off-diagonal magnitude {worst:.3e})")
    return StepFunction(level=m, values=np.diag(x).copy())


def step_lp_norm(f: StepFunction, p: float, alpha: float) -> float:
    """Weighted L^p norm of a step function; p = inf gives the sup of |f|."""
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    mags = np.abs(f.values)
    if math.isinf(p):
        return float(mags.max())
    weights = dyadic_weights(f.level, alpha).weights
    return float(((mags**p) * weights).sum() ** (1.0 / p))


def step_to_json(f: StepFunction) -> dict:
    """Encode a step function as {"level": L, "re": [...], "im": [...]}."""
    return {
        "level": f.level,
        "re": f.values.real.tolist(),
        "im": f.values.imag.tolist(),
    }


def step_from_json(obj: dict) -> StepFunction:
    level = int(obj["level"])
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64)
    if re.shape != (1 << level,) or im.shape != (1 << level,):
        raise ValueError(
            f"step payload shape {re.shape}/{im.shape} does not match level {level}"
        )
    return StepFunction(level=level, values=re + 1j * im)


def diag_index_map(n: int) -> int:
    """Spread the bits of n onto the even binary positions."""
    if n < 0:
        raise ValueError("index must be non-negative")
    out = 0
    i = 0
    while n:
        if n & 1:
            out |= 1 << (2 * i)
        n >>= 1
        i += 1
    return out


def diagonal_walsh_matrix(n: int, level: int) -> np.ndarray:
    """The diagonal-subsequence matrix whose diagonal is the n-th Walsh function."""
    return walsh_matrix(diag_index_map(n), level)


def classical_basis_matrix(level: int) -> np.ndarray:
    """Columns are the classical Walsh functions 0..2**level-1 (a +-1 matrix)."""
    cols = [classical_walsh_values(n, level).values for n in range(1 << level)]
    return np.column_stack(cols)


def classical_partial_sum(f: StepFunction, n: int) -> StepFunction:
    """Keep series coefficients 0..n of the step function."""
    dim = 1 << f.level
    if not 0 <= n < dim:
        raise ValueError(f"partial-sum index {n} out of range for level {f.level}")
    basis = classical_basis_matrix(f.level)
    coeffs = np.linalg.solve(basis, f.values)
    coeffs[n + 1 :] = 0.0
    return StepFunction(level=f.level, values=basis @ coeffs)


def classical_norm_exact2(n: int, level: int, alpha: float) -> float:
    """Exact weighted-L^2 norm of the classical partial-sum projection."""
    dim = 1 << level
    if not 0 <= n < dim:
        raise ValueError(f"partial-sum index {n} out of range for level {level}")
    basis = classical_basis_matrix(level)
    keep = np.zeros(dim)
    keep[: n + 1] = 1.0
    proj = basis @ np.diag(keep) @ np.linalg.inv(basis)
    root = np.sqrt(dyadic_weights(level, alpha).weights)
    sim = (root[:, None] * proj) / root[None, :]
    return float(np.linalg.svd(sim, compute_uv=False)[0])


def classical_norm_estimate(
    n: int,
    level: int,
    alpha: float,
    p: float,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 400,
) -> tuple[float, bool]:
    """Lower-bound estimate of the weighted-L^p norm of the classical projection.

    Same multi-start normalized-ascent scheme as the matrix engine, on the
    interval-value vectors.
    """
    if restarts < 1:
        raise ValueError(f"need at least one restart, got {restarts}")
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    dim = 1 << level
    basis = classical_basis_matrix(level)
    keep = np.zeros(dim)
    keep[: n + 1] = 1.0
    proj = basis @ np.diag(keep) @ np.linalg.inv(basis)
    adj = proj.conj().T
    weights = dyadic_weights(level, alpha).weights

    def norm_of(v: np.ndarray) -> float:
        mags = np.abs(v)
        if math.isinf(p):
            return float(mags.max())
        return float(((mags**p) * weights).sum() ** (1.0 / p))

    def norm_gradient(v: np.ndarray) -> np.ndarray:
        mags = np.abs(v)
        if math.isinf(p):
            out = np.zeros_like(v)
            k = int(np.argmax(mags))
            if mags[k] > 0:
                out[k] = v[k] / mags[k]
            return out
        value = norm_of(v)
        if value == 0.0:
            return np.zeros_like(v)
        scale = weights * np.where(mags > 0, mags, 1.0) ** (p - 2.0) / value ** (p - 1.0)
        return scale * v

    best = 0.0
    best_converged = False
    for r in range(restarts):
        rng = task_rng(seed, r)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        nv = norm_of(v)
        if nv == 0.0:
            continue
        v = v / nv
        value = norm_of(proj @ v)
        converged = False
        step, quiet = 1.0, 0
        for _ in range(max_iter):
            g = adj @ norm_gradient(proj @ v) - value * norm_gradient(v)
            gn = np.linalg.norm(g)
            if gn < 1e-300:
                converged = True
                break
            g = g / gn
            rel = 0.0
            trial = step
            while trial > 1e-12:
                cand = v + trial * g
                cn = norm_of(cand)
                if cn > 0:
                    cand = cand / cn
                    cv = norm_of(proj @ cand)
                    if cv > value:
                        rel = (cv - value) / max(value, 1e-300)
                        v, value = cand, cv
                        step = min(trial * 2.0, 1.0)
                        break
                trial *= 0.5
            else:
                step = 1.0
            quiet = quiet + 1 if rel < tol else 0
            if quiet >= 5:
                converged = True
                break
        if value > best:
            best, best_converged = value, converged
    return best, best_converged
