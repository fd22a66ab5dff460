"""Partial-sum projections, residuals of the partial-sum decomposition
identity, exact p=2 operator norms in the weighted geometry, a multi-start
ascent estimator for general p, and sign-sweep experiments.

Identities whose derivation needs the bias mean of every non-trivial Walsh
matrix to vanish hold exactly only in the tracial case alpha = 1/2; for other
biases this module measures residuals instead of asserting them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_matrix,
    gaussian_matrix,
    level_of_dim,
    schatten_norm,
    task_rng,
)
from .states import (
    LEFT,
    SIDES,
    LpContext,
    StateSpec,
    batched_weighted_lp_norm,
    cond_expect,
    lp_norm,
    mart_diff,
    rho_value,
    state_diagonal,
    weighted_lp_norm,
)
from .walsh import PAPER, binary_digits, system_coefficients, system_synthesize, walsh_matrix

MAX_EXPLICIT_LEVEL = 4  # superoperator matrices stay at or below 256 x 256

EXACT2 = "exact2"
ESTIMATE = "estimate"


class OperatorHandle:
    """Composable linear map on the 4**m dimensional space of 2**m matrices.

    Wraps a matrix-to-matrix callable; ``matrix()`` materializes the action in
    the matrix-unit basis (row-major vec convention) for levels m <= 4.
    """

    def __init__(self, dim: int, fn, label: str = ""):
        self.dim = int(dim)
        self._fn = fn
        self.label = label
        self._matrix = None

    def __call__(self, x) -> np.ndarray:
        return self._fn(as_matrix(x))

    def __matmul__(self, other: "OperatorHandle") -> "OperatorHandle":
        if self.dim != other.dim:
            raise ValueError("cannot compose handles of different dimension")
        return OperatorHandle(
            self.dim, lambda x: self(other(x)), f"({self.label} . {other.label})"
        )

    def __add__(self, other: "OperatorHandle") -> "OperatorHandle":
        if self.dim != other.dim:
            raise ValueError("cannot add handles of different dimension")
        return OperatorHandle(
            self.dim, lambda x: self(x) + other(x), f"({self.label} + {other.label})"
        )

    def __sub__(self, other: "OperatorHandle") -> "OperatorHandle":
        if self.dim != other.dim:
            raise ValueError("cannot subtract handles of different dimension")
        return OperatorHandle(
            self.dim, lambda x: self(x) - other(x), f"({self.label} - {other.label})"
        )

    def __rmul__(self, c) -> "OperatorHandle":
        return OperatorHandle(self.dim, lambda x: c * self(x), f"({c} * {self.label})")

    @classmethod
    def identity(cls, dim: int) -> "OperatorHandle":
        return cls(dim, lambda x: x.copy(), "id")

    @classmethod
    def from_matrix(cls, mat: np.ndarray, label: str = "explicit") -> "OperatorHandle":
        mat = np.asarray(mat, dtype=np.complex128)
        dim = int(round(math.isqrt(mat.shape[0])))
        if mat.shape != (dim * dim, dim * dim):
            raise ValueError(f"superoperator shape {mat.shape} is not (d^2, d^2)")
        handle = cls(dim, lambda x: (mat @ x.ravel()).reshape(dim, dim), label)
        handle._matrix = mat
        return handle

    def matrix(self) -> np.ndarray:
        """Explicit 4**m x 4**m matrix in the matrix-unit basis."""
        if self._matrix is None:
            m = level_of_dim(self.dim)
            if m > MAX_EXPLICIT_LEVEL:
                raise ValueError(
                    f"refusing to materialize a superoperator at level {m} > {MAX_EXPLICIT_LEVEL}"
                )
            d2 = self.dim * self.dim
            cols = np.empty((d2, d2), dtype=np.complex128)
            probe = np.zeros((self.dim, self.dim), dtype=np.complex128)
            for k in range(d2):
                probe.flat[k] = 1.0
                cols[:, k] = self(probe).ravel()
                probe.flat[k] = 0.0
            self._matrix = cols
        return self._matrix


@dataclass
class NormReport:
    """Operator-norm value with provenance of how it was computed."""

    value: float
    method: str
    restarts: int = 0
    converged: bool = True
    seed: int = 0


@dataclass
class SignSweepReport:
    p: float
    alpha: float
    m: int
    trials: int
    seed: int
    max_ratio: float
    pattern_maxima: dict | None = None


@dataclass
class BasisConstantRow:
    n: int
    p: float
    alpha: float
    side: str
    method: str
    value: float
    converged: bool
    decomp_value: float
    decomp_converged: bool
    gap: float


def cond_expect_handle(s: int, spec: StateSpec) -> OperatorHandle:
    return OperatorHandle(spec.dim, lambda x: cond_expect(x, s, spec), f"E[{s}]")


def mart_diff_handle(s: int, spec: StateSpec) -> OperatorHandle:
    return OperatorHandle(spec.dim, lambda x: mart_diff(x, s, spec), f"D[{s}]")


def left_mult_handle(w) -> OperatorHandle:
    w = as_matrix(w)
    return OperatorHandle(w.shape[0], lambda x: w @ x, "lmul")


def right_mult_handle(w) -> OperatorHandle:
    w = as_matrix(w)
    return OperatorHandle(w.shape[0], lambda x: x @ w, "rmul")


def partial_sum(x, n: int, alpha: float = 0.5, mode: str = PAPER) -> np.ndarray:
    """Keep expansion coefficients 0..n of x and resynthesize."""
    x = as_matrix(x)
    m = level_of_dim(x.shape[0])
    if not 0 <= n < 4**m:
        raise ValueError(f"partial-sum index {n} out of range for level m={m}")
    c = system_coefficients(x, alpha, mode)
    c[n + 1 :] = 0.0
    return system_synthesize(c, m, alpha, mode)


def partial_sum_handle(n: int, m: int, alpha: float = 0.5, mode: str = PAPER) -> OperatorHandle:
    return OperatorHandle(1 << m, lambda x: partial_sum(x, n, alpha, mode), f"P[{n}]")


def subset_projection(x, steps, spec: StateSpec) -> np.ndarray:
    """Sum of martingale differences over ``steps``; -1 adds the rho(x)*I term."""
    x = as_matrix(x)
    steps = sorted(set(int(s) for s in steps))
    if any(s < -1 or s > 2 * spec.m - 1 for s in steps):
        raise ValueError(f"subset members must lie in [-1, {2 * spec.m - 1}], got {steps}")
    out = np.zeros_like(x)
    for s in steps:
        if s == -1:
            out += rho_value(x, spec) * np.eye(spec.dim, dtype=np.complex128)
        else:
            out += mart_diff(x, s, spec)
    return out


def subset_projection_handle(steps, spec: StateSpec) -> OperatorHandle:
    steps = tuple(sorted(set(int(s) for s in steps)))
    return OperatorHandle(spec.dim, lambda x: subset_projection(x, steps, spec), f"T{list(steps)}")


def decomposition_handle(n: int, spec: StateSpec) -> OperatorHandle:
    """The map rho(.)*I + sum of differences over the set digits of n."""
    steps = [-1] + [s for s, g in enumerate(binary_digits(n)) if g]
    return subset_projection_handle(steps, spec)


def identity_residual(
    x,
    n: int,
    spec: StateSpec,
    side: str = LEFT,
    mode: str = PAPER,
    ps: tuple = (2.0,),
) -> tuple[np.ndarray, list[float]]:
    """Residual of the partial-sum decomposition identity at index n.

    Left side compares w_n * P_n(x) against rho(w_n x) I plus the martingale
    differences over the set digits of n, applied to w_n x; the right side
    mirrors with multiplication from the right.  Returns the residual matrix
    and its weighted norms for each exponent in ``ps``.
    """
    x = as_matrix(x)
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    w = walsh_matrix(n, spec.m, spec.alpha, mode)
    px = partial_sum(x, n, spec.alpha, mode)
    if side == LEFT:
        lhs = w @ px
        wx = w @ x
    else:
        lhs = px @ w
        wx = x @ w
    rhs = rho_value(wx, spec) * np.eye(spec.dim, dtype=np.complex128)
    for s, g in enumerate(binary_digits(n)):
        if g:
            rhs += mart_diff(wx, s, spec)
    residual = lhs - rhs
    norms = [lp_norm(residual, LpContext(p, spec, side)) for p in ps]
    return residual, norms


def _norm_weights(spec: StateSpec | None, weights) -> np.ndarray:
    if weights is not None:
        return np.asarray(weights, dtype=np.float64)
    if spec is None:
        raise ValueError("either a state spec or an explicit weight vector is required")
    return state_diagonal(spec)


def exact_norm_p2(
    T: OperatorHandle,
    spec: StateSpec | None = None,
    side: str = LEFT,
    weights: np.ndarray | None = None,
) -> NormReport:
    """Exact operator norm of T on the weighted p=2 matrix space.

    The weighted inner product Tr(x* y A) (left) or Tr(x* A y) (right) is
    diagonalized by rescaled matrix units, so the norm is the top singular
    value of the similarity-transformed superoperator.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    w = _norm_weights(spec, weights)
    if np.any(w <= 0):
        raise ValueError("density must be positive definite")
    d = T.dim
    root = np.sqrt(w)
    scale = np.tile(root, d) if side == LEFT else np.repeat(root, d)
    mat = T.matrix()
    sim = (scale[:, None] * mat) / scale[None, :]
    return NormReport(value=schatten_norm(sim, np.inf), method=EXACT2)


def _schatten_subgradient(mat: np.ndarray, p: float) -> np.ndarray:
    """Gradient of the Schatten p-norm at mat, zero singular modes omitted."""
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros_like(mat)
    if math.isinf(p):
        return np.outer(u[:, 0], vh[0].conj())
    keep = s > s[0] * 1e-14
    s = s[keep]
    value = (s**p).sum() ** (1.0 / p)
    coeff = (s / value) ** (p - 1.0)
    return (u[:, keep] * coeff) @ vh[keep]


def estimate_norm_lp(
    T: OperatorHandle,
    ctx: LpContext | None = None,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-6,
    *,
    p: float | None = None,
    side: str | None = None,
    weights: np.ndarray | None = None,
    max_iter: int = 400,
) -> NormReport:
    """Lower-bound estimate of the weighted p-norm of T by multi-start ascent.

    Each restart draws a Gaussian matrix and climbs the ratio with normalized
    subgradient steps and 0.5-backtracking; a restart stops once five
    consecutive iterations improve by less than ``tol`` relative.  The best
    ratio found is always a valid lower bound.
    """
    if restarts < 1:
        raise ValueError(f"need at least one restart, got {restarts}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if ctx is not None:
        p = ctx.p
        side = ctx.side
        if weights is None:
            weights = state_diagonal(ctx.state)
    if p is None or side is None or weights is None:
        raise ValueError("estimate requires a context or explicit p/side/weights")
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    weights = np.asarray(weights, dtype=np.float64)

    d = T.dim
    mat = T.matrix()
    adj = mat.conj().T
    if math.isinf(p):
        wp = None
    else:
        wp = weights ** (1.0 / p)

    def norm_of(y: np.ndarray) -> float:
        return weighted_lp_norm(y, weights, p, side)

    def norm_gradient(y: np.ndarray) -> np.ndarray:
        # Euclidean gradient of the weighted Schatten norm at y.
        if math.isinf(p):
            return _schatten_subgradient(y, p)
        if side == LEFT:
            return _schatten_subgradient(y * wp[None, :], p) * wp[None, :]
        return _schatten_subgradient(y * wp[:, None], p) * wp[:, None]

    def ratio_gradient(x: np.ndarray, value: float) -> np.ndarray:
        # Gradient of ||Tx|| / ||x|| at a point with ||x|| = 1: the raw
        # numerator gradient minus its component along the constraint.
        tx = (mat @ x.ravel()).reshape(d, d)
        g_num = (adj @ norm_gradient(tx).ravel()).reshape(d, d)
        return g_num - value * norm_gradient(x)

    best_value = 0.0
    best_converged = False
    for r in range(restarts):
        rng = task_rng(seed, r)
        x = gaussian_matrix(d, rng)
        nx = norm_of(x)
        if nx == 0.0:
            continue
        x = x / nx
        value = norm_of(T(x))
        converged = False
        step = 1.0
        quiet = 0
        for _ in range(max_iter):
            g = ratio_gradient(x, value)
            gn = np.linalg.norm(g)
            if gn < 1e-300:
                converged = True
                break
            g = g / gn
            rel = 0.0
            trial = step
            while trial > 1e-12:
                cand = x + trial * g
                cn = norm_of(cand)
                if cn > 0:
                    cand = cand / cn
                    cv = norm_of(T(cand))
                    if cv > value:
                        rel = (cv - value) / max(value, 1e-300)
                        x, value = cand, cv
                        step = min(trial * 2.0, 1.0)
                        break
                trial *= 0.5
            else:
                step = 1.0
            quiet = quiet + 1 if rel < tol else 0
            if quiet >= 5:
                converged = True
                break
        if value > best_value:
            best_value = value
            best_converged = converged
    return NormReport(
        value=best_value,
        method=ESTIMATE,
        restarts=restarts,
        converged=best_converged,
        seed=seed,
    )


def basis_constant_row(
    ctx: LpContext,
    n: int,
    method: str = EXACT2,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-6,
    mode: str = PAPER,
) -> BasisConstantRow:
    """One sweep cell: the norm of the n-th partial-sum projection plus the
    norm of the matching decomposition operator rho(.)*I + set-digit
    differences, and the gap between the two."""
    spec = ctx.state
    if not 0 <= n < 4**spec.m:
        raise ValueError(f"projection index {n} out of range for level m={spec.m}")
    if method not in (EXACT2, ESTIMATE):
        raise ValueError(f"unknown method {method!r}")
    if method == EXACT2 and ctx.p != 2:
        raise ValueError("exact2 applies only at p = 2")
    proj = partial_sum_handle(n, spec.m, spec.alpha, mode)
    decomp = decomposition_handle(n, spec)
    if method == EXACT2:
        rep = exact_norm_p2(proj, spec, ctx.side)
        dep = exact_norm_p2(decomp, spec, ctx.side)
    else:
        rep = estimate_norm_lp(proj, ctx, restarts=restarts, seed=seed + 2 * n, tol=tol)
        dep = estimate_norm_lp(decomp, ctx, restarts=restarts, seed=seed + 2 * n + 1, tol=tol)
    return BasisConstantRow(
        n=n,
        p=ctx.p,
        alpha=spec.alpha,
        side=ctx.side,
        method=method,
        value=rep.value,
        converged=rep.converged,
        decomp_value=dep.value,
        decomp_converged=dep.converged,
        gap=rep.value - dep.value,
    )


def basis_constant_sweep(
    ctx: LpContext,
    n_max: int,
    method: str = EXACT2,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-6,
    mode: str = PAPER,
    workers: int = 1,
) -> list[BasisConstantRow]:
    """Norms of the partial-sum projections for n = 0..n_max.

    Cells are independent and seeded by (seed, n), so the result is the same
    for any worker count.
    """
    spec = ctx.state
    if not 0 <= n_max < 4**spec.m:
        raise ValueError(f"sweep bound {n_max} out of range for level m={spec.m}")

    def cell(n: int) -> BasisConstantRow:
        return basis_constant_row(ctx, n, method, restarts, seed, tol, mode)

    indices = range(n_max + 1)
    if workers <= 1:
        return [cell(n) for n in indices]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(cell, indices))


def _sign_patterns(count: int) -> np.ndarray:
    patterns = np.empty((1 << count, count), dtype=np.float64)
    for k in range(1 << count):
        for s in range(count):
            patterns[k, s] = -1.0 if (k >> s) & 1 else 1.0
    return patterns


def unconditionality_constant(
    ctx: LpContext,
    mode: str = "exhaustive",
    trials: int = 1024,
    seed: int = 0,
    pattern_samples: int = 256,
    workers: int = 1,
) -> SignSweepReport:
    """Largest ratio ||rho(x)I + sum eps_s D_s x|| / ||x|| over sign patterns.

    The probe set is every Walsh matrix, every matrix unit, and ``trials``
    seeded Gaussian draws; draw k depends only on (seed, k), so enlarging
    ``trials`` refines the probe set monotonically.
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    spec = ctx.state
    steps = 2 * spec.m
    if mode == "exhaustive":
        if steps > 12:
            raise ValueError("exhaustive sign sweep requires 2m <= 12")
        patterns = _sign_patterns(steps)
    else:
        rng = task_rng(seed, 0xFACE)
        patterns = np.where(rng.random((pattern_samples, steps)) < 0.5, -1.0, 1.0)
        patterns[0, :] = 1.0  # keep the all-plus pattern in the sample

    d = spec.dim
    probes = [walsh_matrix(n, spec.m) for n in range(4**spec.m)]
    for r in range(d):
        for c in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[r, c] = 1.0
            probes.append(unit)
    for k in range(trials):
        probes.append(gaussian_matrix(d, task_rng(seed, k)))
    xs = np.stack(probes)

    weights = state_diagonal(spec)
    base_norms = batched_weighted_lp_norm(xs, weights, ctx.p, ctx.side)
    keep = base_norms > 1e-12
    xs, base_norms = xs[keep], base_norms[keep]

    mean_part = np.einsum("kii,i->k", xs, weights)[:, None, None] * np.eye(d)
    diff_parts = np.stack([np.stack([mart_diff(x, s, spec) for x in xs]) for s in range(steps)])

    def chunk_maxima(block: np.ndarray) -> np.ndarray:
        combined = mean_part[None, :, :, :] + np.einsum("ks,spij->kpij", block, diff_parts)
        norms = batched_weighted_lp_norm(
            combined.reshape(-1, d, d), weights, ctx.p, ctx.side
        ).reshape(block.shape[0], -1)
        return (norms / base_norms[None, :]).max(axis=1)

    chunk = max(1, (1 << 22) // max(1, xs.shape[0] * d * d))
    blocks = [patterns[start : start + chunk] for start in range(0, patterns.shape[0], chunk)]
    if workers <= 1 or len(blocks) == 1:
        per_block = [chunk_maxima(b) for b in blocks]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(chunk_maxima, blocks))

    row_max = np.concatenate(per_block)
    pattern_maxima: dict | None = None
    if mode == "exhaustive":
        pattern_maxima = {
            tuple(int(v) for v in pat): float(row_max[j])
            for j, pat in enumerate(patterns)
        }
    max_ratio = float(row_max.max())
    return SignSweepReport(
        p=ctx.p,
        alpha=spec.alpha,
        m=spec.m,
        trials=trials,
        seed=seed,
        max_ratio=max_ratio,
        pattern_maxima=pattern_maxima,
    )
