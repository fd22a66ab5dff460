"""Batch command-line interface: generate objects, run verification suites,
sweep norms, and emit CSV/JSON artifacts with reproducibility manifests.

Output policy: CSV bodies are pure functions of argv (and seed) so reruns
are byte-identical under any worker count; run metadata lives in a sidecar
``<out>.manifest.json``.  All floats print with 17 significant digits.
Verification rows are either assertions (can fail the run) or residual
reports (informational only).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .linalg import (
    dagger,
    gaussian_matrix,
    gns_inner,
    level_of_dim,
    matrix_from_json,
    matrix_to_json,
    task_rng,
)
from .states import (
    LpContext,
    StateSpec,
    cond_expect,
    lp_norm,
    mart_diff,
    modular_flow,
    rho_value,
    state_density,
)
from .schauder import (
    ESTIMATE,
    EXACT2,
    OperatorHandle,
    basis_constant_sweep,
    estimate_norm_lp,
    exact_norm_p2,
    identity_residual,
    unconditionality_constant,
)
from .classical import classical_norm_estimate, classical_norm_exact2
from .tensor import TensorContext, max_shell_index, shell_pair, tensor_partial_sum
from .walsh import (
    MODES,
    PAPER,
    block_support,
    coefficients_to_json,
    gram_matrix,
    predicted_rademacher_sign,
    walsh_coefficients,
    walsh_coefficients_naive,
    walsh_matrix,
    walsh_product_index,
    walsh_synthesize,
)

BASIS_HEADER = "n,p,alpha,side,method,value,converged"
SIGN_HEADER = "p,alpha,m,trials,seed,max_ratio"
TENSOR_HEADER = "n,i,j,alpha,alpha2,p,value"


def fmt(x) -> str:
    """17-significant-digit rendering for every float in an artifact."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_manifest(out_path: str, argv: list[str], params: dict, seed) -> None:
    manifest = {
        "argv": list(argv),
        "seed": seed,
        "parameters": params,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [out_path],
    }
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def write_csv(out_path: str, header: str, rows: list[list]) -> None:
    body = header + "\n" + "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
    with open(out_path, "w", newline="") as fh:
        fh.write(body)


@dataclass
class CheckRow:
    name: str
    value: float
    threshold: float | None  # None marks a residual report, never a failure
    passed: bool = True

    @property
    def assertable(self) -> bool:
        return self.threshold is not None


def _print_checks(rows: list[CheckRow]) -> bool:
    ok = True
    for row in rows:
        if row.assertable:
            status = "PASS" if row.passed else "FAIL"
            ok = ok and row.passed
            print(f"{status:6s} {row.name:44s} value={fmt(row.value)} tol={fmt(row.threshold)}")
        else:
            print(f"REPORT {row.name:44s} value={fmt(row.value)}")
    return ok


def _assert_row(name: str, value: float, tol: float) -> CheckRow:
    return CheckRow(name=name, value=float(value), threshold=tol, passed=float(value) <= tol)


def _report_row(name: str, value: float) -> CheckRow:
    return CheckRow(name=name, value=float(value), threshold=None)


def _pick(tol, default):
    return default if tol is None else tol


def _suite_walsh(m: int, alpha: float, tol: float | None) -> list[CheckRow]:
    rows = []
    count = 4**m
    mats = [walsh_matrix(n, m) for n in range(count)]
    eye = np.eye(1 << m)
    rows.append(
        _assert_row(
            "unitarity",
            max(np.max(np.abs(w @ dagger(w) - eye)) for w in mats),
            _pick(tol, 1e-12),
        )
    )
    worst = 0.0
    for n in range(count):
        for i in range(count):
            idx, sign = walsh_product_index(n, i)
            worst = max(worst, np.max(np.abs(mats[n] @ mats[i] - sign * mats[idx])))
    rows.append(_assert_row("product-law", worst, _pick(tol, 1e-12)))
    worst = 0.0
    for k in range(2 * m):
        r = mats[1 << k]
        for n in range(1 << k, min(1 << (k + 1), count)):
            eps = predicted_rademacher_sign(k, n)
            worst = max(worst, np.max(np.abs(r @ mats[n] - eps * mats[n - (1 << k)])))
    rows.append(_assert_row("epsilon-rule", worst, _pick(tol, 1e-12)))
    rows.append(_assert_row("orthonormality", np.max(np.abs(gram_matrix(m) - np.eye(count))), _pick(tol, 1e-12)))
    worst_rt = 0.0
    worst_naive = 0.0
    for k in range(10):
        x = gaussian_matrix(1 << m, task_rng(101, k))
        c = walsh_coefficients(x)
        worst_rt = max(worst_rt, np.max(np.abs(walsh_synthesize(c, m) - x)))
        worst_naive = max(worst_naive, np.max(np.abs(c - walsh_coefficients_naive(x))))
    rows.append(_assert_row("transform-round-trip", worst_rt, _pick(tol, 1e-12)))
    rows.append(_assert_row("fast-vs-naive", worst_naive, _pick(tol, 1e-10)))
    return rows


def _suite_expectations(m: int, alpha: float, tol: float | None) -> list[CheckRow]:
    spec = StateSpec(alpha, m)
    steps = range(-1, 2 * m)
    draws = [gaussian_matrix(spec.dim, task_rng(202, k)) for k in range(20)]
    a_mat = state_density(spec)

    idem = max(
        np.max(np.abs(cond_expect(cond_expect(x, s, spec), s, spec) - cond_expect(x, s, spec)))
        for x in draws[:5]
        for s in steps
    )
    tower = max(
        np.max(np.abs(cond_expect(cond_expect(x, s, spec), t, spec) - cond_expect(x, min(s, t), spec)))
        for x in draws[:3]
        for s in steps
        for t in steps
    )
    preserve = max(
        abs(rho_value(cond_expect(x, s, spec), spec) - rho_value(x, spec))
        for x in draws[:5]
        for s in steps
    )
    module = 0.0
    for k, x in enumerate(draws[:3]):
        for s in range(0, 2 * m):
            a = cond_expect(gaussian_matrix(spec.dim, task_rng(203, k, s)), s, spec)
            b = cond_expect(gaussian_matrix(spec.dim, task_rng(204, k, s)), s, spec)
            module = max(
                module,
                np.max(np.abs(cond_expect(a @ x @ b, s, spec) - a @ cond_expect(x, s, spec) @ b)),
            )
    modular = 0.0
    for k, x in enumerate(draws[:3]):
        for s in steps:
            y = modular_flow(cond_expect(x, s, spec), 0.7, spec)
            modular = max(modular, np.max(np.abs(cond_expect(y, s, spec) - y)))
    complete = max(
        np.max(
            np.abs(
                rho_value(x, spec) * np.eye(spec.dim)
                + sum(mart_diff(x, s, spec) for s in range(2 * m))
                - x
            )
        )
        for x in draws[:5]
    )
    gns = 0.0
    for x in draws[:2]:
        for y in draws[2:4]:
            for s in range(2 * m):
                for t in range(2 * m):
                    if s != t:
                        gns = max(
                            gns,
                            abs(gns_inner(mart_diff(x, s, spec), mart_diff(y, t, spec), a_mat)),
                        )
    contract = 0.0
    for p in (1.0, 1.5, 2.0, 3.0, float("inf")):
        for side in ("left", "right"):
            ctx = LpContext(p, spec, side)
            for k in range(200):
                x = gaussian_matrix(spec.dim, task_rng(205, k))
                nx = lp_norm(x, ctx)
                for s in steps:
                    contract = max(contract, lp_norm(cond_expect(x, s, spec), ctx) / nx - 1.0)
    iso = 0.0
    for k, x in enumerate(draws[:3]):
        for n in range(4**m):
            w = walsh_matrix(n, m)
            for p in (1.0, 2.0, 3.0):
                left = LpContext(p, spec, "left")
                right = LpContext(p, spec, "right")
                iso = max(iso, abs(lp_norm(w @ x, left) - lp_norm(x, left)))
                iso = max(iso, abs(lp_norm(x @ w, right) - lp_norm(x, right)))
    return [
        _assert_row("idempotence", idem, _pick(tol, 1e-11)),
        _assert_row("tower-law", tower, _pick(tol, 1e-11)),
        _assert_row("state-preservation", preserve, _pick(tol, 1e-11)),
        _assert_row("module-property", module, _pick(tol, 1e-10)),
        _assert_row("modular-invariance", modular, _pick(tol, 1e-10)),
        _assert_row("completeness", complete, _pick(tol, 1e-11)),
        _assert_row("gns-orthogonality", gns, _pick(tol, 1e-10)),
        _assert_row("p-contractivity", contract, _pick(tol, 1e-9)),
        _assert_row("multiplication-isometry", iso, _pick(tol, 1e-10)),
    ]


def _suite_identity(m: int, alpha: float, tol: float | None) -> list[CheckRow]:
    spec = StateSpec(alpha, m)
    count = 4**m
    worst = 0.0
    for j in range(count):
        x = walsh_matrix(j, m)
        for n in range(count - 1):
            for side in ("left", "right"):
                _, norms = identity_residual(x, n, spec, side)
                worst = max(worst, norms[0])
    if alpha == 0.5:
        return [_assert_row("decomposition-identity(exhaustive)", worst, _pick(tol, 1e-12))]
    rows = [_report_row("decomposition-identity(max-residual)", worst)]
    _, norms = identity_residual(walsh_matrix(1, m), 0, spec, "left")
    rows.append(_report_row("residual[x=w1,n=0]", norms[0]))
    if m >= 2:
        _, norms = identity_residual(walsh_matrix(4, m), 1, spec, "left")
        rows.append(_report_row("residual[x=w4,n=1]", norms[0]))
    return rows


def _suite_blocks(m: int, alpha: float, tol: float | None) -> list[CheckRow]:
    spec = StateSpec(alpha, m)
    rows = []
    above = 0.0
    odd_outside = 0.0
    even_outside = 0.0
    zero_leak = 0.0
    below_leak = 0.0
    for k in range(10):
        x = gaussian_matrix(spec.dim, task_rng(206, k))
        for s in range(2 * m):
            c = walsh_coefficients(mart_diff(x, s, spec))
            lo, hi = block_support(s)
            above = max(above, np.max(np.abs(c[hi:])) if hi < c.size else 0.0)
            outside = max(
                np.max(np.abs(c[:lo])),
                np.max(np.abs(c[hi:])) if hi < c.size else 0.0,
            )
            if s % 2 == 1:
                odd_outside = max(odd_outside, outside)
            else:
                even_outside = max(even_outside, outside)
                zero_leak = max(zero_leak, abs(c[0]))
                if lo > 1:
                    below_leak = max(below_leak, np.max(np.abs(c[1:lo])))
    rows.append(_assert_row("no-leak-above-block", above, _pick(tol, 1e-10)))
    rows.append(_assert_row("odd-step-confined", odd_outside, _pick(tol, 1e-10)))
    if alpha == 0.5:
        rows.append(_assert_row("even-step-confined", even_outside, _pick(tol, 1e-10)))
    else:
        rows.append(_report_row("even-step-leak(outside)", even_outside))
        rows.append(_report_row("even-step-leak(coefficient-0)", zero_leak))
        rows.append(_report_row("even-step-leak(below-block)", below_leak))
    return rows


SUITES = {
    "walsh": _suite_walsh,
    "expectations": _suite_expectations,
    "identity": _suite_identity,
    "blocks": _suite_blocks,
}


def _validate_flags(args) -> None:
    """Range checks with the offending flag named, before any computation."""
    checks = (
        ("alpha", lambda v: 0.0 < v <= 0.5, "--alpha must lie in (0, 1/2]"),
        ("alpha2", lambda v: 0.0 < v <= 0.5, "--alpha2 must lie in (0, 1/2]"),
        ("level", lambda v: 1 <= v <= 8, "--level must lie in [1, 8]"),
        ("level2", lambda v: 1 <= v <= 8, "--level2 must lie in [1, 8]"),
        ("p", lambda v: v >= 1, "--p must satisfy p >= 1"),
        ("trials", lambda v: v > 0, "--trials must be positive"),
        ("restarts", lambda v: v >= 1, "--restarts must be at least 1"),
        ("workers", lambda v: v >= 1, "--workers must be at least 1"),
        ("tol", lambda v: v > 0, "--tol must be positive"),
        ("index", lambda v: v >= 0, "--index must be non-negative"),
        ("nmax", lambda v: v >= 0, "--nmax must be non-negative"),
    )
    for name, good, message in checks:
        value = getattr(args, name, None)
        if value is not None and not good(value):
            raise ValueError(f"{message} (got {value})")


def _add_common(parser, *, level=True, alpha=True):
    if level:
        parser.add_argument("--level", type=int, required=True, help="tensor level m")
    if alpha:
        parser.add_argument("--alpha", type=float, required=True, help="bias in (0, 1/2]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walshlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-walsh", help="emit one Walsh matrix as JSON")
    g.add_argument("--index", type=int, required=True)
    g.add_argument("--level", type=int, required=True)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--mode", choices=MODES, default=PAPER)
    g.add_argument("--out")

    c = sub.add_parser("coeffs", help="expansion coefficients of a matrix JSON file")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out")

    n = sub.add_parser("norm", help="weighted norm of a matrix JSON file")
    n.add_argument("--in", dest="infile", required=True)
    n.add_argument("--p", type=float, required=True)
    n.add_argument("--alpha", type=float, required=True)
    n.add_argument("--side", choices=("left", "right"), default="left")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    _add_common(v)
    v.add_argument("--tol", type=float, default=None)

    b = sub.add_parser("basis-constants", help="partial-sum projection norms")
    _add_common(b)
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--method", choices=(EXACT2, ESTIMATE), required=True)
    b.add_argument("--restarts", type=int, default=32)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--side", choices=("left", "right"), default="left")
    b.add_argument("--nmax", type=int, default=None)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", required=True)

    u = sub.add_parser("unconditionality", help="sign-sweep ratio experiment")
    _add_common(u)
    u.add_argument("--p", type=float, required=True)
    u.add_argument("--mode", choices=("exhaustive", "sampled"), required=True)
    u.add_argument("--trials", type=int, required=True)
    u.add_argument("--seed", type=int, required=True)
    u.add_argument("--workers", type=int, default=1)
    u.add_argument("--out", required=True)

    t = sub.add_parser("tensor-sweep", help="shell partial-sum norms on a two-block space")
    t.add_argument("--level", type=int, required=True)
    t.add_argument("--level2", type=int, required=True)
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--alpha2", type=float, required=True)
    t.add_argument("--p", type=float, required=True)
    t.add_argument("--nmax", type=int, required=True)
    t.add_argument("--restarts", type=int, default=32)
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", required=True)

    k = sub.add_parser("classical", help="classical partial-sum norms on dyadic steps")
    _add_common(k)
    k.add_argument("--p", type=float, required=True)
    k.add_argument("--nmax", type=int, required=True)
    k.add_argument("--restarts", type=int, default=32)
    k.add_argument("--seed", type=int, default=None)
    k.add_argument("--workers", type=int, default=1)
    k.add_argument("--out", required=True)
    return parser


def _parallel_rows(cells, worker, workers: int):
    if workers <= 1:
        return [worker(c) for c in cells]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, cells))


def _cmd_gen_walsh(args, argv) -> int:
    w = walsh_matrix(args.index, args.level, args.alpha, args.mode)
    payload = json.dumps(matrix_to_json(w))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
        write_manifest(
            args.out,
            argv,
            {"index": args.index, "level": args.level, "alpha": args.alpha, "mode": args.mode},
            None,
        )
    else:
        print(payload)
    return 0


def _cmd_coeffs(args, argv) -> int:
    with open(args.infile) as fh:
        x = matrix_from_json(json.load(fh))
    m = level_of_dim(x.shape[0])
    payload = json.dumps(coefficients_to_json(walsh_coefficients(x), m))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
        write_manifest(args.out, argv, {"in": args.infile}, None)
    else:
        print(payload)
    return 0


def _cmd_norm(args, argv) -> int:
    with open(args.infile) as fh:
        x = matrix_from_json(json.load(fh))
    m = level_of_dim(x.shape[0])
    value = lp_norm(x, LpContext(args.p, StateSpec(args.alpha, m), args.side))
    print(fmt(value))
    return 0


def _cmd_verify(args, argv) -> int:
    rows = SUITES[args.suite](args.level, args.alpha, args.tol)
    ok = _print_checks(rows)
    return 0 if ok else 1


def _cmd_basis_constants(args, argv) -> int:
    spec = StateSpec(args.alpha, args.level)
    ctx = LpContext(args.p, spec, args.side)
    if args.method == ESTIMATE and args.seed is None:
        raise ValueError("--seed is required for the stochastic estimate method")
    seed = args.seed if args.seed is not None else 0
    n_max = args.nmax if args.nmax is not None else 4**args.level - 1
    rows = basis_constant_sweep(
        ctx,
        n_max,
        method=args.method,
        restarts=args.restarts,
        seed=seed,
        workers=args.workers,
    )
    rows.sort(key=lambda r: (r.n, r.p, r.alpha))
    write_csv(
        args.out,
        BASIS_HEADER,
        [[r.n, r.p, r.alpha, r.side, r.method, r.value, r.converged] for r in rows],
    )
    write_manifest(
        args.out,
        argv,
        {
            "level": args.level,
            "alpha": args.alpha,
            "p": args.p,
            "method": args.method,
            "side": args.side,
            "restarts": args.restarts,
            "nmax": n_max,
            "workers": args.workers,
        },
        args.seed,
    )
    for r in rows:
        print(
            f"n={r.n} value={fmt(r.value)} decomposition={fmt(r.decomp_value)} gap={fmt(r.gap)}"
        )
    return 0


def _cmd_unconditionality(args, argv) -> int:
    spec = StateSpec(args.alpha, args.level)
    report = unconditionality_constant(
        LpContext(args.p, spec),
        mode=args.mode,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
    )
    write_csv(
        args.out,
        SIGN_HEADER,
        [[report.p, report.alpha, report.m, report.trials, report.seed, report.max_ratio]],
    )
    write_manifest(
        args.out,
        argv,
        {
            "level": args.level,
            "alpha": args.alpha,
            "p": args.p,
            "mode": args.mode,
            "trials": args.trials,
            "workers": args.workers,
        },
        args.seed,
    )
    print(f"max_ratio={fmt(report.max_ratio)}")
    return 0


def _cmd_tensor_sweep(args, argv) -> int:
    ctx = TensorContext(StateSpec(args.alpha, args.level), StateSpec(args.alpha2, args.level2))
    if not 0 <= args.nmax <= max_shell_index(ctx):
        raise ValueError(f"--nmax {args.nmax} out of range (max {max_shell_index(ctx)})")
    if args.p != 2 and args.seed is None:
        raise ValueError("--seed is required for the stochastic estimate at p != 2")
    seed = args.seed if args.seed is not None else 0
    weights = ctx.joint_weights()

    def cell(n: int):
        handle = OperatorHandle(ctx.dim, lambda x: tensor_partial_sum(x, n, ctx), f"Q[{n}]")
        if args.p == 2:
            value = exact_norm_p2(handle, weights=weights).value
        else:
            value = estimate_norm_lp(
                handle,
                restarts=args.restarts,
                seed=seed + n,
                p=args.p,
                side="left",
                weights=weights,
            ).value
        i, j = shell_pair(n)
        return [n, i, j, args.alpha, args.alpha2, args.p, value]

    rows = _parallel_rows(range(args.nmax + 1), cell, args.workers)
    rows.sort(key=lambda r: r[0])
    write_csv(args.out, TENSOR_HEADER, rows)
    write_manifest(
        args.out,
        argv,
        {
            "level": args.level,
            "level2": args.level2,
            "alpha": args.alpha,
            "alpha2": args.alpha2,
            "p": args.p,
            "nmax": args.nmax,
            "restarts": args.restarts,
            "workers": args.workers,
        },
        args.seed,
    )
    return 0


def _cmd_classical(args, argv) -> int:
    if not 0 <= args.nmax < (1 << args.level):
        raise ValueError(f"--nmax {args.nmax} out of range for --level {args.level}")
    if args.p != 2 and args.seed is None:
        raise ValueError("--seed is required for the stochastic estimate at p != 2")
    seed = args.seed if args.seed is not None else 0

    def cell(n: int):
        if args.p == 2:
            value, converged, method = classical_norm_exact2(n, args.level, args.alpha), True, EXACT2
        else:
            value, converged = classical_norm_estimate(
                n, args.level, args.alpha, args.p, restarts=args.restarts, seed=seed + n
            )
            method = ESTIMATE
        return [n, args.p, args.alpha, "left", method, value, converged]

    rows = _parallel_rows(range(args.nmax + 1), cell, args.workers)
    rows.sort(key=lambda r: r[0])
    write_csv(args.out, BASIS_HEADER, rows)
    write_manifest(
        args.out,
        argv,
        {
            "level": args.level,
            "alpha": args.alpha,
            "p": args.p,
            "nmax": args.nmax,
            "restarts": args.restarts,
            "workers": args.workers,
        },
        args.seed,
    )
    return 0


COMMANDS = {
    "gen-walsh": _cmd_gen_walsh,
    "coeffs": _cmd_coeffs,
    "norm": _cmd_norm,
    "verify": _cmd_verify,
    "basis-constants": _cmd_basis_constants,
    "unconditionality": _cmd_unconditionality,
    "tensor-sweep": _cmd_tensor_sweep,
    "classical": _cmd_classical,
}


def run_command(argv: list[str]) -> int:
    """Dispatch one command line; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate_flags(args)
        return COMMANDS[args.command](args, argv)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
