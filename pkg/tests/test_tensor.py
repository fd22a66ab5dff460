import numpy as np
import pytest

from helpers import random_matrix
from walshlab.linalg import dagger
from walshlab.states import StateSpec
from walshlab.tensor import (
    TensorContext,
    double_walsh,
    factor_expectation,
    factor_projection,
    fsum_partial,
    joint_coefficients,
    max_shell_index,
    second_cond_expect,
    second_mart_diff,
    shell_decomposition_check,
    shell_index,
    shell_pair,
    tensor_identity_residual,
    tensor_partial_sum,
)
from walshlab.walsh import walsh_matrix

W = walsh_matrix
CTX11 = TensorContext(StateSpec(0.3, 1), StateSpec(0.3, 1))


def test_shell_index_examples():
    assert shell_index(0, 0) == 0
    assert shell_index(1, 1) == 2
    assert shell_index(1, 0) == 3
    assert shell_index(2, 0) == 8


def test_shell_pair_examples():
    assert shell_pair(0) == (0, 0)
    assert shell_pair(5) == (1, 2)
    assert shell_pair(7) == (2, 1)


def test_shell_bijection_exhaustive():
    for n in range(10_000):
        assert shell_index(*shell_pair(n)) == n
    for i in range(100):
        for j in range(100):
            assert shell_pair(shell_index(i, j)) == (i, j)


def test_shell_interval_structure():
    for l in range(31):
        positions = {shell_index(i, l) for i in range(l + 1)}
        positions |= {shell_index(l, j) for j in range(l)}
        assert positions == set(range(l * l, (l + 1) * (l + 1)))
    square = {shell_index(i, j) for i in range(30) for j in range(30)}
    assert square == set(range(900))


def test_double_walsh_examples():
    assert np.array_equal(double_walsh(0, CTX11), np.eye(4))
    assert np.array_equal(double_walsh(3, CTX11), np.kron(np.diag([1, -1]), np.eye(2)))
    assert np.array_equal(double_walsh(1, CTX11), np.kron(np.eye(2), np.diag([1, -1])))
    with pytest.raises(ValueError):
        double_walsh(16, CTX11)


def test_double_walsh_orthonormal_and_unitary():
    dim = 4
    mats = [double_walsh(n, CTX11) for n in range(16)]
    gram = np.array(
        [[np.trace(dagger(a) @ b) / dim for b in mats] for a in mats]
    )
    assert np.max(np.abs(gram - np.eye(16))) < 1e-12
    for z in mats:
        assert np.max(np.abs(z @ dagger(z) - np.eye(dim))) < 1e-12


def test_factor_expectation_examples():
    x = np.kron(W(1, 1), np.eye(2))
    assert np.allclose(factor_expectation(x, "first", CTX11), x)
    y = np.kron(W(1, 1), W(2, 1))
    assert np.max(np.abs(factor_expectation(y, "first", CTX11))) < 1e-13
    z = np.kron(W(1, 1), W(1, 1))
    assert np.allclose(factor_expectation(z, "first", CTX11), -0.4 * x)
    with pytest.raises(ValueError):
        factor_expectation(np.eye(2), "first", CTX11)


def test_factor_expectation_is_state_preserving_idempotent():
    weights = CTX11.joint_weights()
    for seed in range(3):
        x = random_matrix(2, 500 + seed)
        for side in ("first", "second"):
            e = factor_expectation(x, side, CTX11)
            assert np.max(np.abs(factor_expectation(e, side, CTX11) - e)) < 1e-12
            assert abs(np.diag(e) @ weights - np.diag(x) @ weights) < 1e-12


def test_factor_projection_examples():
    x = np.kron(W(1, 1), W(2, 1))
    assert np.allclose(factor_projection(x, "second", 2, CTX11), x)
    assert np.max(np.abs(factor_projection(x, "second", 1, CTX11))) < 1e-13
    ctx12 = TensorContext(StateSpec(0.3, 1), StateSpec(0.3, 2))
    y = np.kron(W(1, 1), W(5, 2))
    out = factor_projection(y, "second", 4, ctx12)
    assert np.allclose(out, -0.4 * np.kron(W(1, 1), W(4, 2)))
    with pytest.raises(ValueError):
        factor_projection(x, "second", 4, CTX11)


def test_factor_projection_idempotent_on_grid():
    for a1 in (0.5, 0.3):
        for a2 in (0.5, 0.3):
            ctx = TensorContext(StateSpec(a1, 1), StateSpec(a2, 1))
            x = random_matrix(2, 600)
            for side in ("first", "second"):
                for j in range(4):
                    pj = factor_projection(x, side, j, ctx)
                    pj2 = factor_projection(pj, side, j, ctx)
                    assert np.max(np.abs(pj2 - pj)) < 1e-11


def test_factor_projection_resolution_tracial():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.5, 1))
    x = random_matrix(2, 601)
    total = sum(factor_projection(x, "second", j, ctx) for j in range(4))
    assert np.max(np.abs(total - x)) < 1e-11


def test_tensor_partial_sum_examples():
    x = double_walsh(0, CTX11) + 5 * double_walsh(3, CTX11)
    assert np.allclose(tensor_partial_sum(x, 2, CTX11), double_walsh(0, CTX11), atol=1e-13)
    z2 = double_walsh(2, CTX11)
    assert np.allclose(tensor_partial_sum(z2, 2, CTX11), z2, atol=1e-13)
    y = random_matrix(2, 5)
    assert np.allclose(tensor_partial_sum(y, max_shell_index(CTX11), CTX11), y, atol=1e-12)
    with pytest.raises(ValueError):
        tensor_partial_sum(y, max_shell_index(CTX11) + 1, CTX11)


def test_tensor_partial_sum_full_reconstruction_unequal_levels():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.3, 2))
    x = random_matrix(3, 6)
    assert np.allclose(tensor_partial_sum(x, max_shell_index(ctx), ctx), x, atol=1e-12)


def test_joint_coefficients_index_layout():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.3, 2))
    x = np.kron(W(2, 1), W(7, 2))
    coeffs = joint_coefficients(x, ctx)
    expected = np.zeros((16, 4))
    expected[7, 2] = 1.0
    assert np.allclose(coeffs, expected, atol=1e-13)


def test_shell_decomposition_square_case():
    x = random_matrix(2, 31)
    rep = shell_decomposition_check(x, 3, CTX11)  # n = l**2 - 1 with l = 2 next
    # n = 3 sits at the end of shell 1, so positions 1..3 form the remainder
    assert rep.residual < 1e-12
    full_square = shell_decomposition_check(x, 8, CTX11)
    assert full_square.residual < 1e-12


def test_shell_decomposition_z4_case():
    z4 = double_walsh(4, CTX11)
    rep = shell_decomposition_check(z4, 4, CTX11)
    assert rep.residual < 1e-12
    assert rep.square_norms[0] < 1e-12
    assert abs(rep.remainder_norms[0] - 1) < 1e-12


def test_shell_decomposition_random_all_positions():
    for seed in range(3):
        x = random_matrix(2, 700 + seed)
        for n in range(16):
            rep = shell_decomposition_check(x, n, CTX11)
            assert rep.residual < 1e-11, (seed, n)


def test_second_block_filtration_consistency():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.3, 2))
    x = random_matrix(3, 800)
    fe = factor_expectation(x, "first", ctx)
    assert np.allclose(second_cond_expect(x, -1, ctx), fe, atol=1e-12)
    assert np.allclose(second_cond_expect(x, 3, ctx), x, atol=1e-13)
    total = fe + sum(second_mart_diff(x, s, ctx) for s in range(4))
    assert np.max(np.abs(total - x)) < 1e-11


def test_tensor_identity_tracial_exhaustive():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.5, 2))
    worst = 0.0
    for i in range(4):
        for j in range(16):
            x = np.kron(W(i, 1), W(j, 2))
            for n in range(16):
                rep = tensor_identity_residual(x, n, ctx)
                worst = max(worst, rep.residual_norms[0])
                assert rep.fsum_gap_norms[0] < 1e-11
                assert rep.fsum_idempotency_residual < 1e-11
    assert worst < 1e-11


def test_tensor_identity_biased_base_case():
    xb = np.kron(np.eye(2), W(1, 1))
    rep = tensor_identity_residual(xb, 0, CTX11)
    assert abs(rep.residual_norms[0] - 0.4) < 1e-12
    assert abs(rep.fsum_gap_norms[0] - 0.4) < 1e-12
    # the projection-sum value itself: rho'(w1) * identity
    fs = fsum_partial(xb, 0, CTX11, "second")
    assert np.allclose(fs, -0.4 * np.eye(4), atol=1e-13)


def test_tensor_identity_fixed_point_case():
    ctx = TensorContext(StateSpec(0.3, 1), StateSpec(0.5, 2))
    n = 3
    x = sum((k + 1) * np.kron(random_matrix(1, 900 + k), W(k, 2)) for k in range(n + 1))
    rep = tensor_identity_residual(x, n, ctx)
    assert rep.residual_norms[0] < 1e-12
    with pytest.raises(ValueError):
        tensor_identity_residual(x, 16, ctx)


def test_fsum_idempotency_residual_is_reported_when_biased():
    xb = random_matrix(2, 950)
    rep = tensor_identity_residual(xb, 1, CTX11)
    fs = fsum_partial(xb, 1, CTX11, "second")
    fs2 = fsum_partial(fs, 1, CTX11, "second")
    assert abs(rep.fsum_idempotency_residual - np.max(np.abs(fs2 - fs))) < 1e-13
