"""Shared test utilities: seeded random matrices and small oracles."""

import numpy as np

from walshlab.linalg import dagger, gaussian_matrix, task_rng
from walshlab.walsh import walsh_matrix


def random_matrix(m: int, seed: int) -> np.ndarray:
    return gaussian_matrix(1 << m, task_rng(seed))


def random_hermitian(m: int, seed: int) -> np.ndarray:
    x = random_matrix(m, seed)
    return (x + dagger(x)) / 2


def random_psd(m: int, seed: int, floor: float = 0.0) -> np.ndarray:
    x = random_matrix(m, seed)
    return x @ dagger(x) + floor * np.eye(1 << m)


def matrix_units(dim: int) -> list[np.ndarray]:
    units = []
    for r in range(dim):
        for c in range(dim):
            u = np.zeros((dim, dim), dtype=np.complex128)
            u[r, c] = 1.0
            units.append(u)
    return units


def naive_gram_coefficients(x: np.ndarray, m: int) -> np.ndarray:
    """Independent transform oracle: normalized traces against each basis matrix."""
    out = np.empty(4**m, dtype=np.complex128)
    for n in range(4**m):
        w = walsh_matrix(n, m)
        out[n] = np.trace(dagger(w) @ x) / (1 << m)
    return out
