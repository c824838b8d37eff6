"""Shared seeded samplers for the test suite."""

import numpy as np
import pytest

from thermowork import BipartiteState, DensityMatrix


def random_hermitian(dim: int, seed: int, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + g.conj().T) / 2.0


def random_unitary(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_pure_bipartite(dim_a: int, dim_b: int, seed: int) -> BipartiteState:
    rng = np.random.default_rng(seed)
    ket = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
    return BipartiteState.pure(ket, dim_a, dim_b)


def product_state(dim_a: int, dim_b: int, seed: int) -> BipartiteState:
    from thermowork import random_density
    from thermowork.qmat import kron

    ra = random_density(dim_a, dim_a, seed)
    rb = random_density(dim_b, dim_b, seed + 7919)
    return BipartiteState.from_matrix(kron(ra.mat, rb.mat), dim_a, dim_b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def assert_close(actual, expected, tol, what=""):
    gap = abs(actual - expected)
    assert gap <= tol, f"{what}: |{actual!r} - {expected!r}| = {gap:.3e} > {tol:.1e}"


def cc_state() -> BipartiteState:
    """Classically correlated (|00><00| + |11><11|) / 2."""
    return BipartiteState.from_matrix(np.diag([0.5, 0.0, 0.0, 0.5]), 2, 2)


def pauli_x() -> np.ndarray:
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def ket(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[i] = 1.0
    return v


def dm(mat) -> DensityMatrix:
    return DensityMatrix(np.asarray(mat, dtype=np.complex128))
