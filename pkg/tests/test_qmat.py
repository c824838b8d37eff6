import numpy as np
import pytest

from thermowork import qmat
from thermowork.errors import DimensionMismatch, NegativeEigenvalue, NonHermitian, NonSquare

from conftest import assert_close, random_hermitian


class TestEigh:
    def test_identity(self):
        dec = qmat.eigh(np.eye(2))
        assert np.allclose(dec.eigenvalues, [1.0, 1.0])
        assert np.allclose(dec.eigenvectors @ dec.eigenvectors.conj().T, np.eye(2))

    def test_diagonal_sorted_ascending(self):
        dec = qmat.eigh(np.diag([3.0, -1.0]))
        assert np.allclose(dec.eigenvalues, [-1.0, 3.0])

    def test_pauli_x(self):
        # characteristic polynomial of [[0,1],[1,0]] is l^2 - 1
        dec = qmat.eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-12)

    def test_non_square(self):
        with pytest.raises(NonSquare):
            qmat.eigh(np.ones((2, 3)))

    def test_non_hermitian(self):
        with pytest.raises(NonHermitian):
            qmat.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize("dim", [2, 5, 9])
    def test_reconstruction(self, dim, seed):
        m = random_hermitian(dim, seed, scale=3.0)
        dec = qmat.eigh(m)
        rebuilt = (dec.eigenvectors * dec.eigenvalues) @ dec.eigenvectors.conj().T
        fro = np.linalg.norm(m)
        assert np.linalg.norm(rebuilt - m) <= 1e-9 * max(1.0, fro)
        gram = dec.eigenvectors.conj().T @ dec.eigenvectors
        assert np.abs(gram - np.eye(dim)).max() <= 1e-10
        assert np.all(np.diff(dec.eigenvalues) >= 0)


class TestKron:
    def test_identities(self):
        assert np.array_equal(qmat.kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_diag_expansion(self):
        got = qmat.kron(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert np.array_equal(got, np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_scalar_factor(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.allclose(qmat.kron(np.array([[2.5]]), m), 2.5 * m)


class TestPartialTrace:
    def test_product_factorization(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        a, b = a @ a.conj().T, b @ b.conj().T
        a, b = a / np.trace(a), b / np.trace(b)
        got = qmat.partial_trace(qmat.kron(a, b), (2, 3), keep="B")
        assert np.abs(got - b).max() <= 1e-12

    def test_bell_marginal(self):
        ket = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
        bell = np.outer(ket, ket)
        got = qmat.partial_trace(bell, (2, 2), keep="B")
        assert np.abs(got - np.eye(2) / 2).max() <= 1e-12

    def test_identity(self):
        got = qmat.partial_trace(np.eye(6), (2, 3), keep="A")
        assert np.allclose(got, 3.0 * np.eye(2))

    def test_trace_preserved(self):
        m = random_hermitian(6, 3)
        for keep in ("A", "B"):
            out = qmat.partial_trace(m, (2, 3), keep=keep)
            assert abs(np.trace(out) - np.trace(m)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            qmat.partial_trace(np.eye(5), (2, 3), keep="A")

    @pytest.mark.parametrize("seed", range(6))
    def test_kron_consistency(self, seed):
        a = random_hermitian(3, seed)
        b = random_hermitian(2, seed + 100)
        got = qmat.partial_trace(qmat.kron(a, b), (3, 2), keep="A")
        assert np.abs(got - a * np.trace(b)).max() <= 1e-12


class TestMatrixLogPsd:
    def test_identity_log_is_zero(self):
        res = qmat.matrix_log_psd(np.eye(4))
        assert np.abs(res.value).max() <= 1e-12
        assert res.rank == 4

    def test_diagonal(self):
        res = qmat.matrix_log_psd(np.diag([np.e, 1.0]))
        assert np.allclose(res.value, np.diag([1.0, 0.0]), atol=1e-12)

    def test_scalar_log(self):
        res = qmat.matrix_log_psd(np.diag([0.5, 0.5]))
        assert np.allclose(res.value, -np.log(2.0) * np.eye(2), atol=1e-12)

    def test_rank_deficient_support(self):
        res = qmat.matrix_log_psd(np.diag([1.0, 0.0]))
        assert res.rank == 1
        assert np.allclose(res.support, np.diag([1.0, 0.0]))
        assert np.abs(res.value).max() <= 1e-12

    def test_negative_eigenvalue(self):
        with pytest.raises(NegativeEigenvalue):
            qmat.matrix_log_psd(np.diag([1.0, -0.5]))

    @pytest.mark.parametrize("seed", range(5))
    def test_log_exp_roundtrip(self, seed):
        m = random_hermitian(4, seed, scale=2.0)
        m = 5.0 * m / max(np.abs(np.linalg.eigvalsh(m)).max(), 1.0)
        back = qmat.matrix_log_psd(qmat.matrix_exp_hermitian(m)).value
        assert np.abs(back - m).max() <= 1e-8


class TestTraceDistance:
    def test_self_distance(self):
        m = random_hermitian(3, 1)
        assert qmat.trace_distance(m, m) == 0.0

    def test_orthogonal_pure(self):
        assert_close(
            qmat.trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 2.0, 1e-14
        )

    def test_diagonal_mix(self):
        # eigenvalues of the difference are +/- 0.2
        got = qmat.trace_distance(np.diag([0.6, 0.4]), np.diag([0.4, 0.6]))
        assert_close(got, 0.4, 1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            qmat.trace_distance(np.eye(2), np.eye(3))

    @pytest.mark.parametrize("seed", range(10))
    def test_metric(self, seed):
        a = random_hermitian(4, 3 * seed)
        b = random_hermitian(4, 3 * seed + 1)
        c = random_hermitian(4, 3 * seed + 2)
        dab = qmat.trace_distance(a, b)
        assert dab == qmat.trace_distance(b, a)
        assert dab >= 0.0
        assert dab <= qmat.trace_distance(a, c) + qmat.trace_distance(c, b) + 1e-12
