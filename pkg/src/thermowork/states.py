"""Quantum-state constructors and structural queries.

Density matrices, Gibbs states, bipartite splits, purifications, the
A-complement, and the factorization test.  State values are immutable
after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import (
    DimensionMismatch,
    InvalidBeta,
    InvalidRank,
    InvariantViolation,
)

TRACE_TOL = 1e-10
PSD_TOL = 1e-10
# Default trace-norm tolerance for the factorization test.
PRODUCT_TOL = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """Positive, unit-trace Hermitian operator on a finite Hilbert space."""

    mat: np.ndarray

    def __post_init__(self):
        m = qmat.check_hermitian(self.mat)
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"trace must be 1 within {TRACE_TOL:.0e}, got {tr:.12g}")
        wmin = float(np.linalg.eigvalsh((m + qmat.dag(m)) / 2.0)[0])
        if wmin < -PSD_TOL:
            raise InvariantViolation(
                f"state must be positive semidefinite within {PSD_TOL:.0e}, "
                f"min eigenvalue {wmin:.3e}"
            )
        object.__setattr__(self, "mat", _readonly((m + qmat.dag(m)) / 2.0))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, ascending."""
        return np.linalg.eigvalsh(self.mat)

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    @staticmethod
    def pure(ket) -> "DensityMatrix":
        """|psi><psi| from a ket, normalized."""
        v = np.asarray(ket, dtype=np.complex128).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise InvariantViolation("cannot normalize the zero vector")
        v = v / n
        return DensityMatrix(np.outer(v, v.conj()))

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(frozen=True)
class BipartiteState:
    """Density matrix with an (d_A, d_B) tensor split."""

    state: DensityMatrix
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.state.dim != self.dim_a * self.dim_b:
            raise DimensionMismatch(
                f"state dimension {self.state.dim} != {self.dim_a} x {self.dim_b}"
            )

    @property
    def mat(self) -> np.ndarray:
        return self.state.mat

    def marginal_a(self) -> DensityMatrix:
        return DensityMatrix(qmat.partial_trace(self.mat, (self.dim_a, self.dim_b), keep="A"))

    def marginal_b(self) -> DensityMatrix:
        return DensityMatrix(qmat.partial_trace(self.mat, (self.dim_a, self.dim_b), keep="B"))

    @staticmethod
    def from_matrix(mat, dim_a: int, dim_b: int) -> "BipartiteState":
        return BipartiteState(DensityMatrix(mat), dim_a, dim_b)

    @staticmethod
    def pure(ket, dim_a: int, dim_b: int) -> "BipartiteState":
        return BipartiteState(DensityMatrix.pure(ket), dim_a, dim_b)


@dataclass(frozen=True)
class GibbsContext:
    """Hamiltonian plus inverse temperature; owns gamma = e^{-beta H}/Z."""

    hamiltonian: np.ndarray
    beta: float
    gibbs: DensityMatrix
    log_z: float

    @property
    def dim(self) -> int:
        return self.gibbs.dim


def gibbs_state(hamiltonian, beta: float) -> GibbsContext:
    """Build the Gibbs equilibrium context e^{-beta H}/Z.

    ``beta`` must be positive and finite; ``hamiltonian`` Hermitian.  The
    exponential is evaluated in the energy eigenbasis with the ground
    energy shifted out, so large beta*E products stay finite.
    """
    if not np.isfinite(beta) or beta <= 0:
        raise InvalidBeta(f"beta must be positive and finite, got {beta}")
    h = qmat.check_hermitian(hamiltonian)
    dec = qmat.eigh(h)
    w, v = dec.eigenvalues, dec.eigenvectors
    shifted = -beta * (w - w[0])
    weights = np.exp(shifted)
    z_shifted = float(weights.sum())
    gamma = (v * (weights / z_shifted)) @ qmat.dag(v)
    gamma = gamma / np.trace(gamma).real
    gibbs = DensityMatrix(gamma)
    if float(gibbs.spectrum()[0]) <= 0.0:
        raise InvariantViolation(
            "Gibbs state lost full rank: beta * spectral spread too large for float64"
        )
    log_z = float(np.log(z_shifted) - beta * w[0])
    return GibbsContext(
        hamiltonian=_readonly(h), beta=float(beta), gibbs=gibbs, log_z=log_z
    )


@dataclass(frozen=True)
class Purification:
    """Global pure state on A x A' x B, index order (a, a', b) row-major."""

    vector: np.ndarray
    dims: tuple[int, int, int]

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128).reshape(-1)
        da, dp, db = self.dims
        if v.size != da * dp * db:
            raise DimensionMismatch(
                f"vector length {v.size} != {da} x {dp} x {db}"
            )
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > 1e-10:
            raise InvariantViolation(f"purification must have unit norm, got {n:.12g}")
        object.__setattr__(self, "vector", _readonly(v))

    def tensor(self) -> np.ndarray:
        da, dp, db = self.dims
        return self.vector.reshape(da, dp, db)

    def marginal_ab(self) -> np.ndarray:
        """Reduced matrix on A x B (traces out A')."""
        t = self.tensor()
        da, dp, db = self.dims
        return np.einsum("akb,ckd->abcd", t, t.conj()).reshape(da * db, da * db)

    def marginal_pb(self) -> np.ndarray:
        """Reduced matrix on A' x B (traces out A)."""
        t = self.tensor()
        da, dp, db = self.dims
        return np.einsum("akb,ald->kbld", t, t.conj()).reshape(dp * db, dp * db)


def purify(rho: DensityMatrix) -> np.ndarray:
    """Spectral purification of ``rho``.

    Returns the purifying ket as a (dim, rank) amplitude matrix over
    system x ancilla; ancilla levels are ordered by descending eigenvalue
    of ``rho``.  Flatten row-major for the composite ket.
    """
    dec = qmat.eigh(rho.mat)
    w = dec.eigenvalues[::-1]
    v = dec.eigenvectors[:, ::-1]
    cut = qmat.support_cut(dec.eigenvalues)
    keep = w > cut
    amp = v[:, keep] * np.sqrt(w[keep])
    return amp / np.linalg.norm(amp)


def a_complement_extension(rho_ab: BipartiteState) -> Purification:
    """Purify ``rho_ab`` into a global pure state on A x A' x B.

    The ancilla A' has dimension rank(rho_ab) <= d_A * d_B, with levels
    ordered by descending eigenvalue of rho_ab.
    """
    da, db = rho_ab.dim_a, rho_ab.dim_b
    amp = purify(rho_ab.state)
    rank = amp.shape[1]
    psi = amp.reshape(da, db, rank).transpose(0, 2, 1)
    ext = Purification(vector=psi.reshape(-1), dims=(da, rank, db))
    gap = np.abs(ext.marginal_ab() - rho_ab.mat).max()
    if gap > 1e-9:
        raise InvariantViolation(
            f"purification does not reproduce the source state: entrywise gap {gap:.3e}"
        )
    return ext


def a_complement(rho_ab: BipartiteState) -> BipartiteState:
    """The (A', B) marginal of a purification of ``rho_ab``."""
    ext = a_complement_extension(rho_ab)
    _, dp, db = ext.dims
    return BipartiteState.from_matrix(ext.marginal_pb(), dp, db)


@dataclass(frozen=True)
class ProductCheck:
    """Outcome of the factorization test.

    ``witness`` holds two positive effects on A whose normalized
    conditional states differ when the state is correlated; the pair is
    scaled so it extends to a valid POVM.
    """

    is_product: bool
    distance: float
    witness: tuple[np.ndarray, np.ndarray] | None
    witness_states: tuple[np.ndarray, np.ndarray] | None


def _witness_candidates(da: int) -> list[np.ndarray]:
    """Rank-1 projectors spanning the operator space on A."""
    cands = []
    eye = np.eye(da, dtype=np.complex128)
    for i in range(da):
        cands.append(np.outer(eye[:, i], eye[:, i].conj()))
    for i in range(da):
        for j in range(i + 1, da):
            for amp in (1.0, 1.0j):
                v = (eye[:, i] + amp * eye[:, j]) / np.sqrt(2.0)
                cands.append(np.outer(v, v.conj()))
    return cands


def is_product_state(rho_ab: BipartiteState, tol: float = PRODUCT_TOL) -> ProductCheck:
    """Test rho_AB = rho_A x rho_B in trace norm, with a measurement witness.

    When the state is correlated the witness is found by scanning a
    tomographically complete family of rank-1 effects on A and picking the
    pair with the most distinguishable conditional states on B.
    """
    ra = rho_ab.marginal_a().mat
    rb = rho_ab.marginal_b().mat
    dist = qmat.trace_distance(rho_ab.mat, qmat.kron(ra, rb))
    if dist <= tol:
        return ProductCheck(True, dist, None, None)

    da, db = rho_ab.dim_a, rho_ab.dim_b
    t = rho_ab.mat.reshape(da, db, da, db)
    conds = []
    for pi in _witness_candidates(da):
        unnorm = np.einsum("ij,jbid->bd", pi, t)
        p = float(np.trace(unnorm).real)
        if p > 1e-12:
            conds.append((pi, unnorm / p))
    best = (0.0, 0, 1)
    for i in range(len(conds)):
        for j in range(i + 1, len(conds)):
            gap = qmat.trace_distance(conds[i][1], conds[j][1])
            if gap > best[0]:
                best = (gap, i, j)
    _, i, j = best
    # Halving keeps the pair jointly completable to a POVM.
    witness = (conds[i][0] / 2.0, conds[j][0] / 2.0)
    return ProductCheck(False, dist, witness, (conds[i][1], conds[j][1]))


def random_density(dim: int, rank: int, seed: int) -> DensityMatrix:
    """Seed-reproducible Ginibre-induced random state of the given rank."""
    if not 1 <= rank <= dim:
        raise InvalidRank(f"rank must be in 1..{dim}, got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_bipartite(dim_a: int, dim_b: int, rank: int, seed: int) -> BipartiteState:
    """Random bipartite state via :func:`random_density` on d_A * d_B."""
    return BipartiteState(random_density(dim_a * dim_b, rank, seed), dim_a, dim_b)


def max_entangled(d: int) -> BipartiteState:
    """The maximally entangled state on d x d."""
    ket = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        ket[i * d + i] = 1.0
    return BipartiteState.pure(ket, d, d)


def bipartite_tensor(x: BipartiteState, y: BipartiteState) -> BipartiteState:
    """Tensor two bipartite states, regrouped as (A1 A2) x (B1 B2)."""
    da1, db1, da2, db2 = x.dim_a, x.dim_b, y.dim_a, y.dim_b
    t = qmat.kron(x.mat, y.mat).reshape(da1, db1, da2, db2, da1, db1, da2, db2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    d = da1 * da2 * db1 * db2
    return BipartiteState.from_matrix(t.reshape(d, d), da1 * da2, db1 * db2)


def apply_kraus_to_a(rho_ab: BipartiteState, kraus: list[np.ndarray]) -> BipartiteState:
    """Apply a channel sum_i (K_i x 1_B) rho (K_i x 1_B)^dag acting on A.

    Kraus operators may change the A dimension; completeness
    sum_i K_i^dag K_i = 1 is validated within 1e-9.
    """
    ks = [qmat.as_cmatrix(k) for k in kraus]
    da, db = rho_ab.dim_a, rho_ab.dim_b
    if any(k.shape[1] != da for k in ks):
        raise DimensionMismatch("Kraus operators must act on the A side")
    comp = sum(qmat.dag(k) @ k for k in ks)
    if np.abs(comp - np.eye(da)).max() > 1e-9:
        raise InvariantViolation("Kraus operators are not trace preserving")
    out_dim = ks[0].shape[0]
    acc = np.zeros((out_dim * db, out_dim * db), dtype=np.complex128)
    eye_b = np.eye(db, dtype=np.complex128)
    for k in ks:
        kb = qmat.kron(k, eye_b)
        acc += kb @ rho_ab.mat @ qmat.dag(kb)
    return BipartiteState.from_matrix(acc, out_dim, db)
