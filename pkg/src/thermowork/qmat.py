"""Dense complex-matrix kernel.

Hermitian eigendecomposition, tensor products, partial traces, matrix
functions on the positive cone, and the trace norm.  Everything here is a
pure function of numpy arrays; dimensions in this toolkit stay small
(<= ~64), so dense storage throughout.

Conventions:
  * one-norm ||X||_1 = sum |eig(X)| with no 1/2 factor,
  * eigenvalues below ``CLIP_REL`` relative to the largest one are treated
    as exactly zero when deciding supports (0 log 0 = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NonHermitian, NonSquare

# Hermiticity check tolerance (absolute, entrywise).
HERM_TOL = 1e-10
# Support clip: eigenvalues below CLIP_REL * max eigenvalue count as zero.
CLIP_REL = 1e-12
# Eigensolver noise floor: below this an eigenvalue is indistinguishable
# from exact zero at float64 precision (desk-scale dimensions).
NOISE_REL = 1e-14


def as_cmatrix(m) -> np.ndarray:
    """Coerce input to a C-ordered complex128 2-D array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise NonSquare(f"expected a 2-D matrix, got ndim={a.ndim}")
    return np.ascontiguousarray(a)


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def check_square(m: np.ndarray) -> np.ndarray:
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def check_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    """Validate Hermiticity entrywise within ``tol`` and return the matrix."""
    m = check_square(m)
    gap = np.abs(m - dag(m)).max() if m.size else 0.0
    if gap > tol:
        raise NonHermitian(f"matrix is not Hermitian: max |M - M^dag| = {gap:.3e} > {tol:.1e}")
    return m


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(m) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = check_hermitian(m)
    w, v = np.linalg.eigh((m + dag(m)) / 2.0)
    return EigDecomposition(eigenvalues=w, eigenvectors=v)


def kron(a, b) -> np.ndarray:
    """Tensor product, (a kron b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def partial_trace(m, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Trace out one tensor factor of a matrix on a (d_A x d_B) space.

    ``keep`` is ``"A"`` or ``"B"``; the result acts on the kept factor and
    has the same trace as the input.
    """
    da, db = int(dims[0]), int(dims[1])
    m = check_square(m)
    if m.shape[0] != da * db:
        raise DimensionMismatch(
            f"matrix of size {m.shape[0]} does not factor as {da} x {db}"
        )
    t = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise DimensionMismatch(f"keep must be 'A' or 'B', got {keep!r}")


def support_cut(eigenvalues: np.ndarray) -> float:
    """Absolute clip threshold below which eigenvalues count as zero."""
    top = float(np.max(eigenvalues, initial=0.0))
    return max(top, 0.0) * CLIP_REL


@dataclass(frozen=True)
class PsdLog:
    """Logarithm on the support of a PSD matrix plus the support projector."""

    value: np.ndarray
    support: np.ndarray
    rank: int


def matrix_log_psd(m) -> PsdLog:
    """Natural log of a PSD matrix, computed on its support.

    Eigenvalues below the clip threshold are excluded from the log; the
    projector onto the retained support is reported alongside the result.
    """
    dec = eigh(m)
    w, v = dec.eigenvalues, dec.eigenvectors
    if w.size and w[0] < -HERM_TOL:
        raise NegativeEigenvalue(f"matrix has negative eigenvalue {w[0]:.3e}")
    cut = support_cut(w)
    mask = w > cut
    logw = np.zeros_like(w)
    logw[mask] = np.log(w[mask])
    vs = v[:, mask]
    value = (v * logw) @ dag(v)
    support = vs @ dag(vs)
    return PsdLog(value=value, support=support, rank=int(mask.sum()))


def matrix_exp_hermitian(m) -> np.ndarray:
    """exp(M) for Hermitian M via eigendecomposition."""
    dec = eigh(m)
    w, v = dec.eigenvalues, dec.eigenvectors
    return (v * np.exp(w)) @ dag(v)


def trace_distance(a, b) -> float:
    """One-norm distance sum |eig(a - b)| between Hermitian matrices."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    d = check_hermitian(a - b, tol=2 * HERM_TOL)
    d = (d + dag(d)) / 2.0
    # Canonicalize the sign so swapping the arguments is bit-exact symmetric.
    flat = np.concatenate([d.real.ravel(), d.imag.ravel()])
    nz = flat[np.nonzero(flat)[0]]
    if nz.size and nz[0] < 0:
        d = -d
    w = np.linalg.eigvalsh(d)
    return float(np.abs(w).sum())
