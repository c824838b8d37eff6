"""Entropy kernel: Shannon / von Neumann entropies, quantum relative
entropy with support handling, and mutual information.  All values in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import DimensionMismatch, InvalidDistribution
from .states import BipartiteState, DensityMatrix


def shannon_entropy(p) -> float:
    """-sum p_i ln p_i with 0 ln 0 = 0.

    Entries may carry numerical noise down to -1e-12; the vector is
    renormalized internally and must sum to 1 within 1e-9.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0:
        raise InvalidDistribution("empty probability vector")
    if p.min() < -1e-12:
        raise InvalidDistribution(f"negative probability {p.min():.3e}")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise InvalidDistribution(f"probabilities sum to {total:.12g}, expected 1")
    p = np.clip(p, 0.0, None) / total
    mask = p > qmat.support_cut(p)
    val = float(-(p[mask] * np.log(p[mask])).sum())
    return max(val, 0.0)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho ln rho, zero for pure states."""
    return shannon_entropy(np.clip(rho.spectrum(), 0.0, None))


@dataclass(frozen=True)
class RelEntropyResult:
    """Relative entropy value in nats; infinite on support violation."""

    value: float
    support_violation: bool

    def __post_init__(self):
        if math.isinf(self.value) != self.support_violation:
            raise InvalidDistribution("infinite value must coincide with support violation")

    @property
    def finite(self) -> bool:
        return not self.support_violation


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> RelEntropyResult:
    """S(rho || sigma) = Tr rho (ln rho - ln sigma), support-aware.

    A full-rank second argument (every eigenvalue above the eigensolver
    noise floor) uses its log directly; full-rank Gibbs states may carry
    eigenvalues many decades below the top one and those are real, not
    noise.  Against a rank-deficient sigma, rho is projected onto
    supp(sigma) and more than 1e-12 of lost trace mass makes the result
    infinite.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimension mismatch {rho.dim} vs {sigma.dim}")
    dec = qmat.eigh(sigma.mat)
    mu, u = dec.eigenvalues, dec.eigenvectors
    overlaps = np.einsum("ij,jk,ki->i", qmat.dag(u), rho.mat, u).real
    overlaps = np.clip(overlaps, 0.0, None)
    if mu[0] > qmat.NOISE_REL * mu[-1]:
        in_support = np.ones_like(mu, dtype=bool)
    else:
        in_support = mu > qmat.support_cut(mu)
        lost = float(overlaps[~in_support].sum())
        if lost > 1e-12:
            return RelEntropyResult(value=math.inf, support_violation=True)
    cross = float((overlaps[in_support] * np.log(mu[in_support])).sum())
    lam = np.clip(rho.spectrum(), 0.0, None)
    keep = lam > qmat.support_cut(lam)
    self_term = float((lam[keep] * np.log(lam[keep])).sum())
    return RelEntropyResult(value=max(self_term - cross, 0.0), support_violation=False)


def mutual_information(rho_ab: BipartiteState) -> float:
    """I(A:B) = S(rho_A) + S(rho_B) - S(rho_AB)."""
    return (
        von_neumann_entropy(rho_ab.marginal_a())
        + von_neumann_entropy(rho_ab.marginal_b())
        - von_neumann_entropy(rho_ab.state)
    )
