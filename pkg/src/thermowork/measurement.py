"""POVMs on Alice, conditional ensembles, the classical-correlations
functional, and its optimizers.

The optimizer is a multi-start derivative-free hill climb over rank-1
POVMs: effects are parameterized by raw complex vectors, pushed through a
completion step that enforces the sum-to-identity constraint exactly, and
perturbed with an adaptive step that grows on acceptance and shrinks on
rejection.  All restarts run in lockstep as batched array operations; the
final reduction (max with lowest-restart-index tie break) is deterministic
for a fixed seed regardless of how restarts are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .errors import DimensionMismatch, InvariantViolation, WrongDimension
from .infotheory import von_neumann_entropy
from .states import BipartiteState, DensityMatrix

# Outcomes with probability at or below this carry a placeholder state.
NEGLIGIBLE_P = 1e-12
# Consecutive proposals without a tol-sized improvement before a restart stalls.
PATIENCE = 80


@dataclass(frozen=True)
class Povm:
    """Finite list of positive effects on A summing to the identity."""

    effects: tuple[np.ndarray, ...]
    dim_a: int

    def __post_init__(self):
        if len(self.effects) == 0:
            raise InvariantViolation("a POVM needs at least one effect")
        checked = []
        total = np.zeros((self.dim_a, self.dim_a), dtype=np.complex128)
        for k, eff in enumerate(self.effects):
            m = qmat.check_hermitian(eff)
            if m.shape[0] != self.dim_a:
                raise DimensionMismatch(
                    f"effect {k} has dimension {m.shape[0]}, expected {self.dim_a}"
                )
            wmin = float(np.linalg.eigvalsh(m)[0])
            if wmin < -1e-10:
                raise InvariantViolation(
                    f"effect {k} has negative eigenvalue {wmin:.3e}"
                )
            total += m
            a = np.ascontiguousarray(m)
            a.setflags(write=False)
            checked.append(a)
        gap = np.abs(total - np.eye(self.dim_a)).max()
        if gap > 1e-9:
            raise InvariantViolation(
                f"effects sum to identity only within {gap:.3e} > 1e-09"
            )
        object.__setattr__(self, "effects", tuple(checked))

    def __len__(self) -> int:
        return len(self.effects)

    @staticmethod
    def computational(dim: int) -> "Povm":
        eye = np.eye(dim, dtype=np.complex128)
        return Povm(tuple(np.outer(eye[:, i], eye[:, i]) for i in range(dim)), dim)

    @staticmethod
    def projective(basis: np.ndarray) -> "Povm":
        """Rank-1 projective POVM from the columns of a unitary."""
        u = qmat.as_cmatrix(basis)
        effs = tuple(np.outer(u[:, i], u[:, i].conj()) for i in range(u.shape[1]))
        return Povm(effs, u.shape[0])


@dataclass(frozen=True)
class ConditionalEnsemble:
    """Outcome probabilities and Bob-side conditional states for a POVM.

    Outcomes with probability <= NEGLIGIBLE_P carry a flagged maximally
    mixed placeholder, excluded from averages.
    """

    probs: tuple[float, ...]
    states: tuple[DensityMatrix, ...]
    average: DensityMatrix
    negligible: tuple[bool, ...]


def _blocks(rho_ab: BipartiteState) -> np.ndarray:
    da, db = rho_ab.dim_a, rho_ab.dim_b
    return rho_ab.mat.reshape(da, db, da, db)


def condition_on_outcome(rho_ab: BipartiteState, povm: Povm) -> ConditionalEnsemble:
    """Ensemble {p_i, conditional B states} induced by measuring A."""
    if povm.dim_a != rho_ab.dim_a:
        raise DimensionMismatch(
            f"POVM on dimension {povm.dim_a}, state A side is {rho_ab.dim_a}"
        )
    t = _blocks(rho_ab)
    probs, states, negligible = [], [], []
    for eff in povm.effects:
        unnorm = np.einsum("ij,jbid->bd", eff, t)
        unnorm = (unnorm + qmat.dag(unnorm)) / 2.0
        p = max(float(np.trace(unnorm).real), 0.0)
        if p > NEGLIGIBLE_P:
            states.append(DensityMatrix(unnorm / p))
            negligible.append(False)
        else:
            states.append(DensityMatrix.maximally_mixed(rho_ab.dim_b))
            negligible.append(True)
        probs.append(p)
    return ConditionalEnsemble(
        probs=tuple(probs),
        states=tuple(states),
        average=rho_ab.marginal_b(),
        negligible=tuple(negligible),
    )


def classical_correlations_at(rho_ab: BipartiteState, povm: Povm) -> float:
    """S(rho_B) - sum_i p_i S(conditional state i), no maximization."""
    ens = condition_on_outcome(rho_ab, povm)
    avg = sum(
        p * von_neumann_entropy(st)
        for p, st, skip in zip(ens.probs, ens.states, ens.negligible)
        if not skip
    )
    return von_neumann_entropy(ens.average) - avg


@dataclass(frozen=True)
class OptConfig:
    """Knobs for the multi-start POVM / decomposition optimizers.

    ``outcomes_min``/``outcomes_max`` bound the outcome-count sweep
    (defaults d_A .. d_A**2 for the correlations optimizer, rank .. rank**2
    for the decomposition optimizer).
    """

    restarts: int = 64
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 2000
    outcomes_min: int | None = None
    outcomes_max: int | None = None

    def to_dict(self) -> dict:
        return {
            "restarts": self.restarts,
            "seed": self.seed,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "outcomes_min": self.outcomes_min,
            "outcomes_max": self.outcomes_max,
        }

    @staticmethod
    def from_dict(d: dict) -> "OptConfig":
        return OptConfig(
            restarts=int(d.get("restarts", 64)),
            seed=int(d.get("seed", 0)),
            tol=float(d.get("tol", 1e-6)),
            max_iter=int(d.get("max_iter", 2000)),
            outcomes_min=d.get("outcomes_min"),
            outcomes_max=d.get("outcomes_max"),
        )


@dataclass(frozen=True)
class OptResult:
    """Best value found, the POVM achieving it, and per-restart traces."""

    value: float
    povm: Povm
    restarts_used: int
    converged: bool
    trace: tuple[tuple[float, ...], ...] = field(repr=False)


def group_rng(seed: int, group: int) -> np.random.Generator:
    """Deterministic per-group generator, independent across groups."""
    entropy = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy, spawn_key=(group,)))


def complete_vectors(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rescale raw vectors (..., n, d) so their outer products sum to identity.

    Applies M^{-1/2} with M = sum_n |a_n><a_n|; returns (vectors, ok) where
    ``ok`` flags batch members whose M is well conditioned.
    """
    m = np.einsum("...ni,...nj->...ij", raw, raw.conj())
    w, u = np.linalg.eigh(m)
    ok = w[..., 0] > 1e-12 * np.maximum(w[..., -1], 1e-300)
    w_safe = np.where(ok[..., None], w, 1.0)
    inv_sqrt = np.einsum("...ik,...k,...jk->...ij", u, 1.0 / np.sqrt(w_safe), u.conj())
    return np.einsum("...ij,...nj->...ni", inv_sqrt, raw), ok


def complete_rank1(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Turn raw vectors (..., n, d) into rank-1 effects summing to identity."""
    b, ok = complete_vectors(raw)
    effects = b[..., :, None] * b[..., None, :].conj()
    return effects, ok


def lockstep_ascent(
    evaluate,
    init: np.ndarray,
    rng: np.random.Generator,
    *,
    tol: float,
    max_iter: int,
    patience: int = PATIENCE,
    step0: float = 0.3,
):
    """Batch of independent stochastic hill climbs run in lockstep.

    ``evaluate`` maps raw parameters (g, n, k) to values (g,), using -inf
    for invalid points.  Each restart keeps an adaptive step size; a
    restart stalls (converges) after ``patience`` proposals without a
    tol-sized improvement or once its step underflows.

    Returns (params, values, traces, converged, iterations).
    """
    cur = np.array(init, dtype=np.complex128)
    g = cur.shape[0]
    val = np.asarray(evaluate(cur), dtype=float)
    step = np.full(g, step0)
    since = np.zeros(g, dtype=int)
    active = np.ones(g, dtype=bool)
    traces = [[float(v)] for v in val]
    iters = 0
    while iters < max_iter and active.any():
        iters += 1
        idx = np.nonzero(active)[0]
        shape = (idx.size,) + cur.shape[1:]
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        cand = cur[idx] + step[idx, None, None] * noise
        cval = np.asarray(evaluate(cand), dtype=float)
        better = cval > val[idx]
        big = cval > val[idx] + tol
        sel = idx[better]
        cur[sel] = cand[better]
        val[sel] = cval[better]
        for k, v in zip(sel, cval[better]):
            traces[k].append(float(v))
        step[sel] = np.minimum(step[sel] * 1.6, 3.0)
        step[idx[~better]] *= 0.82
        since[idx[big]] = 0
        since[idx[~big]] += 1
        active &= ~((since >= patience) | (step < 1e-8))
    return cur, val, traces, ~active, iters


def _outcome_sweep(config: OptConfig, n_min: int, n_max: int) -> list[int]:
    lo = n_min if config.outcomes_min is None else max(int(config.outcomes_min), n_min)
    hi = n_max if config.outcomes_max is None else min(int(config.outcomes_max), n_max)
    hi = max(hi, lo)
    return list(range(lo, hi + 1))


def _draw_valid(rng: np.random.Generator, g: int, n: int, k: int) -> np.ndarray:
    """Raw vectors with a well-conditioned completion for every batch row."""
    raw = rng.standard_normal((g, n, k)) + 1j * rng.standard_normal((g, n, k))
    for _ in range(16):
        _, ok = complete_rank1(raw)
        if ok.all():
            break
        bad = ~ok
        raw[bad] = rng.standard_normal((int(bad.sum()), n, k)) + 1j * rng.standard_normal(
            (int(bad.sum()), n, k)
        )
    return raw


def _batched_j_values(t: np.ndarray, effects: np.ndarray, s_b: float) -> np.ndarray:
    """J functional for a batch of POVMs given the state block tensor."""
    cond = np.einsum("gnij,jbid->gnbd", effects, t)
    cond = (cond + np.conj(np.swapaxes(cond, -1, -2))) / 2.0
    p = np.einsum("gnbb->gn", cond).real
    w = np.linalg.eigvalsh(cond)
    denom = np.where(p > NEGLIGIBLE_P, p, 1.0)[..., None]
    lam = np.clip(w, 0.0, None) / denom
    cut = lam.max(axis=-1, keepdims=True) * qmat.CLIP_REL
    safe = np.where(lam > cut, lam, 1.0)
    ent = -(safe * np.log(safe)).sum(axis=-1)
    ent = np.where(p > NEGLIGIBLE_P, ent, 0.0)
    return s_b - (np.clip(p, 0.0, None) * ent).sum(axis=-1)


def optimize_classical_correlations(rho_ab: BipartiteState, config: OptConfig) -> OptResult:
    """Maximize the classical-correlations functional over Alice's POVMs.

    Restricts to rank-1 effects with the outcome count sweeping
    d_A .. d_A**2 (round-robin across restarts).  The returned value is a
    certified lower bound: it is re-evaluated through
    :func:`classical_correlations_at` at the returned POVM.
    """
    if config.restarts < 1:
        raise InvariantViolation("config.restarts must be >= 1")
    da = rho_ab.dim_a
    t = _blocks(rho_ab)
    s_b = von_neumann_entropy(rho_ab.marginal_b())
    sweep = _outcome_sweep(config, da, da * da)
    n_restarts = config.restarts

    values = np.full(n_restarts, -np.inf)
    raws: list[np.ndarray | None] = [None] * n_restarts
    traces: list[list[float]] = [[] for _ in range(n_restarts)]
    converged = np.zeros(n_restarts, dtype=bool)

    for gi, n_out in enumerate(sweep):
        ids = np.arange(gi, n_restarts, len(sweep))
        if ids.size == 0:
            continue
        rng = group_rng(config.seed, gi)
        init = _draw_valid(rng, ids.size, n_out, da)

        def evaluate(raw):
            eff, ok = complete_rank1(raw)
            vals = _batched_j_values(t, eff, s_b)
            return np.where(ok, vals, -np.inf)

        cur, val, tr, conv, _ = lockstep_ascent(
            evaluate, init, rng, tol=config.tol, max_iter=config.max_iter
        )
        for j, r in enumerate(ids):
            values[r] = val[j]
            raws[r] = cur[j]
            traces[r] = tr[j]
            converged[r] = conv[j]

    winner = int(np.argmax(values))
    raw = raws[winner]
    assert raw is not None
    eff, ok = complete_rank1(raw[None])
    if not bool(ok[0]):
        raise InvariantViolation("winning restart has an ill-conditioned POVM")
    povm = Povm(tuple(eff[0]), da)
    value = classical_correlations_at(rho_ab, povm)
    return OptResult(
        value=value,
        povm=povm,
        restarts_used=n_restarts,
        converged=bool(converged[winner]),
        trace=tuple(tuple(tr) for tr in traces),
    )


def _bloch_effects(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Projector pairs {P(n), 1-P(n)} for Bloch angles, shape (N, 2, 2, 2)."""
    st, ct = np.sin(thetas), np.cos(thetas)
    nx, ny, nz = st * np.cos(phis), st * np.sin(phis), ct
    plus = 0.5 * np.stack(
        [
            np.stack([1.0 + nz, nx - 1j * ny], axis=-1),
            np.stack([nx + 1j * ny, 1.0 - nz], axis=-1),
        ],
        axis=-2,
    ).astype(np.complex128)
    minus = np.eye(2, dtype=np.complex128) - plus
    return np.stack([plus, minus], axis=-3)


def brute_force_qubit_J(rho_ab: BipartiteState, grid: int) -> float:
    """Grid-plus-refinement oracle for the classical correlations, d_A = 2.

    Scans projective measurements over a (grid x grid) Bloch-sphere
    lattice, then runs one local pattern-search refinement from the best
    lattice point.  Lower-bounds the true maximum by construction.
    """
    if rho_ab.dim_a != 2:
        raise WrongDimension("the grid oracle requires a qubit on the A side")
    t = _blocks(rho_ab)
    s_b = von_neumann_entropy(rho_ab.marginal_b())

    th = np.pi * (np.arange(grid) + 0.5) / grid
    ph = 2.0 * np.pi * np.arange(grid) / grid
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    tt, pp = tt.reshape(-1), pp.reshape(-1)
    vals = _batched_j_values(t, _bloch_effects(tt, pp), s_b)
    k = int(np.argmax(vals))
    best, theta, phi = float(vals[k]), float(tt[k]), float(pp[k])

    h = np.pi / grid
    offsets = np.array(
        [(dt, dp) for dt in (-1.0, 0.0, 1.0) for dp in (-1.0, 0.0, 1.0) if (dt, dp) != (0.0, 0.0)]
    )
    while h > 1e-7:
        cth = theta + h * offsets[:, 0]
        cph = phi + h * offsets[:, 1]
        cvals = _batched_j_values(t, _bloch_effects(cth, cph), s_b)
        j = int(np.argmax(cvals))
        if cvals[j] > best:
            best, theta, phi = float(cvals[j]), float(cth[j]), float(cph[j])
        else:
            h *= 0.5
    return best
