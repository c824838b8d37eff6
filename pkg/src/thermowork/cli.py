"""Command-line front end.

Subcommands: work, assist, hierarchy, isotropic, sweep.  States and
Hamiltonians come from JSON files; grid and sweep commands emit CSV tables
with a rendered figure alongside.  Exit codes: 0 success, 2 parse error,
3 state-invariant violation, 4 usage error, 5 property violation.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import plotting, serialization as ser
from .errors import ParseError, ThermoworkError
from .infotheory import relative_entropy, von_neumann_entropy
from .measurement import (
    OptConfig,
    brute_force_qubit_J,
    classical_correlations_at,
    optimize_classical_correlations,
)
from .qmat import kron
from .states import (
    BipartiteState,
    a_complement,
    gibbs_state,
    random_bipartite,
    random_density,
)
from .workmeasures import (
    IsotropicSpec,
    derive_seed,
    distillable_work,
    entanglement_of_formation_small,
    hierarchy_report,
    isotropic_state,
    isotropic_work_of_assistance,
    relative_entropy_of_collaboration,
    work_of_assistance,
)

EXIT_PARSE = 2
EXIT_STATE = 3
EXIT_USAGE = 4
EXIT_PROPERTY = 5

# Allowed formation-plus-correlations residual in sweep summaries (nats).
FORMATION_TOL = 2e-3
# Work-scale tolerance for injected quantum-thermal rows.
QT_TOL = 1e-5


class UsageError(Exception):
    pass


class PropertyViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_opt_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=64, help="optimizer restarts")
    p.add_argument("--seed", type=int, default=0, help="optimizer seed")
    p.add_argument("--tol", type=float, default=1e-6, help="optimizer improvement tolerance")
    p.add_argument("--max-iter", type=int, default=2000, help="iteration cap per restart")


def _add_beta(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float, default=1.0, help="inverse temperature (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermowork", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("work", help="distillable work of a single state")
    p.add_argument("state", help="density-kind state file")
    p.add_argument("hamiltonian", help="hamiltonian file")
    _add_beta(p)
    p.add_argument("--out", help="write a report JSON here")
    p.set_defaults(func=cmd_work)

    p = sub.add_parser("assist", help="work of assistance for a bipartite state")
    p.add_argument("state", help="bipartite or pure state file")
    p.add_argument("hamiltonian", help="B-side hamiltonian file")
    _add_beta(p)
    _add_opt_flags(p)
    p.add_argument("--oracle", action="store_true", help="also run the qubit grid oracle")
    p.add_argument("--oracle-grid", type=int, default=60, help="oracle lattice size")
    p.add_argument("--out", help="write a report JSON here")
    p.set_defaults(func=cmd_assist)

    p = sub.add_parser("hierarchy", help="full work-hierarchy report")
    p.add_argument("state", help="bipartite or pure state file")
    p.add_argument("hamiltonian", help="B-side hamiltonian file")
    _add_beta(p)
    _add_opt_flags(p)
    p.add_argument("--out", help="write a report JSON here")
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("isotropic", help="assistance grid over the isotropic family")
    p.add_argument("hamiltonian", help="B-side hamiltonian file (d x d)")
    p.add_argument("--d", type=int, required=True, help="local dimension")
    p.add_argument(
        "--lambda-grid",
        required=True,
        help="comma list '0,0.5,1' or linspace 'start:stop:count'",
    )
    _add_beta(p)
    _add_opt_flags(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--fig", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-fig", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_isotropic)

    p = sub.add_parser("sweep", help="random-state sweep with invariant checks")
    p.add_argument("hamiltonian", help="B-side hamiltonian file")
    p.add_argument("--dim-a", type=int, required=True)
    p.add_argument("--dim-b", type=int, required=True)
    p.add_argument("--count", type=int, default=20)
    _add_beta(p)
    _add_opt_flags(p)
    p.add_argument("--qt-every", type=int, default=0, help="inject a QT state every N rows")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--fig", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-fig", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_sweep)

    return parser


def _check_beta(beta: float) -> float:
    if not np.isfinite(beta) or beta <= 0:
        raise UsageError(f"--beta must be positive and finite, got {beta}")
    return float(beta)


def _load_context(path, beta: float):
    h = ser.as_hamiltonian(ser.load_state_file(path))
    return gibbs_state(h, beta)


def _config(args) -> OptConfig:
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    if args.max_iter < 1:
        raise UsageError("--max-iter must be >= 1")
    return OptConfig(
        restarts=args.restarts, seed=args.seed, tol=args.tol, max_iter=args.max_iter
    )


def _inputs_block(**paths) -> dict:
    block = {}
    for name, path in paths.items():
        block[name] = str(path)
        block[f"{name}_sha256"] = ser.file_sha256(path)
    return block


def _write_report(path, command: str, quantities: dict, *, config, inputs, notes, t0) -> None:
    payload = {"schema_version": ser.SCHEMA_VERSION, "command": command}
    payload.update(quantities)
    payload["config"] = None if config is None else config.to_dict()
    payload["inputs"] = inputs
    payload["notes"] = list(notes)
    payload["wall_time_ms"] = int((time.perf_counter() - t0) * 1000)
    ser.dump_json(payload, path)


def _fig_path(args) -> Path | None:
    if args.no_fig:
        return None
    return Path(args.fig) if args.fig else Path(args.out).with_suffix(".png")


def cmd_work(args) -> int:
    t0 = time.perf_counter()
    beta = _check_beta(args.beta)
    rho = ser.as_density(ser.load_state_file(args.state))
    ctx = _load_context(args.hamiltonian, beta)
    w = distillable_work(rho, ctx)
    print(f"distillable_work = {w!r} (energy units, beta = {beta!r})")
    if args.out:
        _write_report(
            args.out,
            "work",
            {"beta": beta, "w_unassisted": w},
            config=None,
            inputs=_inputs_block(state=args.state, hamiltonian=args.hamiltonian),
            notes=[],
            t0=t0,
        )
    return 0


def cmd_assist(args) -> int:
    t0 = time.perf_counter()
    beta = _check_beta(args.beta)
    rho_ab = ser.as_bipartite(ser.load_state_file(args.state))
    if args.oracle and rho_ab.dim_a != 2:
        raise UsageError("oracle requires qubit A")
    ctx = _load_context(args.hamiltonian, beta)
    config = _config(args)
    w_a, povm = work_of_assistance(rho_ab, ctx, config)
    j = classical_correlations_at(rho_ab, povm)
    w_un = distillable_work(rho_ab.marginal_b(), ctx)
    print(f"w_unassisted    = {w_un!r}")
    print(f"w_assistance    = {w_a!r}")
    print(f"j_arrow         = {j!r} nats ({len(povm)} outcomes)")
    quantities = {
        "beta": beta,
        "w_unassisted": w_un,
        "w_assistance": w_a,
        "j_arrow": j,
        "povm": ser.povm_payload(povm),
    }
    notes = ["classical correlations come from a multi-start optimizer (lower bound)"]
    if args.oracle:
        oracle_j = brute_force_qubit_J(rho_ab, grid=args.oracle_grid)
        gap = j - oracle_j
        print(f"oracle j_arrow  = {oracle_j!r} (gap {gap!r})")
        quantities["oracle_j"] = oracle_j
        quantities["oracle_gap"] = gap
        notes.append(f"grid oracle at {args.oracle_grid}x{args.oracle_grid}")
    if args.out:
        _write_report(
            args.out,
            "assist",
            quantities,
            config=config,
            inputs=_inputs_block(state=args.state, hamiltonian=args.hamiltonian),
            notes=notes,
            t0=t0,
        )
    return 0


def cmd_hierarchy(args) -> int:
    t0 = time.perf_counter()
    beta = _check_beta(args.beta)
    rho_ab = ser.as_bipartite(ser.load_state_file(args.state))
    ctx = _load_context(args.hamiltonian, beta)
    config = _config(args)
    rep = hierarchy_report(rho_ab, ctx, config)
    print(f"{'quantity':<24}value")
    for name in (
        "w_unassisted",
        "w_assistance",
        "w_collaboration_upper",
        "discord_gap",
        "mutual_info",
        "j_arrow",
    ):
        print(f"{name:<24}{getattr(rep, name)!r}")
    for note in rep.notes:
        print(f"note: {note}")
    if args.out:
        _write_report(
            args.out,
            "hierarchy",
            {
                "beta": beta,
                "w_unassisted": rep.w_unassisted,
                "w_assistance": rep.w_assistance,
                "w_collaboration_upper": rep.w_collaboration_upper,
                "discord_gap": rep.discord_gap,
                "mutual_info": rep.mutual_info,
                "j_arrow": rep.j_arrow,
                "povm": ser.povm_payload(rep.w_assistance_povm),
            },
            config=config,
            inputs=_inputs_block(state=args.state, hamiltonian=args.hamiltonian),
            notes=rep.notes,
            t0=t0,
        )
    return 0


def _parse_lambda_grid(text: str) -> list[float]:
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("linspace form is start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("count must be >= 1")
            return [float(x) for x in np.linspace(start, stop, count)]
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad --lambda-grid {text!r}: {exc}") from exc


def cmd_isotropic(args) -> int:
    beta = _check_beta(args.beta)
    if args.d < 2:
        raise UsageError("--d must be >= 2")
    ctx = _load_context(args.hamiltonian, beta)
    config = _config(args)
    lams = _parse_lambda_grid(args.lambda_grid)
    lo = -1.0 / (args.d * args.d - 1.0)
    rows = []
    for i, lam in enumerate(lams):
        if not (lo - 1e-12 <= lam <= 1.0 + 1e-12):
            print(
                f"warning: skipping lambda = {lam!r} outside [{lo:.6g}, 1]",
                file=sys.stderr,
            )
            continue
        if lam < 0.0:
            print(
                f"warning: lambda = {lam!r} < 0: closed form carries no attainment "
                "certificate; optimizer value reported alongside",
                file=sys.stderr,
            )
        spec = IsotropicSpec(args.d, lam)
        closed = isotropic_work_of_assistance(spec, ctx)
        state = isotropic_state(spec)
        cfg = replace(config, seed=derive_seed(config.seed, f"lambda:{i}"))
        opt = optimize_classical_correlations(state, cfg)
        rel = relative_entropy(state.marginal_b(), ctx.gibbs).value
        w_a_opt = (rel + opt.value) / beta
        w_r = relative_entropy_of_collaboration(state, ctx)
        rows.append(
            {
                "lambda": lam,
                "w_a_closed_form": closed.value,
                "w_a_optimizer": w_a_opt,
                "gap": closed.value - w_a_opt,
                "w_r": w_r,
                "discord_gap": w_r - w_a_opt,
            }
        )
    header = ["lambda", "w_a_closed_form", "w_a_optimizer", "gap", "w_r", "discord_gap"]
    ser.write_csv(args.out, header, [[r[h] for h in header] for r in rows])
    fig = _fig_path(args)
    if fig is not None and rows:
        plotting.render_isotropic_figure(rows, fig)
        print(f"wrote {args.out} and {fig} ({len(rows)} rows)")
    else:
        print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _sweep_row(i: int, args, ctx, beta: float):
    seed_i = derive_seed(args.seed, f"row:{i}")
    qt = args.qt_every > 0 and (i + 1) % args.qt_every == 0
    if qt:
        sigma = random_density(args.dim_a, args.dim_a, seed_i)
        rho = BipartiteState.from_matrix(
            kron(sigma.mat, ctx.gibbs.mat), args.dim_a, args.dim_b
        )
    else:
        rho = random_bipartite(args.dim_a, args.dim_b, args.dim_a * args.dim_b, seed_i)
    cfg = OptConfig(
        restarts=args.restarts, seed=seed_i, tol=args.tol, max_iter=args.max_iter
    )
    rep = hierarchy_report(rho, ctx, cfg)
    formation_residual = ""
    if args.dim_a == 2 and args.dim_b == 2:
        ef = entanglement_of_formation_small(
            a_complement(rho), replace(cfg, seed=derive_seed(seed_i, "ef"))
        )
        s_b = von_neumann_entropy(rho.marginal_b())
        formation_residual = float(ef.value + rep.j_arrow - s_b)
    return {
        "index": i,
        "kind": "qt" if qt else "random",
        "w_unassisted": rep.w_unassisted,
        "w_assistance": rep.w_assistance,
        "w_collaboration_upper": rep.w_collaboration_upper,
        "discord_gap": rep.discord_gap,
        "mutual_info": rep.mutual_info,
        "j_arrow": rep.j_arrow,
        "beta": beta,
        "formation_residual": formation_residual,
    }


def _check_sweep_row(row: dict, beta: float) -> None:
    slack = 1e-6 / beta
    i = row["index"]
    if row["w_unassisted"] > row["w_assistance"] + slack:
        raise PropertyViolation(f"row {i}: w_unassisted <= w_assistance violated")
    if row["w_assistance"] > row["w_collaboration_upper"] + slack:
        raise PropertyViolation(f"row {i}: w_assistance <= w_collaboration_upper violated")
    gap = row["w_collaboration_upper"] - row["w_assistance"]
    if abs(row["discord_gap"] - gap) > 1e-9:
        raise PropertyViolation(f"row {i}: discord_gap endpoint identity violated")
    if row["discord_gap"] < -1e-6 / beta:
        raise PropertyViolation(f"row {i}: discord_gap nonnegativity violated")
    if row["formation_residual"] != "" and abs(row["formation_residual"]) > FORMATION_TOL:
        raise PropertyViolation(f"row {i}: formation/correlations identity violated")
    if row["kind"] == "qt":
        size = max(
            abs(row["w_unassisted"]),
            abs(row["w_assistance"]),
            abs(row["w_collaboration_upper"]),
            abs(row["discord_gap"]),
        )
        if size > QT_TOL / beta:
            raise PropertyViolation(f"row {i}: quantum-thermal row is not all-zero")


def cmd_sweep(args) -> int:
    beta = _check_beta(args.beta)
    if args.dim_a < 2 or args.dim_b < 2 or args.dim_a > 8 or args.dim_b > 8:
        raise UsageError("--dim-a/--dim-b must be in 2..8")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    ctx = _load_context(args.hamiltonian, beta)
    if ctx.dim != args.dim_b:
        raise UsageError(f"hamiltonian dimension {ctx.dim} != --dim-b {args.dim_b}")
    workers = max(1, int(os.environ.get("THERMOWORK_THREADS", "1")))
    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(
                    pool.map(lambda i: _sweep_row(i, args, ctx, beta), range(args.count))
                )
        else:
            rows = [_sweep_row(i, args, ctx, beta) for i in range(args.count)]
    except ThermoworkError as exc:
        # A report invariant tripping mid-sweep is a property violation.
        raise PropertyViolation(str(exc)) from exc
    header = [
        "index",
        "kind",
        "w_unassisted",
        "w_assistance",
        "w_collaboration_upper",
        "discord_gap",
        "mutual_info",
        "j_arrow",
        "beta",
        "formation_residual",
    ]
    ser.write_csv(args.out, header, [[r[h] for h in header] for r in rows])
    for row in rows:
        _check_sweep_row(row, beta)
    fig = _fig_path(args)
    if fig is not None:
        plotting.render_sweep_figure(rows, fig)
    print(
        f"sweep ok: {len(rows)} rows, every hierarchy invariant holds"
        + (f"; wrote {args.out} and {fig}" if fig is not None else f"; wrote {args.out}")
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PropertyViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except ThermoworkError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_STATE


if __name__ == "__main__":
    sys.exit(main())
