"""Batch front-end: instance generation, single learning runs, accuracy
sweeps, and the inequality suite, with reproducible JSON/CSV output.

Reports are byte-stable for a fixed seed: floats are serialized with
their shortest round-trip representation and all iteration orders are
deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .learner import main_learn, regime_params
from .oracle import EvolutionOracle
from .pauli import (
    SparseHamiltonian,
    coefficient_norms,
    format_hamiltonian_text,
    parse_hamiltonian_text,
    random_sparse_hamiltonian,
)
from .verify import CHECKS, default_specs, run_check

SWEEP_COLUMNS = (
    "epsilon",
    "t_tot",
    "t_min",
    "queries",
    "final_error",
    "heisenberg_iterations",
    "sql_iterations",
)


def _parse_mode(text: str) -> tuple[str, float]:
    if text == "exact":
        return "exact", 0.0
    if text == "sampled":
        return "sampled", 0.0
    if text.startswith("noisy:"):
        sigma = float(text.split(":", 1)[1])
        if sigma < 0:
            raise argparse.ArgumentTypeError("noise scale must be nonnegative")
        return "exact", sigma
    raise argparse.ArgumentTypeError(
        f"unknown mode {text!r}; expected exact, noisy:<sigma>, or sampled"
    )


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_instance(args, parser: argparse.ArgumentParser) -> SparseHamiltonian:
    if args.infile:
        path = Path(args.infile)
        if not path.exists():
            parser.error(f"input file not found: {path}")
        h = parse_hamiltonian_text(path.read_text())
        if args.m is not None and h.supp > args.m:
            parser.error(f"file has {h.supp} terms but --m={args.m}")
        return h
    if args.n is None or args.m is None:
        parser.error("either --in or both --n and --m are required")
    return random_sparse_hamiltonian(args.n, args.m, args.seed)


def _run_single(
    hidden: SparseHamiltonian,
    m: int,
    min_time: float,
    eps: float,
    regime: str,
    k_order: int | None,
    rho: float,
    delta: float,
    seed: int,
    mode: str,
    sigma: float,
):
    oracle = EvolutionOracle(hidden, min_time)
    params = regime_params(m, hidden.n, min_time, k_order=k_order, regime=regime, rho=rho)
    probe = lambda est: (hidden - est).norm_linf  # noqa: E731 - harness-side truth
    estimate, report = main_learn(
        oracle, m, eps, params, delta, seed, probe, mode=mode, sigma=sigma
    )
    return estimate, report, oracle


def cmd_gen(args, parser) -> int:
    if args.n is None or args.m is None:
        parser.error("gen requires --n and --m")
    try:
        h = random_sparse_hamiltonian(args.n, args.m, args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    text = "# generated instance: n=%d m=%d seed=%d\n%s" % (
        args.n,
        args.m,
        args.seed,
        format_hamiltonian_text(h),
    )
    _write_or_print(text, args.out)
    l1, l2, linf = coefficient_norms(h)
    print(f"terms={h.supp} l1={l1!r} l2={l2!r} linf={linf!r}")
    return 0


def cmd_learn(args, parser) -> int:
    if args.epsilon is None:
        parser.error("learn requires --epsilon")
    hidden = _load_instance(args, parser)
    m = args.m if args.m is not None else hidden.supp
    mode, sigma = args.mode
    estimate, report, oracle = _run_single(
        hidden, m, args.T, args.epsilon, args.regime, args.K, args.rho,
        args.delta, args.seed, mode, sigma,
    )
    payload = report.as_dict()
    payload["estimate"] = {str(lab): coeff for lab, coeff in estimate.items()}
    payload["target_epsilon"] = args.epsilon
    _write_or_print(_json_dump(payload), args.out)
    ok = report.final_error <= args.epsilon and report.ledger["t_min"] == args.T
    if not ok:
        print(
            f"FAIL: final_error={report.final_error!r} target={args.epsilon!r} "
            f"t_min={report.ledger['t_min']!r}",
            file=sys.stderr,
        )
    return 0 if ok else 1


def cmd_sweep(args, parser) -> int:
    if not args.epsilons or len(args.epsilons) < 4:
        parser.error("sweep requires --epsilons with at least 4 values")
    hidden = _load_instance(args, parser)
    m = args.m if args.m is not None else hidden.supp
    mode, sigma = args.mode

    def one_point(item):
        index, eps = item
        _, report, _ = _run_single(
            hidden, m, args.T, eps, args.regime, args.K, args.rho,
            args.delta, args.seed + 1000 * index, mode, sigma,
        )
        heis = sum(1 for r in report.iterations if r.branch == "heisenberg")
        sql = sum(1 for r in report.iterations if r.branch == "sql")
        return {
            "epsilon": eps,
            "t_tot": report.ledger["t_tot"],
            "t_min": report.ledger["t_min"],
            "queries": report.ledger["queries"],
            "final_error": report.final_error,
            "heisenberg_iterations": heis,
            "sql_iterations": sql,
        }

    with ThreadPoolExecutor(max_workers=min(4, len(args.epsilons))) as pool:
        rows = list(pool.map(one_point, enumerate(args.epsilons)))
    rows.sort(key=lambda r: -r["epsilon"])
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(repr(row[col]) if isinstance(row[col], float) else str(row[col]) for col in SWEEP_COLUMNS))
    _write_or_print("\n".join(lines) + "\n", args.out)

    fit_rows = rows
    if args.slope_label == "heisenberg":
        fit_rows = [r for r in rows if r["sql_iterations"] == 0]
    elif args.slope_label == "sql":
        fit_rows = [r for r in rows if r["heisenberg_iterations"] == 0]
    if len(fit_rows) >= 2:
        x = np.log([1.0 / r["epsilon"] for r in fit_rows])
        y = np.log([r["t_tot"] for r in fit_rows])
        slope = float(np.polyfit(x, y, 1)[0])
        print(f"slope={slope!r} points={len(fit_rows)} label={args.slope_label}")
    else:
        print(f"slope=nan points={len(fit_rows)} label={args.slope_label}")
    return 0


def cmd_verify(args, parser) -> int:
    if args.checks:
        names = args.checks.split(",")
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            parser.error(f"unknown check name(s): {', '.join(unknown)}")
        base = {s.name: s for s in default_specs(args.trials, args.seed, args.slack)}
        specs = [base[n] for n in names]
    else:
        specs = default_specs(args.trials, args.seed, args.slack)
    reports = [run_check(spec) for spec in specs]
    header = f"{'check':20s} {'trials':>7s} {'skipped':>8s} {'max_violation':>15s} {'pass':>6s}"
    print(header)
    for rep in reports:
        print(
            f"{rep.name:20s} {rep.trials:7d} {rep.skipped:8d} "
            f"{rep.max_violation:15.3e} {str(rep.passed):>6s}"
        )
    if args.out:
        payload = {"schema": 1, "checks": [rep.as_dict() for rep in reports]}
        Path(args.out).write_text(_json_dump(payload))
    return 0 if all(rep.passed for rep in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamlearn",
        description="Sparse Hamiltonian learning under a minimum evolution time: "
        "generate instances, run the learner, sweep accuracies, verify bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, needs_seed: bool):
        p.add_argument("--n", type=int, default=None, help="qubit count")
        p.add_argument("--m", type=int, default=None, help="sparsity bound")
        p.add_argument("--T", type=float, default=1.0, help="minimum evolution time")
        p.add_argument("--K", type=int, default=None, help="tradeoff order (poly regime)")
        p.add_argument("--regime", choices=("log", "poly"), default="log")
        p.add_argument("--rho", type=float, default=1.0, help="constant relaxation factor >= 1")
        p.add_argument("--delta", type=float, default=0.05, help="failure probability budget")
        p.add_argument("--seed", type=int, required=needs_seed, default=None if needs_seed else 0)
        p.add_argument("--mode", type=_parse_mode, default=("exact", 0.0),
                       help="exact | noisy:<sigma> | sampled")
        p.add_argument("--in", dest="infile", default=None, help="Hamiltonian text file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p_gen = sub.add_parser("gen", help="generate a random instance file")
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--m", type=int, default=None)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(fn=cmd_gen)

    p_learn = sub.add_parser("learn", help="run one learning run and emit a JSON report")
    add_common(p_learn, needs_seed=True)
    p_learn.add_argument("--epsilon", type=float, default=None, help="target accuracy")
    p_learn.set_defaults(fn=cmd_learn)

    p_sweep = sub.add_parser("sweep", help="run a sweep over accuracies and emit CSV")
    add_common(p_sweep, needs_seed=True)
    p_sweep.add_argument(
        "--epsilons", type=lambda s: [float(x) for x in s.split(",")], default=None,
        help="comma-separated accuracy list (at least 4 values)",
    )
    p_sweep.add_argument(
        "--slope-label", choices=("all", "heisenberg", "sql"), default="all",
        help="restrict the slope fit to pure-branch runs",
    )
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the inequality suite")
    p_verify.add_argument("--checks", default=None, help="comma-separated check names")
    p_verify.add_argument("--trials", type=int, default=200)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--slack", type=float, default=None,
                          help="override the per-check pass slack")
    p_verify.add_argument("--out", default=None, help="write the JSON report here")
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args, parser)


if __name__ == "__main__":
    sys.exit(main())
