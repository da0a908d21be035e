"""Command-line front end.

Every command prints ``seed: <n>`` first.  With a fixed ``--seed`` the output
is byte-identical across runs and across ``--threads`` values.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats

from . import analysis
from .amplification import default_iteration_cap, subroutine1
from .dataset import (
    DEFAULT_VALUE_BOUND,
    DatasetError,
    planted_pair,
    random_instance,
    read_dataset,
)
from .full_circuit import RegisterLayout, compare_with_reduced
from .ledger import QueryLedger
from .qintersection import RunConfig, q_intersection, q_union, results_csv
from .rng import resolve_seed, trial_rng
from .statevector import (
    SimulationError,
    grover_power,
    success_probability,
    theoretical_success,
    uniform_init,
)

EQUIVALENCE_TOL = 1e-10
ANCILLA_TOL = 1e-12


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit master seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="write delimited output to FILE")

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--engine", choices=("reduced", "full"), default="reduced")
    engine.add_argument("--cap-factor", type=float, default=3.0)
    engine.add_argument("--confirm", type=int, default=2)

    sets = argparse.ArgumentParser(add_help=False)
    sets.add_argument("--set-a", required=True)
    sets.add_argument("--set-b", required=True)
    sets.add_argument("--dim", type=int, required=True)
    sets.add_argument("--value-bound", type=int, default=DEFAULT_VALUE_BOUND)

    p = argparse.ArgumentParser(prog="qsetop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("intersect", parents=[common, engine, sets], help="quantum intersection of two record files")
    u = sub.add_parser("union", parents=[common, engine, sets], help="union via complements in a universe")
    u.add_argument("--universe", required=True)

    g = sub.add_parser("grover-curve", parents=[common], help="simulated vs closed-form success curve")
    g.add_argument("--mn", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--k-max", type=int, default=None)

    b = sub.add_parser("bbht-stats", parents=[common, engine], help="Monte Carlo of one search call")
    b.add_argument("--mn", type=int, required=True)
    b.add_argument("--t", type=int, required=True)
    b.add_argument("--trials", type=int, default=1000)
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--value-bound", type=int, default=DEFAULT_VALUE_BOUND)

    s = sub.add_parser("scaling", parents=[common, engine], help="query-count scaling grid")
    s.add_argument("--mn", type=_int_list, default=[256, 1024, 4096])
    s.add_argument("--c-size", type=_int_list, default=[1])
    s.add_argument("--trials", type=int, default=analysis.MIN_TRIALS)

    v = sub.add_parser("verify-equivalence", parents=[common], help="five-register circuit vs reduced model")
    v.add_argument("--n-bits", type=int, default=2)
    v.add_argument("--m-bits", type=int, default=2)
    v.add_argument("--dim", type=int, default=2)
    v.add_argument("--value-bound", type=int, default=3)
    v.add_argument("--trials", type=int, default=20)
    return p


def _emit(args, out, text: str) -> None:
    """Delimited payload goes to --out when given, else to stdout."""
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        out.append(f"wrote: {args.out}")
    else:
        out.append(text.rstrip("\n"))


def _run_config(args, seed: int) -> RunConfig:
    return RunConfig(
        master_seed=seed,
        iteration_cap_factor=args.cap_factor,
        confirm_repeats=args.confirm,
        engine=args.engine,
    )


def _load(path, args, stage):
    try:
        return read_dataset(path, args.dim, args.value_bound)
    except (OSError, DatasetError) as exc:
        raise StageError(stage, str(exc)) from None


def cmd_intersect(args, seed, out):
    A = _load(args.set_a, args, "load set A")
    B = _load(args.set_b, args, "load set B")
    try:
        res = q_intersection(A, B, _run_config(args, seed))
    except (SimulationError, ValueError) as exc:
        raise StageError("simulate", str(exc)) from None
    out.append(res.report())
    if args.out:
        row = res.csv_row(seed=seed, mn=len(A) * len(B))
        _emit(args, out, results_csv([row]))
    return 0


def cmd_union(args, seed, out):
    A = _load(args.set_a, args, "load set A")
    B = _load(args.set_b, args, "load set B")
    U = _load(args.universe, args, "load universe")
    try:
        result = q_union(A, B, U, _run_config(args, seed))
    except DatasetError as exc:
        raise StageError("check universe", str(exc)) from None
    except (SimulationError, ValueError) as exc:
        raise StageError("simulate", str(exc)) from None
    values = sorted(r.values for r in result)
    out.append("A | B = {" + ",".join("(" + ",".join(map(str, v)) + ")" for v in values) + "}")
    out.append(f"size: {len(values)}")
    return 0


def cmd_grover_curve(args, seed, out):
    mn, t = args.mn, args.t
    try:
        n_bits, m_bits = analysis.split_bits(mn)
        if not 1 <= t <= mn:
            raise ValueError(f"t={t} must lie in [1, mn]")
        s = uniform_init(n_bits, m_bits)
    except (ValueError, SimulationError) as exc:
        raise StageError("setup", str(exc)) from None
    rng = trial_rng(seed)
    flat = rng.choice(mn, size=t, replace=False)
    m = 1 << m_bits
    marked = [divmod(int(k), m) for k in flat]
    k_max = args.k_max if args.k_max is not None else math.floor(2 * math.sqrt(mn))
    lines = ["k,exact,theory,abs_diff"]
    for k in range(k_max + 1):
        exact = success_probability(s, marked)
        theory = theoretical_success(k, t, mn)
        lines.append(f"{k},{exact:.12f},{theory:.12f},{abs(exact - theory):.3e}")
        s = grover_power(s, marked, 1)
    _emit(args, out, "\n".join(lines))
    return 0


def _bbht_trial(job):
    seed, trial, n_bits, m_bits, t, dim, bound, cap, engine = job
    rng = trial_rng(seed, trial)
    A, B = planted_pair(1 << n_bits, 1 << m_bits, t, rng, dim, bound)
    ledger = QueryLedger()
    hit = subroutine1(A, B, rng, ledger, iteration_cap=cap, engine=engine)
    return hit is not None, ledger.ggi_queries, ledger.measurements


def _map(fn, jobs, threads):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs, chunksize=8))
    return [fn(j) for j in jobs]


def cmd_bbht_stats(args, seed, out):
    try:
        n_bits, m_bits = analysis.split_bits(args.mn)
        if not 0 <= args.t <= min(1 << n_bits, 1 << m_bits):
            raise ValueError(f"t={args.t} must lie in [0, min(N, M)] for distinct records")
    except ValueError as exc:
        raise StageError("setup", str(exc)) from None
    cap = default_iteration_cap(args.mn, args.cap_factor)
    jobs = [
        (seed, k, n_bits, m_bits, args.t, args.dim, args.value_bound, cap, args.engine)
        for k in range(args.trials)
    ]
    try:
        res = _map(_bbht_trial, jobs, args.threads)
    except (SimulationError, DatasetError) as exc:
        raise StageError("simulate", str(exc)) from None
    found = sum(r[0] for r in res)
    lines = [
        "mn,t,trials,found,rate,ci_low,ci_high,mean_ggi,mean_measurements,iteration_cap",
    ]
    ci = stats.binomtest(found, args.trials).proportion_ci(0.95, method="exact")
    lines.append(
        f"{args.mn},{args.t},{args.trials},{found},{found / args.trials:.6f},"
        f"{ci.low:.6f},{ci.high:.6f},{np.mean([r[1] for r in res]):.4f},"
        f"{np.mean([r[2] for r in res]):.4f},{cap}"
    )
    _emit(args, out, "\n".join(lines))
    if args.t > 0:
        out.append(f"sqrt(mn/t) = {math.sqrt(args.mn / args.t):.4f}")
    return 0


def cmd_scaling(args, seed, out):
    grid = [(mn, c) for mn in args.mn for c in args.c_size]
    try:
        points = analysis.run_scaling_experiment(
            grid, args.trials, seed, _run_config(args, seed), threads=args.threads
        )
    except (ValueError, SimulationError, DatasetError) as exc:
        raise StageError("scaling", str(exc)) from None
    _emit(args, out, analysis.scaling_csv(points))
    out.append(analysis.summary_table(points))
    if len(args.mn) >= 3:
        for c in args.c_size:
            fit = analysis.fit_exponent([(p.mn, p.mean_queries) for p in points if p.c_size == c])
            out.append(f"slope vs mn at |C|={c}: {fit.slope:.4f} +/- {fit.stderr:.4f}")
    if len(args.c_size) >= 3:
        for mn in args.mn:
            sel = [p for p in points if p.mn == mn and p.c_size > 0]
            if len(sel) >= 3:
                fit = analysis.fit_exponent([(p.c_size, p.mean_queries) for p in sel])
                out.append(f"slope vs |C| at mn={mn}: {fit.slope:.4f} +/- {fit.stderr:.4f}")
    return 0


def cmd_verify(args, seed, out):
    try:
        layout = RegisterLayout(args.n_bits, args.m_bits, args.dim, args.value_bound)
    except SimulationError as exc:
        raise StageError("layout", str(exc)) from None
    mn = 1 << (args.n_bits + args.m_bits)
    k_max = math.floor(2 * math.sqrt(mn))
    worst_delta = worst_mass = 0.0
    for trial in range(args.trials):
        rng = trial_rng(seed, trial)
        A, B = random_instance(args.n_bits, args.m_bits, rng, args.dim, args.value_bound)
        delta, mass = compare_with_reduced(A, B, k_max)
        worst_delta = max(worst_delta, delta)
        worst_mass = max(worst_mass, mass)
    ok = worst_delta <= EQUIVALENCE_TOL and worst_mass < ANCILLA_TOL
    out.append(f"layout: {layout.total_bits} bits (n={args.n_bits} m={args.m_bits} a=b={layout.a_bits} f=1)")
    out.append(f"instances: {args.trials}, k = 0..{k_max}")
    out.append(f"max amplitude delta: {worst_delta:.3e}")
    out.append(f"max ancilla mass: {worst_mass:.3e}")
    out.append(("max amplitude delta <= 1e-10" if worst_delta <= EQUIVALENCE_TOL else "max amplitude delta > 1e-10 FAILED"))
    return 0 if ok else 1


COMMANDS = {
    "intersect": cmd_intersect,
    "union": cmd_union,
    "grover-curve": cmd_grover_curve,
    "bbht-stats": cmd_bbht_stats,
    "scaling": cmd_scaling,
    "verify-equivalence": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed = resolve_seed(args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    out = [f"seed: {seed}"]
    try:
        status = COMMANDS[args.command](args, seed, out)
    except StageError as exc:
        print("\n".join(out))
        print(f"error [{exc}]", file=sys.stderr)
        return 1
    print("\n".join(out))
    return status


if __name__ == "__main__":
    sys.exit(main())
