"""Command-line runner: plans, single mitigations, sweeps and figure reproductions.

Exit codes: 0 success, 2 usage or parameter error, 3 method inapplicable
(noise resistance >= 1), 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .exceptions import ParameterError, QEMError, ResourceLimitError
from .gem import GemConfig, mitigate_gem
from .mem import MemConfig, mitigate_mem
from .neumann import make_plan, optimal_K_mem
from .noise_models import (
    ErrorMatrix,
    GateNoiseSpec,
    bitflip_error_matrix,
    random_error_matrix,
    read_error_csv,
    tensor_local_error,
)
from .quantum_core import DensityMatrix, DiagonalObservable, max_superposition_state
from .sampling import SeededStream

SEED_ENV = "QEM_SEED"
DEFAULT_MAX_SHOTS = 10 ** 10
FIG4_P_GRID = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5"


def fmt(x) -> str:
    """Numbers in CSV output: integers verbatim, floats to 12 significant digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(header, rows, path) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return _emit(buf.getvalue(), path)


def _emit(text: str, path) -> str:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def resolve_seed(flag_value) -> int:
    """Flag beats ``QEM_SEED`` beats 0."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise ParameterError(f"{SEED_ENV}={env!r} is not an integer") from None


def _state(kind: str, n: int) -> DensityMatrix:
    if kind == "zero":
        return DensityMatrix.basis_state(n, 0)
    return max_superposition_state(n)


def _observable(label, n: int) -> DiagonalObservable:
    obs = DiagonalObservable.z_string(n) if label is None else DiagonalObservable.from_label(label)
    if obs.n != n:
        raise ParameterError(f"observable {label!r} acts on {obs.n} qubits, expected {n}")
    return obs


def _one_liner(report) -> str:
    return (f"ideal={fmt(report.ideal)} noisy={fmt(report.noisy_sampled)} "
            f"mitigated={fmt(report.combined_sampled)} (exact noisy={fmt(report.noisy_exact)}, "
            f"exact mitigated={fmt(report.combined_exact)}, K={report.plan.K}, "
            f"M={report.plan.shots_per_term}, guarantee={report.guarantee})")


def _write_report(report, path) -> None:
    text = report.to_json() + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        print(_one_liner(report), file=sys.stderr)
    else:
        _emit(text, path)
        print(_one_liner(report))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_plan(args) -> int:
    if not 0.0 <= args.xi < 1.0:
        raise ParameterError(f"xi = {args.xi} violates the requirement 0 <= xi < 1")
    plan = make_plan(args.epsilon, args.delta, args.xi, args.mode, args.obs_norm)
    if args.format == "json" or args.output:
        _emit(plan.to_json(indent=2) + "\n", args.output)
    if args.format == "text":
        print(f"mode      {args.mode}")
        print(f"xi        {fmt(plan.xi)}")
        print(f"K         {plan.K}")
        print(f"coeffs    {plan.coeffs}")
        print(f"Delta     {plan.delta_cap}")
        print(f"M         {plan.shots_per_term}")
        print(f"overhead  4^{plan.K} = {plan.overhead}")
        print(f"total     {plan.shots_per_term * (plan.K + 1)} shots")
    return 0


def cmd_gem(args) -> int:
    state = _state(args.state, args.n)
    cfg = GemConfig(
        state=state,
        observable=_observable(args.observable, args.n),
        noise=GateNoiseSpec(args.noise, args.param),
        epsilon=args.epsilon,
        delta=args.delta,
        seed=args.seed,
        K=args.K,
        shots=args.shots,
    )
    report = mitigate_gem(cfg, threads=args.threads, method=args.method)
    _write_report(report, args.output)
    return 0


def _error_matrix(args, n: int, stream: SeededStream) -> ErrorMatrix:
    if args.error_csv:
        error = read_error_csv(args.error_csv)
        if error.n != n:
            raise ParameterError(f"{args.error_csv} is a {error.n}-qubit matrix, expected {n}")
        return error
    if args.bitflip is not None:
        return tensor_local_error([bitflip_error_matrix(args.bitflip)] * n)
    return random_error_matrix(n, args.random_xi, stream.child("error-matrix").sub_seed())


def cmd_mem(args) -> int:
    root = SeededStream(args.seed)
    cfg = MemConfig(
        state=_state(args.state, args.n).diagonal(),
        observable=_observable(args.observable, args.n),
        error=_error_matrix(args, args.n, root),
        epsilon=args.epsilon,
        delta=args.delta,
        seed=args.seed,
        K=args.K,
        shots=args.shots,
    )
    report = mitigate_mem(cfg, threads=args.threads, method=args.method)
    _write_report(report, args.output)
    return 0


def cmd_sweep_k(args) -> int:
    if args.xi:
        grid = args.xi
    else:
        if args.steps < 1 or args.xi_min > args.xi_max:
            raise ParameterError("empty xi range")
        grid = np.linspace(args.xi_min, args.xi_max, args.steps)
    # round the grid to the printed precision so each row is self-consistent
    grid = [float(fmt(x)) for x in grid]
    if not grid:
        raise ParameterError("empty xi range")
    rows = [(xi, optimal_K_mem(args.epsilon, xi)) for xi in grid]
    write_csv(["xi", "K"], rows, args.output)
    return 0


def cmd_fig4(args) -> int:
    rows = []
    root = SeededStream(args.seed).child("fig4")
    for i, p in enumerate(args.p_grid):
        cfg = GemConfig(
            state=DensityMatrix.basis_state(1),
            observable=DiagonalObservable.z_string(1),
            noise=GateNoiseSpec("depolarizing", p),
            epsilon=args.epsilon,
            delta=args.delta,
            seed=args.seed,
            K=args.K,
            shots=args.shots,
        )
        report = mitigate_gem(cfg, root.child("p", i), threads=args.threads)
        rows.append((p, report.plan.K, report.plan.shots_per_term, report.ideal, report.noisy_exact,
                     report.combined_exact, report.combined_sampled, report.combined_std_error))
    write_csv(["p", "K", "M", "ideal", "noisy", "mitigated_exact", "mitigated_sampled", "stderr"],
              rows, args.output)
    return 0


def _sidecar_path(output) -> str | None:
    if output is None or output == "-":
        return None
    root, _ = os.path.splitext(output)
    return root + ".json"


def cmd_fig6(args) -> int:
    root = SeededStream(args.seed).child("fig6")
    n = args.n
    if args.error_csv:
        error = read_error_csv(args.error_csv)
        n = error.n
    else:
        error = random_error_matrix(n, args.target_xi, root.child("error-matrix").sub_seed())
    state = max_superposition_state(n).diagonal()
    cfg = MemConfig(state, DiagonalObservable.z_string(n), error, args.epsilon, args.delta,
                    args.seed, args.K, args.shots)
    plan = cfg.plan()
    total = plan.shots_per_term * (plan.K + 1)
    if args.shots is None and total > args.max_shots:
        raise ResourceLimitError(
            f"full budget needs M = {plan.shots_per_term} shots per term "
            f"({total} per trial at K = {plan.K}), above --max-shots {args.max_shots}; "
            "pass --shots to run without the (epsilon, delta) guarantee"
        )

    def trial(t):
        return t, mitigate_mem(cfg, root.child("trial", t))

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(trial, range(args.trials)))
    rows = [(t, r.noisy_sampled, r.combined_sampled) for t, r in results]
    write_csv(["trial", "noisy", "mitigated"], rows, args.output)

    first = results[0][1]
    mitigated = np.array([r[2] for r in rows])
    noisy = np.array([r[1] for r in rows])
    summary = {
        "n": n,
        "xi_m": cfg.xi,
        "ideal": first.ideal,
        "exact_noisy_bias": first.noisy_exact - first.ideal,
        "exact_noisy": first.noisy_exact,
        "exact_mitigated": first.combined_exact,
        "remainder_bound": first.remainder_bound,
        "noisy_std_error": first.per_order[0].std_error,
        "trials": args.trials,
        "mean_noisy": float(noisy.mean()),
        "mean_mitigated": float(mitigated.mean()),
        "plan": plan.to_dict(),
        "guarantee": plan.guarantee,
    }
    side = _sidecar_path(args.output)
    text = json.dumps(summary, indent=2) + "\n"
    if side is None:
        sys.stderr.write(text)
    else:
        _emit(text, side)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p, *, budget=True):
    p.add_argument("--epsilon", type=float, default=0.01, help="target precision (default 0.01)")
    p.add_argument("--delta", type=float, default=0.01, help="failure probability (default 0.01)")
    if budget:
        p.add_argument("--K", type=int, default=None, help="override the truncation order")
        p.add_argument("--shots", type=int, default=None, help="override the shots per term")
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    # accepted both before and after the subcommand name
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help=f"master seed (default ${SEED_ENV} or 0)")
    shared.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads; never changes results (default 1)")
    shared.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="qem", description=__doc__.splitlines()[0], parents=[shared])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[shared], help="truncation order, coefficients and shot budget")
    p.add_argument("--xi", type=float, required=True, help="noise resistance")
    p.add_argument("--mode", choices=("gem", "mem"), default="mem")
    p.add_argument("--obs-norm", type=float, default=1.0, help="||<<O|||_inf (gem only)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p, budget=False)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("gem", parents=[shared], help="gate-error mitigation run, JSON report")
    p.add_argument("--noise", choices=("depolarizing", "dephasing", "amplitude_damping"), required=True)
    p.add_argument("--param", type=float, required=True, help="noise parameter p or gamma")
    p.add_argument("--n", type=int, default=1, help="qubits; the noise acts on each (default 1)")
    p.add_argument("--state", choices=("zero", "plus"), default="zero")
    p.add_argument("--observable", default=None, help="word over {I,Z}; default Z on every qubit")
    p.add_argument("--method", choices=("counts", "shots"), default="counts")
    _add_common(p)
    p.set_defaults(func=cmd_gem)

    p = sub.add_parser("mem", parents=[shared], help="measurement-error mitigation run, JSON report")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--error-csv", help="readout matrix CSV with a dim=<2^n> header")
    src.add_argument("--bitflip", type=float, help="symmetric per-qubit flip probability")
    src.add_argument("--random-xi", type=float, help="seeded random matrix with this noise resistance")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--state", choices=("zero", "plus"), default="zero")
    p.add_argument("--observable", default=None)
    p.add_argument("--method", choices=("direct", "chain"), default="direct")
    _add_common(p)
    p.set_defaults(func=cmd_mem)

    p = sub.add_parser("sweep-k", parents=[shared], help="CSV of the truncation order versus noise resistance")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--xi-min", type=float, default=0.001)
    p.add_argument("--xi-max", type=float, default=0.999)
    p.add_argument("--steps", type=int, default=999)
    p.add_argument("--xi", type=_float_list, default=None, help="explicit comma-separated grid")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("fig4", parents=[shared], help="depolarizing-channel GEM sweep over p")
    p.add_argument("--p-grid", type=_float_list, default=_float_list(FIG4_P_GRID))
    _add_common(p)
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("fig6", parents=[shared], help="repeated MEM trials on a random readout matrix")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--target-xi", type=float, default=0.3)
    p.add_argument("--error-csv", default=None, help="use this readout matrix instead of a random one")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-shots", type=int, default=DEFAULT_MAX_SHOTS,
                   help="refuse full-budget runs needing more shots per trial than this")
    _add_common(p)
    p.set_defaults(func=cmd_fig6)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.threads = getattr(args, "threads", 1)
    args.verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.seed = resolve_seed(getattr(args, "seed", None))
        if args.threads < 1:
            raise ParameterError("--threads must be at least 1")
        if getattr(args, "trials", 1) < 1:
            raise ParameterError("--trials must be at least 1")
        return args.func(args)
    except QEMError as exc:
        print(f"qem {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
