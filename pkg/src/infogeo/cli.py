"""Command-line front end: ``infogeo <command> [options]``.

Every command writes data files into ``--out`` and prints their paths.
Exit codes: 0 success, 1 usage or configuration error, 2 numerical
non-convergence (outputs are still written, flagged), 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from infogeo import __version__
from infogeo.errors import InfogeoError, NoConvergenceError
from infogeo.geometry import (
    asymmetry_proportion,
    default_jobs,
    mds_embed,
    pairwise_free_energy,
    symmetrize,
)
from infogeo.infodesics import (
    enumerate_epsilon_infodesics,
    find_value_geodesics,
    interim_histogram,
    scan_triangle_violations,
)
from infogeo.markov import hitting_probabilities, sample_trajectories
from infogeo.mdp import GridSpec, build_gridworld
from infogeo.solver import SolverConfig, solve, tradeoff_curve
from infogeo.value import value_distances

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def parse_betas(text: str) -> list[float]:
    """Comma list ``0.1,1,10`` or geometric range ``a..b:n`` (n defaults to 12)."""
    try:
        if ".." in text:
            span, _, count = text.partition(":")
            lo, hi = (float(x) for x in span.split(".."))
            n = int(count) if count else 12
            if lo <= 0 or hi < lo or n < 1:
                raise ValueError
            return [float(b) for b in np.geomspace(lo, hi, n)] if n > 1 else [lo]
        betas = [float(x) for x in text.split(",") if x.strip()]
        if not betas:
            raise ValueError
        return betas
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list or a..b:n, got {text!r}") from None


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infogeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"infogeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--grid", type=parse_grid, default=(5, 5), help="grid size WxH (default 5x5)")
    common.add_argument("--nbhd", choices=["manhattan", "moore"], default="manhattan")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)
    solver = _Parser(add_help=False)
    solver.add_argument("--eps-f", type=_positive_float, default=1e-5)
    solver.add_argument("--eps-pi", type=_positive_float, default=1e-5)
    solver.add_argument("--max-iters", type=int, default=10_000)
    solver.add_argument("--prior-floor", type=float, default=1e-12)
    parallel = _Parser(add_help=False)
    parallel.add_argument("--jobs", type=int, default=None,
                          help="worker processes (default: $INFOGEO_JOBS or all cores)")

    p = sub.add_parser("solve", parents=[common, solver], help="free-energy solve for one goal")
    p.add_argument("--goal", type=int, default=0)
    p.add_argument("--beta", type=_positive_float, required=True)

    p = sub.add_parser("pairwise", parents=[common, solver, parallel],
                       help="all-pairs free energies, symmetrised matrix and asymmetry")
    p.add_argument("--beta", type=_positive_float, required=True)

    p = sub.add_parser("embed", parents=[common, solver, parallel], help="MDS embedding of D_sym")
    p.add_argument("--beta", type=_positive_float, required=True)
    p.add_argument("--dims", type=int, choices=[2, 3], default=2)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=300)

    p = sub.add_parser("infodesics", parents=[common, solver, parallel],
                       help="interim histogram, triangle violations, optional per-pair enumeration")
    p.add_argument("--beta", type=_positive_float, required=True)
    p.add_argument("--epsilon", type=_positive_float, default=0.05)
    p.add_argument("--len", dest="max_len", type=int, choices=[3, 4, 5], default=3)
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--goal", type=int, default=None)

    p = sub.add_parser("tradeoff", parents=[common, solver], help="E[V] and E[I_D] over a beta sweep")
    p.add_argument("--goal", type=int, default=0)
    p.add_argument("--betas", type=parse_betas, default=parse_betas("0.001..100:12"))

    p = sub.add_parser("sample", parents=[common, solver], help="Monte-Carlo visitation statistics")
    p.add_argument("--goal", type=int, default=0)
    p.add_argument("--beta", type=_positive_float, required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--max-steps", type=int, default=None)

    p = sub.add_parser("geodesics", parents=[common], help="states on shortest paths start -> goal")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--goal", type=int, required=True)
    return parser


# ---- output helpers


def _meta(args) -> dict:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key in ("jobs", "out", "func"):
            continue  # do not affect results
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        config[key] = value
    return {"version": __version__, "config": config, "seed": args.seed}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(path)
    return path


def _csv_text(meta: dict, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# infogeo {meta['version']} seed={meta['seed']} config={json.dumps(meta['config'], sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _emit(args, stem: str, payload: dict, header=None, rows=None) -> Path:
    meta = _meta(args)
    if args.format == "csv" and header is not None:
        return _write(args.out / f"{stem}.csv", _csv_text(meta, header, rows))
    return _write(args.out / f"{stem}.json", _dumps({"meta": meta, **payload}))


def _matrix_rows(values):
    n = values.shape[0]
    return ["from\\to"] + list(range(n)), ([i] + list(values[i]) for i in range(n))


def _spec(args, goal=0) -> GridSpec:
    w, h = args.grid
    try:
        return GridSpec(w, h, args.nbhd, goal)
    except ValueError as exc:
        field = "--goal" if "goal" in str(exc) else "--grid"
        raise ConfigError(f"{field}: {exc}") from None


def _check_state(spec: GridSpec, value, name):
    if value is not None and not 0 <= value < spec.n_states:
        raise ConfigError(f"{name}: state {value} out of range for a {spec.width}x{spec.height} grid")


def _config(args, beta) -> SolverConfig:
    try:
        return SolverConfig(beta, args.eps_f, args.eps_pi, args.max_iters, args.prior_floor)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from None


def _jobs(args) -> int:
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs: must be at least 1")
        return args.jobs
    try:
        return default_jobs()
    except ValueError:
        raise ConfigError("INFOGEO_JOBS: must be an integer") from None


# ---- commands


def cmd_solve(args) -> int:
    spec = _spec(args, args.goal)
    config = _config(args, args.beta)
    code = EXIT_OK
    try:
        result = solve(build_gridworld(spec), config)
    except NoConvergenceError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        result, code = exc.result, EXIT_NUMERIC
    rows = zip(range(spec.n_states), result.free_energy, result.decision_information, result.value)
    _emit(args, "solve", {"result": result.to_dict()}, ["state", "F", "I_D", "V"], rows)
    return code


def _pairwise(args):
    spec = _spec(args)
    D = pairwise_free_energy(spec, args.beta, _config(args, args.beta), jobs=_jobs(args))
    bad = int((~D.converged).sum())
    if bad:
        print(f"warning: {bad} pairwise entries did not converge", file=sys.stderr)
    return D, EXIT_NUMERIC if bad else EXIT_OK


def cmd_pairwise(args) -> int:
    D, code = _pairwise(args)
    sym = symmetrize(D)
    asym = asymmetry_proportion(D)
    for stem, values, flags in (
        ("pairwise_raw", D.values, D.converged),
        ("pairwise_sym", sym.values, sym.converged),
        ("asymmetry", asym.values, ~asym.undefined),
    ):
        header, rows = _matrix_rows(values)
        payload = {"beta": args.beta, "values": values.tolist(), "valid": flags.tolist()}
        _emit(args, stem, payload, header, rows)
    return code


def cmd_embed(args) -> int:
    D, code = _pairwise(args)
    if code != EXIT_OK:
        raise NoConvergenceError("cannot embed a matrix with unconverged entries")
    emb = mds_embed(symmetrize(D), args.dims, args.seed, args.restarts, args.max_iter)
    header = ["state"] + ["x", "y", "z"][: args.dims]
    rows = ([i] + list(c) for i, c in enumerate(emb.coords))
    _emit(args, "embedding", {"beta": args.beta, **emb.to_dict()}, header, rows)
    return EXIT_OK


def cmd_infodesics(args) -> int:
    spec = _spec(args)
    if (args.start is None) != (args.goal is None):
        raise ConfigError("--start/--goal: give both or neither")
    _check_state(spec, args.start, "--start")
    _check_state(spec, args.goal, "--goal")
    if args.start is not None and args.start == args.goal:
        raise ConfigError("--start/--goal: must differ")
    D, code = _pairwise(args)
    if code != EXIT_OK:
        raise NoConvergenceError("cannot scan infodesics with unconverged pairwise entries")
    hist = interim_histogram(D, args.epsilon)
    _emit(args, "histogram",
          {"beta": args.beta, "epsilon": args.epsilon, "pairs": hist.pairs, "counts": hist.counts.tolist()},
          ["state", "count"], enumerate(hist.counts.tolist()))
    violations = scan_triangle_violations(D)
    _emit(args, "violations", {"beta": args.beta, "violations": [list(v) for v in violations]},
          ["start", "via", "goal", "deviation"], violations)
    if args.start is not None:
        found = enumerate_epsilon_infodesics(D, args.start, args.goal, args.epsilon, args.max_len)
        lines = [json.dumps({"meta": _meta(args)}, sort_keys=True)]
        lines += [json.dumps(inf.to_dict(), sort_keys=True) for inf in found]
        _write(args.out / "infodesics.jsonl", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    spec = _spec(args, args.goal)
    betas = sorted(args.betas)
    points = tradeoff_curve(build_gridworld(spec), betas, _config(args, betas[0]))
    rows = [(p.beta, p.expected_value, p.expected_information) for p in points]
    payload = {"points": [{"beta": p.beta, "E_V": p.expected_value, "E_I_D": p.expected_information,
                           "converged": p.converged} for p in points]}
    _emit(args, "tradeoff", payload, ["beta", "E_V", "E_I_D"], rows)
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _spec(args, args.goal)
    _check_state(spec, args.start, "--start")
    if args.count < 1:
        raise ConfigError("--count: must be at least 1")
    mdp = build_gridworld(spec)
    code = EXIT_OK
    try:
        result = solve(mdp, _config(args, args.beta))
    except NoConvergenceError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        result, code = exc.result, EXIT_NUMERIC
    stats = sample_trajectories(mdp, result.policy, args.start, args.count, args.seed, args.max_steps)
    exact = hitting_probabilities(mdp, result.policy, args.start)
    payload = {
        "start": stats.start,
        "completed": stats.completed,
        "truncated": stats.truncated,
        "mean_length": stats.mean_length,
        "proportions": stats.proportions.tolist(),
        "mean_visits": stats.mean_visits.tolist(),
        "exact_proportions": exact.tolist(),
    }
    rows = zip(range(spec.n_states), stats.proportions, stats.mean_visits, exact)
    _emit(args, "sample", payload, ["state", "proportion", "mean_visits", "exact_proportion"], rows)
    return code


def cmd_geodesics(args) -> int:
    spec = _spec(args)
    _check_state(spec, args.start, "--start")
    _check_state(spec, args.goal, "--goal")
    states = sorted(find_value_geodesics(value_distances(spec), args.start, args.goal))
    _emit(args, "geodesics", {"start": args.start, "goal": args.goal, "states": states},
          ["state"], ([s] for s in states))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "pairwise": cmd_pairwise,
    "embed": cmd_embed,
    "infodesics": cmd_infodesics,
    "tradeoff": cmd_tradeoff,
    "sample": cmd_sample,
    "geodesics": cmd_geodesics,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfogeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
