"""Benchmark CLI: generate graphs, inspect spectra, solve, estimate, benchmark.

Subcommands
-----------
generate   write a graph family to an edge-list file (+ labels for cliques)
spectrum   dump eigenvalues and eigengaps of a graph as CSV
solve      run the full pipeline and write a metrics CSV + eigenvector file
estimate   compare the walk estimate of L^ell v against the exact value
benchmark  run a suite file and write a summary CSV with speedup ratios

Exit codes: 0 success, 1 experiment failure, 2 bad specification.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .generators import (
    CliqueSpec,
    LinkPredSpec,
    MdpSpec,
    degrade_and_complete,
    gen_clique_clusters,
    gen_three_room_mdp,
)
from .graph import Graph, read_edgelist, write_edgelist, degree_bounds
from .metrics import eigengaps, graph_ground_truth
from .solvers import SolverConfig, run_solver, run_to_csv
from .transforms import SpectralTransform
from .walks import SamplerConfig, enumerate_chains, estimate_power_matvec

_SPEC_ERROR = 2
_RUN_ERROR = 1


class SpecError(ValueError):
    """Raised for malformed experiment specifications."""


def _parse_kv(text: str, what: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise SpecError(f"malformed {what} field {part!r} (expected key=value)")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_graph_spec(spec: str):
    """Parse a graph spec string into (Graph, labels-or-None).

    Forms: ``clique:n=..,k=..[,seed=..][,shortcircuit=..]``;
    ``mdp:s=..,h=..``; ``linkpred:n=..,k=..[,seed=..][,p=..][,lp_seed=..]``;
    ``file:PATH``.
    """
    if ":" not in spec:
        raise SpecError(f"graph spec {spec!r} needs a 'family:' prefix")
    family, rest = spec.split(":", 1)
    try:
        if family == "file":
            return read_edgelist(rest), None
        kv = _parse_kv(rest, "graph")
        if family == "clique":
            cs = CliqueSpec(int(kv["n"]), int(kv["k"]),
                            int(kv.get("shortcircuit", 25)),
                            int(kv.get("seed", 0)))
            return gen_clique_clusters(cs)
        if family == "mdp":
            return gen_three_room_mdp(MdpSpec(int(kv["s"]), int(kv["h"]))), None
        if family == "linkpred":
            cs = CliqueSpec(int(kv["n"]), int(kv["k"]),
                            int(kv.get("shortcircuit", 25)),
                            int(kv.get("seed", 0)))
            ls = LinkPredSpec(cs, float(kv.get("p", 0.2)),
                              int(kv.get("lp_seed", 0)))
            g, _ = degrade_and_complete(ls)
            _, labels = gen_clique_clusters(cs)
            return g, labels
    except (KeyError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad graph spec {spec!r}: {exc}") from exc
    raise SpecError(f"unknown graph family {family!r}")


def parse_transform(name: str, degree: int | None, epsilon: float) -> SpectralTransform:
    mapping = {
        "identity": ("identity", False),
        "log": ("log", False),
        "log-taylor": ("log-taylor", True),
        "negexp": ("negexp", False),
        "negexp-taylor": ("negexp-taylor", True),
        "negexp-limit": ("negexp-limit", True),
    }
    if name not in mapping:
        raise SpecError(f"unknown transform {name!r}")
    kind, needs_degree = mapping[name]
    if needs_degree and degree is None:
        raise SpecError(f"transform {name!r} requires --degree")
    try:
        return SpectralTransform(kind, ell=degree if needs_degree else None,
                                 epsilon=epsilon)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_generate(args) -> int:
    g, labels = parse_graph_spec(args.graph)
    write_edgelist(g, args.out)
    if labels is not None and args.labels:
        _write(args.labels, "\n".join(str(int(x)) for x in labels) + "\n")
    print(f"wrote {g.n} nodes, {g.m} edges to {args.out}")
    return 0


def cmd_spectrum(args) -> int:
    g, _ = parse_graph_spec(args.graph)
    gt = graph_ground_truth(g, args.mode)
    lines = ["index,eigenvalue,gap,ratio"]
    gaps = eigengaps(gt)
    for i, lam in enumerate(gt.eigenvalues):
        if i < len(gaps):
            gap, ratio = gaps[i]
            ratio_txt = "" if np.isinf(ratio) else repr(float(ratio))
            lines.append(f"{i},{float(lam)!r},{gap!r},{ratio_txt}")
        else:
            lines.append(f"{i},{float(lam)!r},,")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(solver=args.solver, k=args.k, eta=args.eta,
                            steps=args.steps, batch_size=args.batch_size,
                            seed=args.seed, eval_every=args.eval_every,
                            eta_schedule=args.eta_schedule,
                            streak_epsilon=args.streak_epsilon)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def cmd_solve(args) -> int:
    g, _ = parse_graph_spec(args.graph)
    transform = parse_transform(args.transform, args.degree, args.epsilon)
    config = _solver_config(args)
    run = run_solver(g, transform, config,
                     record_timing=args.timing == "wall")
    _write(args.out, run_to_csv(run))
    if args.vectors:
        rows = "\n".join(" ".join(repr(float(x)) for x in row)
                         for row in run.V)
        _write(args.vectors, rows + "\n")
    last = run.records[-1]
    print(f"final step {last.step}: subspace_error={last.subspace_error:.3e} "
          f"streak={last.streak}")
    return 0


def cmd_estimate(args) -> int:
    g, _ = parse_graph_spec(args.graph)
    cfg = SamplerConfig(ell=args.ell, walks_per_estimate=args.walks,
                        n_walkers=args.walkers, mode=args.mode, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    v = rng.standard_normal(g.n)
    est = estimate_power_matvec(g, args.ell, v, cfg)
    db = degree_bounds(g)
    budget = g.m * (db.deg_star_inc ** (args.ell - 1))
    if budget <= 10_000_000:
        exact = enumerate_chains(g, args.ell) @ v
        denom = float(np.linalg.norm(exact))
        rel = float(np.linalg.norm(est - exact)) / (denom if denom else 1.0)
        print(f"ell={args.ell} walks={args.walks} mode={args.mode} "
              f"relative_error={rel:.6f}")
    else:
        print(f"ell={args.ell} walks={args.walks} mode={args.mode} "
              f"exact value not enumerable (budget)")
    return 0


# --- benchmark suites ------------------------------------------------------

_SUITE_DEFAULTS = {
    "transform": "identity",
    "degree": "",
    "epsilon": "1e-6",
    "solver": "oja",
    "k": "2",
    "eta": "0.1",
    "steps": "1000",
    "batch_size": "0",
    "seed": "0",
    "eval_every": "100",
    "streak_epsilon": "0.01",
    "eta_schedule": "constant",
    "suberr_target": "",
}


def parse_suite(text: str) -> list[dict[str, str]]:
    """Parse the line-oriented suite format: key=value blocks, blank-separated."""
    blocks: list[dict[str, str]] = []
    cur: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line:
            if cur:
                blocks.append(cur)
                cur = {}
            continue
        if line.startswith("#"):
            continue
        if "=" not in line:
            raise SpecError(f"suite line {lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        cur[key.strip()] = val.strip()
    if cur:
        blocks.append(cur)
    for i, block in enumerate(blocks):
        if "graph" not in block:
            raise SpecError(f"suite block {i + 1} is missing a graph= line")
        block.setdefault("name", f"run{i + 1}")
        for key, val in _SUITE_DEFAULTS.items():
            block.setdefault(key, val)
    return blocks


def _run_suite_block(block: dict[str, str]):
    g, _ = parse_graph_spec(block["graph"])
    degree = int(block["degree"]) if block["degree"] else None
    transform = parse_transform(block["transform"], degree,
                                float(block["epsilon"]))
    config = SolverConfig(solver=block["solver"], k=int(block["k"]),
                          eta=float(block["eta"]), steps=int(block["steps"]),
                          batch_size=int(block["batch_size"]),
                          seed=int(block["seed"]),
                          eval_every=int(block["eval_every"]),
                          eta_schedule=block["eta_schedule"],
                          streak_epsilon=float(block["streak_epsilon"]))
    target = float(block["suberr_target"]) if block["suberr_target"] else None
    return run_solver(g, transform, config, subspace_target=target,
                      stop_on_targets=True, record_timing=False)


def cmd_benchmark(args) -> int:
    with open(args.suite) as fh:
        blocks = parse_suite(fh.read())
    header = ("name,transform,solver,steps_to_streak_k,steps_to_suberr,"
              "speedup_streak,status")
    rows = []
    results = []
    failures = 0
    for block in blocks:
        try:
            run = _run_suite_block(block)
            results.append((block, run, None))
        except Exception as exc:  # noqa: BLE001 - suite keeps going
            results.append((block, None, str(exc)))
            failures += 1
    baseline_steps = None
    for block, run, err in results:
        if err is None and block["transform"] == "identity" \
                and run.steps_to_streak is not None:
            baseline_steps = run.steps_to_streak
            break
    for block, run, err in results:
        if err is not None:
            rows.append(f"{block['name']},{block['transform']},{block['solver']}"
                        f",,,,error: {err}")
            continue
        streak_steps = run.steps_to_streak
        suberr_steps = run.steps_to_subspace
        if baseline_steps is not None and streak_steps is not None:
            if streak_steps == 0:
                speedup = ""
            else:
                speedup = repr(baseline_steps / streak_steps)
        else:
            speedup = ""
        rows.append(",".join([
            block["name"], block["transform"], block["solver"],
            "" if streak_steps is None else str(streak_steps),
            "" if suberr_steps is None else str(suberr_steps),
            speedup, "ok",
        ]))
    text = header + "\n" + "".join(r + "\n" for r in rows)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return _RUN_ERROR if failures else 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=["oja", "mu-eg"], default="oja")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=0, dest="batch_size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-every", type=int, default=100, dest="eval_every")
    p.add_argument("--eta-schedule", choices=["constant", "invsqrt"],
                   default="constant", dest="eta_schedule")
    p.add_argument("--streak-epsilon", type=float, default=0.01,
                   dest="streak_epsilon")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specgap",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a graph family to disk")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", help="dump eigenvalues and gaps")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=["unnormalized", "normalized"],
                   default="unnormalized")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("solve", help="run the graph -> transform -> solver pipeline")
    p.add_argument("--graph", required=True)
    p.add_argument("--transform", default="identity")
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.add_argument("--vectors", default=None)
    p.add_argument("--timing", choices=["wall", "off"], default="wall")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("estimate", help="walk-sampled L^ell v vs exact")
    p.add_argument("--graph", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--walks", type=int, default=10000)
    p.add_argument("--walkers", type=int, default=1)
    p.add_argument("--mode", choices=["importance", "rejection"],
                   default="importance")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("benchmark", help="run a suite file, write summary CSV")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _SPEC_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _SPEC_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return _RUN_ERROR


if __name__ == "__main__":
    sys.exit(main())
