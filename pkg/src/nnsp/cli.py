"""Command-line entry point: ``nnsp certify|recover|sample|experiment``.

Exit codes: 0 success / certified, 1 usage or input error, 2 refuted,
3 solver stopped at the iteration limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as nio
from .certify import certify_nnsp, max_kappa, SIGNATURE_CAP
from .errors import NNSPError
from .experiments import ExperimentConfig, run_experiment
from .recovery import Observation, SolverConfig, recover
from .sampling import GENERATOR, boundary_adjacent, per_cluster, uniform_random

EXIT_OK, EXIT_INPUT, EXIT_REFUTED, EXIT_NOT_CONVERGED = 0, 1, 2, 3

log = logging.getLogger("nnsp")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for refutation
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _path(p: str | None, what: str) -> Path:
    if not p:
        raise InputError(f"--{what} is required")
    path = Path(p)
    if not path.is_file():
        raise InputError(f"{what} file not found: {p}")
    return path


def cmd_certify(args) -> int:
    graph = nio.read_edges(_path(args.graph, "graph"))
    part = nio.read_partition(_path(args.partition, "partition"), graph)
    samples = nio.read_samples(_path(args.samples, "samples"), graph)
    if args.kappa is None and not args.max_kappa:
        raise InputError("give --kappa and/or --max-kappa")
    out: dict = {}
    code = EXIT_OK
    if args.kappa is not None:
        cert = certify_nnsp(graph, part, samples, args.kappa, args.signature_cap)
        out.update(cert.to_dict())
        if not cert.certified:
            out["boundary_edges"] = [
                [graph.node_ids[graph.heads[e]], graph.node_ids[graph.tails[e]]]
                for e in cert.boundary.tolist()
            ]
            code = EXIT_REFUTED
        if args.flows_out and cert.certified and cert.witnesses:
            nio.write_flow(args.flows_out, cert.witnesses[0][1].flow)
    if args.max_kappa:
        kstar = max_kappa(graph, part, samples, signature_cap=args.signature_cap)
        out["kappa_star"] = kstar
        if args.kappa is None:
            out["certified"] = kstar > 1.0
            code = EXIT_OK if kstar > 1.0 else EXIT_REFUTED
    print(json.dumps(out, indent=2, sort_keys=True))
    return code


def cmd_recover(args) -> int:
    graph = nio.read_edges(_path(args.graph, "graph"))
    values = nio.read_signal(_path(args.observations, "observations"))
    try:
        nodes = graph.from_ids(values.keys())
    except KeyError as exc:
        raise InputError(str(exc)) from None
    obs = Observation(nodes, np.fromiter(values.values(), dtype=float))
    cfg = SolverConfig(args.max_iterations, args.tolerance, args.step_scale)
    res = recover(graph, obs, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nio.write_signal(out_dir / "recovered.csv", graph, res.signal)
    nio.write_csv(out_dir / "trace.csv", ["iteration", "tv", "residual"], res.trace)
    print(
        json.dumps(
            {
                "converged": res.converged,
                "iterations": res.iterations,
                "tv": res.trace[-1][1],
                "signal": str(out_dir / "recovered.csv"),
                "trace": str(out_dir / "trace.csv"),
            },
            indent=2,
        )
    )
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_sample(args) -> int:
    graph = nio.read_edges(_path(args.graph, "graph"))
    if args.strategy == "uniform":
        if args.size is None:
            raise InputError("--size is required for uniform sampling")
        nodes = uniform_random(graph.n_nodes, args.size, args.seed)
    else:
        part = nio.read_partition(_path(args.partition, "partition"), graph)
        if args.strategy == "per-cluster":
            nodes = per_cluster(part, args.rule, graph)
        else:
            nodes = boundary_adjacent(graph, part)
    if args.out:
        nio.write_samples(args.out, graph, nodes)
    else:
        for v in graph.to_ids(nodes):
            print(v)
    meta = {"strategy": args.strategy, "size": int(len(nodes))}
    if args.strategy == "uniform":
        meta.update(seed=args.seed, generator=GENERATOR)
    print(json.dumps(meta), file=sys.stderr)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg_path = _path(args.config, "config")
    cfg = ExperimentConfig.load(cfg_path)
    if cfg.experiment == "roadmap" and not cfg.graph_path.startswith("grid:"):
        gp = Path(cfg.graph_path)
        if not gp.is_absolute() and not gp.is_file():
            gp = cfg_path.parent / gp
        if not gp.is_file():
            raise InputError(f"roadmap graph file not found: {cfg.graph_path}")
        cfg.graph_path = str(gp)
    out_dir = Path(args.out_dir) if args.out_dir else None
    report = run_experiment(cfg, out_dir)
    report["config_sha256"] = nio.file_digest(cfg_path)
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_dir is not None:
        (out_dir / "report.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nnsp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="check the nullspace property of a sampling set")
    c.add_argument("--graph", required=True)
    c.add_argument("--partition", required=True)
    c.add_argument("--samples", required=True)
    c.add_argument("--kappa", type=float)
    c.add_argument("--max-kappa", action="store_true")
    c.add_argument("--signature-cap", type=int, default=SIGNATURE_CAP)
    c.add_argument("--flows-out", help="write the first witness flow as CSV")
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("recover", help="minimum-TV recovery from observed values")
    r.add_argument("--graph", required=True)
    r.add_argument("--observations", "--samples", dest="observations", required=True)
    r.add_argument("--out-dir", default=".")
    r.add_argument("--max-iterations", type=int, default=SolverConfig.max_iterations)
    r.add_argument("--tolerance", type=float, default=SolverConfig.tolerance)
    r.add_argument("--step-scale", type=float, default=SolverConfig.step_scale)
    r.set_defaults(func=cmd_recover)

    s = sub.add_parser("sample", help="build a sampling set")
    s.add_argument("--graph", required=True)
    s.add_argument("--partition")
    s.add_argument("--strategy", choices=["per-cluster", "boundary-adjacent", "uniform"], required=True)
    s.add_argument("--rule", choices=["middle", "lowest-id"], default="middle")
    s.add_argument("--size", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("experiment", help="run the chain or roadmap experiment")
    e.add_argument("--config", required=True)
    e.add_argument("--out-dir")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InputError, NNSPError, ValueError, OSError, KeyError) as exc:
        print(f"nnsp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
