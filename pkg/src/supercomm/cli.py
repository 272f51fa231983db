"""Command-line entry point: generate | compress | detect | evaluate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .compression import (contract, grow_supernodes, map_partition,
                          read_assignment_json, write_assignment_json,
                          write_assignment_text)
from .evaluation import (EvalConfig, report_has_errors, run_evaluation,
                         write_report_csv, write_report_json)
from .generator import planted_partition
from .graph import parse_edge_list, write_edge_list
from .louvain import louvain
from .partition import write_partition_json, write_partition_text
from .rng import derive_seed
from .sbm import (fit_sbm, fit_sbm_supernodes, select_k_scores,
                  select_k_scores_supernodes)
from .seeding import corehd_seeds, degree_seeds


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supercomm",
        description="Compress networks into super nodes and run community detection "
                    "on either representation.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a planted-partition benchmark graph")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--communities", type=int, required=True)
    gen.add_argument("--p-in", type=float, required=True)
    gen.add_argument("--p-out", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-prefix", required=True)
    gen.set_defaults(handler=_cmd_generate)

    comp = sub.add_parser("compress", help="build the super-node representation")
    comp.add_argument("input", help="edge-list file")
    comp.add_argument("--num-supernodes", type=int, default=500)
    comp.add_argument("--seed-method", choices=["corehd", "degree"], default="corehd")
    comp.add_argument("--o-max", type=int, default=5)
    comp.add_argument("--consolidation-passes", type=int, default=1)
    comp.add_argument("--out-prefix", required=True)
    comp.set_defaults(handler=_cmd_compress)

    det = sub.add_parser("detect", help="run community detection, optionally compressed")
    det.add_argument("input", help="edge-list file")
    det.add_argument("--representation", choices=["full", "supernode"], default="full")
    det.add_argument("--algorithm", choices=["louvain", "sbm"], default="louvain")
    det.add_argument("--gamma", type=float, default=1.0)
    det.add_argument("--rng-seed", type=int, default=0)
    det.add_argument("--runs", type=int, default=1)
    det.add_argument("--k", type=int, help="block count for the SBM fit")
    det.add_argument("--k-range", type=int, nargs=2, metavar=("MIN", "MAX"),
                     help="choose K by penalized model selection over this range")
    det.add_argument("--sweeps", type=int, default=10)
    det.add_argument("--num-supernodes", type=int, default=500)
    det.add_argument("--seed-method", choices=["corehd", "degree"], default="corehd")
    det.add_argument("--o-max", type=int, default=5)
    det.add_argument("--consolidation-passes", type=int, default=1)
    det.add_argument("--assignment", help="reuse a compression assignment (JSON)")
    det.add_argument("--out-prefix", required=True)
    det.set_defaults(handler=_cmd_detect)

    ev = sub.add_parser("evaluate", help="run the full evaluation pipeline from a config")
    ev.add_argument("config", help="TOML config file")
    ev.add_argument("--out-dir", default=".")
    ev.add_argument("--jobs", type=int,
                    default=int(os.environ.get("SUPERCOMM_JOBS", "0")) or None,
                    help="parallel runs (default: SUPERCOMM_JOBS or the config value)")
    ev.add_argument("--no-figures", action="store_true")
    ev.set_defaults(handler=_cmd_evaluate)
    return parser


def _cmd_generate(args) -> int:
    g, planted = planted_partition(args.nodes, args.communities, args.p_in,
                                   args.p_out, args.seed)
    edge_path = f"{args.out_prefix}_edges.txt"
    part_path = f"{args.out_prefix}_planted.txt"
    write_edge_list(g, edge_path)
    write_partition_text(planted, g, part_path)
    print(f"generated {g.n_nodes} nodes, {g.n_edges} edges, "
          f"{planted.k} planted communities")
    print(f"wrote {edge_path} and {part_path}")
    return 0


def _load_graph(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh)


def _compress(g, num_supernodes: int, seed_method: str, o_max: int,
              consolidation_passes: int = 1):
    seed_fn = corehd_seeds if seed_method == "corehd" else degree_seeds
    seeds = seed_fn(g, min(num_supernodes, g.n_nodes))
    a = grow_supernodes(g, seeds, o_max, consolidation_passes=consolidation_passes)
    return a, contract(g, a)


def _cmd_compress(args) -> int:
    g = _load_graph(args.input)
    a, sn = _compress(g, args.num_supernodes, args.seed_method, args.o_max,
                      args.consolidation_passes)
    prefix = args.out_prefix
    write_edge_list(sn.graph, f"{prefix}_supernode_edges.txt")
    write_assignment_text(a, g, f"{prefix}_assignment.txt")
    write_assignment_json(a, g, f"{prefix}_assignment.json")
    summary = {
        "s_requested": args.num_supernodes,
        "s_actual": a.n_supernodes,
        "seed_method": args.seed_method,
        "o_max": args.o_max,
        "consolidation_passes": args.consolidation_passes,
        "periphery_count": a.periphery_count,
        "internal_weight_total": float(sn.internal_weight.sum()),
        "periphery_edge_weight": sn.periphery_edge_weight,
        "conservation_gap": sn.conservation_gap(g),
        "conservation_ok": sn.conservation_gap(g) < 1e-9,
    }
    with open(f"{prefix}_compression.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"compressed {g.n_nodes} nodes into {a.n_supernodes} super nodes "
          f"({a.periphery_count} periphery)")
    return 0


def _cmd_detect(args) -> int:
    g = _load_graph(args.input)
    prefix = args.out_prefix

    assignment = None
    sn_network = None
    if args.representation == "supernode":
        if args.assignment:
            assignment = read_assignment_json(args.assignment, g)
        else:
            assignment, _ = _compress(g, args.num_supernodes, args.seed_method,
                                      args.o_max, args.consolidation_passes)
        sn_network = contract(g, assignment)
        detect_graph = sn_network.graph
    else:
        detect_graph = g

    summary: dict = {
        "input": args.input,
        "representation": args.representation,
        "algorithm": args.algorithm,
        "runs": args.runs,
        "rng_seed": args.rng_seed,
    }
    selected_k = None
    if args.algorithm == "sbm":
        sbm_graph = detect_graph if detect_graph.is_unit_weighted \
            else detect_graph.binarized()
        if args.k_range:
            lo, hi = args.k_range
            hi = min(hi, detect_graph.n_nodes)
            if sn_network is not None:
                rows = select_k_scores_supernodes(
                    sn_network, assignment, lo, hi,
                    derive_seed(args.rng_seed, "select_k"), sweeps=args.sweeps)
            else:
                rows = select_k_scores(sbm_graph, lo, hi,
                                       derive_seed(args.rng_seed, "select_k"),
                                       sweeps=args.sweeps)
            best = rows[0]
            for row in rows[1:]:
                if row["score"] > best["score"]:
                    best = row
            selected_k = int(best["k"])
            summary["select_k_scores"] = rows
        elif args.k:
            selected_k = args.k
        else:
            raise ValueError("sbm detection needs --k or --k-range")
        summary["k"] = selected_k

    run_records = []
    for run in range(args.runs):
        run_seed = derive_seed(args.rng_seed, "detect", run)
        if args.algorithm == "louvain":
            part, objective = louvain(detect_graph, args.gamma, run_seed)
            objective_name = "modularity"
        elif sn_network is not None:
            part, objective = fit_sbm_supernodes(sn_network, assignment, selected_k,
                                                 run_seed, sweeps=args.sweeps)
            objective_name = "loglik"
        else:
            part, objective = fit_sbm(sbm_graph, selected_k, run_seed,
                                      sweeps=args.sweeps)
            objective_name = "loglik"
        if assignment is not None:
            part = map_partition(part, assignment)
        part_path = f"{prefix}_run{run}_partition.txt"
        write_partition_text(part, g, part_path)
        write_partition_json(part, g, f"{prefix}_run{run}_partition.json")
        run_records.append({"run": run, "seed": run_seed, "k_found": part.k,
                            objective_name: objective, "partition": part_path})
    summary["gamma"] = args.gamma
    summary["run_results"] = run_records
    with open(f"{prefix}_detect.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for rec in run_records:
        obj = rec.get("modularity", rec.get("loglik"))
        print(f"run {rec['run']}: K={rec['k_found']} objective={obj:.6f}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = EvalConfig.from_toml(args.config)
    if args.jobs:
        cfg = EvalConfig(**{**cfg.__dict__, "jobs": args.jobs})
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = run_evaluation(cfg)
    write_report_json(report, outdir / "report.json")
    write_report_csv(report, outdir / "report.csv")
    written = [outdir / "report.json", outdir / "report.csv"]
    if not args.no_figures:
        from .plotting import render_report_figures

        written.extend(render_report_figures(report, outdir / "figures"))
    for path in written:
        print(f"wrote {path}")
    if report_has_errors(report):
        for blk in report["networks"]:
            for leg, msg in blk["provenance"].get("errors", {}).items():
                print(f"error in {blk['network']}/{leg}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
