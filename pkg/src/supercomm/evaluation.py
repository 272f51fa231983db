"""Experiment harnesses: runtimes, partition variability, scale matching, local agreement.

All randomness fans out of one master seed through derive_seed, so a report is
reproducible byte-for-byte (timestamps live in a separate metadata field).
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from itertools import combinations
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .compression import (SuperNodeAssignment, SuperNodeNetwork, contract,
                          grow_supernodes, map_partition)
from .graph import Graph, parse_edge_list
from .louvain import louvain
from .metrics import community_size_ranking, kendall_tau, min_auc, nmi
from .partition import Partition
from .rng import derive_seed
from .sbm import fit_sbm, fit_sbm_supernodes, select_k_scores_supernodes
from .seeding import corehd_seeds, degree_seeds

SCHEMA_VERSION = "supercomm-report-v1"

# implementation choices the paper leaves open; echoed in every report
DECISION_FLAGS = {
    "edge_merge": "duplicate/reciprocal edges merged by summing weights",
    "kcore_degree": "unweighted degree for 2-core pruning and CoreHD ties",
    "corehd_fallback": "highest original-graph degree among unselected nodes",
    "growth": "synchronized frontier; strongest connection wins with settled same-order "
              "neighbors as tie evidence; one strongest-connection consolidation pass "
              "by default",
    "periphery": "excluded from the super-node network, weight tracked separately",
    "sbm_pairs": "likelihood over unordered pairs i<j",
    "sbm_on_supernodes": "atomic-unit profile fit; pair budgets from member counts "
                         "(contracted weights as edge counts, periphery excluded)",
    "select_k_penalty": "loglik - K(K+1)/2 * ln(N(N-1)/2)/2",
    "nmi_normalization": "mean of entropies (Danon)",
    "auc_ties": "midrank (Mann-Whitney)",
    "neighborhood_semantics": "distance <= order (ring variant behind a flag)",
}


def default_gamma_grid(size: int = 50, lo: float = 0.05, hi: float = 2.5) -> tuple[float, ...]:
    """Log-spaced resolution grid over the sweep interval [0.05, 2.5]."""
    return tuple(float(x) for x in np.logspace(math.log10(lo), math.log10(hi), size))


# -- scale matching ----------------------------------------------------------


@dataclass(frozen=True)
class MatchResolutionResult:
    """Best-matching resolution plus the full (gamma, tau) audit table."""

    gamma_star: float
    tau_star: float
    table: tuple[tuple[float, float], ...]


def match_resolution(g: Graph, target: Partition, gammas: Sequence[float],
                     rng_seed: int) -> MatchResolutionResult:
    """Pick the gamma whose Louvain partition best matches the target's size ranking.

    Each grid gamma gets one Louvain run (derived seed); similarity is Kendall
    tau between community-size rankings. Gammas where tau is degenerate are
    recorded as NaN and skipped; lowest gamma wins ties.
    """
    if len(gammas) == 0:
        raise ValueError("gamma grid is empty")
    target_ranks = community_size_ranking(target)
    table: list[tuple[float, float]] = []
    best: tuple[float, float] | None = None
    for idx, gamma in enumerate(gammas):
        part, _ = louvain(g, float(gamma), derive_seed(rng_seed, "match", idx))
        try:
            tau = kendall_tau(community_size_ranking(part), target_ranks)
        except ValueError:
            tau = float("nan")
        table.append((float(gamma), tau))
        if not math.isnan(tau) and (best is None or tau > best[1]):
            best = (float(gamma), tau)
    if best is None:
        raise ValueError("degenerate ranking at every gamma in the grid")
    return MatchResolutionResult(gamma_star=best[0], tau_star=best[1], table=tuple(table))


# -- benchmarking ------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkResult:
    times: tuple[float, ...]

    @property
    def median_s(self) -> float:
        return float(np.median(self.times))

    @property
    def min_s(self) -> float:
        return float(min(self.times))


def benchmark(fn: Callable[[], object], repetitions: int = 3) -> BenchmarkResult:
    """Wall-clock the callable; parsing/IO belongs outside the callable."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return BenchmarkResult(tuple(times))


# -- detection runs ----------------------------------------------------------


def _louvain_job(args):
    g, gamma, seed = args
    part, q = louvain(g, gamma, seed)
    return part.labels, q


def _sbm_job(args):
    g, k, seed, sweeps = args
    part, ll = fit_sbm(g, k, seed, sweeps=sweeps)
    return part.labels, ll


def _sbm_supernode_job(args):
    sn, a, k, seed, sweeps = args
    part, ll = fit_sbm_supernodes(sn, a, k, seed, sweeps=sweeps)
    return part.labels, ll


def _run_jobs(worker, arglist, jobs):
    if jobs <= 1 or len(arglist) <= 1:
        return [worker(a) for a in arglist]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, arglist))


def louvain_runs(g: Graph, runs: int, gamma: float, rng_seed: int,
                 jobs: int = 1) -> list[tuple[Partition, float]]:
    args = [(g, gamma, derive_seed(rng_seed, "run", i)) for i in range(runs)]
    return [(Partition(lab), q) for lab, q in _run_jobs(_louvain_job, args, jobs)]


def sbm_runs(g: Graph, k: int, runs: int, rng_seed: int, sweeps: int = 10,
             jobs: int = 1) -> list[tuple[Partition, float]]:
    args = [(g, k, derive_seed(rng_seed, "run", i), sweeps) for i in range(runs)]
    return [(Partition(lab), ll) for lab, ll in _run_jobs(_sbm_job, args, jobs)]


def sbm_supernode_runs(sn: SuperNodeNetwork, a: SuperNodeAssignment, k: int,
                       runs: int, rng_seed: int, sweeps: int = 10,
                       jobs: int = 1) -> list[tuple[Partition, float]]:
    args = [(sn, a, k, derive_seed(rng_seed, "run", i), sweeps) for i in range(runs)]
    return [(Partition(lab), ll) for lab, ll in _run_jobs(_sbm_supernode_job, args, jobs)]


# -- variability -------------------------------------------------------------


def pairwise_nmi_within(parts: Sequence[Partition]) -> list[float]:
    return [nmi(a, b) for a, b in combinations(parts, 2)]


def pairwise_nmi_between(parts_a: Sequence[Partition], parts_b: Sequence[Partition]
                         ) -> list[float]:
    return [nmi(a, b) for a in parts_a for b in parts_b]


def _population_summary(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    q25, q50, q75 = np.percentile(arr, [25, 50, 75])
    return {"n": len(values), "median": float(q50), "iqr": float(q75 - q25)}


@dataclass(frozen=True)
class VariabilityResult:
    """Pairwise-NMI populations from repeated Louvain and SBM runs on one graph."""

    louvain_nmi: tuple[float, ...]
    sbm_nmi: tuple[float, ...]
    cross_nmi: tuple[float, ...]
    summaries: dict
    louvain_partitions: tuple[Partition, ...]
    sbm_partitions: tuple[Partition, ...]


def variability_experiment(g: Graph, runs: int, gamma: float, k: int, rng_seed: int,
                           sweeps: int = 10,
                           supernode: tuple[SuperNodeNetwork, SuperNodeAssignment] | None = None,
                           jobs: int = 1) -> VariabilityResult:
    """`runs` Louvain runs and `runs` SBM fits with derived seeds, compared pairwise.

    For the super-node representation pass supernode=(network, assignment):
    Louvain then runs on the weighted contracted graph, the SBM fit keeps
    super nodes atomic, and every partition is mapped back to the original N
    nodes before any NMI is taken.
    """
    if runs < 2:
        raise ValueError("need at least 2 runs")
    if supernode is None:
        sbm_graph = g if g.is_unit_weighted else g.binarized()
        lparts = [p for p, _ in louvain_runs(g, runs, gamma,
                                             derive_seed(rng_seed, "louvain"), jobs=jobs)]
        sparts = [p for p, _ in sbm_runs(sbm_graph, k, runs, derive_seed(rng_seed, "sbm"),
                                         sweeps=sweeps, jobs=jobs)]
    else:
        sn, a = supernode
        lparts = [p for p, _ in louvain_runs(sn.graph, runs, gamma,
                                             derive_seed(rng_seed, "louvain"), jobs=jobs)]
        sparts = [p for p, _ in sbm_supernode_runs(sn, a, k, runs,
                                                   derive_seed(rng_seed, "sbm"),
                                                   sweeps=sweeps, jobs=jobs)]
        lparts = [map_partition(p, a) for p in lparts]
        sparts = [map_partition(p, a) for p in sparts]
    ll = pairwise_nmi_within(lparts)
    ss = pairwise_nmi_within(sparts)
    cross = pairwise_nmi_between(lparts, sparts)
    summaries = {
        "louvain-louvain": _population_summary(ll),
        "sbm-sbm": _population_summary(ss),
        "louvain-sbm": _population_summary(cross),
    }
    return VariabilityResult(
        louvain_nmi=tuple(ll), sbm_nmi=tuple(ss), cross_nmi=tuple(cross),
        summaries=summaries, louvain_partitions=tuple(lparts),
        sbm_partitions=tuple(sparts))


# -- evaluation pipeline -------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    """Configuration for the end-to-end evaluation command."""

    networks: tuple[tuple[str, str], ...]
    master_seed: int = 7
    num_supernodes: int = 500
    seed_method: str = "corehd"
    o_max: int = 5
    consolidation_passes: int = 1
    runs: int = 10
    star_runs: int = 5
    orders: tuple[int, ...] = (1, 2, 3)
    gamma: float = 1.0
    gamma_grid: tuple[float, ...] = field(default_factory=default_gamma_grid)
    sbm_sweeps: int = 10
    k_range: tuple[int, int] = (2, 20)
    benchmark_repetitions: int = 3
    auc_exact_distance: bool = False
    jobs: int = 1

    @classmethod
    def from_toml(cls, path) -> "EvalConfig":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_dict(raw, base_dir=Path(path).parent)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "EvalConfig":
        known = {}
        for key in ("master_seed", "num_supernodes", "seed_method", "o_max",
                    "consolidation_passes", "runs", "star_runs", "gamma",
                    "sbm_sweeps", "benchmark_repetitions", "auc_exact_distance",
                    "jobs"):
            if key in raw:
                known[key] = raw[key]
        if "orders" in raw:
            known["orders"] = tuple(int(o) for o in raw["orders"])
        if "k_range" in raw:
            lo, hi = raw["k_range"]
            known["k_range"] = (int(lo), int(hi))
        grid = raw.get("gamma_grid")
        if isinstance(grid, dict):
            known["gamma_grid"] = default_gamma_grid(
                size=int(grid.get("size", 50)),
                lo=float(grid.get("min", 0.05)),
                hi=float(grid.get("max", 2.5)))
        elif isinstance(grid, list):
            known["gamma_grid"] = tuple(float(x) for x in grid)
        networks = []
        for entry in raw.get("networks", []):
            path = Path(entry["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            networks.append((entry["name"], str(path)))
        return cls(networks=tuple(networks), **known)

    def echo(self) -> dict:
        raw = asdict(self)
        raw["gamma_grid"] = list(self.gamma_grid)
        raw["orders"] = list(self.orders)
        raw["k_range"] = list(self.k_range)
        raw["networks"] = [{"name": n, "path": p} for n, p in self.networks]
        return raw


def _seed_fn(method: str):
    if method == "corehd":
        return corehd_seeds
    if method == "degree":
        return degree_seeds
    raise ValueError(f"unknown seed method {method!r}")


def evaluate_network(name: str, g: Graph, cfg: EvalConfig) -> dict:
    """Run the four experiment legs for one network; per-leg errors are recorded."""
    errors: dict[str, str] = {}
    seed = cfg.master_seed
    runtimes: dict[str, float] = {}
    nmi_pairs: dict = {}
    min_auc_map: dict[str, float] = {}
    provenance: dict = {
        "config": cfg.echo(),
        "decision_flags": DECISION_FLAGS,
        "network": {"n_nodes": g.n_nodes, "n_edges": g.n_edges},
    }
    matched_gamma = None
    matched_k = None

    seed_fn = _seed_fn(cfg.seed_method)
    s = min(cfg.num_supernodes, g.n_nodes)

    def build():
        seeds = seed_fn(g, s)
        a = grow_supernodes(g, seeds, cfg.o_max,
                            consolidation_passes=cfg.consolidation_passes)
        return a, contract(g, a)

    try:
        a, sn = build()
        runtimes["compression"] = benchmark(build, cfg.benchmark_repetitions).median_s
        provenance["compression"] = {
            "s_requested": cfg.num_supernodes,
            "s_actual": a.n_supernodes,
            "seed_method": cfg.seed_method,
            "o_max": cfg.o_max,
            "consolidation_passes": cfg.consolidation_passes,
            "periphery_count": a.periphery_count,
            "internal_weight_total": float(sn.internal_weight.sum()),
            "periphery_edge_weight": sn.periphery_edge_weight,
            "conservation_gap": sn.conservation_gap(g),
        }
    except Exception as exc:  # noqa: BLE001 - legs report, caller decides
        errors["compression"] = str(exc)
        provenance["errors"] = errors
        return {"network": name, "runtimes": runtimes, "nmi_pairs": nmi_pairs,
                "matched_gamma": matched_gamma, "matched_k": matched_k,
                "min_auc": min_auc_map, "provenance": provenance}

    w_net = sn.graph
    g_sbm = g if g.is_unit_weighted else g.binarized()

    try:
        k_lo, k_hi = cfg.k_range
        k_hi = min(k_hi, w_net.n_nodes)
        rows = select_k_scores_supernodes(sn, a, k_lo, k_hi,
                                          derive_seed(seed, name, "select_k"),
                                          sweeps=cfg.sbm_sweeps)
        best = rows[0]
        for row in rows[1:]:
            if row["score"] > best["score"]:
                best = row
        matched_k = int(best["k"])
        provenance["select_k_scores"] = rows

        sn_target, _ = louvain(w_net, cfg.gamma, derive_seed(seed, name, "sn_target"))
        target_full = map_partition(sn_target, a)
        match = match_resolution(g, target_full, cfg.gamma_grid,
                                 derive_seed(seed, name, "match"))
        matched_gamma = match.gamma_star
        provenance["match_tau_star"] = match.tau_star
        provenance["match_table"] = [[gm, tv] for gm, tv in match.table]
    except Exception as exc:  # noqa: BLE001
        errors["matched_parameters"] = str(exc)

    if matched_k is not None:
        try:
            reps = cfg.benchmark_repetitions
            runtimes["louvain_full"] = benchmark(
                lambda: louvain(g, cfg.gamma, derive_seed(seed, name, "bench_lf")),
                reps).median_s
            runtimes["louvain_supernode"] = benchmark(
                lambda: louvain(w_net, cfg.gamma, derive_seed(seed, name, "bench_ls")),
                reps).median_s
            runtimes["sbm_full"] = benchmark(
                lambda: fit_sbm(g_sbm, matched_k, derive_seed(seed, name, "bench_sf"),
                                sweeps=cfg.sbm_sweeps), reps).median_s
            runtimes["sbm_supernode"] = benchmark(
                lambda: fit_sbm_supernodes(sn, a, matched_k,
                                           derive_seed(seed, name, "bench_ss"),
                                           sweeps=cfg.sbm_sweeps), reps).median_s
        except Exception as exc:  # noqa: BLE001
            errors["runtimes"] = str(exc)

        try:
            var_full = variability_experiment(
                g, cfg.runs, cfg.gamma, matched_k,
                derive_seed(seed, name, "var_full"), sweeps=cfg.sbm_sweeps,
                jobs=cfg.jobs)
            var_sn = variability_experiment(
                g, cfg.runs, cfg.gamma, matched_k, derive_seed(seed, name, "var_sn"),
                sweeps=cfg.sbm_sweeps, supernode=(sn, a), jobs=cfg.jobs)
            nmi_pairs = {
                "full": {
                    "louvain-louvain": list(var_full.louvain_nmi),
                    "sbm-sbm": list(var_full.sbm_nmi),
                    "louvain-sbm": list(var_full.cross_nmi),
                },
                "supernode": {
                    "louvain-louvain": list(var_sn.louvain_nmi),
                    "sbm-sbm": list(var_sn.sbm_nmi),
                    "louvain-sbm": list(var_sn.cross_nmi),
                },
                "full-vs-supernode": {
                    "louvain": pairwise_nmi_between(
                        var_full.louvain_partitions,
                        var_sn.louvain_partitions[:cfg.star_runs]),
                    "sbm": pairwise_nmi_between(
                        var_full.sbm_partitions,
                        var_sn.sbm_partitions[:cfg.star_runs]),
                },
            }
            provenance["nmi_summaries"] = {
                "full": var_full.summaries, "supernode": var_sn.summaries}

            rep_parts = {
                ("full", "louvain"): var_full.louvain_partitions[0],
                ("full", "sbm"): var_full.sbm_partitions[0],
                ("supernode", "louvain"): var_sn.louvain_partitions[0],
                ("supernode", "sbm"): var_sn.sbm_partitions[0],
            }
            for (rep, alg), part in rep_parts.items():
                for order in cfg.orders:
                    min_auc_map[f"{rep}/{alg}/{order}"] = min_auc(
                        g, part, order, exact_distance=cfg.auc_exact_distance)
        except Exception as exc:  # noqa: BLE001
            errors["variability_min_auc"] = str(exc)

    if errors:
        provenance["errors"] = errors
    return {"network": name, "runtimes": runtimes, "nmi_pairs": nmi_pairs,
            "matched_gamma": matched_gamma, "matched_k": matched_k,
            "min_auc": min_auc_map, "provenance": provenance}


def run_evaluation(cfg: EvalConfig) -> dict:
    """Evaluate every configured network and assemble the versioned report."""
    if not cfg.networks:
        raise ValueError("nothing to evaluate: no networks configured")
    blocks = []
    for name, path in cfg.networks:
        with open(path, encoding="utf-8") as fh:
            g = parse_edge_list(fh)
        blocks.append(evaluate_network(name, g, cfg))
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {"created_utc": datetime.now(timezone.utc).isoformat()},
        "networks": blocks,
    }


def report_has_errors(report: dict) -> bool:
    return any("errors" in blk.get("provenance", {}) for blk in report["networks"])


# -- persistence -------------------------------------------------------------


def write_report_json(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def report_csv_rows(report: dict) -> list[dict]:
    """Flatten a report into plottable rows.

    Columns: network, representation, algorithm, metric, param, value, rng_seed.
    """
    rows: list[dict] = []
    for blk in report["networks"]:
        net = blk["network"]
        seed = blk["provenance"]["config"]["master_seed"]

        def add(representation, algorithm, metric, param, value):
            rows.append({"network": net, "representation": representation,
                         "algorithm": algorithm, "metric": metric,
                         "param": param, "value": value, "rng_seed": seed})

        for leg, secs in sorted(blk["runtimes"].items()):
            rep = "supernode" if "supernode" in leg else ("full" if "full" in leg else "")
            alg = leg.split("_")[0]
            add(rep, alg, "runtime_median_s", "", secs)
        for rep, pops in sorted(blk["nmi_pairs"].items()):
            for label, values in sorted(pops.items()):
                for i, v in enumerate(values):
                    add(rep, label, "nmi", i, v)
        if blk["matched_gamma"] is not None:
            add("full", "louvain", "matched_gamma", "", blk["matched_gamma"])
        if blk["matched_k"] is not None:
            add("full", "sbm", "matched_k", "", blk["matched_k"])
        for gm, tv in blk["provenance"].get("match_table", []):
            add("full", "louvain", "match_tau", gm, tv)
        for key, value in sorted(blk["min_auc"].items()):
            rep, alg, order = key.split("/")
            add(rep, alg, "min_auc", int(order), value)
    return rows


def write_report_csv(report: dict, path) -> None:
    rows = report_csv_rows(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["network", "representation", "algorithm",
                                                "metric", "param", "value", "rng_seed"])
        writer.writeheader()
        writer.writerows(rows)
