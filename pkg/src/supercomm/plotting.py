"""Render evaluation-report figures to files, next to the JSON/CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RUNTIME_LEGS = ["louvain_full", "louvain_supernode", "sbm_full", "sbm_supernode",
                 "compression"]
_POP_COLORS = {"louvain-louvain": "tab:purple", "sbm-sbm": "tab:orange",
               "louvain-sbm": "tab:red"}


def render_report_figures(report: dict, outdir) -> list[Path]:
    """Write runtime, variability, min-AUC, and resolution-match figures as PNGs."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for fn in (_runtime_figure, _variability_figure, _min_auc_figure, _match_figure):
        path = fn(report, outdir)
        if path is not None:
            written.append(path)
    return written


def _runtime_figure(report: dict, outdir: Path) -> Path | None:
    blocks = [b for b in report["networks"] if b["runtimes"]]
    if not blocks:
        return None
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / len(_RUNTIME_LEGS)
    for li, leg in enumerate(_RUNTIME_LEGS):
        xs, ys = [], []
        for bi, blk in enumerate(blocks):
            if leg in blk["runtimes"]:
                xs.append(bi + li * width)
                ys.append(max(blk["runtimes"][leg], 1e-9))
        ax.bar(xs, ys, width=width, label=leg)
    ax.set_yscale("log")
    ax.set_ylabel("seconds (median)")
    ax.set_xticks([i + 0.4 for i in range(len(blocks))])
    ax.set_xticklabels([b["network"] for b in blocks], rotation=20, ha="right")
    ax.set_title("Detection and compression runtimes")
    ax.legend(fontsize=8)
    path = outdir / "runtimes.png"
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _variability_figure(report: dict, outdir: Path) -> Path | None:
    blocks = [b for b in report["networks"] if b["nmi_pairs"]]
    if not blocks:
        return None
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
    for ax, rep in zip(axes, ("full", "supernode")):
        pos = 0
        ticks, tick_labels = [], []
        for blk in blocks:
            pops = blk["nmi_pairs"].get(rep, {})
            group_start = pos
            for label in ("louvain-louvain", "sbm-sbm", "louvain-sbm"):
                values = pops.get(label, [])
                if values:
                    box = ax.boxplot([values], positions=[pos], widths=0.7,
                                     patch_artist=True)
                    box["boxes"][0].set_facecolor(_POP_COLORS[label])
                pos += 1
            stars = blk["nmi_pairs"].get("full-vs-supernode", {})
            for si, alg in enumerate(("louvain", "sbm")):
                values = stars.get(alg, [])
                if values:
                    mean = sum(values) / len(values)
                    ax.plot([group_start + si], [mean], marker="*", markersize=12,
                            color="black", linestyle="none")
            ticks.append(group_start + 1)
            tick_labels.append(blk["network"])
            pos += 1
        ax.set_xticks(ticks)
        ax.set_xticklabels(tick_labels, rotation=20, ha="right")
        ax.set_title(f"{rep} representation")
        ax.set_ylim(-0.05, 1.05)
    axes[0].set_ylabel("pairwise NMI")
    handles = [plt.Line2D([], [], color=c, lw=6) for c in _POP_COLORS.values()]
    handles.append(plt.Line2D([], [], color="black", marker="*", lw=0, markersize=10))
    fig.legend(handles, list(_POP_COLORS) + ["full vs supernode (mean)"],
               loc="lower center", ncol=4, fontsize=8)
    fig.suptitle("Partition variability within and between algorithms")
    path = outdir / "variability.png"
    fig.tight_layout(rect=(0, 0.07, 1, 1))
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _min_auc_figure(report: dict, outdir: Path) -> Path | None:
    blocks = [b for b in report["networks"] if b["min_auc"]]
    if not blocks:
        return None
    combos = [("full", "louvain"), ("supernode", "louvain"),
              ("full", "sbm"), ("supernode", "sbm")]
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True, sharey=True)
    for ax, (rep, alg) in zip(axes.ravel(), combos):
        for blk in blocks:
            pts = sorted((int(key.split("/")[2]), value)
                         for key, value in blk["min_auc"].items()
                         if key.startswith(f"{rep}/{alg}/"))
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                        label=blk["network"])
        ax.set_title(f"{alg} on {rep}")
        ax.set_ylim(0, 1.05)
    for ax in axes[1]:
        ax.set_xlabel("neighborhood order")
    for ax in axes[:, 0]:
        ax.set_ylabel("min AUC")
    axes[0, 0].legend(fontsize=8)
    fig.suptitle("Agreement of community assignments with local connectivity")
    path = outdir / "min_auc.png"
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _match_figure(report: dict, outdir: Path) -> Path | None:
    blocks = [b for b in report["networks"] if b["provenance"].get("match_table")]
    if not blocks:
        return None
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for blk in blocks:
        table = blk["provenance"]["match_table"]
        ax.plot([row[0] for row in table], [row[1] for row in table], marker=".",
                label=blk["network"])
        if blk["matched_gamma"] is not None:
            ax.axvline(blk["matched_gamma"], color="gray", ls="--", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("resolution gamma")
    ax.set_ylabel("Kendall tau vs super-node size ranking")
    ax.set_title("Matched-resolution sweep")
    ax.legend(fontsize=8)
    path = outdir / "resolution_match.png"
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
