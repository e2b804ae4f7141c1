"""Figure specs, CSV loading, and the renderers."""

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

#: the harness's result schema; extra columns are ignored, missing ones fatal.
REQUIRED_COLUMNS = ["trial", "seed", "kind", "d", "P", "k", "alpha", "mode",
                    "M_bits", "solver_or_player", "queries", "success",
                    "wall_ms", "extra_json"]

KINDS = ("tradeoff", "rmt-hist", "rmt-sweep", "tails", "winrate")

_STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit",
}


class SchemaMismatchError(ValueError):
    def __init__(self, missing):
        super().__init__(f"input CSV is missing required column(s): {sorted(missing)}")
        self.missing = sorted(missing)


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSVs, figure kind, axis scales, output stem."""

    inputs: tuple
    kind: str
    out: str
    xscale: str = "log"
    yscale: str = "log"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "inputs", tuple(self.inputs))


def load_rows(paths):
    """Rows from one or more harness CSVs, with extra_json parsed."""
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                continue
            missing = set(REQUIRED_COLUMNS) - set(reader.fieldnames)
            if missing:
                raise SchemaMismatchError(missing)
            for row in reader:
                row = dict(row)
                try:
                    row["extra"] = json.loads(row.get("extra_json") or "{}")
                except json.JSONDecodeError:
                    row["extra"] = {}
                rows.append(row)
    return rows


def _no_data(ax, message="no data"):
    ax.text(0.5, 0.5, message, ha="center", va="center",
            transform=ax.transAxes, fontsize=14, color="gray")


def tradeoff_points(rows):
    """Per-solver (memory bits, queries) means over successful feasibility runs."""
    acc = {}
    for row in rows:
        if row["kind"] != "feas" or row["success"] != "true":
            continue
        mem = row["extra"].get("max_memory_bits")
        if not mem:
            continue
        acc.setdefault(row["solver_or_player"], []).append(
            (float(mem), float(row["queries"])))
    return {name: (float(np.mean([p[0] for p in pts])),
                   float(np.mean([p[1] for p in pts])))
            for name, pts in acc.items()}


def _draw_tradeoff(ax, rows, spec):
    points = tradeoff_points(rows)
    if not points:
        _no_data(ax)
        return
    markers = {"ellipsoid": "s", "subgradient": "o"}
    for name, (mem, queries) in sorted(points.items()):
        ax.scatter([mem], [queries], s=90, marker=markers.get(name, "D"),
                   label=name)
        ax.annotate(name, (mem, queries), textcoords="offset points",
                    xytext=(8, 6))
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel("Memory (bits)")
    ax.set_ylabel("Oracle complexity (queries)")
    ax.set_title("Memory/query tradeoff, measured per solver")
    ax.legend(loc="best")


def _rmt_series(rows):
    by_c = {}
    config = None
    for row in rows:
        if row["kind"] != "rmt":
            continue
        extra = row["extra"]
        if "C" not in extra or "sigma_min" not in extra:
            continue
        by_c.setdefault(int(extra["C"]), []).append(float(extra["sigma_min"]))
        config = config or extra.get("config", {})
    return by_c, (config or {})


def _draw_rmt_hist(ax, rows, spec):
    by_c, _ = _rmt_series(rows)
    if not by_c:
        _no_data(ax)
        return
    for C in sorted(by_c):
        ax.hist(by_c[C], bins=24, alpha=0.55, label=f"C={C}")
    ax.set_xlabel("smallest singular value")
    ax.set_ylabel("draws")
    ax.set_title("Smallest-singular-value histograms per band factor")
    ax.legend(loc="best")


def _draw_rmt_sweep(ax, rows, spec):
    by_c, config = _rmt_series(rows)
    if not by_c:
        _no_data(ax)
        return
    cs = sorted(by_c)
    mins = [min(by_c[c]) for c in cs]
    medians = [float(np.median(by_c[c])) for c in cs]
    ax.plot(cs, mins, "o-", label="min sigma_1")
    ax.plot(cs, medians, "s--", label="median sigma_1")
    n = config.get("n")
    alpha = config.get("alpha", 1.0)
    if n:
        # threshold curve recomputed from the embedded config, never hard-coded
        grid = np.linspace(min(cs), max(cs), 128)
        ax.plot(grid, (1.0 / 6.0) * np.sqrt(grid / float(n) ** alpha), ":",
                label="(1/6) sqrt(C / n^alpha)")
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel("band factor C")
    ax.set_ylabel("smallest singular value")
    ax.set_title("Band-factor sweep")
    ax.legend(loc="best")


def _draw_tails(ax, rows, spec):
    drew = False
    for row in rows:
        if row["kind"] != "conc":
            continue
        proj = row["extra"].get("report", {}).get("projection")
        if not proj:
            continue
        ts = [r["t"] for r in proj["rows"]]
        emp = [r["upper_empirical"] for r in proj["rows"]]
        bound = [r["upper_bound"] for r in proj["rows"]]
        floor = 0.5 / max(1, int(proj.get("trials", 1)))
        ax.plot(ts, [max(v, floor) for v in emp], "o-",
                label=f"empirical (trial {row['trial']})")
        ax.plot(ts, bound, "--", label=f"bound (trial {row['trial']})")
        drew = True
    if not drew:
        _no_data(ax)
        return
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("upper-tail probability")
    ax.set_title("Projection concentration: empirical tail vs bound")
    ax.legend(loc="best", fontsize=8)


def _draw_winrate(ax, rows, spec):
    acc = {}
    for row in rows:
        if not row["kind"].startswith("game-"):
            continue
        key = (row["kind"].removeprefix("game-"), row["solver_or_player"])
        acc.setdefault(key, []).append(row["success"] == "true")
    if not acc:
        _no_data(ax)
        return
    labels = [f"{game}\n({player})" for game, player in sorted(acc)]
    rates = [float(np.mean(acc[key])) for key in sorted(acc)]
    ax.bar(range(len(labels)), rates)
    ax.set_xticks(range(len(labels)), labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("win rate")
    ax.set_title("Game win rates per player")


_DRAWERS = {
    "tradeoff": _draw_tradeoff,
    "rmt-hist": _draw_rmt_hist,
    "rmt-sweep": _draw_rmt_sweep,
    "tails": _draw_tails,
    "winrate": _draw_winrate,
}


def render(spec):
    """Render the figure and write <out>.png and <out>.svg; returns the paths."""
    rows = load_rows(spec.inputs)
    stem, ext = os.path.splitext(spec.out)
    if ext.lower() in (".png", ".svg"):
        out_stem = stem
    else:
        out_stem = spec.out
    os.makedirs(os.path.dirname(os.path.abspath(out_stem)), exist_ok=True)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        _DRAWERS[spec.kind](ax, rows, spec)
        fig.tight_layout()
        png = out_stem + ".png"
        svg = out_stem + ".svg"
        fig.savefig(png, metadata={"Software": "plotkit"})
        fig.savefig(svg, metadata={"Date": None})
        plt.close(fig)
    return png, svg
