#!/usr/bin/env python3
"""Render machine-sweep CSV tables into figure images.

    render.py <csv> --kind fig2b|fig2c|fig3 --out <path>

The input is a CSV emitted by the simulator CLI's `figure` command:
`#` metadata lines (config echo plus figure-specific keys), then a
header row, then data.  This script only reads the table; nothing is
recomputed.  Both a vector (SVG) and a raster (PNG) image are written,
named from the stem of --out.  Requires matplotlib.

Kinds:
    fig2b   maximized |W| of the three machines vs hot-bath temperature
    fig2c   steady coherence |rho21| vs initial dark population, with
            the analytic zero marked
    fig3    grouped bars: ground populations and the aligned/misaligned
            power ratio in the two effective-temperature regimes
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

KINDS = ("fig2b", "fig2c", "fig3")

# identical CSV in -> identical bytes out
_DETERMINISTIC_RC = {
    "svg.hashsalt": "render",
    "svg.fonttype": "none",
    "figure.dpi": 100,
}


class RenderError(Exception):
    """Bad input table or unusable request; main() turns this into exit 1."""


@dataclass(frozen=True)
class Table:
    metadata: tuple[str, ...]   # '#'-stripped metadata lines
    columns: tuple[str, ...]
    rows: tuple[dict[str, str], ...]


def load_table(path: str | Path) -> Table:
    """Parse a figure CSV; reject anything the CLI would not have written."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    metadata: list[str] = []
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            metadata.append(line.lstrip("#").strip())
        elif line.strip():
            body.append(line)
    if not any(m.startswith("config:") for m in metadata):
        raise RenderError(
            f"{path}: metadata header is missing the 'config:' line; "
            "expected a CSV written by the simulator's figure command"
        )
    if not body:
        raise RenderError(f"{path}: no header row")
    reader = csv.DictReader(io.StringIO("\n".join(body)))
    columns = tuple(reader.fieldnames or ())
    rows = tuple(dict(row) for row in reader)
    if not rows:
        raise RenderError(f"{path}: table has no data rows")
    return Table(metadata=tuple(metadata), columns=columns, rows=rows)


def require_columns(table: Table, names: tuple[str, ...]) -> None:
    missing = [n for n in names if n not in table.columns]
    if missing:
        raise RenderError(f"missing columns: {', '.join(missing)}")


def metadata_value(table: Table, key: str) -> float:
    """Numeric value of a `key = value` metadata line."""
    for line in table.metadata:
        head, _, tail = line.partition("=")
        if head.strip() == key:
            try:
                return float(tail)
            except ValueError as exc:
                raise RenderError(f"metadata {key!r} is not a number: {tail!r}") from exc
    raise RenderError(f"metadata is missing {key!r}")


def _series(table: Table, select: dict[str, str], x: str, y: str):
    """(x, y) float pairs of the matching rows, sorted in x; error rows and
    non-finite cells are dropped."""
    pts = []
    for row in table.rows:
        if row.get("mode") == "error":
            continue
        if any(row.get(k) != v for k, v in select.items()):
            continue
        xv, yv = float(row[x]), float(row[y])
        if math.isfinite(xv) and math.isfinite(yv):
            pts.append((xv, yv))
    pts.sort()
    return [p[0] for p in pts], [p[1] for p in pts]


def analytic_zero(table: Table) -> float:
    """Dark population at which the steady coherence changes sign; read
    from the fig2c metadata, this is the value the plot marks."""
    return metadata_value(table, "threshold_dark_overlap")


def _fig2b(table: Table):
    require_columns(table, ("T_hot", "machine", "W_dot"))
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    styles = {
        "tls": dict(label="TLS", color="#7f7f7f", marker="s", ls="--"),
        "misaligned": dict(label="misaligned", color="#d62728", marker="o", ls="-"),
        "aligned": dict(label="aligned-optimal", color="#1f77b4", marker="^", ls="-"),
    }
    handles = {}
    for machine, style in styles.items():
        t, w = _series(table, {"machine": machine}, "T_hot", "W_dot")
        if not t:
            raise RenderError(f"fig2b: no usable rows for machine {machine!r}")
        (handles[machine],) = ax.loglog(t, [abs(v) for v in w], ms=4, **style)
    ax.set_xlabel("hot bath temperature")
    ax.set_ylabel("maximized output power |W|")
    # legend reads bottom-to-top as TLS, misaligned, aligned-optimal
    order = ("aligned", "misaligned", "tls")
    ax.legend([handles[m] for m in order], [styles[m]["label"] for m in order],
              loc="upper left", frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    return fig


def _fig2c(table: Table):
    require_columns(table, ("dark_overlap", "abs_rho21"))
    zero = analytic_zero(table)
    s, coh = _series(table, {}, "dark_overlap", "abs_rho21")
    if not s:
        raise RenderError("fig2c: no usable rows")
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.plot(s, coh, color="#1f77b4", lw=1.5)
    ax.axvline(zero, color="#d62728", ls=":", lw=1.2,
               label=f"analytic zero at {zero:.4f}")
    ax.set_xlabel("initial dark population")
    ax.set_ylabel("steady-state |rho21|")
    ax.set_xlim(0.0, 1.0)
    ax.legend(loc="upper left", frameon=False)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    return fig


def _fig3(table: Table):
    require_columns(table, ("beta_eff_omega0", "machine", "rho00", "W_dot"))
    cells: dict[tuple[float, str], dict[str, str]] = {}
    for row in table.rows:
        if row.get("mode") == "error":
            continue
        cells[(float(row["beta_eff_omega0"]), row["machine"])] = row
    regimes = sorted({k[0] for k in cells})
    if len(regimes) != 2:
        raise RenderError(f"fig3: expected two regimes, found {regimes}")
    ground_mis, ground_ali, ratio = [], [], []
    for beta in regimes:
        try:
            mis = cells[(beta, "misaligned")]
            ali = cells[(beta, "aligned")]
        except KeyError as exc:
            raise RenderError(f"fig3: missing machine row at regime {beta}") from exc
        ground_mis.append(float(mis["rho00"]))
        ground_ali.append(float(ali["rho00"]))
        ratio.append(abs(float(ali["W_dot"]) / float(mis["W_dot"])))

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    centers = range(len(regimes))
    width = 0.26
    ax.bar([c - width for c in centers], ground_mis, width,
           label="ground population, misaligned", color="#d62728")
    ax.bar(list(centers), ground_ali, width,
           label="ground population, aligned", color="#1f77b4")
    ax.bar([c + width for c in centers], ratio, width,
           label="power ratio aligned/misaligned", color="#7f7f7f")
    ax.set_xticks(list(centers))
    ax.set_xticklabels([f"beta_eff*omega0 = {b:g}" for b in regimes])
    ax.set_ylabel("value")
    ax.legend(frameon=False, fontsize=9)
    ax.grid(True, axis="y", alpha=0.25)
    fig.tight_layout()
    return fig


_BUILDERS = {"fig2b": _fig2b, "fig2c": _fig2c, "fig3": _fig3}


def output_paths(out: str | Path) -> tuple[Path, Path]:
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".svg", ".png") else out
    return stem.with_suffix(".svg"), stem.with_suffix(".png")


def render_figure(csv_path: str | Path, figure_kind: str, out_path: str | Path) -> tuple[Path, Path]:
    """Build one figure from a CSV table and write the SVG/PNG pair.

    All validation happens before anything touches the filesystem, so a
    bad table never leaves a partial image behind.
    """
    if figure_kind not in _BUILDERS:
        raise RenderError(f"unknown figure kind {figure_kind!r}; pick one of {KINDS}")
    table = load_table(csv_path)
    svg, png = output_paths(out_path)
    with matplotlib.rc_context(_DETERMINISTIC_RC):
        fig = _BUILDERS[figure_kind](table)
        try:
            fig.savefig(svg, format="svg", metadata={"Date": None})
            fig.savefig(png, format="png", dpi=150, metadata={"Software": None})
        finally:
            plt.close(fig)
    return svg, png


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render.py",
        description="Render a simulator figure CSV into SVG and PNG images.",
    )
    parser.add_argument("csv", help="CSV table written by the simulator's figure command")
    parser.add_argument("--kind", required=True, choices=KINDS, help="figure layout")
    parser.add_argument("--out", required=True, help="output path; stem names the .svg/.png pair")
    args = parser.parse_args(argv)
    try:
        svg, png = render_figure(args.csv, args.kind, args.out)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {svg} and {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
