"""Render experiment CSV outputs to images.

Consumes only the CSV/JSON files the experiments write (no imports from the
simulation package).  A figure spec is a JSON file:

    {"kind": "error_curve", "csv": "fk_convergence.csv",
     "out": "convergence", "title": "...", "xlabel": "...", "ylabel": "..."}

kinds: error_curve (log-log error vs delta with a reference slope),
heatmap (field values on lattice points), interface (curve overlay on the
domain outline), bars (crossing probabilities with error bars), variance
(Var W vs t with the fitted line).  Output is SVG plus PNG at a fixed DPI;
rendering is deterministic and idempotent.

Exit codes: 0 rendered, 1 bad spec or schema mismatch (the message names
the missing column).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams.update({
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "svg.hashsalt": "isingfig",
})

KINDS = {}


class SchemaError(ValueError):
    pass


def read_csv(path):
    """CSV as (header_comments, columns, list-of-string-rows)."""
    header, columns, rows = [], None, []
    text = Path(path).read_text()
    for raw in text.splitlines():
        if raw.startswith("#"):
            header.append(raw.lstrip("# "))
            continue
        if columns is None:
            columns = raw.split(",")
            continue
        if raw.strip():
            rows.append(raw.split(","))
    if columns is None:
        raise SchemaError("empty csv")
    return header, columns, rows


def column(columns, rows, name, cast=float):
    if name not in columns:
        raise SchemaError(f"missing column: {name}")
    k = columns.index(name)
    return [cast(r[k]) for r in rows]


def kind(name):
    def wrap(fn):
        KINDS[name] = fn
        return fn
    return wrap


@kind("error_curve")
def render_error_curve(spec, columns, rows, ax):
    deltas = column(columns, rows, "delta")
    errs = column(columns, rows, "max_probe_error")
    ax.loglog(deltas, errs, "o-", label="max probe error")
    if "h_error" in columns:
        ax.loglog(deltas, column(columns, rows, "h_error"), "s--",
                  label="H field error")
    ref = [errs[0] * (d / deltas[0]) for d in deltas]
    ax.loglog(deltas, ref, ":", color="gray", label="slope 1 reference")
    ax.legend()
    ax.invert_xaxis()


@kind("heatmap")
def render_heatmap(spec, columns, rows, ax):
    xs = column(columns, rows, "ix")
    ys = column(columns, rows, "iy")
    vs = column(columns, rows, spec.get("value_column", "re"))
    sc = ax.scatter(xs, ys, c=vs, cmap="viridis", marker="s",
                    s=spec.get("marker_size", 60))
    ax.set_aspect("equal")
    plt.colorbar(sc, ax=ax)


@kind("interface")
def render_interface(spec, columns, rows, ax):
    xs = column(columns, rows, "re")
    ys = column(columns, rows, "im")
    ax.plot(xs, ys, "-", lw=0.9, color="black", label="interface")
    if spec.get("outline", "disk") == "disk":
        import math
        ts = [2 * math.pi * k / 256 for k in range(257)]
        ax.plot([math.cos(t) for t in ts], [math.sin(t) for t in ts],
                color="steelblue", lw=1.2, label="domain")
    ax.set_aspect("equal")
    ax.legend()


@kind("bars")
def render_bars(spec, columns, rows, ax):
    ns = column(columns, rows, "n", cast=str)
    ps = column(columns, rows, "p_hat")
    errs = column(columns, rows, "stderr")
    ax.bar(range(len(ns)), ps, yerr=[3 * e for e in errs],
           color="steelblue", capsize=4)
    ax.set_xticks(range(len(ns)))
    ax.set_xticklabels(ns)
    ax.set_ylim(0, 1)


@kind("variance")
def render_variance(spec, columns, rows, ax):
    ts = column(columns, rows, "t")
    var = column(columns, rows, "var_w")
    ax.plot(ts, var, "o", label="Var W(t)")
    if "fit" in columns:
        ax.plot(ts, column(columns, rows, "fit"), "-", label="fit")
    ax.legend()


@kind("series")
def render_series(spec, columns, rows, ax):
    """Generic table plot: y columns against the first (or given) x column;
    a non-numeric x becomes categorical tick labels."""
    xcol = spec.get("x", columns[0])
    ycols = spec.get("y", [c for c in columns[1:2]])
    if isinstance(ycols, str):
        ycols = [ycols]
    if xcol not in columns:
        raise SchemaError(f"missing column: {xcol}")
    raw_x = column(columns, rows, xcol, cast=str)
    try:
        xs = [float(x) for x in raw_x]
        categorical = False
    except ValueError:
        xs = list(range(len(raw_x)))
        categorical = True
    for ycol in ycols:
        ax.plot(xs, column(columns, rows, ycol), "o-", label=ycol)
    if categorical:
        ax.set_xticks(xs)
        ax.set_xticklabels(raw_x, rotation=30, ha="right")
    if spec.get("logy"):
        ax.set_yscale("log")
    ax.legend()


def render(spec_path, out_dir):
    spec = json.loads(Path(spec_path).read_text())
    for key in ("kind", "csv", "out"):
        if key not in spec:
            raise SchemaError(f"spec missing field: {key}")
    if spec["kind"] not in KINDS:
        raise SchemaError(f"unknown figure kind: {spec['kind']}")
    csv_path = Path(spec["csv"])
    if not csv_path.is_absolute():
        csv_path = Path(spec_path).parent / csv_path
    _, columns, rows = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=tuple(spec.get("figsize", (5, 4))))
    KINDS[spec["kind"]](spec, columns, rows, ax)
    ax.set_title(spec.get("title", spec["kind"]))
    ax.set_xlabel(spec.get("xlabel", ""))
    ax.set_ylabel(spec.get("ylabel", ""))
    fig.tight_layout()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for ext in ("svg", "png"):
        path = out_dir / f"{spec['out']}.{ext}"
        fig.savefig(path, metadata={"Date": None} if ext == "svg" else None)
        outputs.append(path)
    plt.close(fig)
    return outputs


def main(argv=None):
    parser = argparse.ArgumentParser(prog="isingfig",
                                     description="render experiment CSVs")
    parser.add_argument("render", nargs="?", default="render")
    parser.add_argument("--spec", required=True, help="figure spec JSON")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        outputs = render(args.spec, args.out)
    except (SchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in outputs:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
