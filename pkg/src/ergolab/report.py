"""Deterministic CSV/JSON emission and figure rendering for experiments.

CSV cells are written with ``repr`` (shortest round-trip form), so a
fixed config reproduces byte-identical files.  Figures are rendered next
to the delimited output; ``emit_plot_script`` additionally writes a
self-contained script that re-renders them without this package.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .errors import ErgolabError

X_COLUMN_CANDIDATES = ("n", "level", "radius", "seed")


def format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c, "")) for c in columns])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_csv_columns(path):
    """Header plus float-or-nan column arrays (non-numeric cells dropped)."""
    if not os.path.exists(path):
        raise ErgolabError(f"report {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return [], {}
        data = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                try:
                    data[h].append(float(cell))
                except ValueError:
                    data[h].append(float("nan"))
    return header, {h: np.array(v) for h, v in data.items()}


def pick_x_column(header):
    for cand in X_COLUMN_CANDIDATES:
        if cand in header:
            return cand
    return header[0] if header else None


def render_figures(csv_path, out_dir=None):
    """Render one PNG per numeric column, against the level-like column."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_csv_columns(csv_path)
    out_dir = out_dir or os.path.dirname(os.path.abspath(csv_path))
    stem = os.path.splitext(os.path.basename(csv_path))[0]
    written = []
    if not header:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.text(0.5, 0.5, "empty report", ha="center", va="center")
        ax.set_axis_off()
        path = os.path.join(out_dir, f"{stem}_empty.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return [path]
    xcol = pick_x_column(header)
    xs = data[xcol]
    for col in header:
        if col == xcol:
            continue
        ys = data[col]
        if np.all(np.isnan(ys)) or len(ys) == 0:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.2))
        order = np.argsort(xs, kind="stable")
        ax.plot(xs[order], ys[order], marker="o", lw=1.0, ms=3)
        ax.set_xlabel(xcol)
        ax.set_ylabel(col)
        finite = ys[np.isfinite(ys)]
        if ("error" in col or "residual" in col) and len(finite) and np.all(finite > 0):
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_{col}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    if not written:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.text(0.5, 0.5, "no numeric columns", ha="center", va="center")
        ax.set_axis_off()
        path = os.path.join(out_dir, f"{stem}_empty.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


PLOT_SCRIPT_TEMPLATE = '''#!/usr/bin/env python3
"""Standalone renderer for {csv_name}; needs only matplotlib."""
import csv, math, os, sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV = os.path.join(os.path.dirname(os.path.abspath(__file__)), {csv_name!r})

def main():
    with open(CSV, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            header, rows = [], []
        else:
            rows = list(reader)
    stem = os.path.splitext(os.path.basename(CSV))[0]
    out_dir = os.path.dirname(CSV)
    if not header or not rows:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.text(0.5, 0.5, "empty report", ha="center", va="center")
        ax.set_axis_off()
        fig.savefig(os.path.join(out_dir, stem + "_empty.png"), dpi=120)
        return 0
    def col(i):
        out = []
        for r in rows:
            try:
                out.append(float(r[i]))
            except (ValueError, IndexError):
                out.append(float("nan"))
        return out
    for cand in ("n", "level", "radius", "seed"):
        if cand in header:
            xname = cand
            break
    else:
        xname = header[0]
    xi = header.index(xname)
    xs = col(xi)
    made = 0
    for i, name in enumerate(header):
        if i == xi:
            continue
        ys = col(i)
        if all(math.isnan(y) for y in ys):
            continue
        pairs = sorted(zip(xs, ys))
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot([p[0] for p in pairs], [p[1] for p in pairs], marker="o", lw=1.0, ms=3)
        ax.set_xlabel(xname)
        ax.set_ylabel(name)
        finite = [y for y in ys if not math.isnan(y)]
        if ("error" in name or "residual" in name) and finite and min(finite) > 0:
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, stem + "_" + name + ".png"), dpi=120)
        plt.close(fig)
        made += 1
    if made == 0:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.text(0.5, 0.5, "no numeric columns", ha="center", va="center")
        ax.set_axis_off()
        fig.savefig(os.path.join(out_dir, stem + "_empty.png"), dpi=120)
    return 0

if __name__ == "__main__":
    sys.exit(main())
'''


def emit_plot_script(csv_path):
    """Write a self-contained plotting script next to the report."""
    if not os.path.exists(csv_path):
        raise ErgolabError(f"report {csv_path} does not exist")
    csv_name = os.path.basename(csv_path)
    stem = os.path.splitext(csv_name)[0]
    script_path = os.path.join(os.path.dirname(os.path.abspath(csv_path)), f"plot_{stem}.py")
    with open(script_path, "w") as fh:
        fh.write(PLOT_SCRIPT_TEMPLATE.format(csv_name=csv_name))
    os.chmod(script_path, 0o755)
    return script_path
