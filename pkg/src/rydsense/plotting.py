"""PNG rendering of the delimited curve tables written by the CLI.

Figures are drawn on a bare ``matplotlib.figure.Figure`` with the Agg
canvas, so rendering does not touch pyplot state and is safe in worker
threads. ``python -m rydsense.plotting table.csv`` re-renders a table.
"""

import argparse
import csv
import io

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "figsize": (5.0, 3.4),
    "dpi": 120,
    "data_color": "k",
    "theory_color": "tab:red",
    "extra_color": "tab:blue",
}


def _floats(values):
    out = []
    for v in values:
        try:
            out.append(float(v))
        except (TypeError, ValueError):
            out.append(float("nan"))
    return out


def render_curve(columns, xlabel="x", ylabel="y", title=None, xscale=1.0, hline=None):
    """Render ``columns`` (a dict with ``x``, ``y`` and optionally ``yerr``,
    ``y_theory`` and one more ``y_*`` series) to PNG bytes."""
    fig = Figure(figsize=STYLE["figsize"], dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    x = [v * xscale for v in _floats(columns["x"])]
    y = _floats(columns["y"])
    yerr = _floats(columns["yerr"]) if "yerr" in columns else None
    ax.errorbar(x, y, yerr=yerr, fmt="o", ms=3, color=STYLE["data_color"], label="simulated")
    if "y_theory" in columns:
        ax.plot(x, _floats(columns["y_theory"]), "-", color=STYLE["theory_color"], label="theory")
    extras = [k for k in columns if k.startswith("y_") and k != "y_theory"]
    for k in extras[:1]:
        ax.plot(x, _floats(columns[k]), "--", color=STYLE["extra_color"], label=k[2:])
    if hline is not None:
        ax.axhline(hline, ls=":", color="0.5", lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    return buf.getvalue()


def read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} has no data rows")
    return {k: [r[k] for r in rows] for k in rows[0]}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="python -m rydsense.plotting",
                                     description="re-render curve tables as PNG")
    parser.add_argument("tables", nargs="+", metavar="TABLE.csv")
    args = parser.parse_args(argv)
    for path in args.tables:
        try:
            cols = read_columns(path)
            if "x" not in cols:
                cols = {"x": cols["setting"], "y": cols["p49"], "yerr": cols["stderr"]}
        except (OSError, KeyError, ValueError) as exc:
            parser.exit(2, f"{parser.prog}: error: {path}: {exc}\n")
        png = render_curve(cols, title=path)
        out = path.rsplit(".", 1)[0] + ".png"
        with open(out, "wb") as fh:
            fh.write(png)
        print(out)
    return 0

if __name__ == "__main__":
    raise SystemExit(main())
