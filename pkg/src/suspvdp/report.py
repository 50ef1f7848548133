"""Report writers: deterministic JSON documents, delimiter-separated
tables, and optional rendered figures.

JSON and the tables are the machine-readable record and must be
byte-identical for identical scenario and seed, so nothing time- or
environment-dependent goes into them (timings travel in a separate
sidecar file that makes no determinism promise).  Figures are rendered
only from the command-line report path and degrade gracefully when the
plotting backend is unavailable.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence


def jsonable(value):
    """Recursively coerce exact scalars, complex numbers and other
    library objects into JSON-safe values, keeping ints and finite floats
    as numbers."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


def format_complex(c: complex) -> str:
    return repr(c.real) if c.imag == 0 else f"{c.real!r}{c.imag:+}j"


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    return path


def write_delimited(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return format_complex(v)
    return v


# ---------------------------------------------------------------------------
# figures (lazy, optional)


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        return plt
    except Exception:
        return None


_META = {"Software": "suspvdp"}     # pinned so renders stay reproducible


def render_curve_figure(path, rows) -> bool:
    """Residual curve: dictionary degree against sup residual."""
    plt = _pyplot()
    if plt is None or not rows:
        return False
    degrees = [r["degree"] for r in rows]
    sups = [max(r["sup_residual"], 1e-17) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogy(degrees, sups, marker="o")
    ax.set_xlabel("dictionary degree")
    ax.set_ylabel("sup residual")
    ax.set_xticks(degrees)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return True


def render_rank_figure(path, rows, full_rank: int | None = None) -> bool:
    """Spanning rank at each sampled point."""
    plt = _pyplot()
    if plt is None or not rows:
        return False
    ranks = [r["rank"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.bar(range(len(ranks)), ranks, color="#4477aa")
    if full_rank is not None:
        ax.axhline(full_rank, color="#cc3311", linestyle="--",
                   label=f"full rank {full_rank}")
        ax.legend()
    ax.set_xlabel("sample point index")
    ax.set_ylabel("rank")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return True


def render_flow_figure(path, rows) -> bool:
    """Flow audit: per-point deviation and chart determinant error."""
    plt = _pyplot()
    if plt is None or not rows:
        return False
    idx = range(len(rows))
    devs = [max(r["deviation"], 1e-17) for r in rows]
    dets = [max(r["det_error"], 1e-17) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogy(idx, devs, marker="o", label="flow deviation")
    ax.semilogy(idx, dets, marker="s", label="|det - 1|")
    ax.set_xlabel("sample point index")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return True
