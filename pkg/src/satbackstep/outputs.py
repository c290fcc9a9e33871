"""Trajectory CSV, summary JSON and the four-panel figure."""

import csv
import json
import os

import numpy as np

from .svg import Panel, render_figure

CSV_BLF_ONLY = ("margin_lower", "margin_upper", "env_lower", "env_upper")


def csv_columns(n):
    """Header of ``trajectory.csv`` for an order-``n`` plant."""
    return (["t"] + [f"x{i + 1}" for i in range(n)] + ["u", "u_c", "y_d"]
            + [f"phi{i + 1}" for i in range(n)] + ["varrho", "lyap"] + list(CSV_BLF_ONLY))


def format_float(v):
    # 17 significant digits round-trip every double
    return format(float(v), ".17g")


def trajectory_csv(traj):
    """CSV text; barrier-only columns are left empty for the global design."""
    cols = csv_columns(traj.n)
    present = [c if traj.has(c) else None for c in cols]
    lines = [",".join(cols)]
    arrays = [traj[c] if c is not None else None for c in present]
    for k in range(len(traj)):
        lines.append(",".join("" if a is None else format_float(a[k]) for a in arrays))
    return "\n".join(lines) + "\n"


def read_trajectory_csv(path):
    """Parse a trajectory CSV back into ``{column: float array}``.

    Empty cells become NaN.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        out[name] = np.array([float(r[j]) if r[j] != "" else np.nan for r in body])
    return out


def summary_document(scenario, label, stats, violations, status, error=None):
    """Deterministic summary dictionary (no timestamps or timings)."""
    by_monitor = {}
    for v in violations:
        by_monitor[v.monitor] = by_monitor.get(v.monitor, 0) + 1
    theorem = [v for v in violations if v.kind == "theorem"]
    doc = {
        "scenario": scenario.name,
        "controller": scenario.controller,
        "initial_condition": label,
        "status": status,
        "stats": stats.as_dict() if stats is not None else None,
        "violations": {
            "count": len(violations),
            "theorem_count": len(theorem),
            "by_monitor": by_monitor,
            "first": [v.as_dict() for v in violations[:50]],
        },
    }
    if stats is not None:
        doc["max_u"] = stats.max_u
        doc["min_u"] = stats.min_u
    if error is not None:
        doc["error"] = error
    return doc


def figure_svg(traj, scenario):
    t = traj.t
    params = scenario.saturation
    out = Panel("Output", "y")
    out.line(t, traj["y_d"], "ref", "y_d")
    if traj.blf:
        out.line(t, traj["upper_d0"], "upper", "upper constraint")
        out.line(t, traj["lower_d0"], "lower", "lower constraint")
    out.line(t, traj["x1"], "main", "y")
    u = Panel("Plant input", "u")
    u.hline(params.u_max, "bound_hi").hline(params.u_min, "bound_lo")
    u.line(t, traj["u"], "main", "u")
    uc = Panel("Commanded input", "u_c")
    uc.hline(params.u_max, "bound_hi").hline(params.u_min, "bound_lo")
    uc.line(t, traj["u_c"], "main", "u_c")
    err = Panel("Tracking error", "phi_1")
    if traj.blf:
        err.line(t, traj["beta"], "upper", "beta")
        err.line(t, -traj["alpha"], "lower", "-alpha")
        err.line(t, traj["env_upper"], "env", "envelope")
        err.line(t, traj["env_lower"], "env", "envelope")
    err.line(t, traj["phi1"], "main", "phi_1")
    title = f"{scenario.name} {traj.label}".strip()
    return render_figure([out, u, uc, err], columns=2, title=title)


def output_paths(out_dir, label, multi):
    suffix = f"_{label}" if multi else ""
    return {
        "csv": os.path.join(out_dir, f"trajectory{suffix}.csv"),
        "summary": os.path.join(out_dir, f"summary{suffix}.json"),
        "svg": os.path.join(out_dir, f"figure{suffix}.svg"),
    }


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def write_outputs(traj, summary, scenario, out_dir, multi=False):
    """Write the enabled artifacts for one run and return their paths.

    Args:
        traj: a :class:`~satbackstep.sim.Trajectory` or ``None`` when the
            run aborted before the first row.
        summary: the document from :func:`summary_document`.
        multi: add the initial-condition label to file names.

    Raises:
        OSError: naming the path that could not be written.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out_dir}: {exc.strerror}") from None
    label = summary["initial_condition"]
    paths = output_paths(out_dir, label, multi)
    written = []
    flags = scenario.outputs
    if flags.get("csv", True) and traj is not None:
        _write(paths["csv"], trajectory_csv(traj))
        written.append(paths["csv"])
    if flags.get("summary", True):
        _write(paths["summary"], json.dumps(summary, indent=2, sort_keys=True) + "\n")
        written.append(paths["summary"])
    if flags.get("svg", True) and traj is not None and len(traj) > 0:
        _write(paths["svg"], figure_svg(traj, scenario))
        written.append(paths["svg"])
    return written
