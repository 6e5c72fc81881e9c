"""CSV/JSON writers for run directories.

Numbers are written with ``repr`` so files round-trip exactly and reruns of a
configuration produce byte-identical output.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .analysis import ErrorTable, LinearFit, transmission_residuals
from .direct import y_profile
from .errors import ArtifactError
from .trajectory import INTERFACE_COLUMNS, Trajectory


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, data: dict) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    from .errors import MissingArtifact

    path = Path(path)
    if not path.is_file():
        raise MissingArtifact(f"{path} not found")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise MissingArtifact(f"{path} has no data rows")
    return rows[0], rows[1:]


def _probe_header(traj: Trajectory) -> list[str]:
    return ["t"] + [f"u(x={x:g})" for x in traj.probe_x]


def _common(traj: Trajectory, out: Path) -> None:
    write_csv(out / "mass.csv", ["t", "M"], zip(traj.times, traj.mass))
    write_csv(out / "probe.csv", _probe_header(traj), ([t, *p] for t, p in zip(traj.times, traj.probe)))


def write_direct_run(traj: Trajectory, out: Path, extra: dict | None = None) -> Path:
    out = Path(out)
    snap_rows, prof_rows = [], []
    for s in traj.snapshots:
        g = s.grid
        for x, y, u in zip(g.cell_x, g.cell_y, s.values):
            snap_rows.append([s.time, x, y, u])
        x, u_avg, u_mat = y_profile(s)
        peak = float(np.max(np.abs(u_avg)))
        u_norm = u_avg / peak if peak > 0 else np.zeros_like(u_avg)
        for row in zip(x, u_avg, u_mat, u_norm):
            prof_rows.append([s.time, *row])
    write_csv(out / "snapshots.csv", ["t", "x", "y", "u"], snap_rows)
    write_csv(out / "profile.csv", ["t", "x", "u_yavg", "u_material", "u_normalized"], prof_rows)
    _common(traj, out)
    write_json(out / "run_summary.json", {"kind": traj.kind, **traj.meta, **(extra or {})})
    return out


def write_homog_run(traj: Trajectory, out: Path, extra: dict | None = None) -> Path:
    out = Path(out)
    rows = []
    for s in traj.snapshots:
        for x, u in zip(s.grid.nodes, s.values):
            rows.append([s.time, x, u])
    write_csv(out / "profile.csv", ["t", "x", "u"], rows)
    itf = traj.interface
    write_csv(out / "interface.csv", list(INTERFACE_COLUMNS), zip(*(itf[c] for c in INTERFACE_COLUMNS)))
    res = transmission_residuals(traj)
    write_csv(out / "residuals.csv", ["t", "jump_u", "jump_flux"], zip(res["t"], res["jump_u"], res["jump_flux"]))
    _common(traj, out)
    write_json(out / "run_summary.json", {"kind": traj.kind, **traj.meta, **(extra or {})})
    return out


def write_sweep(table: ErrorTable, fit: LinearFit, out: Path, extra: dict | None = None) -> Path:
    out = Path(out)
    write_csv(
        out / "err_table.csv",
        ["epsilon", "nx", "ny", "err", "err_minus"],
        ([r.epsilon, r.nx, r.ny, r.err, r.err_minus] for r in table.rows),
    )
    write_json(out / "fit.json", {**fit.as_dict(), "floor_estimate": float(table.errors[-1]), "meta": table.meta})
    write_json(out / "run_summary.json", {"kind": "sweep", **table.meta, **(extra or {})})
    return out


def write_compare(series: dict[str, tuple[np.ndarray, np.ndarray]], probes: dict, out: Path, summary: dict) -> Path:
    """Overlay data in long format: one row per (series, x) and per (series, t)."""
    out = Path(out)
    write_csv(
        out / "compare_profile.csv",
        ["series", "x", "u"],
        ([name, x, u] for name, (xs, us) in series.items() for x, u in zip(xs, us)),
    )
    write_csv(
        out / "compare_probe.csv",
        ["series", "t", "u"],
        ([name, t, u] for name, (ts, us) in probes.items() for t, u in zip(ts, us)),
    )
    write_json(out / "compare_summary.json", summary)
    return out
