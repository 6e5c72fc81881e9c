"""SVG line plots built only from the CSV artifacts of a run."""

from __future__ import annotations

import json
from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .artifacts import read_csv  # noqa: E402
from .errors import MissingArtifact  # noqa: E402

# fixed ids and no timestamp: identical CSVs give identical SVG bytes
plt.rcParams["svg.hashsalt"] = "crackdiff"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _grouped(rows, key_col: int, x_col: int, y_col: int) -> "OrderedDict[str, tuple[list, list]]":
    groups: OrderedDict[str, tuple[list, list]] = OrderedDict()
    for r in rows:
        xs, ys = groups.setdefault(r[key_col], ([], []))
        xs.append(float(r[x_col]))
        ys.append(float(r[y_col]))
    return groups


def _line_plot(groups, path: Path, xlabel: str, ylabel: str, title: str, label_fmt=str) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for i, (name, (xs, ys)) in enumerate(groups.items()):
        (line,) = ax.plot(xs, ys, lw=1.2, label=label_fmt(name))
        line.set_gid(f"series-{i}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_profile(run_dir: Path) -> Path:
    header, rows = read_csv(run_dir / "profile.csv")
    ycol = header.index("u_yavg") if "u_yavg" in header else header.index("u")
    groups = _grouped(rows, 0, 1, ycol)
    return _line_plot(groups, run_dir / "profile.svg", "x", header[ycol], "profiles", lambda t: f"t = {float(t):g}")


def plot_probe(run_dir: Path) -> Path:
    header, rows = read_csv(run_dir / "probe.csv")
    groups = OrderedDict((header[j], ([float(r[0]) for r in rows], [float(r[j]) for r in rows])) for j in range(1, len(header)))
    return _line_plot(groups, run_dir / "probe.svg", "t", "u", "probe time series")


def plot_compare(run_dir: Path) -> list[Path]:
    _, rows = read_csv(run_dir / "compare_profile.csv")
    out = [_line_plot(_grouped(rows, 0, 1, 2), run_dir / "compare_profile.svg", "x", "u", "profile overlay")]
    _, rows = read_csv(run_dir / "compare_probe.csv")
    out.append(_line_plot(_grouped(rows, 0, 1, 2), run_dir / "compare_probe.svg", "t", "u", "probe overlay"))
    return out


def plot_error(run_dir: Path) -> Path:
    header, rows = read_csv(run_dir / "err_table.csv")
    fit_path = run_dir / "fit.json"
    if not fit_path.is_file():
        raise MissingArtifact(f"{fit_path} not found")
    fit = json.loads(fit_path.read_text())
    eps = [float(r[0]) for r in rows]
    err = [float(r[header.index("err")]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    (pts,) = ax.plot(eps, err, "o-", label="err")
    pts.set_gid("series-0")
    lo, hi = 0.0, max(eps)
    (fl,) = ax.plot([lo, hi], [fit["intercept"], fit["intercept"] + fit["slope"] * hi], "--", label=f"fit slope {fit['slope']:.3g}")
    fl.set_gid("series-1")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("relative L2 error")
    ax.set_title("error against period")
    ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, run_dir / "err_vs_eps.svg")


def emit_plots(run_dir) -> list[Path]:
    """Write every plot whose CSVs exist in ``run_dir`` (recursing into sub-runs)."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise MissingArtifact(f"{run_dir} is not a directory")
    made: list[Path] = []
    if (run_dir / "err_table.csv").exists():
        made.append(plot_error(run_dir))
    if (run_dir / "compare_profile.csv").exists():
        made.extend(plot_compare(run_dir))
    if (run_dir / "profile.csv").exists():
        made.append(plot_profile(run_dir))
    if (run_dir / "probe.csv").exists():
        made.append(plot_probe(run_dir))
    for sub in sorted(p for p in run_dir.iterdir() if p.is_dir()):
        if any((sub / f).exists() for f in ("profile.csv", "err_table.csv")):
            made.extend(emit_plots(sub))
    if not made:
        raise MissingArtifact(f"no plottable CSVs in {run_dir}")
    return made
