"""Experiment configuration, presets and orchestration for the command line."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import artifacts
from .analysis import SweepConfig, epsilon_error, sweep_epsilon, sweep_ny
from .direct import DirectRunConfig, run_direct, y_profile
from .errors import ArtifactError, ConfigError
from .fixed_point import DEFAULT_MAX_ITER, DEFAULT_TOL, FixedPointRunConfig, run_fixed_point
from .params import ParamSet, validate_params
from .weak import WeakRunConfig, run_approx, run_profile_variant, run_weak

logger = logging.getLogger(__name__)

MODES = ("direct", "fixed_point", "weak", "approx", "profile_variant", "compare", "sweep")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "fixed_point"
    alpha: float = 0.1
    beta: float = 0.0
    epsilon: float = 0.2
    epsilons: tuple[float, ...] | None = None
    nx: int = 400
    ny: int | None = None  # None: smallest aligned ny with hy <= hx
    n1d: int | None = None  # cells per unit length in 1-D runs; None: nx / 2
    dt: float = 1e-3
    t_end: float = 0.5
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    delta: float | None = None
    accelerate: bool = False
    wall_flux_mode: str = "constant"
    profile_id: str = "linear"
    profile_params: dict | None = None
    snapshot_times: tuple[float, ...] | None = None
    probe_x: tuple[float, ...] = (0.5,)
    with_minus: bool = False
    workers: int = 1
    out: str = "runs/out"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.mode == "sweep" and (self.epsilons is None or len(self.epsilons) < 3):
            raise ConfigError("epsilons: sweep mode needs at least 3 values")
        for key in ("nx", "max_iter", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key}: must be positive")
        if self.n1d is not None and self.n1d < 1:
            raise ConfigError("n1d: must be positive")
        if not self.dt > 0 or not self.t_end > 0 or not self.tol > 0:
            raise ConfigError("dt, t_end and tol must be positive")

    @property
    def n_1d(self) -> int:
        return self.n1d if self.n1d is not None else self.nx // 2

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_TUPLE_KEYS = {"epsilons", "snapshot_times", "probe_x"}


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Build a config from plain JSON-like data; unknown keys are errors."""
    clean = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in _FIELD_TYPES:
            raise ConfigError(f"{key}: unknown configuration key")
        if value is not None and k in _TUPLE_KEYS:
            if not isinstance(value, (list, tuple)):
                value = [value]
            try:
                value = tuple(float(v) for v in value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: expected a list of numbers") from exc
        clean[k] = value
    try:
        return ExperimentConfig(**clean)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


PRESETS: dict[str, dict] = {
    # direct field at moderate period, alpha = 0.1
    "fig3": {"mode": "direct", "alpha": 0.1, "beta": 0.0, "epsilon": 0.2, "nx": 400, "t_end": 0.5,
             "snapshot_times": [0.1, 0.25, 0.5]},
    # all three approaches at small alpha
    "fig4": {"mode": "compare", "alpha": 0.1, "beta": 0.0, "epsilon": 0.02, "nx": 400, "t_end": 0.5},
    # all three approaches at large alpha
    "fig5": {"mode": "compare", "alpha": 0.6, "beta": 0.0, "epsilon": 0.02, "nx": 400, "t_end": 0.5},
    # error against the period
    "fig6": {"mode": "sweep", "alpha": 0.1, "beta": 0.0, "epsilons": [0.4, 0.2, 0.1, 0.05], "nx": 400,
             "t_end": 0.5},
}


def resolve_config(preset: str | None = None, config_path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge preset < config file < command-line overrides (later wins)."""
    data: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}; have {sorted(PRESETS)}")
        data.update(PRESETS[preset])
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ArtifactError(f"cannot read config {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {config_path} is not valid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config: top level must be an object")
        data.update(loaded)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(data)


def _params(cfg: ExperimentConfig, epsilon: float | None = None) -> ParamSet:
    eps = cfg.epsilon if epsilon is None else epsilon
    if cfg.mode == "profile_variant" or cfg.wall_flux_mode == "profile":
        return validate_params(cfg.alpha, cfg.beta, eps, "profile", cfg.profile_id, cfg.profile_params)
    return validate_params(cfg.alpha, cfg.beta, eps)


def _snapshots(cfg: ExperimentConfig):
    return tuple(cfg.snapshot_times) if cfg.snapshot_times else None


def _direct(cfg: ExperimentConfig, params: ParamSet):
    ny = cfg.ny if cfg.ny is not None else sweep_ny(cfg.alpha, params.epsilon, cfg.nx)
    return run_direct(DirectRunConfig(params, cfg.nx, ny, cfg.dt, cfg.t_end, _snapshots(cfg), tuple(cfg.probe_x)))


def _fixed_point(cfg: ExperimentConfig, params: ParamSet):
    return run_fixed_point(FixedPointRunConfig(
        params, cfg.n_1d, cfg.dt, cfg.t_end, cfg.tol, cfg.max_iter, cfg.accelerate, _snapshots(cfg), tuple(cfg.probe_x)
    ))


def _weak_config(cfg: ExperimentConfig, params: ParamSet, model: str) -> WeakRunConfig:
    return WeakRunConfig(params, 2 * cfg.n_1d, cfg.dt, cfg.t_end, cfg.delta, model, _snapshots(cfg), tuple(cfg.probe_x))


def _l2_away_from_interface(x_ref, u_ref, x, u, cut: float = 0.1) -> float:
    mask = np.abs(x_ref) > cut
    ui = np.interp(x_ref[mask], x, u)
    return float(np.linalg.norm(ui - u_ref[mask]) / np.linalg.norm(u_ref[mask]))


def run_experiment(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    echo = {"experiment": cfg.as_dict()}
    logger.info("mode %s -> %s", cfg.mode, out)
    if cfg.mode == "sweep":
        table, fit = sweep_epsilon(
            SweepConfig(cfg.alpha, cfg.beta, cfg.nx, cfg.dt, cfg.t_end, cfg.with_minus, cfg.tol),
            cfg.epsilons, cfg.workers,
        )
        return artifacts.write_sweep(table, fit, out, echo)

    params = _params(cfg)
    if cfg.mode == "direct":
        return artifacts.write_direct_run(_direct(cfg, params), out, echo)
    if cfg.mode == "fixed_point":
        return artifacts.write_homog_run(_fixed_point(cfg, params), out, echo)
    if cfg.mode == "weak":
        return artifacts.write_homog_run(run_weak(_weak_config(cfg, params, "full_weak")), out, echo)
    if cfg.mode == "approx":
        return artifacts.write_homog_run(run_approx(_weak_config(cfg, params, "approx_small_alpha")), out, echo)
    if cfg.mode == "profile_variant":
        traj = run_profile_variant(_weak_config(cfg, params, "profile_variant"), params.profile)
        return artifacts.write_homog_run(traj, out, echo)

    # compare: direct against both homogenized solvers
    d = _direct(cfg, params)
    fp = _fixed_point(cfg, params)
    wk = run_weak(_weak_config(cfg, params, "full_weak"))
    artifacts.write_direct_run(d, out / "direct", echo)
    artifacts.write_homog_run(fp, out / "fixed_point", echo)
    artifacts.write_homog_run(wk, out / "weak", echo)
    xd, ud, _ = y_profile(d.final)
    series = {
        "direct": (xd, ud),
        "fixed_point": (fp.final.grid.nodes, fp.final.values),
        "weak": (wk.final.grid.nodes, wk.final.values),
    }
    probes = {name: (tr.times, tr.probe[:, 0]) for name, tr in (("direct", d), ("fixed_point", fp), ("weak", wk))}
    summary = {
        **echo,
        "t1": cfg.t_end,
        "l2_vs_direct_away_from_0": {
            name: _l2_away_from_interface(xd, ud, *series[name]) for name in ("fixed_point", "weak")
        },
        "err_plus": {name: epsilon_error(d.final, tr.final) for name, tr in (("fixed_point", fp), ("weak", wk))},
        "weak_vs_fixed_point": _l2_away_from_interface(*series["fixed_point"], *series["weak"]),
    }
    return artifacts.write_compare(series, probes, out, summary)
