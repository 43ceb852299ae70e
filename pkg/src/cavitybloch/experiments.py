"""Named experiments, configuration loading and data-file emission.

Each experiment id selects a preset parameter set (overridable from a
config file or key=value pairs) and produces CSV data files plus a
JSON manifest listing every emitted file with its content hash.  All
computations are deterministic; two runs of the same configuration
produce byte-identical data files.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import lz3_integrate, lz3_transition_matrix, poisson_average
from .core import InternalState, ScaledParams, SpatialGrid
from .observables import MomentumWindow, momentum_window_probability
from .propagator import Schedule, evolve, evolve_coupling_scales
from .spectrum import (
    bare_gaussian,
    classify_crossings,
    dispersion,
    dressed_gaussian,
    mu_range,
    project_band,
)


class ConfigError(ValueError):
    """The experiment configuration is malformed or inconsistent."""


# ---------------------------------------------------------------------------
# experiment presets

_TWO_PI = 2.0 * np.pi

# key -> value type; list values are comma separated in config files
_SETTING_TYPES = {
    "v0": float, "delta0": float, "force": float, "kappa": float,
    "omega": float, "chirped": bool,
    "k0": float, "width_x2": float, "x0": float, "internal": str,
    "initial": str, "band": int,
    "n_cells": int, "n_points": int, "dt": float, "t_final": float,
    "observer_stride": int, "snapshot_stride": int,
    "m": int, "nu_max": int, "k_points": int,
    "deltas": list, "force_values": list, "kappa_values": list,
    "poisson_nbar": float,
}

_COMMON = {
    "v0": 0.2, "delta0": 0.0, "force": 0.0, "kappa": 0.0, "omega": 0.0,
    "chirped": False, "k0": 0.0, "width_x2": 50.0, "x0": 0.0,
    "internal": "minus", "initial": "bare", "band": 1,
    "n_cells": 32, "n_points": 512, "dt": 1e-3, "t_final": 100.0,
    "observer_stride": 500, "snapshot_stride": 0,
    "m": 12, "nu_max": 5, "k_points": 401,
    "poisson_nbar": 0.0,
}

FIGURE_DEFAULTS: dict[str, dict] = {
    # band structure at zero and moderate detuning
    "fig1": {"kind": "dispersion", "deltas": [0.0, 0.7], "v0": 0.2},
    # band structure at the triple-crossing detunings
    "fig4": {"kind": "dispersion", "deltas": [1.0, -1.0], "v0": 0.2},
    # Bloch oscillations, weak force
    "fig2": {"kind": "bloch", "v0": 0.2, "force": 0.005, "t_final": 400.0,
             "snapshot_stride": 5000},
    # same packet, three times the force
    "fig3": {"kind": "bloch", "v0": 0.2, "force": 0.015, "t_final": 400.0,
             "snapshot_stride": 5000},
    # moderate positive detuning: upper state populated only at crossings
    "fig5": {"kind": "bloch", "v0": 0.2, "delta0": 1.0, "force": 0.0025,
             "t_final": 800.0, "n_cells": 80, "n_points": 1024,
             "x0": _TWO_PI * 32, "snapshot_stride": 10000,
             "observer_stride": 1000},
    # transfer probabilities across the three-level crossing vs force
    "fig6": {"kind": "crossing_sweep", "v0": 0.2, "delta0": -1.0,
             "k0": -0.5, "internal": "plus",
             "force_values": [0.002, 0.004, 0.006, 0.008, 0.010,
                              0.012, 0.014, 0.016, 0.018, 0.020],
             "n_cells": 80, "n_points": 1024, "x0": -_TWO_PI * 30,
             "dt": 2e-3},
    # adiabatic band surfaces under a chirped detuning
    "fig7": {"kind": "surfaces", "v0": 0.5, "delta0": 2.0, "omega": 0.1,
             "chirped": True, "k_points": 201, "nu_max": 2},
    # wave packet under a chirped detuning, large amplitude
    "fig8": {"kind": "chirp", "v0": 10.0, "delta0": 80.0, "omega": 0.1,
             "chirped": True, "width_x2": 90000.0, "k0": 0.5,
             "n_cells": 640, "n_points": 16384, "dt": 2.5e-4,
             "t_final": 2.0 * _TWO_PI / 0.1, "observer_stride": 1000,
             "snapshot_stride": 10000},
    # decaying coupling: inversion decay for three loss rates
    "fig10": {"kind": "decay", "v0": 0.5, "force": 0.02,
              "kappa_values": [1.0 / 250.0, 1.0 / 500.0, 1.0 / 1000.0],
              "n_cells": 16, "n_points": 256, "dt": 2.5e-3,
              "t_final": 1500.0, "observer_stride": 200},
    # free-form single propagation
    "custom": {"kind": "bloch"},
}

# the large fig8 run scaled down to a desk machine, same regime
# (delta0/v0 = 8 >> 1)
_FIG8_DESK = {"v0": 1.0, "delta0": 8.0, "width_x2": 100.0,
              "n_cells": 48, "n_points": 1024, "dt": 1e-3,
              "observer_stride": 250, "snapshot_stride": 5000}

EXPERIMENT_IDS = tuple(FIGURE_DEFAULTS)


@dataclass
class ExperimentConfig:
    """Resolved experiment selection plus overrides."""

    experiment: str
    out_dir: Path = Path("runs")
    desk_scale: bool = False
    figures: bool = True
    overrides: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        if self.experiment not in FIGURE_DEFAULTS:
            raise ConfigError(f"unknown experiment id '{self.experiment}'; "
                              f"choose from {', '.join(EXPERIMENT_IDS)}")
        settings = dict(_COMMON)
        settings.update(FIGURE_DEFAULTS[self.experiment])
        if self.experiment == "fig8" and self.desk_scale:
            settings.update(_FIG8_DESK)
        for key, value in self.overrides.items():
            if key not in _SETTING_TYPES:
                raise ConfigError(f"unknown setting '{key}'")
            settings[key] = value
        settings["experiment"] = self.experiment
        settings["desk_scale"] = self.desk_scale
        return settings


def _parse_value(key: str, raw: str):
    if key not in _SETTING_TYPES:
        raise ConfigError(f"unknown setting '{key}'")
    kind = _SETTING_TYPES[key]
    try:
        if kind is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is list:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse '{key} = {raw}': {exc}") from exc


def parse_override(pair: str):
    """Parse a command-line 'key=value' override."""
    if "=" not in pair:
        raise ConfigError(f"override '{pair}' is not of the form key=value")
    key, _, raw = pair.partition("=")
    key = key.strip()
    return key, _parse_value(key, raw.strip())


def load_config(path: str | Path, experiment: str | None = None) -> ExperimentConfig:
    """Read an INI-style config: [experiment] id = ...; [overrides] key = value.

    Figure defaults are applied first, file overrides second; the
    experiment id may also be supplied by the caller (command line).
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section in parser.sections():
        if section not in ("experiment", "overrides"):
            raise ConfigError(f"unknown config section [{section}]")
    exp = experiment
    if parser.has_section("experiment"):
        for key in parser["experiment"]:
            if key != "id":
                raise ConfigError(f"unknown key '{key}' in [experiment]")
        exp = parser.get("experiment", "id", fallback=exp)
    if exp is None:
        raise ConfigError("no experiment id given (config [experiment] id = ...)")
    overrides = {}
    if parser.has_section("overrides"):
        for key, raw in parser["overrides"].items():
            overrides[key] = _parse_value(key, raw)
    return ExperimentConfig(experiment=exp, overrides=overrides)


# ---------------------------------------------------------------------------
# initial states


def _internal_from_name(name: str) -> InternalState:
    try:
        return InternalState[name.upper()]
    except KeyError:
        raise ConfigError(f"internal state must be 'plus' or 'minus', got '{name}'")


def bare_packet_from_quasi(params: ScaledParams, k0: float, width_x2: float,
                           internal: InternalState, grid: SpatialGrid,
                           x0: float = 0.0):
    """Bare Gaussian at quasi momentum k0 on the lowest-energy ladder branch.

    The real momentum is k0 + mu with mu of the parity fixed by the
    internal state; among the admissible mu the one with the lowest
    bare energy is used.
    """
    parity = 0 if internal is InternalState.MINUS else 1
    mus = np.array([mu for mu in mu_range(3) if abs(mu % 2) == parity])
    energies = (k0 + mus) ** 2
    mu0 = int(mus[np.lexsort((-mus, energies))[0]])   # ties resolve upward
    return bare_gaussian(k0 + mu0, width_x2, internal, grid, x0=x0), mu0


def initial_state(settings: dict, grid: SpatialGrid, params: ScaledParams):
    internal = _internal_from_name(settings["internal"])
    if settings["initial"] == "dressed":
        return dressed_gaussian(params, settings["band"], settings["k0"],
                                settings["width_x2"], grid, settings["m"])
    state, _ = bare_packet_from_quasi(params, settings["k0"], settings["width_x2"],
                                      internal, grid, settings["x0"])
    return state


# ---------------------------------------------------------------------------
# CSV emission

_FLOAT_FMT = "%.12g"


def _meta_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True, default=str)


def write_columns_csv(path: Path, meta: dict, columns: dict[str, np.ndarray]):
    names = list(columns)
    rows = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_meta_line(meta) + "\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_FLOAT_FMT % v for v in row) + "\n")


def write_matrix_csv(path: Path, meta: dict, row_name: str, row_values,
                     col_name: str, col_values, matrix: np.ndarray):
    """Matrix CSV: first column the row coordinate, one column per col value."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_meta_line(meta) + "\n")
        header = [row_name] + [f"{col_name}={_FLOAT_FMT % c}" for c in col_values]
        fh.write(",".join(header) + "\n")
        for rv, row in zip(row_values, matrix):
            fh.write(_FLOAT_FMT % rv + "," +
                     ",".join(_FLOAT_FMT % v for v in row) + "\n")


# ---------------------------------------------------------------------------
# runners


def _schedule(params: ScaledParams, gauge: bool = True,
              force: float | None = None) -> Schedule:
    return Schedule.from_params(params, gauge=gauge, force=force)


def _params(settings: dict) -> ScaledParams:
    return ScaledParams(v0=settings["v0"], delta0=settings["delta0"],
                        force=settings["force"], kappa=settings["kappa"],
                        omega=settings["omega"], chirped=settings["chirped"])


def run_dispersion(settings: dict) -> dict:
    k = np.linspace(-1.0, 1.0, settings["k_points"])
    k = k[k > -1.0]
    tables = []
    for delta in settings["deltas"]:
        params = ScaledParams(v0=settings["v0"], delta0=delta)
        table = dispersion(params, k, settings["nu_max"], settings["m"])
        crossings = classify_crossings(delta)
        tables.append({"delta": delta, "table": table, "crossings": crossings})
    return {"tables": tables}


def _finite_or_none(value: float):
    return float(value) if np.isfinite(value) else None


def run_bloch(settings: dict) -> dict:
    from .timeseries import alternation_period, extrema_period

    params = _params(settings)
    grid = SpatialGrid(settings["n_cells"], settings["n_points"])
    state = initial_state(settings, grid, params)
    schedule = _schedule(params)
    traj = evolve(state, schedule, settings["t_final"], settings["dt"],
                  observer_stride=settings["observer_stride"],
                  band_nu=(1, 2, 3), m=settings["m"],
                  snapshot_stride=settings["snapshot_stride"])
    # empirical oscillation measures, reported alongside the raw series
    span = traj.t[-1] - traj.t[0]
    measures = {
        "period_x_mean": _finite_or_none(
            extrema_period(traj.t, traj.x_mean, order=max(3, len(traj.t) // 20))),
        "sigma_z_alternation": _finite_or_none(
            alternation_period(traj.t, traj.inversion, min_gap=0.02 * span)),
    }
    return {"trajectory": traj, "grid": grid, "params": params,
            "measures": measures}


def run_crossing_sweep(settings: dict) -> dict:
    """Transfer across the triple crossing versus force.

    The packet starts in the upper internal state at quasi momentum k0
    and is swept upward across the crossing at k = 0 (schedule force
    -F), for one full inter-crossing interval 1/F.  At the end the
    upper-state momentum window (-1, 0), the ground-band population and
    the two three-level model predictions are recorded.
    """
    params = _params(settings)
    grid = SpatialGrid(settings["n_cells"], settings["n_points"])
    internal = _internal_from_name(settings["internal"])
    window = MomentumWindow(internal, -1.0, 0.0)
    rows = {"force": [], "p_window": [], "p_band1": [],
            "lz3_matrix": [], "lz3_integrated": []}
    for f in settings["force_values"]:
        state, _ = bare_packet_from_quasi(params, settings["k0"],
                                          settings["width_x2"], internal,
                                          grid, settings["x0"])
        schedule = _schedule(params, force=-f)
        traj = evolve(state, schedule, t_final=1.0 / f, dt=settings["dt"],
                      observer_stride=10**9)
        final = traj.final_state
        rows["force"].append(f)
        rows["p_window"].append(momentum_window_probability(final, window))
        rows["p_band1"].append(project_band(final, params, 1, settings["m"]))
        rows["lz3_matrix"].append(lz3_transition_matrix(params.v0, f)[0, 2])
        rows["lz3_integrated"].append(lz3_integrate(params.v0, f)[0])
    return {"sweep": {k: np.array(v) for k, v in rows.items()},
            "params": params}


def run_surfaces(settings: dict) -> dict:
    params = _params(settings)
    k = np.linspace(-1.0, 1.0, settings["k_points"])
    k = k[k > -1.0]
    t = np.linspace(0.0, 2.0 * np.pi / settings["omega"], settings["k_points"])
    surfaces = np.empty((settings["nu_max"], k.size, t.size))
    for j, tj in enumerate(t):
        table = dispersion(params, k, settings["nu_max"], settings["m"], t=tj)
        surfaces[:, :, j] = table.energies.T
    return {"k": k, "t": t, "surfaces": surfaces, "params": params}


def run_chirp(settings: dict) -> dict:
    from .analytic import chirped_inversion_adiabatic
    from .timeseries import alternation_period, count_transfers

    params = _params(settings)
    grid = SpatialGrid(settings["n_cells"], settings["n_points"])
    state = initial_state(settings, grid, params)
    schedule = _schedule(params, gauge=False)
    traj = evolve(state, schedule, settings["t_final"], settings["dt"],
                  observer_stride=settings["observer_stride"],
                  snapshot_stride=settings["snapshot_stride"])
    adiabatic = chirped_inversion_adiabatic(traj.t, params.v0, params.delta0,
                                            params.omega)
    t_osc = np.pi / params.omega if params.omega > 0 else np.inf
    measures = {
        "sigma_z_alternation": _finite_or_none(
            alternation_period(traj.t, traj.inversion, min_gap=0.3 * t_osc)),
        "transfers": count_transfers(traj.t, traj.inversion,
                                     min_gap=0.3 * t_osc, level=0.0),
    }
    return {"trajectory": traj, "adiabatic": adiabatic, "grid": grid,
            "params": params, "measures": measures}


def run_decay(settings: dict) -> dict:
    """Inversion decay under an exponentially decaying coupling.

    One run per loss rate; optionally a photon-number average over a
    coherent-state distribution with mean poisson_nbar (couplings
    scaled by sqrt(n/n_bar)), executed as one batched evolution.
    """
    grid = SpatialGrid(settings["n_cells"], settings["n_points"])
    runs = []
    for kappa in settings["kappa_values"]:
        params = ScaledParams(v0=settings["v0"], delta0=settings["delta0"],
                              force=settings["force"], kappa=kappa)
        state = initial_state(settings, grid, params)
        schedule = _schedule(params)
        traj = evolve(state, schedule, settings["t_final"], settings["dt"],
                      observer_stride=settings["observer_stride"])
        runs.append({"kappa": kappa, "t": traj.t, "inversion": traj.inversion,
                     "norm": traj.norm})
    result = {"runs": runs}

    n_bar = settings["poisson_nbar"]
    if n_bar > 0:
        params = ScaledParams(v0=settings["v0"], delta0=settings["delta0"],
                              force=settings["force"],
                              kappa=settings["kappa_values"][0])
        state = initial_state(settings, grid, params)
        schedule = _schedule(params)
        times = {}

        def batch_runner(scales):
            ts, series = evolve_coupling_scales(
                state, schedule, scales, settings["t_final"], settings["dt"],
                observer_stride=settings["observer_stride"])
            times["t"] = ts
            return series

        averaged = poisson_average(n_bar, batch_runner, batched=True)
        result["poisson"] = {"n_bar": n_bar, "t": times["t"],
                             "inversion": averaged,
                             "kappa": settings["kappa_values"][0]}
    return result


RUNNERS = {
    "dispersion": run_dispersion,
    "bloch": run_bloch,
    "crossing_sweep": run_crossing_sweep,
    "surfaces": run_surfaces,
    "chirp": run_chirp,
    "decay": run_decay,
}


# ---------------------------------------------------------------------------
# file emission and manifest


@dataclass
class RunManifest:
    """Record of one experiment run: parameters, files and hashes."""

    experiment: str
    settings: dict
    version: str
    wall_seconds: float
    files: list[dict]
    out_dir: Path
    results: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "settings": {k: v for k, v in sorted(self.settings.items())},
            "version": self.version,
            "wall_seconds": round(self.wall_seconds, 3),
            "files": self.files,
        }
        return json.dumps(payload, indent=2, default=str)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _emit_trajectory(out: Path, tag: str, meta: dict, traj) -> list[Path]:
    files = []
    cols = {"t": traj.t, "sigma_z": traj.inversion, "x_mean": traj.x_mean,
            "norm": traj.norm}
    if traj.band_pops is not None:
        for i, nu in enumerate(traj.nu_list):
            cols[f"p_band{nu}"] = traj.band_pops[:, i]
    path = out / f"{tag}_trajectory.csv"
    write_columns_csv(path, meta, cols)
    files.append(path)
    if traj.snapshot_t is not None:
        x = traj.final_state.grid.x
        for name, mat in (("plus", traj.snapshot_plus),
                          ("minus", traj.snapshot_minus)):
            path = out / f"{tag}_density_{name}.csv"
            write_matrix_csv(path, meta, "x", x, "t", traj.snapshot_t, mat)
            files.append(path)
    return files


def _emit(experiment: str, settings: dict, results: dict, out: Path) -> list[Path]:
    kind = settings["kind"]
    meta = {k: settings[k] for k in sorted(settings)
            if k not in ("kind",) and not isinstance(settings[k], Path)}
    if "measures" in results:
        meta["measures"] = results["measures"]
    files: list[Path] = []
    if kind == "dispersion":
        for entry in results["tables"]:
            table = entry["table"]
            delta = entry["delta"]
            cols = {"k": table.k}
            for nu in range(1, table.nu_max + 1):
                cols[f"E_{nu}"] = table.band(nu)
            path = out / f"{experiment}_delta{delta:+g}.csv"
            write_columns_csv(path, {**meta, "delta": delta}, cols)
            files.append(path)
    elif kind == "bloch":
        files += _emit_trajectory(out, experiment, meta, results["trajectory"])
    elif kind == "crossing_sweep":
        path = out / f"{experiment}_sweep.csv"
        write_columns_csv(path, meta, results["sweep"])
        files.append(path)
    elif kind == "surfaces":
        for nu in range(1, results["surfaces"].shape[0] + 1):
            path = out / f"{experiment}_band{nu}.csv"
            write_matrix_csv(path, meta, "k", results["k"], "t", results["t"],
                             results["surfaces"][nu - 1])
            files.append(path)
    elif kind == "chirp":
        traj = results["trajectory"]
        files += _emit_trajectory(out, experiment, meta, traj)
        path = out / f"{experiment}_adiabatic.csv"
        write_columns_csv(path, meta, {"t": traj.t,
                                       "inversion_adiabatic": results["adiabatic"]})
        files.append(path)
    elif kind == "decay":
        for run in results["runs"]:
            path = out / f"{experiment}_kappa{1.0 / run['kappa']:.0f}.csv"
            write_columns_csv(path, {**meta, "kappa": run["kappa"]},
                              {"t": run["t"], "sigma_z": run["inversion"],
                               "norm": run["norm"]})
            files.append(path)
        if "poisson" in results:
            avg = results["poisson"]
            path = out / f"{experiment}_poisson_nbar{avg['n_bar']:g}.csv"
            write_columns_csv(path, {**meta, "kappa": avg["kappa"]},
                              {"t": avg["t"], "sigma_z": avg["inversion"]})
            files.append(path)
    else:
        raise ConfigError(f"no emitter for experiment kind '{kind}'")
    return files


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Execute an experiment and write its data files and manifest."""
    settings = config.resolved()
    out = Path(config.out_dir) / config.experiment
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    results = RUNNERS[settings["kind"]](settings)
    files = _emit(config.experiment, settings, results, out)
    if config.figures:
        from . import plotting
        files += plotting.render(config.experiment, settings, results, out)
    wall = time.perf_counter() - start
    manifest = RunManifest(
        experiment=config.experiment,
        settings={k: v for k, v in settings.items() if k != "kind"},
        version=__version__,
        wall_seconds=wall,
        files=[{"path": f.name, "sha256": _sha256(f), "bytes": f.stat().st_size}
               for f in files],
        out_dir=out,
        results=results,
    )
    (out / "manifest.json").write_text(manifest.to_json() + "\n", encoding="utf-8")
    return manifest
