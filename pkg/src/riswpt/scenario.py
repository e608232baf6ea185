"""Scenario files, the MTBS run driver, distance sweeps and CSV export.

Scenarios are JSON documents (``schema_version`` 1).  Unset spacings default
to half a wavelength; unset Tx/Rx orientations face the RIS center and an
unset RIS orientation faces +z.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .channel import AntennaPattern, Aperture, LinkGains, Scene
from .geometry import PlanarArraySpec, Pose, partition_ris, wavelength
from .measurement import MeasurementOracle, RectifierModel, watts_to_dbm
from .ris_control import PhaseResolution
from .scanning import MtbsResult, ScanGrid, ScanTrace, default_grid, mtbs

SCHEMA_VERSION = 1
BUNDLED = ("paper_sim_2x2", "paper_sim_4x4", "paper_exp_obstacle", "paper_exp_distance")


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.field = path


@dataclass
class ArrayConfig:
    rows: int
    cols: int
    position_m: list[float]
    spacing_m: list[float] | None = None
    orientation: list[list[float]] | None = None
    pattern_peak: float = 1.0
    pattern_exponent: float = 0.0


@dataclass
class ScenarioConfig:
    name: str
    frequency_hz: float
    tx: ArrayConfig
    rx: ArrayConfig
    ris: ArrayConfig
    tile: list[int]
    phase_levels: int | None = 2
    phase_inside_quantizer: bool = True
    cell_magnitude: float = 1.0
    cell_state_values: list[list[float]] | None = None
    tx_phase_levels: int | None = None
    wide_beam_power_w: float = 1.0
    array_element_power_w: float = 1.0
    sensor: list[int] | None = None
    wide_beam_element: list[int] = field(default_factory=lambda: [1, 1])
    scan_oversample: int = 2
    scan_width: float = 2.0
    block_direct: bool = False
    blocked_tiles: list[int] = field(default_factory=list)
    noise_std_w: float = 0.0
    power_quant_db: float | None = None
    seed: int = 0
    rectifier: dict[str, list[float]] | None = None
    iterations: int = 3
    channel_model: str = "far_field"
    min_power_w: float | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def wavelength(self) -> float:
        return wavelength(self.frequency_hz)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def with_updates(self, **kw) -> ScenarioConfig:
        return replace(copy.deepcopy(self), **kw)


def _req(d: dict, key: str, path: str):
    if key not in d or d[key] is None:
        raise ConfigError(f"{path}{key}", "missing required field")
    return d[key]


def _positive(v, path: str):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
        raise ConfigError(path, f"must be a positive number, got {v!r}")
    return v


def _count(v, path: str, minimum: int = 1):
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(path, f"must be an integer >= {minimum}, got {v!r}")
    return v


def _array(d: dict, path: str) -> ArrayConfig:
    if not isinstance(d, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    known = {f for f in ArrayConfig.__dataclass_fields__}
    extra = set(d) - known
    if extra:
        raise ConfigError(path + sorted(extra)[0], "unknown field")
    rows = _count(_req(d, "rows", path), path + "rows")
    cols = _count(_req(d, "cols", path), path + "cols")
    pos = _req(d, "position_m", path)
    if not (isinstance(pos, list) and len(pos) == 3 and all(isinstance(p, (int, float)) for p in pos)):
        raise ConfigError(path + "position_m", "must be a list of 3 numbers")
    sp = d.get("spacing_m")
    if sp is not None:
        if not (isinstance(sp, list) and len(sp) == 2):
            raise ConfigError(path + "spacing_m", "must be [x, y] meters")
        for i, s in enumerate(sp):
            _positive(s, f"{path}spacing_m[{i}]")
    rot = d.get("orientation")
    if rot is not None:
        try:
            Pose(np.zeros(3), np.asarray(rot, dtype=float))
        except (ValueError, TypeError) as exc:
            raise ConfigError(path + "orientation", str(exc)) from None
    peak = _positive(d.get("pattern_peak", 1.0), path + "pattern_peak")
    exp = d.get("pattern_exponent", 0.0)
    if not isinstance(exp, (int, float)) or exp < 0:
        raise ConfigError(path + "pattern_exponent", "must be a nonnegative number")
    return ArrayConfig(rows, cols, [float(p) for p in pos],
                       None if sp is None else [float(s) for s in sp], rot, float(peak), float(exp))


def parse_scenario(data: dict) -> ScenarioConfig:
    """Validate a scenario document; errors name the offending field."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "scenario must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")
    known = set(ScenarioConfig.__dataclass_fields__)
    extra = set(data) - known
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown field")
    kw = {k: v for k, v in data.items() if k not in ("tx", "rx", "ris")}
    _req(data, "name", "")
    _positive(_req(data, "frequency_hz", ""), "frequency_hz")
    for part in ("tx", "rx", "ris"):
        kw[part] = _array(_req(data, part, ""), part + ".")
    cfg = ScenarioConfig(**kw)

    tile = cfg.tile
    if not (isinstance(tile, list) and len(tile) == 2):
        raise ConfigError("tile", "must be [rows, cols]")
    _count(tile[0], "tile[0]")
    _count(tile[1], "tile[1]")
    if cfg.ris.rows % tile[0] or cfg.ris.cols % tile[1]:
        raise ConfigError("tile", f"{tile[0]}x{tile[1]} does not divide RIS {cfg.ris.rows}x{cfg.ris.cols}")
    if cfg.phase_levels is not None:
        _count(cfg.phase_levels, "phase_levels", 2)
    if cfg.tx_phase_levels is not None:
        _count(cfg.tx_phase_levels, "tx_phase_levels", 2)
    if not 0 < cfg.cell_magnitude <= 1:
        raise ConfigError("cell_magnitude", "must lie in (0, 1]")
    if cfg.cell_state_values is not None:
        if cfg.phase_levels is None or len(cfg.cell_state_values) != cfg.phase_levels:
            raise ConfigError("cell_state_values", "needs one [re, im] pair per phase level")
    _positive(cfg.wide_beam_power_w, "wide_beam_power_w")
    _positive(cfg.array_element_power_w, "array_element_power_w")
    if cfg.sensor is not None:
        a, b = cfg.sensor
        if not (1 <= a <= cfg.rx.rows and 1 <= b <= cfg.rx.cols):
            raise ConfigError("sensor", f"outside {cfg.rx.rows}x{cfg.rx.cols} receiver")
    i, j = cfg.wide_beam_element
    if not (1 <= i <= cfg.tx.rows and 1 <= j <= cfg.tx.cols):
        raise ConfigError("wide_beam_element", f"outside {cfg.tx.rows}x{cfg.tx.cols} transmitter")
    _count(cfg.scan_oversample, "scan_oversample")
    _positive(cfg.scan_width, "scan_width")
    k_tiles = (cfg.ris.rows // tile[0]) * (cfg.ris.cols // tile[1])
    for n, k in enumerate(cfg.blocked_tiles):
        if not isinstance(k, int) or not 1 <= k <= k_tiles:
            raise ConfigError(f"blocked_tiles[{n}]", f"must be a tile index in 1..{k_tiles}")
    if cfg.noise_std_w < 0:
        raise ConfigError("noise_std_w", "must be nonnegative")
    if cfg.power_quant_db is not None:
        _positive(cfg.power_quant_db, "power_quant_db")
    if cfg.rectifier is not None:
        try:
            RectifierModel(tuple(cfg.rectifier["input_w"]), tuple(cfg.rectifier["output_w"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("rectifier", str(exc)) from None
    _count(cfg.iterations, "iterations")
    if cfg.channel_model not in ("far_field", "exact"):
        raise ConfigError("channel_model", "must be 'far_field' or 'exact'")
    return cfg


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        text = resources.files("riswpt.scenarios").joinpath(f"{path}.json").read_text()
    elif not p.exists():
        raise FileNotFoundError(f"no scenario file {path} (bundled: {', '.join(BUNDLED)})")
    else:
        text = p.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_scenario(data)


def save_scenario(cfg: ScenarioConfig, path: str | Path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def _spec(a: ArrayConfig, lam: float) -> PlanarArraySpec:
    sx, sy = a.spacing_m if a.spacing_m is not None else (lam / 2, lam / 2)
    return PlanarArraySpec(a.rows, a.cols, sx, sy)


def _pose(a: ArrayConfig, target) -> Pose:
    if a.orientation is not None:
        return Pose(a.position_m, np.asarray(a.orientation, dtype=float))
    return Pose.facing(a.position_m, target)


def _pattern(a: ArrayConfig) -> AntennaPattern:
    return AntennaPattern(a.pattern_peak, a.pattern_exponent)


def build_scene(cfg: ScenarioConfig) -> Scene:
    lam = cfg.wavelength
    ris_pose = Pose(cfg.ris.position_m, np.eye(3) if cfg.ris.orientation is None else cfg.ris.orientation)
    part = partition_ris(_spec(cfg.ris, lam), *cfg.tile)
    return Scene(
        tx=Aperture(_spec(cfg.tx, lam), _pose(cfg.tx, ris_pose.origin)),
        rx=Aperture(_spec(cfg.rx, lam), _pose(cfg.rx, ris_pose.origin)),
        ris_pose=ris_pose,
        partition=part,
        wavelength=lam,
        gains=LinkGains(_pattern(cfg.tx), _pattern(cfg.rx), _pattern(cfg.ris)),
        direct_blocked=cfg.block_direct,
        blocked_tiles=frozenset(k - 1 for k in cfg.blocked_tiles),
        exact=cfg.channel_model == "exact",
    )


def build_resolution(cfg: ScenarioConfig) -> PhaseResolution:
    states = None
    if cfg.cell_state_values is not None:
        states = tuple(complex(re, im) for re, im in cfg.cell_state_values)
    return PhaseResolution(cfg.phase_levels, cfg.cell_magnitude, states, cfg.phase_inside_quantizer)


def build_oracle(cfg: ScenarioConfig, scene: Scene | None = None) -> MeasurementOracle:
    rect = None
    if cfg.rectifier is not None:
        rect = RectifierModel(tuple(cfg.rectifier["input_w"]), tuple(cfg.rectifier["output_w"]))
    return MeasurementOracle(scene or build_scene(cfg), build_resolution(cfg),
                             tuple(cfg.sensor) if cfg.sensor else None,
                             cfg.noise_std_w, cfg.power_quant_db, cfg.seed, rect)


def scan_grids(cfg: ScenarioConfig, scene: Scene) -> tuple[ScanGrid, ScanGrid]:
    """(tile grid, transmitter grid) from the oversampled full-span rule."""
    return (default_grid(scene.partition.tile_spec, cfg.scan_oversample, cfg.scan_width),
            default_grid(scene.tx.spec, cfg.scan_oversample, cfg.scan_width))


@dataclass(frozen=True)
class Checkpoint:
    """Powers after one stage of one iteration, with the matching RIS-OFF baseline.

    ``trace_row`` is the confirmation reading that ``sensor_w`` repeats.
    """

    iteration: int
    stage: str
    trace_row: int
    sensor_w: float
    total_w: float
    total_dc_w: float
    baseline_sensor_w: float
    baseline_total_w: float
    baseline_total_dc_w: float

    @property
    def gain_db(self) -> float:
        return 10 * np.log10(self.sensor_w / self.baseline_sensor_w)

    @property
    def total_gain_db(self) -> float:
        return 10 * np.log10(self.total_w / self.baseline_total_w)


@dataclass
class RunResult:
    config: ScenarioConfig
    mtbs: MtbsResult
    checkpoints: list[Checkpoint]
    phase_grid: np.ndarray
    transmit_power_w: float
    measurements: int

    @property
    def trace(self):
        return self.mtbs.trace

    def checkpoint(self, iteration: int, stage: str) -> Checkpoint:
        for c in self.checkpoints:
            if c.iteration == iteration and c.stage == stage:
                return c
        raise KeyError((iteration, stage))

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]


def _apply_mode(oracle: MeasurementOracle, mode: tuple, tx_levels):
    if mode[0] == "wide":
        oracle.set_wide_beam(mode[1], mode[2])
    elif mode[0] == "directional":
        oracle.set_directional(mode[1], mode[2], tx_levels)


def baseline_powers(cfg: ScenarioConfig, scene: Scene, mode: tuple) -> tuple[float, float, float]:
    """(sensor, total RF, total DC) watts with every cell OFF under ``mode``."""
    off = build_oracle(cfg.with_updates(noise_std_w=0.0, power_quant_db=None), scene)
    _apply_mode(off, mode, cfg.tx_phase_levels)
    return off.sensor_power(), off.total_rf_power(), off.total_dc_power()


def run_mtbs(cfg: ScenarioConfig) -> RunResult:
    scene = build_scene(cfg)
    oracle = build_oracle(cfg, scene)
    tile_grid, tx_grid = scan_grids(cfg, scene)
    points: list[Checkpoint] = []
    trace = ScanTrace()

    def on_stage(tau: int, stage: str, row: int):
        base = baseline_powers(cfg, scene, oracle.excitation_mode)
        points.append(Checkpoint(tau, stage, row, trace[row].power,
                                 oracle.total_rf_power(), oracle.total_dc_power(), *base))

    res = mtbs(oracle, cfg.iterations, tile_grid, tx_grid, tuple(cfg.wide_beam_element),
               cfg.wide_beam_power_w, cfg.array_element_power_w, cfg.tx_phase_levels,
               cfg.min_power_w, on_stage=on_stage, trace=trace)
    grid = oracle.cell_states() if cfg.phase_levels is not None else None
    return RunResult(cfg, res, points, grid, oracle.transmit_power(), oracle.measurements)


def ideal_focusing_states(cfg: ScenarioConfig, levels: int = 2) -> np.ndarray:
    """Quantized phase k(|p - p_tx| + |p - p_rx|) of every RIS cell, 1-based states.

    This is the conjugate of the two-hop propagation phase (up to a global
    constant), i.e. the lens profile focusing the Tx center onto the Rx center.
    """
    scene = build_scene(cfg)
    part = scene.partition
    pos = scene.ris_pose.to_global(part.parent.positions())
    path = (np.linalg.norm(pos - scene.tx.pose.origin, axis=1)
            + np.linalg.norm(pos - scene.rx.pose.origin, axis=1))
    phase = 2 * np.pi / cfg.wavelength * path
    idx = np.mod(np.floor(levels * phase / (2 * np.pi) + 0.5), levels).astype(int)
    return (idx + 1).reshape(part.parent.rows, part.parent.cols)


def lens_agreement(grid: np.ndarray, cfg: ScenarioConfig, offsets: int = 360) -> float:
    """Best fraction of cells matching the ideal focusing states over global phase offsets."""
    scene = build_scene(cfg)
    part = scene.partition
    levels = cfg.phase_levels or 2
    pos = scene.ris_pose.to_global(part.parent.positions())
    path = (np.linalg.norm(pos - scene.tx.pose.origin, axis=1)
            + np.linalg.norm(pos - scene.rx.pose.origin, axis=1))
    phase = 2 * np.pi / cfg.wavelength * path
    flat = np.asarray(grid).reshape(-1)
    best = 0.0
    for phi0 in np.linspace(0, 2 * np.pi, offsets, endpoint=False):
        idx = np.mod(np.floor(levels * (phase + phi0) / (2 * np.pi) + 0.5), levels).astype(int) + 1
        best = max(best, float(np.mean(idx == flat)))
    return best


SUMMARY_COLUMNS = ("iteration", "stage", "sensor_dbm", "total_dbm", "baseline_dbm", "gain_db",
                   "total_dc_dbm", "baseline_total_dbm", "total_gain_db", "trace_row")


def summary_rows(result: RunResult):
    for c in result.checkpoints:
        yield (c.iteration, c.stage, repr(watts_to_dbm(c.sensor_w)), repr(watts_to_dbm(c.total_w)),
               repr(watts_to_dbm(c.baseline_sensor_w)), repr(float(c.gain_db)),
               repr(watts_to_dbm(c.total_dc_w)), repr(watts_to_dbm(c.baseline_total_w)),
               repr(float(c.total_gain_db)), c.trace_row + 2)


def export(result: RunResult, out_dir: str | Path, formats=("csv", "phase-grid")) -> list[Path]:
    """Write trace.csv and summary.csv ("csv") and phase_grid.csv ("phase-grid")."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        result.trace.write_csv(out / "trace.csv")
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            w.writerows(summary_rows(result))
        written += [out / "trace.csv", out / "summary.csv"]
    if "phase-grid" in formats and result.phase_grid is not None:
        np.savetxt(out / "phase_grid.csv", result.phase_grid, fmt="%d", delimiter=",")
        written.append(out / "phase_grid.csv")
    return written


def read_phase_grid(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)


@dataclass(frozen=True)
class SweepPoint:
    position: float
    distance_m: float
    dc_power_w: float
    rf_power_w: float
    transmit_power_w: float
    baseline_dc_power_w: float

    @property
    def efficiency(self) -> float:
        return self.dc_power_w / self.transmit_power_w


def distance_sweep(cfg: ScenarioConfig, start: float, stop: float, step: float,
                   axis: str = "x") -> list[SweepPoint]:
    """Move the receiver along ``axis`` and run MTBS at every position."""
    if step <= 0:
        raise ValueError("sweep step must be positive")
    if stop < start:
        raise ValueError("sweep range is empty")
    ax = "xyz".index(axis)
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    points = []
    for pos in start + step * np.arange(n):
        rx = copy.deepcopy(cfg.rx)
        rx.position_m[ax] = float(pos)
        point_cfg = cfg.with_updates(rx=rx)
        res = run_mtbs(point_cfg)
        d = float(np.linalg.norm(np.subtract(rx.position_m, cfg.tx.position_m)))
        points.append(SweepPoint(float(pos), d, res.final.total_dc_w, res.final.total_w,
                                 res.transmit_power_w, res.final.baseline_total_dc_w))
    return points


def write_sweep(points: list[SweepPoint], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("position_m", "distance_m", "dc_power_dbm", "rf_power_dbm",
                    "baseline_dc_power_dbm", "efficiency"))
        for p in points:
            w.writerow((repr(p.position), repr(p.distance_m), repr(watts_to_dbm(p.dc_power_w)),
                        repr(watts_to_dbm(p.rf_power_w)), repr(watts_to_dbm(p.baseline_dc_power_w)),
                        repr(p.efficiency)))
