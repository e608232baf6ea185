"""Power-feedback beam scanning: per-tile scan, transmitter scan and MTBS.

The optimizer only talks to a measurement oracle through scalar power
readings and configuration setters; it never sees field values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .geometry import PlanarArraySpec, UvDirection, grid_point
from .ris_control import TileControl

PHASE_STATES = (0.0, math.pi, math.pi / 2)


class PowerOracle(Protocol):
    num_tiles: int

    def set_tile(self, k: int, ctrl: TileControl) -> None: ...
    def set_tiles(self, controls: Sequence[TileControl | None]) -> None: ...
    def set_directional(self, q: UvDirection, p_tx: float, levels: int | None = None) -> None: ...
    def set_wide_beam(self, element: tuple[int, int], p_tx: float) -> None: ...
    def sensor_power(self) -> float: ...


class ScanAbort(RuntimeError):
    pass


@dataclass(frozen=True)
class ScanGrid:
    """Uniform u-v grid of ``count_u * count_v`` beams spanning the given widths."""

    width_u: float
    width_v: float
    count_u: int
    count_v: int

    def __post_init__(self):
        if self.count_u < 2 or self.count_v < 2:
            raise ValueError("a scan grid needs at least 2 beams per axis")
        if self.width_u <= 0 or self.width_v <= 0:
            raise ValueError("scan widths must be positive")

    def __len__(self) -> int:
        return self.count_u * self.count_v

    def axis_indices(self, l: int) -> tuple[int, int]:
        """(l_u, l_v) of beam ``l`` (1-based); u varies fastest."""
        if not 1 <= l <= len(self):
            raise IndexError(f"beam {l} outside 1..{len(self)}")
        return (l - 1) % self.count_u + 1, (l - 1) // self.count_u + 1

    def beam(self, l: int) -> UvDirection:
        lu, lv = self.axis_indices(l)
        return UvDirection(self.width_u / (self.count_u - 1) * grid_point(lu, self.count_u),
                           self.width_v / (self.count_v - 1) * grid_point(lv, self.count_v))

    def beams(self) -> list[UvDirection]:
        return [self.beam(l) for l in range(1, len(self) + 1)]


def tx_scan_grid(width_u: float, width_v: float, count_u: int, count_v: int) -> ScanGrid:
    return ScanGrid(width_u, width_v, count_u, count_v)


def ris_scan_grid(k: int, width: tuple[float, float], count: tuple[int, int]) -> ScanGrid:
    """Scan grid for tile ``k``; tiles may each carry their own grid."""
    return ScanGrid(width[0], width[1], count[0], count[1])


def default_grid(spec: PlanarArraySpec, oversample: int = 2, width: float = 2.0) -> ScanGrid:
    """``2M x 2N`` beams over the full visible square u, v in [-1, 1]."""
    return ScanGrid(width, width, oversample * spec.rows, oversample * spec.cols)


@dataclass(frozen=True)
class PhaseRecovery:
    theta: complex
    omega: float
    power: float
    degenerate: bool = False


def recover_optimal_phase(p0: float, p_pi: float, p_half: float) -> PhaseRecovery:
    """Best tile phase and resulting power from readings at phases 0, pi, pi/2.

    With P(w) = |X + e^{jw} Y|^2 / 2 the readings determine X Y^* exactly;
    its argument is the aligning phase and |X|+|Y| the aligned amplitude.
    """
    if min(p0, p_pi, p_half) < 0:
        raise ValueError("powers must be nonnegative")
    theta = (1 - 1j) / 2 * p0 - (1 + 1j) / 2 * p_pi + 1j * p_half
    base = (p0 + p_pi) / 2
    if abs(theta) <= 1e-14 * max(p0 + p_pi, np.finfo(float).tiny):
        return PhaseRecovery(0j, 0.0, base, True)
    return PhaseRecovery(complex(theta), float(np.angle(theta)), base + abs(theta))


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    stage: str          # tile | tile-confirm | tx | tx-confirm
    tile: int | None    # 1-based
    beam: int | None    # 1-based
    phase_state: float | None
    power: float


TRACE_COLUMNS = ("iteration", "stage", "tile", "beam", "phase_state_rad", "power_dbm")


def _fmt(v) -> str:
    return "" if v is None else repr(v)


def _dbm(p: float) -> str:
    if p <= 0:
        return "-inf"
    return repr(float(10 * np.log10(p * 1000)))


@dataclass
class ScanTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def log(self, *args) -> int:
        self.records.append(TraceRecord(*args))
        return len(self.records) - 1

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> TraceRecord:
        return self.records[i]

    def rows(self):
        for r in self.records:
            yield (r.iteration, r.stage, _fmt(r.tile), _fmt(r.beam),
                   _fmt(r.phase_state), _dbm(r.power))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            w.writerows(self.rows())


@dataclass(frozen=True)
class TileScanResult:
    c: UvDirection
    omega: float
    beam: int
    power: float
    recoveries: tuple[PhaseRecovery, ...]


def ris_tile_scan(oracle: PowerOracle, k: int, grid: ScanGrid, trace: ScanTrace | None = None,
                  iteration: int = 1, controls: Sequence[TileControl | None] | None = None,
                  excitation: Callable[[PowerOracle], None] | None = None,
                  min_power: float | None = None) -> TileScanResult:
    """Scan tile ``k`` (0-based) over ``grid``, others held fixed.

    ``controls`` and ``excitation`` optionally (re)load the other tiles and
    the transmitter first.  The tile is left at the returned optimum and a
    confirmation reading is logged.
    """
    trace = trace if trace is not None else ScanTrace()
    if controls is not None:
        oracle.set_tiles([c if i != k else None for i, c in enumerate(controls)])
    if excitation is not None:
        excitation(oracle)
    recs = []
    for l, c in enumerate(grid.beams(), start=1):
        p = []
        for w in PHASE_STATES:
            oracle.set_tile(k, TileControl(c, w))
            p.append(oracle.sensor_power())
            trace.log(iteration, "tile", k + 1, l, w, p[-1])
        recs.append(recover_optimal_phase(*p))
    best = int(np.argmax([r.power for r in recs]))
    rec = recs[best]
    if min_power is not None and rec.power < min_power:
        raise ScanAbort(f"tile {k + 1}: best predicted power {rec.power:.3e} W below floor {min_power:.3e} W")
    c_opt = grid.beam(best + 1)
    oracle.set_tile(k, TileControl(c_opt, rec.omega))
    trace.log(iteration, "tile-confirm", k + 1, best + 1, TileControl(c_opt, rec.omega).w,
              oracle.sensor_power())
    return TileScanResult(c_opt, rec.omega, best + 1, rec.power, tuple(recs))


@dataclass(frozen=True)
class TxScanResult:
    q: UvDirection
    beam: int
    powers: tuple[float, ...]


def tx_scan(oracle: PowerOracle, grid: ScanGrid, p_tx: float, trace: ScanTrace | None = None,
            iteration: int = 1, controls: Sequence[TileControl | None] | None = None,
            levels: int | None = None, min_power: float | None = None) -> TxScanResult:
    """Scan the transmitter's directional beams; leaves the best one applied."""
    trace = trace if trace is not None else ScanTrace()
    if controls is not None:
        oracle.set_tiles(controls)
    powers = []
    for l, q in enumerate(grid.beams(), start=1):
        oracle.set_directional(q, p_tx, levels)
        powers.append(oracle.sensor_power())
        trace.log(iteration, "tx", None, l, None, powers[-1])
    best = int(np.argmax(powers))
    if min_power is not None and powers[best] < min_power:
        raise ScanAbort(f"transmitter: best power {powers[best]:.3e} W below floor {min_power:.3e} W")
    q_opt = grid.beam(best + 1)
    oracle.set_directional(q_opt, p_tx, levels)
    trace.log(iteration, "tx-confirm", None, best + 1, None, oracle.sensor_power())
    return TxScanResult(q_opt, best + 1, tuple(powers))


@dataclass
class MtbsResult:
    controls: list[TileControl]
    q: UvDirection
    trace: ScanTrace
    tx_beams: list[int]
    tile_beams: list[list[int]]


def mtbs(oracle: PowerOracle, iterations: int, tile_grids: ScanGrid | Sequence[ScanGrid],
         tx_grid: ScanGrid, wide_element: tuple[int, int], p_wide: float, p_array: float,
         tx_levels: int | None = None, min_power: float | None = None,
         on_stage: Callable[[int, str, int], None] | None = None,
         trace: ScanTrace | None = None) -> MtbsResult:
    """Multi-tile beam scanning.

    Iteration 1 drives a single transmitter element; every iteration scans
    tiles 1..K in order and then the transmitter, after which the
    transmitter switches to the best directional beam.  ``on_stage`` is
    called as ``(iteration, stage, trace_row)`` after each stage's
    confirmation reading, where stage is ``"tiles"`` (all tiles done) or
    ``"tx"``.  Records are appended to ``trace`` when given.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    K = oracle.num_tiles
    grids = [tile_grids] * K if isinstance(tile_grids, ScanGrid) else list(tile_grids)
    if len(grids) != K:
        raise ValueError(f"{len(grids)} tile grids for {K} tiles")
    trace = trace if trace is not None else ScanTrace()
    oracle.set_wide_beam(wide_element, p_wide)
    controls: list[TileControl | None] = [None] * K
    q = None
    tx_beams, tile_beams = [], []
    for tau in range(1, iterations + 1):
        beams = []
        for k in range(K):
            res = ris_tile_scan(oracle, k, grids[k], trace, tau, min_power=min_power)
            controls[k] = TileControl(res.c, res.omega)
            beams.append(res.beam)
        tile_beams.append(beams)
        if on_stage:
            on_stage(tau, "tiles", len(trace) - 1)
        tx = tx_scan(oracle, tx_grid, p_array, trace, tau, levels=tx_levels, min_power=min_power)
        q = tx.q
        tx_beams.append(tx.beam)
        if on_stage:
            on_stage(tau, "tx", len(trace) - 1)
    return MtbsResult(list(controls), q, trace, tx_beams, tile_beams)


def measurement_budget(iterations: int, tile_grid_sizes: Sequence[int], tx_grid_size: int,
                       confirmations: bool = True) -> int:
    """Oracle readings issued by :func:`mtbs`."""
    scans = iterations * (3 * sum(tile_grid_sizes) + tx_grid_size)
    return scans + (iterations * (len(tile_grid_sizes) + 1) if confirmations else 0)
