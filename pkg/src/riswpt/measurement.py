"""Receiver-side power measurements.

:class:`MeasurementOracle` owns the ground-truth channel and the current
RIS/transmitter configuration, and only ever reports scalar powers.  It is
stateful: one caller at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Scene, build_channel
from .geometry import UvDirection
from .ris_control import PhaseResolution, TileControl
from .transmitter import (directional_excitation, optional_phase_quantize, radiated_power,
                          wide_beam_excitation)


@dataclass(frozen=True)
class RectifierModel:
    """Piecewise-linear RF-to-DC map through ``(input_w, output_w)`` breakpoints.

    Beyond the last breakpoint the last efficiency is held constant.
    """

    input_w: tuple[float, ...]
    output_w: tuple[float, ...]

    def __post_init__(self):
        pin = np.asarray(self.input_w, dtype=float)
        pout = np.asarray(self.output_w, dtype=float)
        if pin.shape != pout.shape or pin.size < 2:
            raise ValueError("rectifier curve needs matching breakpoint lists of length >= 2")
        if pin[0] != 0 or pout[0] != 0:
            raise ValueError("rectifier curve must start at (0, 0)")
        if np.any(np.diff(pin) <= 0):
            raise ValueError("rectifier input breakpoints must be strictly increasing")
        if np.any(np.diff(pout) < 0):
            raise ValueError("rectifier output must be nondecreasing")
        if np.any(pout > pin):
            raise ValueError("rectifier output cannot exceed its input")

    @classmethod
    def identity(cls) -> RectifierModel:
        return cls((0.0, 1.0), (0.0, 1.0))

    @classmethod
    def plateau(cls, efficiency: float = 0.5, knee_w: float = 1e-3, threshold_w: float = 1e-6):
        """Zero output below ``threshold_w``, then a ramp reaching ``efficiency`` at ``knee_w``."""
        return cls((0.0, threshold_w, knee_w), (0.0, 0.0, efficiency * knee_w))

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        pin, pout = np.asarray(self.input_w), np.asarray(self.output_w)
        out = np.interp(p, pin, pout)
        tail = p > pin[-1]
        out = np.where(tail, p * pout[-1] / pin[-1], out)
        return out if out.ndim else float(out)


def total_dc_power(y: np.ndarray, rectifier: RectifierModel | None = None) -> float:
    """Sum of rectified power over receiver elements (DC combining)."""
    p = np.abs(np.asarray(y)) ** 2 / 2
    if rectifier is None:
        return float(np.sum(p))
    return float(np.sum(rectifier(p)))


def watts_to_dbm(p: float) -> float:
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(p * 1000))


class MeasurementOracle:
    """Power-only view of a simulated link.

    Parameters
    ----------
    scene : Scene
        Physical deployment (builds the ground-truth channel).
    resolution : PhaseResolution
        Unit-cell hardware model.
    sensor : (int, int)
        1-based receiver element reporting power.
    noise_std : float
        Additive Gaussian noise on every sensor reading, watts.
    quant_db : float or None
        Report power rounded to this many dB.
    """

    def __init__(self, scene: Scene, resolution: PhaseResolution | None = None,
                 sensor: tuple[int, int] | None = None, noise_std: float = 0.0,
                 quant_db: float | None = None, seed: int | None = None,
                 rectifier: RectifierModel | None = None):
        self._scene = scene
        self._channel = build_channel(scene)
        self._res = resolution or PhaseResolution()
        rx = scene.rx.spec
        if sensor is None:
            sensor = ((rx.rows + 1) // 2, (rx.cols + 1) // 2)
        a, b = sensor
        if not (1 <= a <= rx.rows and 1 <= b <= rx.cols):
            raise IndexError(f"sensor {sensor} outside {rx.rows}x{rx.cols} receiver")
        self.sensor = (a, b)
        self._sensor_idx = (a - 1) * rx.cols + (b - 1)
        if noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        self.noise_std = noise_std
        self.quant_db = quant_db
        self._rng = np.random.default_rng(seed)
        self.rectifier = rectifier
        self._cells = scene.partition.tile_spec.positions()
        k = scene.partition.count
        self.controls: list[TileControl | None] = [None] * k
        self._masks = np.full((k, len(self._cells)), self._res.off_coefficient(), dtype=complex)
        self._x = np.zeros(scene.tx.spec.size, dtype=complex)
        self.excitation_mode: tuple = ("off",)
        self._h2_sensor = self._channel.h_ris_rx[:, :, self._sensor_idx]
        self._refresh_excitation()
        self.measurements = 0

    @property
    def num_tiles(self) -> int:
        return self._scene.partition.count

    @property
    def wavelength(self) -> float:
        return self._scene.wavelength

    @property
    def resolution(self) -> PhaseResolution:
        return self._res

    def _refresh_excitation(self):
        self._a = self._x @ self._channel.h_tx_ris.reshape(len(self._x), -1)
        self._a = self._a.reshape(self._masks.shape)
        self._direct = self._x @ self._channel.h_tx_rx
        self._tile_terms = np.sum(self._a * self._masks * self._h2_sensor, axis=1)

    def set_tile(self, k: int, ctrl: TileControl):
        """Load tile ``k`` (0-based) with a direction/phase control."""
        if not 0 <= k < self.num_tiles:
            raise IndexError(f"tile {k + 1} outside 1..{self.num_tiles}")
        self.controls[k] = ctrl
        self._masks[k] = self._res.coefficients(self._cells, ctrl, self.wavelength)
        self._tile_terms[k] = np.sum(self._a[k] * self._masks[k] * self._h2_sensor[k])

    def set_tiles(self, controls):
        for k, ctrl in enumerate(controls):
            if ctrl is None:
                self.set_tile_off(k)
            else:
                self.set_tile(k, ctrl)

    def set_tile_off(self, k: int):
        if not 0 <= k < self.num_tiles:
            raise IndexError(f"tile {k + 1} outside 1..{self.num_tiles}")
        self.controls[k] = None
        self._masks[k] = self._res.off_coefficient()
        self._tile_terms[k] = np.sum(self._a[k] * self._masks[k] * self._h2_sensor[k])

    def set_all_off(self):
        for k in range(self.num_tiles):
            self.set_tile_off(k)

    def set_directional(self, q: UvDirection, p_tx: float, levels: int | None = None):
        x = directional_excitation(self._scene.tx.spec, q, p_tx, self.wavelength)
        self._x = optional_phase_quantize(x, levels).reshape(-1)
        self.excitation_mode = ("directional", q, p_tx)
        self._refresh_excitation()

    def set_wide_beam(self, element: tuple[int, int], p_tx: float):
        self._x = wide_beam_excitation(self._scene.tx.spec, element, p_tx).reshape(-1)
        self.excitation_mode = ("wide", tuple(element), p_tx)
        self._refresh_excitation()

    def transmit_power(self) -> float:
        return radiated_power(self._x)

    def sensor_power(self) -> float:
        """Power reported by the sensor antenna (the optimizer's only input)."""
        self.measurements += 1
        y = np.sum(self._tile_terms) + self._direct[self._sensor_idx]
        p = abs(y) ** 2 / 2
        if self.noise_std:
            p = max(p + self.noise_std * self._rng.standard_normal(), 0.0)
        if self.quant_db and p > 0:
            p = 10 ** (np.round(10 * np.log10(p) / self.quant_db) * self.quant_db / 10)
        return float(p)

    def _waves(self) -> np.ndarray:
        via_ris = np.einsum("kc,kc,kca->a", self._a, self._masks, self._channel.h_ris_rx)
        return via_ris + self._direct

    def element_powers(self) -> np.ndarray:
        """Noise-free RF power at every receiver element, watts (row-major)."""
        return np.abs(self._waves()) ** 2 / 2

    def total_rf_power(self) -> float:
        return float(np.sum(self.element_powers()))

    def total_dc_power(self) -> float:
        return total_dc_power(self._waves(), self.rectifier)

    def cell_states(self) -> np.ndarray:
        """1-based hardware state of every RIS cell on the parent grid."""
        part = self._scene.partition
        grid = np.ones((part.parent.rows, part.parent.cols), dtype=int)
        idx = part.cell_indices()
        for k, ctrl in enumerate(self.controls):
            if ctrl is None:
                continue
            st = self._res.states(self._cells, ctrl, self.wavelength)
            grid[idx[k, :, 0], idx[k, :, 1]] = st
        return grid
