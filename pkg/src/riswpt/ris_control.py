"""Per-cell reflection coefficients from tile-level direction/phase controls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PlanarArraySpec, UvDirection

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TileControl:
    c: UvDirection
    w: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", float(np.mod(self.w, TWO_PI)))


def state_phase(psi: int, levels: int) -> float:
    """Phase of control state ``psi`` (1-based) out of ``levels`` states."""
    if not 1 <= psi <= levels:
        raise IndexError(f"state {psi} outside 1..{levels}")
    return TWO_PI * (psi - 1) / levels


def state_index(z, levels: int) -> np.ndarray:
    """0-based quantization state of each entry: floor(levels*arg/2pi + 0.5) mod levels.

    Ties at half steps round up, not to even.
    """
    ang = np.angle(z)
    return np.mod(np.floor(levels * ang / TWO_PI + 0.5), levels).astype(int)


def quantize_phase(z, levels: int):
    """Snap the phase of ``z`` to the nearest of ``levels`` equally spaced phases."""
    z_arr = np.asarray(z)
    if np.any(z_arr == 0):
        raise ValueError("cannot quantize the phase of zero")
    idx = state_index(z_arr, levels)
    out = np.abs(z_arr) * np.exp(1j * TWO_PI * idx / levels)
    return out if np.ndim(z) else complex(out)


def control_phase(positions: np.ndarray, ctrl: TileControl, wavelength: float) -> np.ndarray:
    """Continuous reflection phase w - (2pi/lambda) c.u for each cell position."""
    return ctrl.w - TWO_PI / wavelength * (positions @ ctrl.c.as_array())


def reflection_mask_continuous(tile: PlanarArraySpec, ctrl: TileControl, wavelength: float) -> np.ndarray:
    """Unit-modulus coefficients, shape (rows, cols)."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    mask = np.exp(1j * ctrl.w) * np.exp(
        -1j * TWO_PI / wavelength * (tile.positions() @ ctrl.c.as_array()))
    return mask.reshape(tile.rows, tile.cols)


def reflection_mask_discrete(tile: PlanarArraySpec, ctrl: TileControl, wavelength: float,
                             levels: int) -> np.ndarray:
    if levels < 2:
        raise ValueError("discrete hardware needs at least 2 states")
    return quantize_phase(reflection_mask_continuous(tile, ctrl, wavelength), levels)


def mask_states(tile: PlanarArraySpec, ctrl: TileControl, wavelength: float, levels: int) -> np.ndarray:
    """1-based hardware state per cell, shape (rows, cols)."""
    return state_index(reflection_mask_continuous(tile, ctrl, wavelength), levels) + 1


@dataclass(frozen=True)
class PhaseResolution:
    """Unit-cell hardware: ``levels=None`` is continuous phase.

    ``state_values`` optionally overrides the complex coefficient realized by
    each discrete state (e.g. circuit-derived ON/OFF values); otherwise state
    psi realizes ``magnitude * exp(j 2pi (psi-1)/levels)``.  When
    ``phase_inside_quantizer`` is False the tile phase w is applied after
    quantizing the direction pattern, as if a continuous common phase were
    available.
    """

    levels: int | None = None
    magnitude: float = 1.0
    state_values: tuple[complex, ...] | None = None
    phase_inside_quantizer: bool = True

    def __post_init__(self):
        if self.levels is not None and self.levels < 2:
            raise ValueError("discrete hardware needs at least 2 states")
        if not 0 < self.magnitude <= 1:
            raise ValueError("reflection magnitude must lie in (0, 1]")
        if self.state_values is not None:
            if self.levels is None or len(self.state_values) != self.levels:
                raise ValueError("state_values needs one entry per discrete state")
            if any(abs(v) > 1 + 1e-12 for v in self.state_values):
                raise ValueError("passive state values must satisfy |G| <= 1")

    @property
    def continuous(self) -> bool:
        return self.levels is None

    def state_table(self) -> np.ndarray:
        if self.state_values is not None:
            return np.asarray(self.state_values, dtype=complex)
        return self.magnitude * np.exp(1j * TWO_PI * np.arange(self.levels) / self.levels)

    def coefficients(self, positions: np.ndarray, ctrl: TileControl, wavelength: float) -> np.ndarray:
        """Realized reflection coefficient for each cell position, shape (cells,)."""
        if self.continuous:
            return self.magnitude * np.exp(1j * control_phase(positions, ctrl, wavelength))
        if self.phase_inside_quantizer:
            z = np.exp(1j * ctrl.w) * np.exp(
                -1j * TWO_PI / wavelength * (positions @ ctrl.c.as_array()))
            return self.state_table()[state_index(z, self.levels)]
        z = np.exp(-1j * TWO_PI / wavelength * (positions @ ctrl.c.as_array()))
        return np.exp(1j * ctrl.w) * self.state_table()[state_index(z, self.levels)]

    def states(self, positions: np.ndarray, ctrl: TileControl, wavelength: float) -> np.ndarray:
        """1-based state per cell; continuous hardware has no states."""
        if self.continuous:
            raise ValueError("continuous hardware has no discrete states")
        z = np.exp(1j * ctrl.w) * np.exp(
            -1j * TWO_PI / wavelength * (positions @ ctrl.c.as_array()))
        return state_index(z, self.levels) + 1

    def off_coefficient(self) -> complex:
        """Coefficient of state 1 (the OFF state)."""
        if self.continuous:
            return complex(self.magnitude)
        return complex(self.state_table()[0])
