"""Phased-array transmitter excitations.

Excitations are power waves with ``|x|^2 / 2`` watts per element, stored as
(rows, cols) complex arrays.
"""

from __future__ import annotations

import numpy as np

from .geometry import PlanarArraySpec, UvDirection
from .ris_control import quantize_phase


def directional_excitation(spec: PlanarArraySpec, q: UvDirection, p_tx: float,
                           wavelength: float) -> np.ndarray:
    """Equal-power excitation steered toward ``q``."""
    if p_tx <= 0:
        raise ValueError("per-element transmit power must be positive")
    phase = -2 * np.pi / wavelength * (spec.positions() @ q.as_array())
    return (np.sqrt(2 * p_tx) * np.exp(1j * phase)).reshape(spec.rows, spec.cols)


def wide_beam_excitation(spec: PlanarArraySpec, active: tuple[int, int], p_tx: float) -> np.ndarray:
    """Single live element ``active`` (1-based); everything else off."""
    i, j = active
    if not (1 <= i <= spec.rows and 1 <= j <= spec.cols):
        raise IndexError(f"element {active} outside {spec.rows}x{spec.cols} transmitter")
    if p_tx <= 0:
        raise ValueError("transmit power must be positive")
    x = np.zeros((spec.rows, spec.cols), dtype=complex)
    x[i - 1, j - 1] = np.sqrt(2 * p_tx)
    return x


def optional_phase_quantize(x: np.ndarray, levels: int | None) -> np.ndarray:
    """Quantize the phase of live elements; ``levels=None`` means continuous shifters."""
    if levels is None:
        return x
    if levels < 2:
        raise ValueError("phase shifter needs at least 2 states")
    out = np.array(x, dtype=complex)
    live = out != 0
    out[live] = quantize_phase(out[live], levels)
    return out


def radiated_power(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x) ** 2) / 2)
