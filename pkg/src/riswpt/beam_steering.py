"""Closed-form receive wave in terms of array factors.

When the transmitter and every tile use direction control, the tile-relayed
wave factorizes into a distance term, the tile's array factor evaluated at
the mismatch between its incidence+reflection directions and its control,
and the transmitter's array factor at its pointing error.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import PlanarArraySpec, SpatialLink, UvDirection, grid_points
from .ris_control import TileControl

LATTICE_TOL = 1e-12


def periodic_sinc(x, M: int):
    """Normalized M-element array factor sin(Mx/2) / (M sin(x/2)).

    The argument is reduced to t = x - 2*pi*l first; the lattice branch
    applies when |t| < 1e-12.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    x = np.asarray(x, dtype=float)
    lat = np.round(x / (2 * np.pi))
    t = x - 2 * np.pi * lat
    sign = np.where(np.mod(lat * (M - 1), 2) == 0, 1.0, -1.0)
    on = np.abs(t) < LATTICE_TOL
    safe = np.where(on, 1.0, t)
    val = np.where(on, 1.0, np.sin(M * safe / 2) / (M * np.sin(safe / 2)))
    out = sign * val
    return out if out.ndim else float(out)


def periodic_sinc_sum(x, M: int):
    """Direct (1/M) sum of exp(j x kappa_m); real up to rounding."""
    x = np.asarray(x, dtype=float)
    s = np.exp(1j * np.multiply.outer(x, grid_points(M))).mean(axis=-1)
    return s


def beam_gain(spec: PlanarArraySpec, v: UvDirection, wavelength: float) -> float:
    """Array factor of a planar array at u-v offset ``v``; peaks at rows*cols."""
    return (spec.rows * spec.cols
            * periodic_sinc(2 * np.pi * spec.spacing_x / wavelength * v.u, spec.rows)
            * periodic_sinc(2 * np.pi * spec.spacing_y / wavelength * v.v, spec.cols))


ris_beam_gain = beam_gain
tx_beam_gain = beam_gain


def tile_path_coefficient(link_tx: SpatialLink, link_rx: SpatialLink, u_rx, p_tx: float,
                          wavelength: float):
    """Distance-dependent magnitude and phase of one tile's relayed wave.

    ``link_tx`` runs transmitter -> tile, ``link_rx`` tile -> receiver;
    ``u_rx`` may be one Rx element position or an (n, 2) stack.
    """
    amp = (wavelength / (4 * np.pi)) ** 2 * np.sqrt(
        link_tx.gain_a * link_tx.gain_b * link_rx.gain_a * link_rx.gain_b * 2 * p_tx
    ) / (link_tx.r * link_rx.r)
    path = link_tx.r + link_rx.r - np.asarray(u_rx) @ link_rx.s_in.as_array()
    return amp * np.exp(-2j * np.pi / wavelength * path)


def direct_term(h_tx_rx: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Directly received wave at each Rx element for excitation ``x``."""
    return np.asarray(x).reshape(-1) @ h_tx_rx


def receive_wave_beamform(links_tx: Sequence[SpatialLink], links_rx: Sequence[SpatialLink],
                          controls: Sequence[TileControl], tile_specs: Sequence[PlanarArraySpec],
                          tx_spec: PlanarArraySpec, q: UvDirection, u_rx: np.ndarray,
                          p_tx: float, wavelength: float, direct=0.0) -> np.ndarray:
    """Receive wave at each Rx element under continuous direction control.

    ``direct`` is the per-element direct term (see :func:`direct_term`).
    """
    u_rx = np.atleast_2d(u_rx)
    y = np.zeros(len(u_rx), dtype=complex) + direct
    for lt, lr, ctrl, spec in zip(links_tx, links_rx, controls, tile_specs, strict=True):
        mismatch = lt.s_in + lr.s_out - ctrl.c
        y = y + (tile_path_coefficient(lt, lr, u_rx, p_tx, wavelength)
                 * np.exp(1j * ctrl.w)
                 * beam_gain(spec, mismatch, wavelength)
                 * beam_gain(tx_spec, lt.s_out - q, wavelength))
    return y
