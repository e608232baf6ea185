"""Element-level line-of-sight channel and the brute-force receive wave.

This is the ground truth every other evaluation path is checked against.
Index conventions: transmitter elements (i, j) and receiver elements (a, b)
are flattened row-major; RIS gains are indexed (tile k, cell) with cells
row-major within the tile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (SPEED_OF_LIGHT, PlanarArraySpec, Pose, SpatialLink, TilePartition,
                       UvDirection, derive_link)


def pairwise_gain(d, gain_a: float, gain_b: float, wavelength: float):
    """Free-space gain between two antennas ``d`` meters apart."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("antenna distance must be positive")
    h = wavelength / (4 * np.pi * d) * np.sqrt(gain_a * gain_b) * np.exp(-2j * np.pi * d / wavelength)
    return h if h.ndim else complex(h)


def far_field_distance(link: SpatialLink, u_a, u_b):
    """Linearized element-to-element distance; broadcasts over leading axes."""
    return link.r - np.asarray(u_a) @ link.s_out.as_array() - np.asarray(u_b) @ link.s_in.as_array()


def _link_gain(link: SpatialLink, u_a, u_b, wavelength: float):
    k = 2 * np.pi / wavelength
    amp = wavelength / (4 * np.pi * link.r) * np.sqrt(link.gain_a * link.gain_b)
    offs = (np.asarray(u_a) @ link.s_out.as_array())[..., :, None] + \
        (np.asarray(u_b) @ link.s_in.as_array())[..., None, :]
    return amp * np.exp(-1j * k * link.r) * np.exp(1j * k * offs)


def tx_ris_gain(link: SpatialLink, u_tx, u_cell, wavelength: float) -> np.ndarray:
    """Gain matrix (tx elements, cells) for one tile; amplitude frozen at 1/r."""
    return _link_gain(link, np.atleast_2d(u_tx), np.atleast_2d(u_cell), wavelength)


def ris_rx_gain(link: SpatialLink, u_cell, u_rx, wavelength: float) -> np.ndarray:
    """Gain matrix (cells, rx elements); ``link`` runs tile -> receiver."""
    return _link_gain(link, np.atleast_2d(u_cell), np.atleast_2d(u_rx), wavelength)


def direct_gain(link: SpatialLink | None, u_tx, u_rx, wavelength: float,
                blocked: bool = False) -> np.ndarray:
    """Tx -> Rx gain matrix (tx elements, rx elements); zero when blocked."""
    u_tx, u_rx = np.atleast_2d(u_tx), np.atleast_2d(u_rx)
    if blocked or link is None:
        return np.zeros((len(u_tx), len(u_rx)), dtype=complex)
    return _link_gain(link, u_tx, u_rx, wavelength)


def cascaded_gain(h_txris, gamma, h_risrx):
    return h_txris * gamma * h_risrx


@dataclass(frozen=True)
class Aperture:
    spec: PlanarArraySpec
    pose: Pose

    def element_positions_global(self) -> np.ndarray:
        return self.pose.to_global(self.spec.positions())


@dataclass(frozen=True)
class AntennaPattern:
    """Power gain ``peak * cos(theta)**exponent`` off boresight.

    ``exponent=0`` is a constant gain.  Links only ever use the gain toward
    the partner aperture's center, so each link still carries one scalar
    gain per end.
    """

    peak: float = 1.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.peak <= 0 or self.exponent < 0:
            raise ValueError("pattern peak must be positive and exponent nonnegative")

    @classmethod
    def cosine(cls, exponent: float) -> AntennaPattern:
        """Pattern radiating all power into the front hemisphere (peak 2(q+1))."""
        return cls(2 * (exponent + 1), exponent)

    def toward(self, s: UvDirection) -> float:
        if self.exponent == 0:
            return self.peak
        cos_theta = np.sqrt(max(0.0, 1.0 - s.u * s.u - s.v * s.v))
        return float(self.peak * cos_theta ** self.exponent)


def _pattern(g) -> AntennaPattern:
    return g if isinstance(g, AntennaPattern) else AntennaPattern(float(g))


@dataclass(frozen=True)
class LinkGains:
    """Element patterns (or constant linear gains) of each aperture type."""

    tx: AntennaPattern | float = 1.0
    rx: AntennaPattern | float = 1.0
    cell: AntennaPattern | float = 1.0

    def link(self, pose_a: Pose, pose_b: Pose, kind_a: str, kind_b: str,
             require_visible: bool = True) -> SpatialLink:
        """Geometric link between two poses with gains from the patterns.

        Without ``require_visible`` a directional pattern has zero gain
        toward a partner on or behind its aperture plane.
        """
        geo = derive_link(pose_a, pose_b, require_visible=require_visible)
        pa, pb = _pattern(getattr(self, kind_a)), _pattern(getattr(self, kind_b))
        e = (pose_b.origin - pose_a.origin) / geo.r
        front_a = (pose_a.orientation.T @ e)[2] > 0
        front_b = (pose_b.orientation.T @ -e)[2] > 0
        ga = pa.toward(geo.s_out) if front_a or pa.exponent == 0 else 0.0
        gb = pb.toward(geo.s_in) if front_b or pb.exponent == 0 else 0.0
        return SpatialLink(geo.r, geo.s_out, geo.s_in, ga, gb)


@dataclass(frozen=True)
class Scene:
    """Physical deployment: apertures, RIS tiling, carrier, and blockages."""

    tx: Aperture
    rx: Aperture
    ris_pose: Pose
    partition: TilePartition
    wavelength: float
    gains: LinkGains = field(default_factory=LinkGains)
    direct_blocked: bool = False
    blocked_tiles: frozenset[int] = frozenset()
    exact: bool = False

    def tile_poses(self) -> list[Pose]:
        return [self.ris_pose.offset(c) for c in self.partition.tile_centers()]

    def tx_tile_links(self) -> list[SpatialLink]:
        return [self.gains.link(self.tx.pose, p, "tx", "cell") for p in self.tile_poses()]

    def tile_rx_links(self) -> list[SpatialLink]:
        return [self.gains.link(p, self.rx.pose, "cell", "rx") for p in self.tile_poses()]

    def direct_link(self) -> SpatialLink | None:
        if self.direct_blocked:
            return None
        return self.gains.link(self.tx.pose, self.rx.pose, "tx", "rx", require_visible=False)

    def cell_positions_global(self) -> np.ndarray:
        """(K, cells, 3) global positions of every RIS cell."""
        return self.ris_pose.to_global(self.partition.cell_positions())


@dataclass(frozen=True)
class ChannelTensor:
    h_tx_ris: np.ndarray   # (tx, K, cells)
    h_ris_rx: np.ndarray   # (K, cells, rx)
    h_tx_rx: np.ndarray    # (tx, rx)
    wavelength: float

    @property
    def frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength

    @property
    def shape(self) -> tuple[int, int, int, int]:
        n_tx, k, cells = self.h_tx_ris.shape
        return n_tx, k, cells, self.h_ris_rx.shape[2]


def build_channel(scene: Scene) -> ChannelTensor:
    lam = scene.wavelength
    u_tx = scene.tx.spec.positions()
    u_rx = scene.rx.spec.positions()
    u_cell = scene.partition.tile_spec.positions()
    links_in = scene.tx_tile_links()
    links_out = scene.tile_rx_links()
    if scene.exact:
        # exact per-pair distances; gains still taken per tile-center link
        cells = scene.cell_positions_global()
        ptx = scene.tx.element_positions_global()
        prx = scene.rx.element_positions_global()
        d1 = np.linalg.norm(ptx[:, None, None, :] - cells[None], axis=-1)
        d2 = np.linalg.norm(cells[:, :, None, :] - prx[None, None], axis=-1)
        g1 = np.array([l.gain_a * l.gain_b for l in links_in])
        g2 = np.array([l.gain_a * l.gain_b for l in links_out])
        h1 = pairwise_gain(d1, 1.0, 1.0, lam) * np.sqrt(g1)[None, :, None]
        h2 = pairwise_gain(d2, 1.0, 1.0, lam) * np.sqrt(g2)[:, None, None]
        link = scene.direct_link()
        if link is None:
            hd = np.zeros((len(ptx), len(prx)), dtype=complex)
        else:
            hd = pairwise_gain(np.linalg.norm(ptx[:, None] - prx[None], axis=-1),
                               link.gain_a, link.gain_b, lam)
    else:
        h1 = np.stack([tx_ris_gain(l, u_tx, u_cell, lam) for l in links_in], axis=1)
        h2 = np.stack([ris_rx_gain(l, u_cell, u_rx, lam) for l in links_out], axis=0)
        hd = direct_gain(scene.direct_link(), u_tx, u_rx, lam, scene.direct_blocked)
    for k in scene.blocked_tiles:
        if not 0 <= k < h1.shape[1]:
            raise IndexError(f"blocked tile {k + 1} outside 1..{h1.shape[1]}")
        h1[:, k, :] = 0
    return ChannelTensor(h1, h2, hd, lam)


def receive_wave_elementwise(tensor: ChannelTensor, masks: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Received power wave at every Rx element by direct summation.

    ``masks`` is (K, cells) reflection coefficients, ``x`` the excitation
    (any shape with ``tx`` entries).
    """
    n_tx, k, cells, _ = tensor.shape
    x = np.asarray(x).reshape(-1)
    masks = np.asarray(masks).reshape(k, -1) if k else np.zeros((0, cells))
    if x.size != n_tx or masks.shape != (k, cells):
        raise ValueError(f"expected {n_tx} excitations and ({k}, {cells}) masks, "
                         f"got {x.size} and {masks.shape}")
    via_ris = np.einsum("i,ikc,kc,kca->a", x, tensor.h_tx_ris, masks, tensor.h_ris_rx)
    return via_ris + x @ tensor.h_tx_rx


def receive_wave_loops(tensor: ChannelTensor, masks: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Literal nested-loop evaluation; slow, for cross-checking small cases."""
    n_tx, k_tiles, cells, n_rx = tensor.shape
    x = np.asarray(x).reshape(-1)
    masks = np.asarray(masks).reshape(k_tiles, cells)
    y = np.zeros(n_rx, dtype=complex)
    for a in range(n_rx):
        for i in range(n_tx):
            h = tensor.h_tx_rx[i, a]
            for k in range(k_tiles):
                for c in range(cells):
                    h += cascaded_gain(tensor.h_tx_ris[i, k, c], masks[k, c], tensor.h_ris_rx[k, c, a])
            y[a] += h * x[i]
    return y
