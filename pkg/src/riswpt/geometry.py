"""Array geometry, u-v directions and pose-to-link derivation.

Every aperture (transmitter, receiver, RIS tile) is a planar rectangular grid
lying in the x-y plane of its own local frame, centered at the local origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0


def wavelength(frequency: float) -> float:
    if frequency <= 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    return SPEED_OF_LIGHT / frequency


@dataclass(frozen=True)
class UvDirection:
    """Direction as (u, v) = (sin(theta)cos(phi), sin(theta)sin(phi)).

    Grid construction may produce points outside the unit disk; those are
    allowed but reported by :attr:`visible`.
    """

    u: float
    v: float

    @property
    def visible(self) -> bool:
        return self.u * self.u + self.v * self.v <= 1.0 + 1e-12

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])

    def __add__(self, other: UvDirection) -> UvDirection:
        return UvDirection(self.u + other.u, self.v + other.v)

    def __sub__(self, other: UvDirection) -> UvDirection:
        return UvDirection(self.u - other.u, self.v - other.v)

    def __neg__(self) -> UvDirection:
        return UvDirection(-self.u, -self.v)


@dataclass(frozen=True)
class PlanarArraySpec:
    rows: int
    cols: int
    spacing_x: float
    spacing_y: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array must have at least one element, got {self.rows}x{self.cols}")
        if self.spacing_x <= 0 or self.spacing_y <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def positions(self) -> np.ndarray:
        """All element positions, shape (rows*cols, 2), row-major in (m, n)."""
        kx = grid_points(self.rows) * self.spacing_x
        ky = grid_points(self.cols) * self.spacing_y
        px, py = np.meshgrid(kx, ky, indexing="ij")
        return np.column_stack([px.ravel(), py.ravel()])


def grid_point(j: int, J: int) -> float:
    """Offset of the j-th point (1-based) of a J-point grid centered at 0."""
    if not 1 <= j <= J:
        raise IndexError(f"grid index {j} outside 1..{J}")
    return j - J / 2 - 0.5


def grid_points(J: int) -> np.ndarray:
    return np.arange(1, J + 1) - J / 2 - 0.5


def element_position(spec: PlanarArraySpec, m: int, n: int) -> np.ndarray:
    """Local (x, y) position of element (m, n), 1-based."""
    if not (1 <= m <= spec.rows and 1 <= n <= spec.cols):
        raise IndexError(f"element ({m}, {n}) outside {spec.rows}x{spec.cols} array")
    return np.array([spec.spacing_x * grid_point(m, spec.rows),
                     spec.spacing_y * grid_point(n, spec.cols)])


def uv_from_angles(theta: float, phi: float) -> UvDirection:
    return UvDirection(np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi))


@dataclass(frozen=True)
class Pose:
    """Origin and orientation of a local frame in the global frame.

    ``orientation`` columns are the local x, y, z axes expressed globally;
    the aperture radiates toward local +z.
    """

    origin: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        rot = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9):
            raise ValueError("orientation is not orthonormal")
        if np.linalg.det(rot) < 0:
            raise ValueError("orientation is not right-handed")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "orientation", rot)

    @classmethod
    def facing(cls, origin, target) -> Pose:
        """Pose at ``origin`` whose boresight (+z) points at ``target``.

        The local x axis is the global x axis projected onto the aperture
        plane (global y if x is parallel to the boresight).
        """
        origin = np.asarray(origin, dtype=float)
        z = np.asarray(target, dtype=float) - origin
        norm = np.linalg.norm(z)
        if norm == 0:
            raise ValueError("cannot face a target at the pose origin")
        z = z / norm
        ref = np.array([1.0, 0.0, 0.0])
        if abs(z @ ref) > 1 - 1e-9:
            ref = np.array([0.0, 1.0, 0.0])
        x = ref - (ref @ z) * z
        x /= np.linalg.norm(x)
        y = np.cross(z, x)
        return cls(origin, np.column_stack([x, y, z]))

    def to_global(self, local_xy: np.ndarray) -> np.ndarray:
        """Map local in-plane points (..., 2) to global coordinates (..., 3)."""
        local_xy = np.asarray(local_xy, dtype=float)
        return self.origin + local_xy @ self.orientation[:, :2].T

    def offset(self, local_xy) -> Pose:
        """Same orientation, origin moved by an in-plane local offset."""
        return Pose(self.to_global(local_xy), self.orientation)


@dataclass(frozen=True)
class SpatialLink:
    """Far-field relation between the centers of two apertures A and B.

    ``s_out`` is the direction A->B in A's frame, ``s_in`` the direction
    B->A in B's frame; gains are linear power gains of A and B toward each
    other.
    """

    r: float
    s_out: UvDirection
    s_in: UvDirection
    gain_a: float = 1.0
    gain_b: float = 1.0

    def reversed(self) -> SpatialLink:
        return SpatialLink(self.r, self.s_in, self.s_out, self.gain_b, self.gain_a)


class VisibilityError(ValueError):
    """Target lies behind an aperture plane."""


def derive_link(pose_a: Pose, pose_b: Pose, gain_a: float = 1.0, gain_b: float = 1.0,
                require_visible: bool = True) -> SpatialLink:
    """Link from aperture A to aperture B.

    With ``require_visible`` each aperture must lie strictly in front of the
    other; otherwise the u-v directions are the in-plane projections.
    """
    delta = pose_b.origin - pose_a.origin
    r = float(np.linalg.norm(delta))
    if r == 0:
        raise ValueError("coincident aperture origins")
    e = delta / r
    local_a = pose_a.orientation.T @ e
    local_b = pose_b.orientation.T @ (-e)
    if require_visible and local_a[2] <= 0:
        raise VisibilityError(f"B at {pose_b.origin} is behind aperture A at {pose_a.origin}")
    if require_visible and local_b[2] <= 0:
        raise VisibilityError(f"A at {pose_a.origin} is behind aperture B at {pose_b.origin}")
    return SpatialLink(r, UvDirection(local_a[0], local_a[1]),
                       UvDirection(local_b[0], local_b[1]), gain_a, gain_b)


@dataclass(frozen=True)
class TilePartition:
    """Row-major split of a parent RIS into equal rectangular tiles."""

    parent: PlanarArraySpec
    tile_rows: int
    tile_cols: int

    def __post_init__(self):
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile dimensions must be positive")
        if self.parent.rows % self.tile_rows or self.parent.cols % self.tile_cols:
            raise ValueError(
                f"tile size {self.tile_rows}x{self.tile_cols} does not divide "
                f"RIS {self.parent.rows}x{self.parent.cols}")

    @property
    def layout(self) -> tuple[int, int]:
        return self.parent.rows // self.tile_rows, self.parent.cols // self.tile_cols

    @property
    def count(self) -> int:
        a, b = self.layout
        return a * b

    @property
    def tile_spec(self) -> PlanarArraySpec:
        return PlanarArraySpec(self.tile_rows, self.tile_cols,
                               self.parent.spacing_x, self.parent.spacing_y)

    def tile_centers(self) -> np.ndarray:
        """Per-tile center offsets in the RIS frame, shape (K, 2), k row-major."""
        tr, tc = self.layout
        px = self.parent.spacing_x * grid_points(self.parent.rows).reshape(tr, self.tile_rows).mean(axis=1)
        py = self.parent.spacing_y * grid_points(self.parent.cols).reshape(tc, self.tile_cols).mean(axis=1)
        cx, cy = np.meshgrid(px, py, indexing="ij")
        return np.column_stack([cx.ravel(), cy.ravel()])

    def cell_indices(self) -> np.ndarray:
        """Parent (row, col) 0-based index of every tile cell, shape (K, cells, 2)."""
        tr, tc = self.layout
        lm, ln = np.meshgrid(np.arange(self.tile_rows), np.arange(self.tile_cols), indexing="ij")
        out = np.empty((self.count, self.tile_rows * self.tile_cols, 2), dtype=int)
        for k in range(self.count):
            a, b = divmod(k, tc)
            out[k, :, 0] = (a * self.tile_rows + lm).ravel()
            out[k, :, 1] = (b * self.tile_cols + ln).ravel()
        return out

    def cell_positions(self) -> np.ndarray:
        """RIS-frame cell positions rebuilt from tile centers, shape (K, cells, 2)."""
        return self.tile_centers()[:, None, :] + self.tile_spec.positions()[None, :, :]


def partition_ris(parent: PlanarArraySpec, tile_rows: int, tile_cols: int) -> TilePartition:
    return TilePartition(parent, tile_rows, tile_cols)
