"""Electric field and intensity maps radiated by a single-excitation state."""

from dataclasses import dataclass

import numpy as np

from .emfield import SingularityError, green_apply
from .geometry import EmitterArray


@dataclass(frozen=True)
class GridSpec:
    """Planar evaluation grid: origin plus two in-plane axis vectors.

    Points are origin + u*axis1 + v*axis2 with u in extent1, v in extent2,
    sampled on a (res1 x res2) lattice, row-major in (u, v).
    """

    origin: np.ndarray
    axis1: np.ndarray
    axis2: np.ndarray
    extent1: tuple
    extent2: tuple
    res1: int
    res2: int

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "axis1", np.asarray(self.axis1, dtype=float))
        object.__setattr__(self, "axis2", np.asarray(self.axis2, dtype=float))
        if self.res1 < 2 or self.res2 < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.extent1[0] >= self.extent1[1] or self.extent2[0] >= self.extent2[1]:
            raise ValueError("grid extent is degenerate")

    @classmethod
    def xy(cls, z: float, extent, res: int) -> "GridSpec":
        (x0, x1), (y0, y1) = extent
        return cls((0, 0, z), (1, 0, 0), (0, 1, 0), (x0, x1), (y0, y1), res, res)

    @classmethod
    def xz(cls, y: float, extent, res: int) -> "GridSpec":
        (x0, x1), (z0, z1) = extent
        return cls((0, y, 0), (1, 0, 0), (0, 0, 1), (x0, x1), (z0, z1), res, res)

    @classmethod
    def yz(cls, x: float, extent, res: int) -> "GridSpec":
        (y0, y1), (z0, z1) = extent
        return cls((x, 0, 0), (0, 1, 0), (0, 0, 1), (y0, y1), (z0, z1), res, res)

    def coords(self) -> tuple:
        u = np.linspace(self.extent1[0], self.extent1[1], self.res1)
        v = np.linspace(self.extent2[0], self.extent2[1], self.res2)
        return u, v

    def points(self) -> np.ndarray:
        """All grid points as an (res1*res2, 3) array, row-major in (u, v)."""
        u, v = self.coords()
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return (self.origin[None, :]
                + uu.reshape(-1, 1) * self.axis1[None, :]
                + vv.reshape(-1, 1) * self.axis2[None, :])


@dataclass
class IntensityMap:
    """|E+|^2 on a grid, with near-emitter points flagged in mask."""

    grid: GridSpec
    values: np.ndarray    # (res1, res2) float
    mask: np.ndarray      # (res1, res2) bool, True within d/4 of an emitter


def field_amplitude(array: EmitterArray, state: np.ndarray, point) -> np.ndarray:
    """Positive-frequency field E+(r) = sum_i G(r - r_i) . p_i c_i.

    The overall prefactor is 1 in internal units; raises SingularityError if
    the point coincides with an emitter.
    """
    point = np.asarray(point, dtype=float)
    sep = point[None, :] - array.positions
    if np.any(np.linalg.norm(sep, axis=1) == 0.0):
        raise SingularityError("field requested on top of an emitter")
    field = np.zeros(3, dtype=complex)
    c = np.asarray(state, dtype=complex)
    for i in range(array.n):
        if c[i] != 0.0:
            field += c[i] * green_apply(sep[i], array.dipoles[i])
    return field


def _mask_radius(array: EmitterArray) -> float:
    if array.n < 2:
        return 0.0
    diff = array.positions[:, None, :] - array.positions[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    return float(np.min(dist)) / 4.0


def intensity_map(array: EmitterArray, state: np.ndarray, grid: GridSpec) -> IntensityMap:
    """Field intensity |E+|^2 on the grid.

    Points within a quarter of the nearest-neighbor distance of any emitter
    are still computed but flagged in the mask (the 1/r^6 near field there is
    not meaningful on a map).
    """
    pts = grid.points()
    c = np.asarray(state, dtype=complex)
    field = np.zeros((pts.shape[0], 3), dtype=complex)
    sep_all = pts[:, None, :] - array.positions[None, :, :]
    for i in range(array.n):
        if c[i] != 0.0:
            field += c[i] * green_apply(sep_all[:, i, :], array.dipoles[i])
    values = np.sum(np.abs(field) ** 2, axis=1)
    dist = np.linalg.norm(sep_all, axis=-1)
    mask = np.min(dist, axis=1) <= _mask_radius(array)
    shape = (grid.res1, grid.res2)
    return IntensityMap(grid=grid, values=values.reshape(shape), mask=mask.reshape(shape))
