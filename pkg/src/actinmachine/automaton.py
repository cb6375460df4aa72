"""Synchronous excitable-medium automaton over a conductive matrix.

Every conductive voxel is resting, excited, or refractory.  A resting
voxel fires when the number of excited voxels within Euclidean distance
``r`` strictly exceeds the threshold ``theta``.  An excited voxel turns
refractory with a countdown of ``delta``; the countdown decrements once
per step and the voxel rests again after it has sat at zero, so a firing
voxel is refractory for exactly ``delta + 1`` steps.  All voxels update
in parallel from the previous step's state.

The update engine only visits the active set (excited voxels, their
stencil neighbourhood, and the refractory bookkeeping lists), which is
output-equivalent to a full sweep over the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import CoordinateError, DimensionError

# Snapshot raster class values (PGM gray levels).
SNAPSHOT_NONCONDUCTIVE = 0
SNAPSHOT_RESTING = 64
SNAPSHOT_REFRACTORY = 128
SNAPSHOT_EXCITED = 255

_COUNTDOWN_DTYPE = np.uint16


@dataclass(frozen=True)
class AutomatonParams:
    """Update-rule constants: stencil radius, firing threshold, refractory delay."""

    r: int = 3
    theta: int = 7
    delta: int = 20

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.theta < 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.delta > np.iinfo(_COUNTDOWN_DTYPE).max:
            raise ValueError(f"delta {self.delta} exceeds countdown storage")


@lru_cache(maxsize=None)
def neighborhood_offsets(r):
    """All nonzero integer offsets with squared norm <= r*r, in lexicographic order.

    The centre is excluded: an excited centre is never resting, so it can
    never contribute to its own firing condition.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    span = np.arange(-r, r + 1, dtype=np.int64)
    di, dj, dz = np.meshgrid(span, span, span, indexing="ij")
    keep = (di**2 + dj**2 + dz**2 <= r * r) & ~((di == 0) & (dj == 0) & (dz == 0))
    offs = np.stack([di[keep], dj[keep], dz[keep]], axis=1)
    offs.setflags(write=False)
    return offs


@lru_cache(maxsize=None)
def ball_offsets_strict(radius):
    """Integer offsets with norm strictly below ``radius``, centre included.

    This is the aperture shared by electrode reads and stimulation.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    span = np.arange(-radius, radius + 1, dtype=np.int64)
    di, dj, dz = np.meshgrid(span, span, span, indexing="ij")
    keep = di**2 + dj**2 + dz**2 < radius * radius
    offs = np.stack([di[keep], dj[keep], dz[keep]], axis=1)
    offs.setflags(write=False)
    return offs


class AutomatonField:
    """Mutable per-voxel state over a conductive matrix.

    ``excited`` and ``refractory`` are boolean planes; ``countdown`` holds
    the refractory counter (nonzero only while refractory).  ``step``
    advances the field in place and returns it.
    """

    def __init__(self, matrix, excited=None, refractory=None, countdown=None, t=0):
        dims = matrix.dims
        self.matrix = matrix
        self.excited = self._plane(excited, dims, bool)
        self.refractory = self._plane(refractory, dims, bool)
        self.countdown = self._plane(countdown, dims, _COUNTDOWN_DTYPE)
        self.t = t
        self._validate()
        self._exc_coords = np.argwhere(self.excited).astype(np.int64)
        self._ref_coords = np.argwhere(self.refractory).astype(np.int64)
        self._cand_buf = None
        self._sigma_buf = None
        self._marks = None

    @staticmethod
    def _plane(arr, dims, dtype):
        if arr is None:
            return np.zeros(dims, dtype=dtype)
        arr = np.ascontiguousarray(arr, dtype=dtype)
        if arr.shape != tuple(dims):
            raise DimensionError(f"state plane shape {arr.shape} != grid {tuple(dims)}")
        return arr.copy()

    def _validate(self):
        occ = self.matrix.occupancy
        if np.any(self.excited & ~occ) or np.any(self.refractory & ~occ):
            raise ValueError("non-conductive voxels must stay resting")
        if np.any(self.excited & self.refractory):
            raise ValueError("a voxel cannot be excited and refractory at once")
        if np.any((self.countdown > 0) & ~self.refractory):
            raise ValueError("countdown must be zero outside refractory voxels")

    @classmethod
    def resting(cls, matrix):
        return cls(matrix)

    def copy(self):
        return AutomatonField(
            self.matrix, self.excited, self.refractory, self.countdown, self.t
        )

    @property
    def excited_coords(self):
        return self._exc_coords

    @property
    def n_excited(self):
        return self._exc_coords.shape[0]

    def is_quiescent(self):
        return self._exc_coords.shape[0] == 0 and self._ref_coords.shape[0] == 0

    def _ensure_buffers(self):
        if self._marks is None:
            self._marks = np.zeros(self.matrix.dims, dtype=np.uint8)
            cap = max(1, self.matrix.n_conductive)
            self._cand_buf = np.empty((cap, 3), dtype=np.int64)
            self._sigma_buf = np.empty(cap, dtype=np.int64)

    def step(self, params):
        """Advance one synchronous step; returns the field itself."""
        occ = self.matrix.occupancy
        exc = self._exc_coords

        new_exc = np.empty((0, 3), dtype=np.int64)
        if exc.shape[0] > 0:
            self._ensure_buffers()
            offs = neighborhood_offsets(params.r)
            n_cand = _kernels.collect_candidates(
                exc, offs, occ, self.excited, self.refractory, self._marks, self._cand_buf
            )
            if n_cand > 0:
                cand = self._cand_buf[:n_cand]
                _kernels.count_excited_neighbors(
                    cand, n_cand, offs, self.excited, self._sigma_buf
                )
                self._marks[cand[:, 0], cand[:, 1], cand[:, 2]] = 0
                new_exc = cand[self._sigma_buf[:n_cand] > params.theta].copy()

        # Refractory bookkeeping from the pre-step planes.
        ref = self._ref_coords
        if ref.shape[0] > 0:
            h = self.countdown[ref[:, 0], ref[:, 1], ref[:, 2]]
            done = h == 0
            leaving = ref[done]
            staying = ref[~done]
            self.refractory[leaving[:, 0], leaving[:, 1], leaving[:, 2]] = False
            self.countdown[staying[:, 0], staying[:, 1], staying[:, 2]] = h[~done] - 1
        else:
            staying = ref

        # Excited voxels turn refractory with a fresh countdown.
        if exc.shape[0] > 0:
            self.excited[exc[:, 0], exc[:, 1], exc[:, 2]] = False
            self.refractory[exc[:, 0], exc[:, 1], exc[:, 2]] = True
            self.countdown[exc[:, 0], exc[:, 1], exc[:, 2]] = params.delta

        if new_exc.shape[0] > 0:
            self.excited[new_exc[:, 0], new_exc[:, 1], new_exc[:, 2]] = True

        self._exc_coords = new_exc
        self._ref_coords = np.concatenate([staying, exc]) if exc.shape[0] else staying
        self.t += 1
        return self

    def excite_ball(self, center, radius):
        """Excite resting conductive voxels strictly within ``radius`` of ``center``."""
        if not self.matrix.in_bounds(center):
            raise CoordinateError(f"center {tuple(center)} outside grid {self.matrix.dims}")
        offs = ball_offsets_strict(radius)
        pts = np.asarray(center, dtype=np.int64)[None, :] + offs
        dims = self.matrix.dims
        ok = (
            (pts[:, 0] >= 0) & (pts[:, 0] < dims[0])
            & (pts[:, 1] >= 0) & (pts[:, 1] < dims[1])
            & (pts[:, 2] >= 0) & (pts[:, 2] < dims[2])
        )
        pts = pts[ok]
        i, j, z = pts[:, 0], pts[:, 1], pts[:, 2]
        eligible = (
            self.matrix.occupancy[i, j, z]
            & ~self.excited[i, j, z]
            & ~self.refractory[i, j, z]
        )
        pts = pts[eligible]
        if pts.shape[0]:
            self.excited[pts[:, 0], pts[:, 1], pts[:, 2]] = True
            self._exc_coords = np.concatenate([self._exc_coords, pts])
        return self


def step(field, params):
    """Functional spelling of :meth:`AutomatonField.step`."""
    return field.step(params)


def excite_ball(field, center, radius):
    """Functional spelling of :meth:`AutomatonField.excite_ball`."""
    return field.excite_ball(center, radius)


def snapshot_slice(field, z):
    """Class map of one z-slice: nonconductive/resting/excited/refractory."""
    nx, ny, nz = field.matrix.dims
    if not 0 <= z < nz:
        raise CoordinateError(f"slice index {z} outside [0, {nz})")
    raster = np.full((nx, ny), SNAPSHOT_NONCONDUCTIVE, dtype=np.uint8)
    occ = field.matrix.occupancy[:, :, z]
    raster[occ] = SNAPSHOT_RESTING
    raster[field.refractory[:, :, z]] = SNAPSHOT_REFRACTORY
    raster[field.excited[:, :, z]] = SNAPSHOT_EXCITED
    return raster


def write_pgm(raster, path, comment=None):
    """Write an (n_x, n_y) class raster as binary PGM (P5)."""
    nx, ny = raster.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n")
        if comment:
            fh.write(f"# {comment}\n".encode("ascii"))
        fh.write(f"{nx} {ny}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(raster.T, dtype=np.uint8).tobytes())


# Wave front red, refractory tail magenta, resting tissue dark gray.
_PPM_COLORS = {
    SNAPSHOT_NONCONDUCTIVE: (0, 0, 0),
    SNAPSHOT_RESTING: (64, 64, 64),
    SNAPSHOT_EXCITED: (255, 0, 0),
    SNAPSHOT_REFRACTORY: (255, 0, 255),
}


def write_ppm(raster, path, comment=None):
    """Write an (n_x, n_y) class raster as colorized binary PPM (P6)."""
    nx, ny = raster.shape
    lut = np.zeros((256, 3), dtype=np.uint8)
    for value, rgb in _PPM_COLORS.items():
        lut[value] = rgb
    rgb = lut[raster.T]
    with open(path, "wb") as fh:
        fh.write(b"P6\n")
        if comment:
            fh.write(f"# {comment}\n".encode("ascii"))
        fh.write(f"{nx} {ny}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes())
