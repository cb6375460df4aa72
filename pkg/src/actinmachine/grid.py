"""Conductive voxel grids: thresholding, raw file IO, synthetic networks.

The grid is a dense 3D occupancy array ``occupancy[i, j, z]`` of shape
``(n_x, n_y, n_z)``; a 1 marks a voxel that can carry excitation.  The
lattice is treated as isotropic for all distance computations; physical
voxel sizes, when known, are carried as metadata only.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EmptyInputError, FormatError, GenerationError

# Physical voxel size of the reference confocal stacks, in micrometres.
# Metadata only: never enters any distance computation.
REFERENCE_VOXEL_SIZE_UM = (0.22, 0.22, 4.0)

PLACEMENT_UNIFORM = "uniform-random-endpoints"
PLACEMENT_DELAUNAY = "delaunay-edges-of-random-points"

RAW_MAGIC = "VOXELS"
ENCODING_BYTE = "byte"
ENCODING_PACKED = "packed"


@dataclass(frozen=True)
class RgbThreshold:
    """Per-channel lower bounds; a pixel passes only if strictly above all three."""

    r_min: int = 40
    g_min: int = 19
    b_min: int = 19

    def __post_init__(self):
        for name in ("r_min", "g_min", "b_min"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"{name}={v} outside [0, 255]")


DEFAULT_RGB_THRESHOLD = RgbThreshold()


class ConductiveMatrix:
    """Immutable 3D occupancy grid of conductive voxels.

    Coordinates outside the grid are non-conductive by definition;
    callers never need to range-check before asking about conductivity.
    """

    def __init__(self, occupancy, voxel_size_um=None):
        occ = np.asarray(occupancy)
        if occ.ndim != 3:
            raise DimensionError(f"occupancy must be 3D, got shape {occ.shape}")
        if min(occ.shape) < 1:
            raise DimensionError(f"all dimensions must be >= 1, got {occ.shape}")
        occ = occ.astype(bool)
        occ.setflags(write=False)
        self._occ = occ
        self.voxel_size_um = voxel_size_um

    @property
    def occupancy(self):
        return self._occ

    @property
    def dims(self):
        return self._occ.shape

    @property
    def n_conductive(self):
        return int(np.count_nonzero(self._occ))

    def in_bounds(self, pos):
        i, j, z = pos
        nx, ny, nz = self._occ.shape
        return 0 <= i < nx and 0 <= j < ny and 0 <= z < nz

    def is_conductive(self, pos):
        return self.in_bounds(pos) and bool(self._occ[tuple(pos)])

    def __eq__(self, other):
        if not isinstance(other, ConductiveMatrix):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self._occ, other._occ))

    def __repr__(self):
        nx, ny, nz = self.dims
        return f"ConductiveMatrix({nx}x{ny}x{nz}, {self.n_conductive} conductive)"


def threshold_image_stack(slices, th=DEFAULT_RGB_THRESHOLD):
    """Convert an ordered stack of RGB rasters into a conductive matrix.

    Each slice is an ``(n_y, n_x, 3)`` array; slice index becomes the z
    coordinate.  A voxel conducts iff every channel strictly exceeds its
    threshold.
    """
    slices = list(slices)
    if not slices:
        raise EmptyInputError("image stack is empty")
    rasters = []
    shape0 = None
    for z, s in enumerate(slices):
        a = np.asarray(s)
        if a.ndim != 3 or a.shape[2] < 3:
            raise DimensionError(f"slice {z} is not an RGB raster: shape {a.shape}")
        if shape0 is None:
            shape0 = a.shape[:2]
        elif a.shape[:2] != shape0:
            raise DimensionError(
                f"slice {z} has shape {a.shape[:2]}, expected {shape0}"
            )
        rasters.append(a)
    stack = np.stack(rasters)  # (n_z, n_y, n_x, 3)
    mask = (
        (stack[..., 0] > th.r_min)
        & (stack[..., 1] > th.g_min)
        & (stack[..., 2] > th.b_min)
    )
    # (n_z, n_y, n_x) -> (n_x, n_y, n_z)
    return ConductiveMatrix(np.ascontiguousarray(mask.transpose(2, 1, 0)))


# ---------------------------------------------------------------------------
# Raw matrix file format
#
# ASCII header line `VOXELS <n_x> <n_y> <n_z> <encoding>`, newline, then the
# payload in x-fastest, then y, then z order.  byte: one byte per voxel, 0 or
# 1.  packed: 8 voxels per byte, LSB first, zero-padded per z-slice.
# ---------------------------------------------------------------------------


def save_raw_matrix(matrix, path, encoding=ENCODING_BYTE):
    if encoding not in (ENCODING_BYTE, ENCODING_PACKED):
        raise ValueError(f"unknown encoding {encoding!r}")
    nx, ny, nz = matrix.dims
    header = f"{RAW_MAGIC} {nx} {ny} {nz} {encoding}\n".encode("ascii")
    occ = matrix.occupancy
    with open(path, "wb") as fh:
        fh.write(header)
        if encoding == ENCODING_BYTE:
            fh.write(occ.ravel(order="F").astype(np.uint8).tobytes())
        else:
            for z in range(nz):
                plane = occ[:, :, z].ravel(order="F")
                fh.write(np.packbits(plane, bitorder="little").tobytes())


def load_raw_matrix(path):
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError("missing header newline", offset=len(data))
    try:
        fields = data[:nl].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise FormatError("header is not ASCII", offset=0) from exc
    if len(fields) != 5 or fields[0] != RAW_MAGIC:
        raise FormatError(f"malformed header {data[:nl]!r}", offset=0)
    try:
        nx, ny, nz = (int(f) for f in fields[1:4])
    except ValueError as exc:
        raise FormatError(f"non-integer dimensions in header {data[:nl]!r}", offset=0) from exc
    encoding = fields[4]
    if min(nx, ny, nz) < 1:
        raise FormatError(f"non-positive dimensions {nx}x{ny}x{nz}", offset=0)
    payload = data[nl + 1 :]
    base = nl + 1
    if encoding == ENCODING_BYTE:
        expected = nx * ny * nz
        if len(payload) != expected:
            raise FormatError(
                f"payload has {len(payload)} bytes, expected {expected}",
                offset=base + min(len(payload), expected),
            )
        flat = np.frombuffer(payload, dtype=np.uint8)
        bad = np.nonzero(flat > 1)[0]
        if bad.size:
            raise FormatError(
                f"voxel byte {flat[bad[0]]} not in {{0, 1}}", offset=base + int(bad[0])
            )
        occ = flat.reshape((nx, ny, nz), order="F")
    elif encoding == ENCODING_PACKED:
        per_slice = (nx * ny + 7) // 8
        expected = per_slice * nz
        if len(payload) != expected:
            raise FormatError(
                f"payload has {len(payload)} bytes, expected {expected}",
                offset=base + min(len(payload), expected),
            )
        occ = np.empty((nx, ny, nz), dtype=np.uint8)
        for z in range(nz):
            chunk = np.frombuffer(payload, dtype=np.uint8, count=per_slice, offset=z * per_slice)
            bits = np.unpackbits(chunk, bitorder="little")
            pad = bits[nx * ny :]
            if pad.any():
                bad_bit = nx * ny + int(np.nonzero(pad)[0][0])
                raise FormatError(
                    "nonzero padding bits in packed slice",
                    offset=base + z * per_slice + bad_bit // 8,
                )
            occ[:, :, z] = bits[: nx * ny].reshape((nx, ny), order="F")
    else:
        raise FormatError(f"unknown encoding {encoding!r}", offset=0)
    return ConductiveMatrix(occ)


# ---------------------------------------------------------------------------
# Synthetic networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticNetworkSpec:
    """Recipe for a random bundle network; generation is pure in (spec, seed).

    In uniform mode each segment gets two independently sampled endpoints.
    In the Delaunay-style mode ``segment_count`` points are sampled and
    joined to their nearest neighbours, which approximates the edge set of
    a Delaunay triangulation without requiring one.
    """

    dims: tuple
    segment_count: int
    bundle_radius: int = 2
    seed: int = 0
    placement: str = PLACEMENT_UNIFORM

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive sizes, got {self.dims}")
        if self.segment_count < 1:
            raise ValueError(f"segment_count must be >= 1, got {self.segment_count}")
        if self.bundle_radius < 1:
            raise ValueError(f"bundle_radius must be >= 1, got {self.bundle_radius}")
        if self.placement not in (PLACEMENT_UNIFORM, PLACEMENT_DELAUNAY):
            raise ValueError(f"unknown placement {self.placement!r}")


def _random_voxel(rng, dims):
    # Only rng.random() is used anywhere in generation: its stream is
    # guaranteed stable across Python versions, so generated networks are
    # byte-reproducible from (spec, seed) indefinitely.
    return tuple(int(rng.random() * n) for n in dims)


def _ball_offsets_le(radius):
    r = int(math.ceil(radius))
    rng = np.arange(-r, r + 1)
    di, dj, dz = np.meshgrid(rng, rng, rng, indexing="ij")
    keep = di**2 + dj**2 + dz**2 <= radius * radius
    return np.stack([di[keep], dj[keep], dz[keep]], axis=1)


def _stamp_segment(occ, p0, p1, radius):
    """Mark every voxel whose centre lies within ``radius`` of segment p0-p1."""
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    seg = p1 - p0
    length = float(np.linalg.norm(seg))
    n_samples = max(2, int(math.ceil(length)) + 1)
    ts = np.linspace(0.0, 1.0, n_samples)
    samples = np.rint(p0[None, :] + ts[:, None] * seg[None, :]).astype(np.int64)
    # Candidate superset: balls of radius+2 around unit-spaced samples cover
    # the true tube (sample spacing <= 1, rounding error <= sqrt(3)/2).
    cand = (samples[:, None, :] + _ball_offsets_le(radius + 2)[None, :, :]).reshape(-1, 3)
    dims = occ.shape
    ok = (
        (cand[:, 0] >= 0) & (cand[:, 0] < dims[0])
        & (cand[:, 1] >= 0) & (cand[:, 1] < dims[1])
        & (cand[:, 2] >= 0) & (cand[:, 2] < dims[2])
    )
    cand = cand[ok]
    if cand.size == 0:
        return
    flat = np.ravel_multi_index((cand[:, 0], cand[:, 1], cand[:, 2]), dims)
    cand = cand[np.unique(flat, return_index=True)[1]]
    # Exact point-to-segment distance.
    v = cand.astype(np.float64) - p0[None, :]
    denom = float(seg @ seg)
    if denom == 0.0:
        d2 = np.einsum("ij,ij->i", v, v)
    else:
        t = np.clip((v @ seg) / denom, 0.0, 1.0)
        w = v - t[:, None] * seg[None, :]
        d2 = np.einsum("ij,ij->i", w, w)
    hit = cand[d2 <= radius * radius]
    occ[hit[:, 0], hit[:, 1], hit[:, 2]] = True


def rasterize_segments(dims, segments, bundle_radius):
    """Rasterize line segments as solid tubes; the matrix is exactly their union."""
    occ = np.zeros(dims, dtype=bool)
    for p0, p1 in segments:
        _stamp_segment(occ, p0, p1, bundle_radius)
    return ConductiveMatrix(occ)


def _knn_edges(points, k=3):
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    edges = set()
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    for i in range(n):
        order = np.lexsort((np.arange(n), d2[i]))  # ties break toward lower index
        for j in order[: min(k, n - 1)]:
            edges.add((min(i, int(j)), max(i, int(j))))
    return sorted(edges)


def generate_synthetic(spec):
    """Generate a random bundle network; deterministic given the spec."""
    dims = tuple(spec.dims)
    if dims[0] * dims[1] * dims[2] < 2:
        raise GenerationError(f"dims {dims} too small to contain any segment")
    rng = random.Random(spec.seed)
    if spec.placement == PLACEMENT_UNIFORM:
        segments = [
            (_random_voxel(rng, dims), _random_voxel(rng, dims))
            for _ in range(spec.segment_count)
        ]
    else:
        points = [_random_voxel(rng, dims) for _ in range(spec.segment_count)]
        if len(points) < 2:
            raise GenerationError("placement needs at least two points")
        segments = [(points[a], points[b]) for a, b in _knn_edges(points)]
    return rasterize_segments(dims, segments, spec.bundle_radius)
