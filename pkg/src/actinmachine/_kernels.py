"""Numba kernels for the excitable-lattice update.

The step is split so that every parallel section is a pure gather from
buffers that are immutable during the section: results are bit-identical
for any thread count.  Candidate collection is serial by design; its cost
is linear in (excited voxels x stencil size) and it fixes a deterministic
candidate order.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True)
def collect_candidates(exc_coords, offsets, conductive, excited, refractory, marks, out):
    """Gather resting conductive voxels within the stencil of any excited voxel.

    ``marks`` doubles as the dedup set; the caller clears the marked entries
    afterwards.  Returns the number of candidates written into ``out``.
    """
    nx, ny, nz = conductive.shape
    n = 0
    for e in range(exc_coords.shape[0]):
        i = exc_coords[e, 0]
        j = exc_coords[e, 1]
        z = exc_coords[e, 2]
        for m in range(offsets.shape[0]):
            a = i + offsets[m, 0]
            b = j + offsets[m, 1]
            c = z + offsets[m, 2]
            if 0 <= a < nx and 0 <= b < ny and 0 <= c < nz:
                if (
                    marks[a, b, c] == 0
                    and conductive[a, b, c]
                    and not excited[a, b, c]
                    and not refractory[a, b, c]
                ):
                    marks[a, b, c] = 1
                    out[n, 0] = a
                    out[n, 1] = b
                    out[n, 2] = c
                    n += 1
    return n


@njit(cache=True, parallel=True)
def count_excited_neighbors(cand, n_cand, offsets, excited, sigma):
    """sigma[i] = number of excited voxels within the stencil of candidate i."""
    nx, ny, nz = excited.shape
    for idx in prange(n_cand):
        i = cand[idx, 0]
        j = cand[idx, 1]
        z = cand[idx, 2]
        s = 0
        for m in range(offsets.shape[0]):
            a = i + offsets[m, 0]
            b = j + offsets[m, 1]
            c = z + offsets[m, 2]
            if 0 <= a < nx and 0 <= b < ny and 0 <= c < nz and excited[a, b, c]:
                s += 1
        sigma[idx] = s


def warmup():
    """Force JIT compilation of the kernels on trivially small inputs."""
    conductive = np.ones((2, 2, 2), dtype=bool)
    excited = np.zeros_like(conductive)
    excited[0, 0, 0] = True
    refractory = np.zeros_like(conductive)
    marks = np.zeros((2, 2, 2), dtype=np.uint8)
    out = np.empty((8, 3), dtype=np.int64)
    coords = np.argwhere(excited).astype(np.int64)
    offsets = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.int64)
    n = collect_candidates(coords, offsets, conductive, excited, refractory, marks, out)
    sigma = np.empty(8, dtype=np.int64)
    count_excited_neighbors(out, n, offsets, excited, sigma)
