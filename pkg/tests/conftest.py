import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from actinmachine import (
    AutomatonField,
    AutomatonParams,
    ConductiveMatrix,
    Electrode,
    RecordingParams,
    rasterize_segments,
)
from actinmachine import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels before any timed test runs."""
    _kernels.warmup()


@pytest.fixture
def tube():
    """Straight radius-2 tube spanning x, with electrodes at both ends."""
    matrix = rasterize_segments((40, 9, 9), [((0, 4, 4), (39, 4, 4))], 2)
    near = Electrode(id=0, pos=(1, 4, 4), r_e=4)
    far = Electrode(id=1, pos=(38, 4, 4), r_e=4)
    return matrix, near, far


@pytest.fixture
def ring_matrix():
    """Planar annulus extruded in z; supports a circulating wave at theta=7."""
    nx = ny = 56
    nz = 8
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ring2d = np.abs(np.hypot(ii - 27.5, jj - 27.5) - 20.0) <= 2.5
    occ = np.zeros((nx, ny, nz), dtype=bool)
    for z in range(2, 6):
        occ[:, :, z] = ring2d
    return ConductiveMatrix(occ)


def seed_circulating_wave(matrix, delta):
    """Excited arc plus a refractory block behind it: the wave runs one way."""
    nx, ny, nz = matrix.dims
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ang = np.arctan2(jj - 27.5, ii - 27.5)
    ring2d = matrix.occupancy[:, :, 2]
    exc2d = ring2d & (ang >= 0.0) & (ang < 0.30)
    ref2d = ring2d & (ang >= -0.9) & (ang < 0.0)
    excited = np.zeros(matrix.dims, dtype=bool)
    refractory = np.zeros(matrix.dims, dtype=bool)
    countdown = np.zeros(matrix.dims, dtype=np.uint16)
    for z in range(2, 6):
        excited[:, :, z] = exc2d & matrix.occupancy[:, :, z]
        refractory[:, :, z] = ref2d & matrix.occupancy[:, :, z]
        countdown[:, :, z][refractory[:, :, z]] = delta
    return AutomatonField(matrix, excited, refractory, countdown)


def random_field(matrix, rng, delta, p_excited=0.1, p_refractory=0.1):
    """Random but consistent state over the conductive voxels."""
    occ = matrix.occupancy
    u = rng.random(occ.shape)
    excited = occ & (u < p_excited)
    refractory = occ & (u >= p_excited) & (u < p_excited + p_refractory)
    countdown = np.zeros(occ.shape, dtype=np.uint16)
    countdown[refractory] = rng.integers(0, delta + 1, size=int(refractory.sum()))
    return AutomatonField(matrix, excited, refractory, countdown)


@pytest.fixture
def quick_params():
    return AutomatonParams(r=2, theta=2, delta=3)


@pytest.fixture
def quick_rec():
    return RecordingParams(spike_threshold=1, T=60)
