"""Excitation waves on bundle networks, rendered as image snapshots.

Builds two networks, a straight tube and a ring, stimulates them, and
writes PGM/PPM frames showing the excited front (red in the PPM) with
its refractory tail (magenta).  On the ring the wave keeps circulating,
which is the mechanism behind long-lived repetitive activity.
"""

from pathlib import Path

import numpy as np

from actinmachine import (
    AutomatonField,
    AutomatonParams,
    ConductiveMatrix,
    rasterize_segments,
    snapshot_slice,
    write_pgm,
    write_ppm,
)

OUT = Path("demo_output/snapshots")
OUT.mkdir(parents=True, exist_ok=True)

# --- a straight tube ------------------------------------------------------
tube = rasterize_segments((80, 15, 9), [((0, 7, 4), (79, 7, 4))], 3)
params = AutomatonParams(r=3, theta=7, delta=20)

field = AutomatonField.resting(tube)
field.excite_ball((2, 7, 4), 4)
print(f"tube: {tube.n_conductive} conductive voxels, "
      f"{field.n_excited} excited after stimulation")

for t in range(1, 31):
    field.step(params)
    if t in (1, 10, 20, 30):
        raster = snapshot_slice(field, 4)
        write_pgm(raster, OUT / f"tube_t{t:03d}.pgm")
        write_ppm(raster, OUT / f"tube_t{t:03d}.ppm")
        print(f"  t={t:3d}: excited={field.n_excited:4d} -> tube_t{t:03d}.ppm")

# --- a ring: excitation has a circular path and never dies ----------------
nx = ny = 56
ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
ring2d = np.abs(np.hypot(ii - 27.5, jj - 27.5) - 20.0) <= 2.5
occ = np.zeros((nx, ny, 8), dtype=bool)
occ[:, :, 2:6] = ring2d[:, :, None]
ring = ConductiveMatrix(occ)

# a wave started next to a refractory block can only run one way
ang = np.arctan2(jj - 27.5, ii - 27.5)
excited = np.zeros(ring.dims, dtype=bool)
refractory = np.zeros(ring.dims, dtype=bool)
countdown = np.zeros(ring.dims, dtype=np.uint16)
excited[:, :, 2:6] = (ring2d & (ang >= 0) & (ang < 0.3))[:, :, None]
refractory[:, :, 2:6] = (ring2d & (ang >= -0.9) & (ang < 0))[:, :, None]
countdown[refractory] = params.delta
field = AutomatonField(ring, excited, refractory, countdown)

print(f"\nring: {ring.n_conductive} conductive voxels, circulating wave")
for t in range(1, 501):
    field.step(params)
    if t in (50, 150, 300, 500):
        write_ppm(snapshot_slice(field, 3), OUT / f"ring_t{t:03d}.ppm")
        print(f"  t={t:3d}: excited={field.n_excited:3d} -> ring_t{t:03d}.ppm")

print(f"\nstill excited at t=500: {field.n_excited} voxels (re-entry sustains it)")
