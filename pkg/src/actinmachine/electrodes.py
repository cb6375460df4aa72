"""Electrode interface: stimulate with bit strings, read potentials, detect spikes.

An electrode is a voxel-ball aperture used for both writing and reading:
stimulation excites the resting conductive voxels strictly inside the
ball, and the potential is the count of excited voxels strictly inside
the same ball.  A spike is a step at which the potential reaches the
detection threshold; the machine state at a step is the string of spike
bits across electrodes, most significant bit first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automaton import AutomatonField, ball_offsets_strict
from .errors import CoordinateError, DimensionError, FormatError

DEFAULT_ELECTRODE_RADIUS = 4


@dataclass(frozen=True)
class Electrode:
    """A named probe location with a shared read/stimulation radius."""

    id: int
    pos: tuple
    r_e: int = DEFAULT_ELECTRODE_RADIUS

    def __post_init__(self):
        if self.r_e < 1:
            raise ValueError(f"r_e must be >= 1, got {self.r_e}")
        if len(self.pos) != 3:
            raise ValueError(f"pos must be an (i, j, z) triple, got {self.pos}")
        object.__setattr__(self, "pos", tuple(int(c) for c in self.pos))


@dataclass(frozen=True)
class RecordingParams:
    """Spike detection threshold and run length.

    The default detector is a level detector: any step whose potential
    reaches ``spike_threshold`` is a spike.  With ``rising_edge`` set, a
    spike is registered only when the potential crosses the threshold
    upward.
    """

    spike_threshold: int = 1
    T: int = 1000
    rising_edge: bool = False

    def __post_init__(self):
        if self.spike_threshold < 1:
            raise ValueError(f"spike_threshold must be >= 1, got {self.spike_threshold}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")


@dataclass
class SpikeRaster:
    """Binary response matrix of one electrode: rows are inputs, columns are steps 1..T."""

    electrode_id: int
    inputs: np.ndarray  # (n,) input decimal values
    data: np.ndarray  # (n, T) of {0, 1}

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.int64)
        self.data = np.asarray(self.data, dtype=np.uint8)
        if self.data.ndim != 2 or self.data.shape[0] != self.inputs.shape[0]:
            raise DimensionError(
                f"raster shape {self.data.shape} does not match {self.inputs.shape[0]} inputs"
            )


def bits_to_state(bits):
    """Decimal encoding of a bit string; electrode 0 is the most significant bit."""
    if any(c not in "01" for c in bits):
        raise ValueError(f"bit string {bits!r} must contain only 0 and 1")
    return int(bits, 2) if bits else 0


def state_to_bits(value, k):
    """Inverse of :func:`bits_to_state` for k electrodes."""
    if not 0 <= value < (1 << k):
        raise ValueError(f"state {value} outside [0, 2^{k})")
    return format(value, f"0{k}b")


def _ball_flat_indices(pos, r_e, dims):
    pts = np.asarray(pos, dtype=np.int64)[None, :] + ball_offsets_strict(r_e)
    ok = (
        (pts[:, 0] >= 0) & (pts[:, 0] < dims[0])
        & (pts[:, 1] >= 0) & (pts[:, 1] < dims[1])
        & (pts[:, 2] >= 0) & (pts[:, 2] < dims[2])
    )
    pts = pts[ok]
    return np.ravel_multi_index((pts[:, 0], pts[:, 1], pts[:, 2]), dims)


def potential(field, e):
    """Count of excited voxels strictly within ``e.r_e`` of the electrode position."""
    if not field.matrix.in_bounds(e.pos):
        raise CoordinateError(f"electrode {e.id} at {e.pos} outside grid {field.matrix.dims}")
    idx = _ball_flat_indices(e.pos, e.r_e, field.matrix.dims)
    return int(np.count_nonzero(field.excited.ravel()[idx]))


def stimulate(field, electrodes, bits):
    """Excite the aperture ball of every electrode whose bit is 1."""
    if len(bits) != len(electrodes):
        raise DimensionError(
            f"bit string length {len(bits)} != electrode count {len(electrodes)}"
        )
    for e, bit in zip(electrodes, bits):
        if bit == "1":
            field.excite_ball(e.pos, e.r_e)
        elif bit != "0":
            raise ValueError(f"bit string {bits!r} must contain only 0 and 1")
    return field


@dataclass
class TrialResult:
    """One stimulation run: spike rows, raw potential traces, state sequence.

    Column ``t - 1`` of the arrays corresponds to step ``t`` in 1..T.
    """

    bits: str
    spikes: np.ndarray  # (k, T) uint8
    potentials: np.ndarray  # (k, T) int64
    states: np.ndarray  # (T,) int64 decimal machine states

    @property
    def k(self):
        return self.spikes.shape[0]

    @property
    def T(self):
        return self.spikes.shape[1]


def run_trial(matrix, params, rec, electrodes, bits):
    """Stimulate an all-resting field with ``bits`` at t=0 and record T steps."""
    k = len(electrodes)
    for e in electrodes:
        if not matrix.in_bounds(e.pos):
            raise CoordinateError(f"electrode {e.id} at {e.pos} outside grid {matrix.dims}")
    field = AutomatonField.resting(matrix)
    stimulate(field, electrodes, bits)

    ball_idx = [_ball_flat_indices(e.pos, e.r_e, matrix.dims) for e in electrodes]
    spikes = np.zeros((k, rec.T), dtype=np.uint8)
    potentials = np.zeros((k, rec.T), dtype=np.int64)
    states = np.zeros(rec.T, dtype=np.int64)

    exc_flat = field.excited.ravel()
    prev = np.array([int(np.count_nonzero(exc_flat[idx])) for idx in ball_idx])
    for step_idx in range(rec.T):
        field.step(params)
        exc_flat = field.excited.ravel()
        cur = np.array([int(np.count_nonzero(exc_flat[idx])) for idx in ball_idx])
        potentials[:, step_idx] = cur
        fired = cur >= rec.spike_threshold
        if rec.rising_edge:
            fired &= prev < rec.spike_threshold
        spikes[:, step_idx] = fired
        states[step_idx] = bits_to_state("".join("1" if f else "0" for f in fired))
        prev = cur
    return TrialResult(bits=bits, spikes=spikes, potentials=potentials, states=states)


# ---------------------------------------------------------------------------
# Electrode config files: header `RADIUS <r_e>`, one `<id> <i> <j> <z>` line
# per electrode.  Blank lines and `#` comments are ignored.
# ---------------------------------------------------------------------------


def load_electrodes(path):
    radius = None
    electrodes = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "RADIUS":
                    if len(parts) != 2:
                        raise FormatError(f"{path}:{lineno}: malformed RADIUS line {raw!r}")
                    radius = int(parts[1])
                    continue
                if radius is None:
                    raise FormatError(f"{path}:{lineno}: electrode line before RADIUS header")
                if len(parts) != 4:
                    raise FormatError(f"{path}:{lineno}: expected `id i j z`, got {raw!r}")
                eid, i, j, z = (int(p) for p in parts)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer field in {raw!r}") from exc
            electrodes.append(Electrode(id=eid, pos=(i, j, z), r_e=radius))
    if radius is None:
        raise FormatError(f"{path}: missing RADIUS header")
    return electrodes


def save_electrodes(electrodes, path, comment=None):
    radii = {e.r_e for e in electrodes}
    if len(radii) != 1:
        raise ValueError(f"config format holds a single radius, got {sorted(radii)}")
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"RADIUS {radii.pop()}\n")
        for e in electrodes:
            fh.write(f"{e.id} {e.pos[0]} {e.pos[1]} {e.pos[2]}\n")


def write_raster_csv(raster, path, comment=None):
    """Spike raster as CSV: rows are input decimals, columns are steps 1..T."""
    _write_rows_csv(path, raster.inputs, raster.data, comment)


def write_potential_raster_csv(inputs, data, path, comment=None):
    """Raw integer potentials in the same shape as a spike raster."""
    _write_rows_csv(path, inputs, data, comment)


def write_trial_csv(values, electrodes, path, comment=None):
    """Per-electrode time series (spikes or potentials) of a single trial."""
    ids = np.array([e.id for e in electrodes])
    _write_rows_csv(path, ids, values, comment, label="electrode")


def _write_rows_csv(path, row_keys, data, comment, label="input"):
    T = data.shape[1]
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(label + "," + ",".join(str(t) for t in range(1, T + 1)) + "\n")
        for key, row in zip(row_keys, data):
            fh.write(str(int(key)) + "," + ",".join(str(int(v)) for v in row) + "\n")
