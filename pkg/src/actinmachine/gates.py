"""Mining two-input one-output Boolean gates from spike responses.

Four trials stimulate the input pair with (0,0), (0,1), (1,0), (1,1).
For every output electrode and every step t the four spike bits form a
response quad; the quad's truth table decides the gate.  A gate is
counted once per (electrode, step) slot, so one electrode can realise
many gates over a run; ``dedupe`` collapses this to at most one count
per (electrode, gate type).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .automaton import AutomatonParams
from .electrodes import run_trial

INPUT_PAIRS = ("00", "01", "10", "11")


class GateType(Enum):
    ZERO = "ZERO"
    OR = "OR"
    AND = "AND"
    XOR = "XOR"
    NOT_AND = "NOT-AND"  # !x & y
    AND_NOT = "AND-NOT"  # x & !y
    SELECT_X = "SELECT-X"
    SELECT_Y = "SELECT-Y"
    OTHER = "OTHER"


# The census tallies only these; ZERO and OTHER slots are ignored.
COUNTED_GATES = (
    GateType.OR,
    GateType.AND,
    GateType.XOR,
    GateType.NOT_AND,
    GateType.AND_NOT,
    GateType.SELECT_X,
    GateType.SELECT_Y,
)

# Quad code packs (z00, z01, z10, z11) with z00 as the most significant bit.
_CODE_TO_GATE = {
    0b0000: GateType.ZERO,
    0b0111: GateType.OR,
    0b0001: GateType.AND,
    0b0110: GateType.XOR,
    0b0100: GateType.NOT_AND,
    0b0010: GateType.AND_NOT,
    0b0011: GateType.SELECT_X,
    0b0101: GateType.SELECT_Y,
}


def quad_code(q):
    """Pack a response quad (z00, z01, z10, z11) into a 4-bit code."""
    z00, z01, z10, z11 = (int(b) for b in q)
    for b in (z00, z01, z10, z11):
        if b not in (0, 1):
            raise ValueError(f"quad {q} must be binary")
    return (z00 << 3) | (z01 << 2) | (z10 << 1) | z11


def classify(q):
    """Gate type of a response quad; a total function on {0,1}^4."""
    return _CODE_TO_GATE.get(quad_code(q), GateType.OTHER)


def classify_code(code):
    return _CODE_TO_GATE.get(int(code), GateType.OTHER)


@dataclass
class GateCensus:
    """Per-electrode gate counts plus the full per-(electrode, step) gate map."""

    counts: dict  # (electrode_id, GateType) -> count, counted gates only
    nu: float  # average counted gates per output electrode
    gate_map: dict  # electrode_id -> (T,) uint8 quad codes

    def total(self, gate=None):
        if gate is None:
            return sum(self.counts.values())
        return sum(c for (_, g), c in self.counts.items() if g is gate)


def _census_from_codes(code_map, dedupe):
    counts = {}
    for eid, codes in code_map.items():
        for g in COUNTED_GATES:
            counts[(eid, g)] = 0
        seen = set()
        for code in codes:
            g = classify_code(code)
            if g not in COUNTED_GATES:
                continue
            if dedupe:
                if (eid, g) in seen:
                    continue
                seen.add((eid, g))
            counts[(eid, g)] += 1
    n_out = max(1, len(code_map))
    nu = sum(counts.values()) / n_out
    return GateCensus(counts=counts, nu=nu, gate_map=code_map)


def mine(matrix, params, rec, in_x, in_y, outputs, dedupe=False):
    """Run the four input pairs and classify every (output electrode, step) slot."""
    in_ids = {in_x.id, in_y.id}
    if in_x.id == in_y.id or any(o.id in in_ids for o in outputs):
        raise ValueError("input and output electrodes must be disjoint")
    electrodes = [in_x, in_y] + list(outputs)
    trials = {}
    for pair in INPUT_PAIRS:
        bits = pair + "0" * len(outputs)
        trials[pair] = run_trial(matrix, params, rec, electrodes, bits)
    code_map = {}
    for pos, out in enumerate(outputs):
        rows = [trials[pair].spikes[2 + pos] for pair in INPUT_PAIRS]
        codes = (
            (rows[0].astype(np.uint8) << 3)
            | (rows[1] << 2)
            | (rows[2] << 1)
            | rows[3]
        )
        code_map[out.id] = codes
    return _census_from_codes(code_map, dedupe)


# Stimulation grids used for the frequency analysis.
DEFAULT_THETA_GRID = tuple(range(4, 13))
DEFAULT_DELTA_GRID = (10, 15, 17, 18, 19, 20, 21, 22, 23, 24, 30)


def sweep_theta(matrix, thetas, delta, rec, in_x, in_y, outputs, r=3, dedupe=False):
    """Gate frequencies versus excitation threshold at a fixed refractory delay."""
    return _sweep(matrix, [("theta", th) for th in thetas], dict(delta=delta, r=r),
                  rec, in_x, in_y, outputs, dedupe)


def sweep_delta(matrix, deltas, theta, rec, in_x, in_y, outputs, r=3, dedupe=False):
    """Gate frequencies versus refractory delay at a fixed excitation threshold."""
    return _sweep(matrix, [("delta", d) for d in deltas], dict(theta=theta, r=r),
                  rec, in_x, in_y, outputs, dedupe)


def _sweep(matrix, axis_values, fixed, rec, in_x, in_y, outputs, dedupe):
    if not axis_values:
        raise ValueError("parameter grid is empty")
    rows = []
    for name, value in axis_values:
        params = AutomatonParams(**{name: value}, **fixed)
        census = mine(matrix, params, rec, in_x, in_y, outputs, dedupe=dedupe)
        rows.append((value, census))
    return rows


SWEEP_CSV_HEADER = "param,OR,AND,XOR,NOTAND,ANDNOT,SELX,SELY,nu"


def write_sweep_csv(rows, path, comment=None):
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(SWEEP_CSV_HEADER + "\n")
        for value, census in rows:
            totals = [census.total(g) for g in COUNTED_GATES]
            fh.write(f"{value}," + ",".join(str(t) for t in totals) + f",{census.nu:.6f}\n")


def write_census_csv(census, path, comment=None):
    """Per-electrode breakdown of one mining run."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"# nu: {census.nu:.6f}\n")
        fh.write("electrode,OR,AND,XOR,NOTAND,ANDNOT,SELX,SELY,total\n")
        for eid in sorted(census.gate_map):
            row = [census.counts[(eid, g)] for g in COUNTED_GATES]
            fh.write(f"{eid}," + ",".join(str(c) for c in row) + f",{sum(row)}\n")
