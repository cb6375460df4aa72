"""Finite-state-machine view of the stimulated network.

Stimulating with every k-bit string and reading the per-step spike
strings yields one state sequence per input.  From those sequences this
module builds per-input transition graphs, a weighted global transition
graph, its max-weight functional pruning, and richness statistics over
the response moments (steps at which at least one input produced a
nonzero state).

The zero state is special throughout: input 0 is defined to produce the
all-zero sequence without simulation (an unstimulated field is a fixed
point), and transitions out of state 0 are not counted in the global
graph, where the endlessly repeated 0->0 pair would drown every weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automaton import AutomatonParams
from .electrodes import (
    RecordingParams,
    SpikeRaster,
    TrialResult,
    bits_to_state,
    run_trial,
    state_to_bits,
)
from .errors import DomainError

MAX_ELECTRODES = 16  # keeps the 2^k state space enumerable


@dataclass(frozen=True)
class MachineConfig:
    electrodes: tuple
    params: AutomatonParams = AutomatonParams()
    rec: RecordingParams = RecordingParams()

    def __post_init__(self):
        object.__setattr__(self, "electrodes", tuple(self.electrodes))
        if not 1 <= self.k <= MAX_ELECTRODES:
            raise ValueError(f"electrode count {self.k} outside [1, {MAX_ELECTRODES}]")

    @property
    def k(self):
        return len(self.electrodes)


@dataclass
class StateSequence:
    """States observed for one input over steps 1..T."""

    input_bits: str
    states: np.ndarray  # (T,) int64

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int64)

    @property
    def input_value(self):
        return bits_to_state(self.input_bits)


def run_all_inputs(cfg, matrix):
    """One StateSequence per input value 0..2^k-1, in input order.

    Inputs 1..2^k-1 are simulated; input 0 is the defined all-zero
    trajectory.
    """
    k = cfg.k
    seqs = [StateSequence("0" * k, np.zeros(cfg.rec.T, dtype=np.int64))]
    for value in range(1, 1 << k):
        bits = state_to_bits(value, k)
        trial = run_trial(matrix, cfg.params, cfg.rec, cfg.electrodes, bits)
        seqs.append(StateSequence(bits, trial.states))
    return seqs


def run_all_trials(cfg, matrix):
    """Like :func:`run_all_inputs` but retains full trials (spikes, potentials).

    Needed when the raw potential traces are to be exported; for state
    analysis alone, :func:`run_all_inputs` is lighter.
    """
    k, T = cfg.k, cfg.rec.T
    trials = [
        TrialResult(
            bits="0" * k,
            spikes=np.zeros((k, T), dtype=np.uint8),
            potentials=np.zeros((k, T), dtype=np.int64),
            states=np.zeros(T, dtype=np.int64),
        )
    ]
    for value in range(1, 1 << k):
        bits = state_to_bits(value, k)
        trials.append(run_trial(matrix, cfg.params, cfg.rec, cfg.electrodes, bits))
    return trials


def sequences_from_trials(trials):
    return [StateSequence(t.bits, t.states) for t in trials]


def potential_matrices(cfg, trials):
    """Per-electrode integer potential matrices, rows = inputs, columns = steps."""
    inputs = np.array([bits_to_state(t.bits) for t in trials], dtype=np.int64)
    return [
        (e.id, inputs, np.stack([t.potentials[i] for t in trials]))
        for i, e in enumerate(cfg.electrodes)
    ]


def spike_rasters(cfg, seqs):
    """Per-electrode spike rasters recovered from the state sequences.

    Bit i of the state at step t is exactly electrode i's spike bit.
    """
    k = cfg.k
    inputs = np.array([s.input_value for s in seqs], dtype=np.int64)
    states = np.stack([s.states for s in seqs])
    rasters = []
    for e_idx, e in enumerate(cfg.electrodes):
        bit = (states >> (k - 1 - e_idx)) & 1
        rasters.append(SpikeRaster(electrode_id=e.id, inputs=inputs, data=bit))
    return rasters


def per_input_graph(seq):
    """Unweighted edge set of one sequence; the 0->0 self-loop is dropped."""
    s = seq.states
    edges = set()
    for a, b in zip(s[:-1], s[1:]):
        if a == 0 and b == 0:
            continue
        edges.add((int(a), int(b)))
    return edges


@dataclass
class TransitionGraph:
    """Weighted digraph over all 2^k states, built from observed transitions."""

    k: int
    counts: dict  # (a, b) -> raw transition count, a != 0

    @property
    def n_states(self):
        return 1 << self.k

    def out_totals(self):
        totals = {}
        for (a, _), c in self.counts.items():
            totals[a] = totals.get(a, 0) + c
        return totals

    def weight(self, a, b):
        total = sum(c for (x, _), c in self.counts.items() if x == a)
        if total == 0:
            return 0.0
        return self.counts.get((a, b), 0) / total

    def weighted_edges(self):
        """(a, b, weight, raw count) tuples, sorted by (a, b)."""
        totals = self.out_totals()
        return [
            (a, b, c / totals[a], c)
            for (a, b), c in sorted(self.counts.items())
        ]


def global_graph(seqs, k=None):
    """Count consecutive state pairs across all inputs and normalise per source."""
    if k is None:
        k = max((len(s.input_bits) for s in seqs), default=1)
    counts = {}
    for seq in seqs:
        s = seq.states
        for a, b in zip(s[:-1], s[1:]):
            if a == 0:
                continue
            key = (int(a), int(b))
            counts[key] = counts.get(key, 0) + 1
    return TransitionGraph(k=k, counts=counts)


@dataclass
class PrunedGraph:
    """Max-weight functional pruning of a transition graph.

    Every node keeps at most one outgoing edge (ties break toward the
    smallest successor).  Indegrees ignore self-loops, so a fixed point
    is not its own predecessor; Garden-of-Eden states are those with no
    predecessors at all.
    """

    k: int
    kept: dict  # a -> b
    fixed_points: list
    garden_of_eden: list
    indegree: dict  # node -> incoming kept edges, self-loops excluded

    @property
    def n_states(self):
        return 1 << self.k

    def cycles(self):
        """Non-trivial cycles in the kept-edge graph (a pruned tree has none)."""
        out = []
        color = {}
        for start in sorted(self.kept):
            if color.get(start):
                continue
            path = []
            node = start
            while node in self.kept and color.get(node) is None:
                color[node] = "gray"
                path.append(node)
                node = self.kept[node]
            if color.get(node) == "gray" and node in path:
                cyc = path[path.index(node):]
                if len(cyc) > 1:
                    out.append(cyc)
            for n in path:
                color[n] = "black"
        return out


def prune_max(g):
    """Keep each node's maximum-weight outgoing edge."""
    best = {}
    for (a, b), c in sorted(g.counts.items()):
        cur = best.get(a)
        # Tie on weight breaks toward the smaller successor; the sorted
        # iteration makes that the first one seen.
        if cur is None or c > cur[1]:
            best[a] = (b, c)
    kept = {a: bc[0] for a, bc in best.items()}
    indegree = {n: 0 for n in range(1 << g.k)}
    for a, b in kept.items():
        if a != b:
            indegree[b] += 1
    fixed_points = sorted(a for a, b in kept.items() if a == b)
    goe = [n for n in range(1 << g.k) if indegree[n] == 0]
    return PrunedGraph(
        k=g.k, kept=kept, fixed_points=fixed_points, garden_of_eden=goe, indegree=indegree
    )


# ---------------------------------------------------------------------------
# Richness of responses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RichnessRow:
    t: int  # response moment index, 1-based
    step: int  # raw step in 1..T
    mu: int
    states: tuple  # sorted nonzero states observed across inputs


@dataclass
class RichnessTable:
    rows: list

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass
class ResponseRichness:
    """Richness table, per-input/per-node histograms, and the snapshot maps g(t)."""

    table: RichnessTable
    nodes_per_input: dict  # input value -> distinct states in its sequence
    inputs_per_node: dict  # state -> number of inputs whose sequence visits it
    _g_maps: list = field(repr=False, default_factory=list)

    def g(self, t):
        """input -> state at the t-th response moment (1-based)."""
        if not 1 <= t <= len(self._g_maps):
            raise DomainError(
                f"t={t} is not a response moment (1..{len(self._g_maps)})"
            )
        return dict(self._g_maps[t - 1])

    @property
    def response_moments(self):
        return [row.step for row in self.table.rows]


def richness(seqs):
    """Response-moment statistics across all input sequences."""
    inputs = [s.input_value for s in seqs]
    states = np.stack([s.states for s in seqs])  # (n_inputs, T)
    nonzero_cols = np.flatnonzero((states != 0).any(axis=0))
    rows = []
    g_maps = []
    for moment, col in enumerate(nonzero_cols, start=1):
        column = states[:, col]
        distinct = sorted(int(v) for v in set(column[column != 0].tolist()))
        rows.append(
            RichnessRow(t=moment, step=int(col) + 1, mu=len(distinct), states=tuple(distinct))
        )
        g_maps.append({inp: int(v) for inp, v in zip(inputs, column)})
    nodes_per_input = {
        inp: len(set(states[i].tolist())) for i, inp in enumerate(inputs)
    }
    visited = {}
    for i in range(states.shape[0]):
        for v in set(states[i].tolist()):
            visited[int(v)] = visited.get(int(v), 0) + 1
    return ResponseRichness(
        table=RichnessTable(rows=rows),
        nodes_per_input=nodes_per_input,
        inputs_per_node=dict(sorted(visited.items())),
        _g_maps=g_maps,
    )


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def write_sequences_csv(seqs, path, comment=None):
    T = len(seqs[0].states)
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("input," + ",".join(str(t) for t in range(1, T + 1)) + "\n")
        for seq in seqs:
            fh.write(
                str(seq.input_value) + "," + ",".join(str(int(v)) for v in seq.states) + "\n"
            )


def write_dot(g, path, comment=None):
    """Weighted global graph as DOT; node labels are decimal states."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("digraph transitions {\n")
        if comment:
            fh.write(f"  // {comment}\n")
        for node in range(g.n_states):
            fh.write(f'  {node} [label="{node}"];\n')
        for a, b, w, c in g.weighted_edges():
            fh.write(f"  {a} -> {b} [weight={w:.6f}, count={c}];\n")
        fh.write("}\n")


def write_pruned_dot(p, path, comment=None):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("digraph pruned {\n")
        if comment:
            fh.write(f"  // {comment}\n")
        for node in range(p.n_states):
            fh.write(f'  {node} [label="{node}"];\n')
        for a in sorted(p.kept):
            fh.write(f"  {a} -> {p.kept[a]};\n")
        fh.write("}\n")


def write_per_input_dot(edges, input_value, path, comment=None):
    """Unweighted per-input graph; only states on kept edges appear."""
    nodes = sorted({n for e in edges for n in e})
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"digraph input_{input_value} {{\n")
        if comment:
            fh.write(f"  // {comment}\n")
        for node in nodes:
            fh.write(f'  {node} [label="{node}"];\n')
        for a, b in sorted(edges):
            fh.write(f"  {a} -> {b};\n")
        fh.write("}\n")


def write_richness_csv(rich, path, comment=None):
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("t,step,mu,states\n")
        for row in rich.table:
            fh.write(f"{row.t},{row.step},{row.mu}," + ";".join(str(s) for s in row.states) + "\n")


def write_histogram_csv(hist, path, key_label, value_label, comment=None):
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"{key_label},{value_label}\n")
        for key in sorted(hist):
            fh.write(f"{key},{hist[key]}\n")


def write_g_csv(g_map, path, comment=None):
    with open(path, "w", encoding="ascii", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("input,state\n")
        for inp in sorted(g_map):
            fh.write(f"{inp},{g_map[inp]}\n")
