"""From spikes to a finite-state machine.

Runs the bundled demo network against all 63 nonzero 6-bit inputs,
reads the per-step spike strings as machine states, and derives the
state-transition structure: per-input graphs, the weighted global
graph, its max-weight pruning, richness statistics, and the minimized
Boolean function each electrode realises at the richest moment.
"""

from importlib import resources
from pathlib import Path

from actinmachine import (
    MachineConfig,
    generate_synthetic,
    global_graph,
    load_electrodes,
    minimize,
    prune_max,
    richness,
    run_all_inputs,
    tables_from_g,
    SyntheticNetworkSpec,
)
from actinmachine.logic import format_dnf_lines
from actinmachine.machine import write_dot, write_pruned_dot

OUT = Path("demo_output")
OUT.mkdir(parents=True, exist_ok=True)

net = generate_synthetic(
    SyntheticNetworkSpec(dims=(64, 64, 16), segment_count=26, bundle_radius=2, seed=1)
)
with resources.as_file(
    resources.files("actinmachine.data").joinpath("fixtures/demo_electrodes.txt")
) as path:
    electrodes = load_electrodes(path)
cfg = MachineConfig(electrodes=tuple(electrodes))  # theta=7, delta=20, T=1000

print(f"running {2**cfg.k - 1} input strings on a {net.n_conductive}-voxel network...")
seqs = run_all_inputs(cfg, net)

g = global_graph(seqs, k=cfg.k)
pruned = prune_max(g)
write_dot(g, OUT / "global.dot")
write_pruned_dot(pruned, OUT / "pruned.dot")
print(f"global graph: {len(g.counts)} weighted edges -> {OUT / 'global.dot'}")
print(f"pruned graph: fixed points {pruned.fixed_points}, "
      f"{len(pruned.garden_of_eden)} Garden-of-Eden states, "
      f"cycles beyond self-loops: {pruned.cycles() or 'none'}")
indegrees = {n: d for n, d in pruned.indegree.items() if d > 0}
print(f"indegrees of reachable states: {indegrees}")

rich = richness(seqs)
print(f"\nmachine responded at {len(rich.table)} moments; the richest ones:")
for row in sorted(rich.table.rows, key=lambda r: -r.mu)[:5]:
    print(f"  t={row.t:3d} (step {row.step:3d}): mu={row.mu} states={row.states}")

best = max(rich.table.rows, key=lambda r: r.mu)
g_map = rich.g(best.t)
print(f"\nBoolean functions realised at t={best.t} (one per electrode):")
for line in format_dnf_lines([minimize(t) for t in tables_from_g(g_map, cfg.k)]):
    print(f"  {line}")
