"""Batch front-end: build a network, run experiments, emit files.

Every run is described by a manifest (a small JSON document); flags are
just a way of building one on the command line, and ``--manifest`` accepts
the full serialized form.  Outputs are a pure function of the manifest
content plus the files it references, and each emitted file carries the
manifest hash as a comment where its format allows, so a rerun can be
checked byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import gates, logic, machine
from .automaton import AutomatonField, AutomatonParams, snapshot_slice, write_pgm, write_ppm
from .electrodes import (
    RecordingParams,
    load_electrodes,
    run_trial,
    stimulate,
    write_potential_raster_csv,
    write_raster_csv,
    write_trial_csv,
)
from .errors import ActinMachineError
from .grid import (
    PLACEMENT_UNIFORM,
    RgbThreshold,
    SyntheticNetworkSpec,
    generate_synthetic,
    load_raw_matrix,
    threshold_image_stack,
)
from .machine import MachineConfig


class UsageError(ActinMachineError):
    """Bad manifest or command line; the message names the offending field."""


@dataclass
class RunManifest:
    command: str
    network: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    recording: dict = field(default_factory=dict)
    electrodes: str | None = None
    output_dir: str = "out"
    options: dict = field(default_factory=dict)

    def canonical_json(self):
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self):
        return hashlib.sha256(self.canonical_json().encode("ascii")).hexdigest()

    @classmethod
    def from_file(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"manifest file not found: {path}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"manifest is not valid JSON: {exc}")
        known = {"command", "network", "params", "recording", "electrodes", "output_dir", "options"}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown manifest field(s): {sorted(unknown)}")
        if "command" not in raw:
            raise UsageError("manifest field missing: command")
        return cls(**raw)


def _natural_key(name):
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name)]


def build_matrix(network):
    kind = network.get("kind")
    if kind == "synthetic":
        try:
            spec = SyntheticNetworkSpec(
                dims=tuple(network["dims"]),
                segment_count=network["segment_count"],
                bundle_radius=network.get("bundle_radius", 2),
                seed=network.get("seed", 0),
                placement=network.get("placement", PLACEMENT_UNIFORM),
            )
        except KeyError as exc:
            raise UsageError(f"network field missing: {exc.args[0]}")
        except ValueError as exc:
            raise UsageError(f"network: {exc}")
        return generate_synthetic(spec)
    if kind == "raw":
        path = network.get("path")
        if not path:
            raise UsageError("network field missing: path")
        if not Path(path).exists():
            raise UsageError(f"raw matrix file not found: {path}")
        return load_raw_matrix(path)
    if kind == "image-stack":
        directory = network.get("dir")
        if not directory:
            raise UsageError("network field missing: dir")
        d = Path(directory)
        if not d.is_dir():
            raise UsageError(f"image stack directory not found: {directory}")
        from PIL import Image

        names = sorted(
            (p for p in d.iterdir() if p.suffix.lower() in (".png", ".tif", ".tiff")),
            key=lambda p: _natural_key(p.name),
        )
        if not names:
            raise UsageError(f"no PNG/TIFF slices in {directory}")
        slices = [np.asarray(Image.open(p).convert("RGB")) for p in names]
        th = network.get("threshold")
        threshold = RgbThreshold(*th) if th else RgbThreshold()
        return threshold_image_stack(slices, threshold)
    raise UsageError(f"network.kind must be synthetic, raw, or image-stack, got {kind!r}")


def _automaton_params(manifest):
    try:
        return AutomatonParams(**manifest.params)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"params: {exc}")


def _recording_params(manifest):
    try:
        return RecordingParams(**manifest.recording)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"recording: {exc}")


def _load_electrode_file(manifest):
    if not manifest.electrodes:
        raise UsageError("manifest field missing: electrodes")
    if not Path(manifest.electrodes).exists():
        raise UsageError(f"electrode file not found: {manifest.electrodes}")
    return load_electrodes(manifest.electrodes)


def _outdir(manifest):
    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _split_inputs(electrodes, options):
    by_id = {e.id: e for e in electrodes}
    x_id = options.get("input_x", electrodes[0].id)
    y_id = options.get("input_y", electrodes[-1].id)
    if x_id not in by_id:
        raise UsageError(f"options.input_x: no electrode with id {x_id}")
    if y_id not in by_id:
        raise UsageError(f"options.input_y: no electrode with id {y_id}")
    if x_id == y_id:
        raise UsageError("options.input_x and options.input_y must differ")
    outputs = [e for e in electrodes if e.id not in (x_id, y_id)]
    if not outputs:
        raise UsageError("no output electrodes left after removing the inputs")
    return by_id[x_id], by_id[y_id], outputs


def cmd_simulate(manifest):
    matrix = build_matrix(manifest.network)
    params = _automaton_params(manifest)
    rec = _recording_params(manifest)
    electrodes = _load_electrode_file(manifest)
    bits = manifest.options.get("bits")
    if bits is None or len(bits) != len(electrodes):
        raise UsageError(
            f"options.bits must be a {len(electrodes)}-character binary string, got {bits!r}"
        )
    snapshot_steps = sorted(set(manifest.options.get("snapshot_steps", [])))
    slice_list = manifest.options.get("slices")
    emit_ppm = bool(manifest.options.get("ppm", False))
    out = _outdir(manifest)
    tag = f"manifest-hash: {manifest.hash}"

    trial = run_trial(matrix, params, rec, electrodes, bits)
    write_trial_csv(trial.potentials, electrodes, out / "potentials.csv", comment=tag)
    write_trial_csv(trial.spikes, electrodes, out / "spikes.csv", comment=tag)

    if snapshot_steps:
        nz = matrix.dims[2]
        zs = slice_list if slice_list is not None else range(nz)
        field_ = AutomatonField.resting(matrix)
        stimulate(field_, electrodes, bits)
        for t in range(1, max(snapshot_steps) + 1):
            field_.step(params)
            if t in snapshot_steps:
                for z in zs:
                    raster = snapshot_slice(field_, z)
                    write_pgm(raster, out / f"snapshot_t{t:06d}_z{z:02d}.pgm", comment=tag)
                    if emit_ppm:
                        write_ppm(raster, out / f"snapshot_t{t:06d}_z{z:02d}.ppm", comment=tag)
    return 0


def cmd_mine_gates(manifest):
    matrix = build_matrix(manifest.network)
    params = _automaton_params(manifest)
    rec = _recording_params(manifest)
    electrodes = _load_electrode_file(manifest)
    in_x, in_y, outputs = _split_inputs(electrodes, manifest.options)
    dedupe = bool(manifest.options.get("dedupe_per_electrode", False))
    census = gates.mine(matrix, params, rec, in_x, in_y, outputs, dedupe=dedupe)
    out = _outdir(manifest)
    gates.write_census_csv(census, out / "gate_census.csv", comment=f"manifest-hash: {manifest.hash}")
    print(f"nu = {census.nu:.6f} over {len(outputs)} output electrodes")
    return 0


def cmd_sweep(manifest):
    matrix = build_matrix(manifest.network)
    rec = _recording_params(manifest)
    electrodes = _load_electrode_file(manifest)
    in_x, in_y, outputs = _split_inputs(electrodes, manifest.options)
    dedupe = bool(manifest.options.get("dedupe_per_electrode", False))
    axis = manifest.options.get("axis")
    grid = manifest.options.get("grid")
    r = manifest.params.get("r", 3)
    if axis == "theta":
        grid = grid or list(gates.DEFAULT_THETA_GRID)
        delta = manifest.params.get("delta", 20)
        rows = gates.sweep_theta(matrix, grid, delta, rec, in_x, in_y, outputs, r=r, dedupe=dedupe)
    elif axis == "delta":
        grid = grid or list(gates.DEFAULT_DELTA_GRID)
        theta = manifest.params.get("theta", 7)
        rows = gates.sweep_delta(matrix, grid, theta, rec, in_x, in_y, outputs, r=r, dedupe=dedupe)
    else:
        raise UsageError(f"options.axis must be theta or delta, got {axis!r}")
    out = _outdir(manifest)
    gates.write_sweep_csv(rows, out / f"sweep_{axis}.csv", comment=f"manifest-hash: {manifest.hash}")
    return 0


def cmd_machine(manifest):
    matrix = build_matrix(manifest.network)
    params = _automaton_params(manifest)
    rec = _recording_params(manifest)
    electrodes = _load_electrode_file(manifest)
    cfg = MachineConfig(electrodes=tuple(electrodes), params=params, rec=rec)
    out = _outdir(manifest)
    tag = f"manifest-hash: {manifest.hash}"

    if manifest.options.get("rasters", False):
        trials = machine.run_all_trials(cfg, matrix)
        seqs = machine.sequences_from_trials(trials)
        for raster in machine.spike_rasters(cfg, seqs):
            write_raster_csv(
                raster, out / f"raster_e{raster.electrode_id}.csv", comment=tag
            )
        for eid, inputs, data in machine.potential_matrices(cfg, trials):
            write_potential_raster_csv(
                inputs, data, out / f"potentials_e{eid}.csv", comment=tag
            )
    else:
        seqs = machine.run_all_inputs(cfg, matrix)
    machine.write_sequences_csv(seqs, out / "sequences.csv", comment=tag)

    g = machine.global_graph(seqs, k=cfg.k)
    machine.write_dot(g, out / "global.dot", comment=tag)
    pruned = machine.prune_max(g)
    machine.write_pruned_dot(pruned, out / "pruned.dot", comment=tag)

    rich = machine.richness(seqs)
    machine.write_richness_csv(rich, out / "richness.csv", comment=tag)
    machine.write_histogram_csv(
        rich.nodes_per_input, out / "nodes_per_input.csv", "input", "nodes", comment=tag
    )
    machine.write_histogram_csv(
        rich.inputs_per_node, out / "inputs_per_node.csv", "state", "inputs", comment=tag
    )

    if manifest.options.get("per_input_graphs", False):
        for seq in seqs:
            edges = machine.per_input_graph(seq)
            if edges:
                machine.write_per_input_dot(
                    edges, seq.input_value, out / f"input_{seq.input_value:03d}.dot", comment=tag
                )

    if rich.table.rows:
        g_at = manifest.options.get("g_at")
        if g_at is None:
            g_at = max(rich.table.rows, key=lambda row: row.mu).t
        g_at = int(g_at)
        g_map = rich.g(g_at)
        machine.write_g_csv(g_map, out / f"g_at_{g_at:03d}.csv", comment=tag)
        dnfs = [logic.minimize(t) for t in logic.tables_from_g(g_map, cfg.k)]
        logic.write_dnf_csv(dnfs, out / f"dnf_at_{g_at:03d}.csv", comment=tag)
        for line in logic.format_dnf_lines(dnfs):
            print(line)
    else:
        print("machine never responded: no response moments, no g to minimize")
    return 0


def cmd_minimize(manifest):
    opts = manifest.options
    if "bits" in opts:
        bits = opts["bits"]
        n = len(bits)
        k = n.bit_length() - 1
        if n != 1 << k or any(c not in "01" for c in bits):
            raise UsageError("options.bits must be a binary string of length 2^k")
        tables = [logic.TruthTable(k, tuple(int(c) for c in bits))]
    elif "g_csv" in opts:
        path = Path(opts["g_csv"])
        if not path.exists():
            raise UsageError(f"g csv file not found: {path}")
        g_map = {}
        for line in path.read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("input"):
                continue
            inp, state = line.split(",")
            g_map[int(inp)] = int(state)
        k = len(g_map).bit_length() - 1
        if len(g_map) != 1 << k:
            raise UsageError(f"g csv holds {len(g_map)} rows, expected a power of two")
        tables = logic.tables_from_g(g_map, k)
    else:
        raise UsageError("minimize needs options.bits or options.g_csv")
    dnfs = [logic.minimize(t) for t in tables]
    for line in logic.format_dnf_lines(dnfs):
        print(line)
    if opts.get("csv"):
        out = _outdir(manifest)
        logic.write_dnf_csv(dnfs, out / "dnf.csv", comment=f"manifest-hash: {manifest.hash}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "mine-gates": cmd_mine_gates,
    "sweep": cmd_sweep,
    "machine": cmd_machine,
    "minimize": cmd_minimize,
}


def _add_common(sub):
    sub.add_argument("--manifest", help="path to a serialized run manifest (JSON)")
    sub.add_argument("--output", default=None, help="output directory")
    sub.add_argument("--electrodes", default=None, help="electrode config file")
    sub.add_argument("--network-synthetic", default=None, metavar="DIMS:SEGS:RADIUS:SEED",
                     help="synthetic network, e.g. 64x64x16:30:2:7")
    sub.add_argument("--network-raw", default=None, metavar="PATH", help="raw matrix file")
    sub.add_argument("--network-stack", default=None, metavar="DIR", help="image stack directory")
    sub.add_argument("--threshold", default=None, metavar="R,G,B",
                     help="RGB thresholds for image stacks (default 40,19,19)")
    sub.add_argument("--r", type=int, default=None, help="neighborhood radius")
    sub.add_argument("--theta", type=int, default=None, help="excitation threshold")
    sub.add_argument("--delta", type=int, default=None, help="refractory delay")
    sub.add_argument("--spike-threshold", type=int, default=None)
    sub.add_argument("--steps", type=int, default=None, help="run length T")
    sub.add_argument("--rising-edge", action="store_true", default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="actinmachine",
        description="Simulate excitable bundle networks, mine gates, extract machines.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="run one input string, emit snapshots and traces")
    _add_common(p)
    p.add_argument("--bits", default=None, help="input bit string, one bit per electrode")
    p.add_argument("--snapshot-steps", default=None, metavar="T1,T2,...")
    p.add_argument("--slices", default=None, metavar="Z1,Z2,...", help="restrict snapshots to these z")
    p.add_argument("--ppm", action="store_true", default=None, help="also write colorized PPM")

    p = subs.add_parser("mine-gates", help="census of two-input gates at one parameter point")
    _add_common(p)
    p.add_argument("--input-x", type=int, default=None, help="electrode id for input x")
    p.add_argument("--input-y", type=int, default=None, help="electrode id for input y")
    p.add_argument("--dedupe-per-electrode", action="store_true", default=None)

    p = subs.add_parser("sweep", help="gate frequencies over a theta or delta grid")
    _add_common(p)
    p.add_argument("--axis", choices=["theta", "delta"], default=None)
    p.add_argument("--grid", default=None, metavar="V1,V2,...")
    p.add_argument("--input-x", type=int, default=None)
    p.add_argument("--input-y", type=int, default=None)
    p.add_argument("--dedupe-per-electrode", action="store_true", default=None)

    p = subs.add_parser("machine", help="full pipeline: sequences, graphs, richness, DNFs")
    _add_common(p)
    p.add_argument("--g-at", type=int, default=None, help="response moment for g extraction")
    p.add_argument("--per-input-graphs", action="store_true", default=None)
    p.add_argument("--rasters", action="store_true", default=None,
                   help="also write one spike-raster CSV per electrode")

    p = subs.add_parser("minimize", help="minimize a truth table or a g snapshot CSV")
    _add_common(p)
    p.add_argument("--bits", default=None, help="2^k output bits of a single table")
    p.add_argument("--g-csv", default=None, help="input,state CSV to split and minimize")
    p.add_argument("--csv", action="store_true", default=None, help="also write dnf.csv")

    return parser


def _parse_int_list(text):
    return [int(v) for v in text.split(",") if v != ""]


def manifest_from_args(args):
    if args.manifest:
        manifest = RunManifest.from_file(args.manifest)
        if manifest.command != args.command:
            raise UsageError(
                f"manifest command {manifest.command!r} does not match {args.command!r}"
            )
    else:
        manifest = RunManifest(command=args.command)

    network_flags = [
        ("synthetic", args.network_synthetic),
        ("raw", args.network_raw),
        ("image-stack", args.network_stack),
    ]
    given = [(k, v) for k, v in network_flags if v]
    if len(given) > 1:
        raise UsageError("give at most one of --network-synthetic/--network-raw/--network-stack")
    if given:
        kind, value = given[0]
        if kind == "synthetic":
            try:
                dims_s, segs, radius, seed = value.split(":")
                dims = tuple(int(d) for d in dims_s.split("x"))
            except ValueError:
                raise UsageError(f"--network-synthetic expects DIMSxDIMSxDIMS:SEGS:RADIUS:SEED, got {value!r}")
            manifest.network = {
                "kind": "synthetic", "dims": list(dims), "segment_count": int(segs),
                "bundle_radius": int(radius), "seed": int(seed),
            }
        elif kind == "raw":
            manifest.network = {"kind": "raw", "path": value}
        else:
            manifest.network = {"kind": "image-stack", "dir": value}
    if args.threshold is not None:
        manifest.network["threshold"] = _parse_int_list(args.threshold)

    for name in ("r", "theta", "delta"):
        value = getattr(args, name)
        if value is not None:
            manifest.params[name] = value
    if args.spike_threshold is not None:
        manifest.recording["spike_threshold"] = args.spike_threshold
    if args.steps is not None:
        manifest.recording["T"] = args.steps
    if args.rising_edge:
        manifest.recording["rising_edge"] = True
    if args.electrodes is not None:
        manifest.electrodes = args.electrodes
    if args.output is not None:
        manifest.output_dir = args.output

    option_flags = {
        "bits": "bits",
        "snapshot_steps": "snapshot_steps",
        "slices": "slices",
        "ppm": "ppm",
        "input_x": "input_x",
        "input_y": "input_y",
        "dedupe_per_electrode": "dedupe_per_electrode",
        "axis": "axis",
        "grid": "grid",
        "g_at": "g_at",
        "per_input_graphs": "per_input_graphs",
        "rasters": "rasters",
        "g_csv": "g_csv",
        "csv": "csv",
    }
    for attr, key in option_flags.items():
        if hasattr(args, attr):
            value = getattr(args, attr)
            if value is not None:
                if key in ("snapshot_steps", "slices", "grid") and isinstance(value, str):
                    value = _parse_int_list(value)
                manifest.options[key] = value
    return manifest


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = manifest_from_args(args)
        return _COMMANDS[args.command](manifest)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ActinMachineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
