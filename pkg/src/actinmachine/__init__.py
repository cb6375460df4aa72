"""Excitable-automaton toolkit for voxelized bundle networks.

Builds conductive voxel grids (from image stacks, raw files, or a
synthetic generator), runs a three-state excitable automaton over them,
interfaces the lattice through electrode apertures, mines Boolean gates
from spike responses, and extracts a finite-state-machine description
with transition graphs, richness statistics, and minimized per-electrode
Boolean functions.
"""

from .automaton import (
    AutomatonField,
    AutomatonParams,
    excite_ball,
    neighborhood_offsets,
    snapshot_slice,
    step,
    write_pgm,
    write_ppm,
)
from .electrodes import (
    Electrode,
    RecordingParams,
    SpikeRaster,
    TrialResult,
    bits_to_state,
    load_electrodes,
    potential,
    run_trial,
    save_electrodes,
    state_to_bits,
    stimulate,
)
from .gates import (
    DEFAULT_DELTA_GRID,
    DEFAULT_THETA_GRID,
    GateCensus,
    GateType,
    classify,
    mine,
    quad_code,
    sweep_delta,
    sweep_theta,
)
from .grid import (
    ConductiveMatrix,
    RgbThreshold,
    SyntheticNetworkSpec,
    generate_synthetic,
    load_raw_matrix,
    rasterize_segments,
    save_raw_matrix,
    threshold_image_stack,
)
from .logic import Dnf, TruthTable, evaluate, format_dnf, minimize, tables_from_g
from .machine import (
    MachineConfig,
    PrunedGraph,
    ResponseRichness,
    StateSequence,
    TransitionGraph,
    global_graph,
    per_input_graph,
    potential_matrices,
    prune_max,
    richness,
    run_all_inputs,
    run_all_trials,
    spike_rasters,
)

__version__ = "0.1.0"
