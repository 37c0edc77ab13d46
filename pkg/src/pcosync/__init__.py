"""Event-driven simulator and analysis toolkit for pulse-coupled phase
agents on directed networks with stochastic pulse triggering.
"""

from .analysis import (
    BoundReport,
    is_sync,
    jump_window_counts,
    lyapunov_v,
    partial_depth,
    sync_time,
    theorem3_bound,
)
from .engine import (
    BinaryRule,
    Deterministic,
    EdgeBernoulli,
    HybridArc,
    JumpEvent,
    PiecewiseLinearRule,
    SimConfig,
    Simulation,
    StopCondition,
    VertexBernoulli,
    apply_jump,
    flow,
    phase_update,
    simulate,
    step,
    time_to_next_fire,
)
from .errors import SequenceExhausted, SimulationError, ValidationError, ZenoError
from .feasible import (
    GraphSequence,
    SyncString,
    TriggerMask,
    active_vertices,
    enumerate_masks,
    find_string,
    layer_graph,
    mask_from_subgraph,
    mask_probability,
    sample_mask,
    subgraph_from_mask,
    sync_string,
)
from .graph import (
    DepthPartition,
    Digraph,
    build_digraph,
    depth_partition,
    generate,
    graph_depth,
    roots,
)
from .montecarlo import (
    BatchResult,
    CompareRow,
    RunRecord,
    compare,
    empirical_tail,
    run_batch,
    slope_sweep,
)
from .seeds import derive_seed, spawn_rng

__version__ = "0.1.0"
