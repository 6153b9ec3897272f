"""sleepmis: simulate and verify MIS algorithms in the sleeping model."""

__version__ = "0.1.0"

from .engine import (
    Broadcast,
    CongestViolation,
    DEFAULT_ROUND_CAP,
    EngineError,
    Inbox,
    ProgramError,
    SimulationTimeout,
    Terminate,
    Trace,
    Unicast,
    WakeAt,
    message_budget,
    run,
)
from .graphs import (
    EdgeListError,
    Graph,
    GraphConfigError,
    GraphSpec,
    GraphVerdict,
    generate,
    parse_edge_list,
    serialize,
    validate,
)
from .metrics import ComplexityMetrics, MetricsError, compute_metrics
from .oracles import (
    EquivalenceReport,
    ExactExpectation,
    PruningReport,
    RankOrderResult,
    Verdict,
    check_mis,
    composite_order,
    equivalence_check,
    exact_expectation,
    naive_is_mis,
    pruning_stats,
    rank_order,
    sequential_greedy,
)
from .programs import (
    AlgoParams,
    CallRecord,
    CallRecorder,
    MISStatus,
    compare_ranks,
    fast_sleeping_mis_program,
    fast_sleeping_mis_programs,
    greedy_mis_program,
    greedy_mis_programs,
    k_rank,
    luby_program,
    luby_programs,
    sleeping_mis_program,
    sleeping_mis_programs,
)
from .rng import derive_rng, draw_ranks, make_tapes
from .schedules import ELL, ceil_log2, fast_depth, fast_schedule, sleeping_depth, t_schedule
