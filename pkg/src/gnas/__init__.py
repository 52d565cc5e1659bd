"""Global neural architecture search over a depth/width/operation/kernel
space, with architecture-aware dynamic ranking and pluggable evaluators."""

from .arch import (
    CONV,
    SEP,
    Architecture,
    LayerSpec,
    SearchBounds,
    WidthSchedule,
    arch_hash,
    canonical_json,
    count_params,
    derive_schedule,
    from_dict,
    parse_architecture,
    sample_random,
    space_size,
    to_dict,
)
from .errors import (
    ConfigError,
    DegenerateInput,
    EvalFailed,
    EvalTimeout,
    GnasError,
    InvalidBounds,
    ParseError,
    ProtocolError,
    ScheduleError,
    WorkerDied,
)
from .evaluation import (
    CachingEvaluator,
    EvalCache,
    EvalRequest,
    EvalResult,
    Evaluator,
    ExternalEvaluator,
    SurrogateConfig,
    SurrogateEvaluator,
    evaluate,
    surrogate_accuracy,
)
from .ranking import (
    CorrelationReport,
    RankedCohort,
    RankingExperimentResult,
    dynamic_ranking_experiment,
    spearman,
    static_ranking_experiment,
)
from .search import (
    BaselineStats,
    RIResult,
    SearchConfig,
    SearchResult,
    SearchTrace,
    compensate_width,
    macro_search,
    micro_search,
    random_baseline,
    relative_improvement,
    ri_experiment,
    run_search,
)

__version__ = "0.1.0"
