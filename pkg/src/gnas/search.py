"""Greedy global architecture search.

Macro phase: starting from the shallowest, widest candidate, Grow one layer
at a time (one extra training epoch per step) while accuracy improves, then
Prune stem channels (two extra epochs per pruned candidate) while accuracy
holds. Micro phase: retrain the macro result as a baseline, then greedily
Replace each layer's operation with plain convolution and Update each kernel
to the larger size, compensating stem width so parameter count never exceeds
the baseline. Three tolerance violations ("strikes") end a phase early.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

from .arch import (
    CONV,
    Architecture,
    LayerSpec,
    SearchBounds,
    arch_hash,
    count_params,
    sample_random,
    to_dict,
)
from .errors import InvalidBounds
from .evaluation import EvalRequest, Evaluator

GROW = "GROW"
PRUNE = "PRUNE"
MICRO_BASELINE = "MICRO_BASELINE"
MICRO_OP = "MICRO_OP"
MICRO_KERNEL = "MICRO_KERNEL"
RANDOM = "RANDOM"


@dataclass(frozen=True)
class SearchConfig:
    """Bounds, thresholds, and initialization for one search run.

    l_plus is the accuracy gain required to adopt a grown layer; l_minus is
    the drop tolerated without a strike. input_resolution/num_classes/
    in_channels describe the task the candidates are built for; micro_epochs
    overrides the micro-phase training budget (defaults to bounds.e_min).
    """

    bounds: SearchBounds = field(default_factory=SearchBounds)
    l_plus: float = 0.10
    l_minus: float = 0.05
    max_strikes: int = 3
    init_op: str = "sep"
    init_kernel: int = 3
    seed: int = 0
    param_slack: float = 0.0
    input_resolution: int = 32
    num_classes: int = 10
    in_channels: int = 3
    micro_epochs: int | None = None

    def __post_init__(self):
        if self.l_plus <= 0:
            raise ValueError("l_plus must be > 0")
        if self.l_minus < 0:
            raise ValueError("l_minus must be >= 0")
        if self.max_strikes < 1:
            raise ValueError("max_strikes must be >= 1")
        if self.param_slack < 0:
            raise ValueError("param_slack must be >= 0")
        if self.init_op not in self.bounds.ops:
            raise InvalidBounds(f"init_op {self.init_op!r} not in bounds.ops {self.bounds.ops}")
        if self.init_kernel not in self.bounds.kernels:
            raise InvalidBounds(
                f"init_kernel {self.init_kernel} not in bounds.kernels {self.bounds.kernels}"
            )
        if self.micro_epochs is not None and self.micro_epochs < 1:
            raise ValueError("micro_epochs must be >= 1")

    def count_params(self, arch: Architecture) -> int:
        return count_params(arch, in_channels=self.in_channels,
                            num_stages=self.bounds.num_stages)


@dataclass(frozen=True)
class TraceEvent:
    phase: str
    arch: Architecture
    epochs: int
    val_acc: float
    params: int
    accepted: bool

    def to_json_obj(self) -> dict:
        return {
            "phase": self.phase,
            "hash": arch_hash(self.arch),
            "depth": self.arch.depth,
            "stem_width": self.arch.stem_width,
            "epochs": self.epochs,
            "val_acc": self.val_acc,
            "params": self.params,
            "accepted": self.accepted,
        }


@dataclass
class SearchTrace:
    """Ordered ledger of every evaluation plus phase budget counters."""

    events: list[TraceEvent] = field(default_factory=list)
    d_prime: int = 0
    w_prime: int = 0
    micro_evals: int = 0
    d_f: int = 0
    grow_strikes: int = 0
    prune_strikes: int = 0
    notes: list[str] = field(default_factory=list)

    def record(self, phase: str, arch: Architecture, epochs: int,
               val_acc: float, params: int, accepted: bool) -> None:
        self.events.append(TraceEvent(phase, arch, epochs, val_acc, params, accepted))

    @property
    def total_evaluations(self) -> int:
        return len(self.events)

    def max_macro_epochs(self) -> int:
        """Largest training budget granted during the macro phase."""
        macro = [e.epochs for e in self.events if e.phase in (GROW, PRUNE)]
        return max(macro) if macro else 0

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            for event in self.events:
                fh.write(json.dumps(event.to_json_obj(), separators=(",", ":")) + "\n")

    @staticmethod
    def merged(macro: "SearchTrace", micro: "SearchTrace") -> "SearchTrace":
        return SearchTrace(
            events=macro.events + micro.events,
            d_prime=macro.d_prime,
            w_prime=macro.w_prime,
            micro_evals=micro.micro_evals,
            d_f=macro.d_f,
            grow_strikes=macro.grow_strikes,
            prune_strikes=macro.prune_strikes,
            notes=macro.notes + micro.notes,
        )


@dataclass(frozen=True)
class SearchResult:
    macro_arch: Architecture
    final_arch: Architecture
    macro_acc: float
    final_acc: float
    trace: SearchTrace


def initial_architecture(config: SearchConfig) -> Architecture:
    """Macro starting point: minimum depth, maximum width, uniform layers."""
    layer = LayerSpec(op=config.init_op, kernel=config.init_kernel)
    return Architecture(
        depth=config.bounds.d_min,
        stem_width=config.bounds.w_max,
        layers=(layer,) * config.bounds.d_min,
        input_resolution=config.input_resolution,
        num_classes=config.num_classes,
    )


def _append_layer(arch: Architecture) -> Architecture:
    return replace(arch, depth=arch.depth + 1, layers=arch.layers + (arch.layers[-1],))


def _with_stem(arch: Architecture, stem_width: int) -> Architecture:
    return replace(arch, stem_width=stem_width)


def _best_event(events: list[TraceEvent]) -> TraceEvent:
    """Highest accuracy; ties go to fewer parameters, then earliest seen."""
    best = events[0]
    for event in events[1:]:
        if (event.val_acc, -event.params) > (best.val_acc, -best.params):
            best = event
    return best


def macro_search(config: SearchConfig, evaluator: Evaluator) -> tuple[Architecture, SearchTrace]:
    """Grow depth, then prune width; returns the best macro candidate.

    Grow: each step appends one layer and trains one epoch longer. Accuracy
    gains of at least l_plus move the incumbent best; drops beyond l_minus
    count a strike. Prune: from the best grown candidate, each step removes
    w_res stem channels and trains two epochs longer; anything below the best
    counts a strike. Both phases also stop at the depth/width bounds. The
    macro result is the best-accuracy candidate among the grown incumbent and
    all pruned ones (ties: fewer parameters).
    """
    bounds = config.bounds
    trace = SearchTrace()

    # Grow.
    epochs = bounds.e_min
    current = initial_architecture(config)
    result = evaluator.evaluate(EvalRequest(arch=current, epochs=epochs, seed=config.seed))
    trace.record(GROW, current, epochs, result.val_acc, result.params, accepted=True)
    best_acc = result.val_acc
    strikes = 0
    grow_events = [trace.events[-1]]
    while current.depth < bounds.d_max and strikes < config.max_strikes:
        current = _append_layer(current)
        epochs += 1
        result = evaluator.evaluate(EvalRequest(arch=current, epochs=epochs, seed=config.seed))
        acc = result.val_acc
        if acc >= best_acc + config.l_plus:
            best_acc = acc
            accepted = True
        else:
            accepted = False
            if acc < best_acc - config.l_minus:
                strikes += 1
        trace.record(GROW, current, epochs, acc, result.params, accepted)
        grow_events.append(trace.events[-1])
    trace.d_prime = len(grow_events)
    trace.grow_strikes = strikes

    grown = _best_event(grow_events)
    trace.d_f = grown.arch.depth

    # Prune.
    best_acc = grown.val_acc
    strikes = 0
    width = grown.arch.stem_width
    prune_events: list[TraceEvent] = []
    while width - bounds.w_res >= bounds.w_min and strikes < config.max_strikes:
        width -= bounds.w_res
        candidate = _with_stem(grown.arch, width)
        epochs += 2
        result = evaluator.evaluate(EvalRequest(arch=candidate, epochs=epochs, seed=config.seed))
        acc = result.val_acc
        accepted = acc >= best_acc
        if accepted:
            best_acc = acc
        else:
            strikes += 1
        trace.record(PRUNE, candidate, epochs, acc, result.params, accepted)
        prune_events.append(trace.events[-1])
    trace.w_prime = len(prune_events)
    trace.prune_strikes = strikes

    winner = _best_event([grown] + prune_events)
    return winner.arch, trace


def compensate_width(
    arch: Architecture,
    baseline_params: int,
    slack: float = 0.0,
    w_min: int = 1,
    in_channels: int = 3,
    num_stages: int = 3,
) -> Architecture:
    """Shrink stem width one channel at a time until the parameter count
    falls within baseline * (1 + slack), or w_min is reached."""
    budget = baseline_params * (1.0 + slack)
    current = arch
    while (count_params(current, in_channels=in_channels, num_stages=num_stages) > budget
           and current.stem_width > w_min):
        current = _with_stem(current, current.stem_width - 1)
    return current


def micro_search(
    macro_arch: Architecture,
    epochs: int,
    config: SearchConfig,
    evaluator: Evaluator,
) -> tuple[Architecture, SearchTrace]:
    """Per-layer operation and kernel refinement at a fixed small budget.

    The macro result retrains at `epochs` as the baseline, recording the
    parameter budget every candidate must respect. Pass 1 tries plain
    convolution at each layer in order, pass 2 the larger kernel; each
    candidate is width-compensated against the baseline and adopted only when
    it strictly improves accuracy. Changes are cumulative, and layers already
    carrying the target choice still cost one (cached) evaluation, so the
    phase performs exactly 2 * depth candidate evaluations.
    """
    bounds = config.bounds
    trace = SearchTrace(d_f=macro_arch.depth)

    baseline = evaluator.evaluate(EvalRequest(arch=macro_arch, epochs=epochs, seed=config.seed))
    baseline_params = config.count_params(macro_arch)
    trace.record(MICRO_BASELINE, macro_arch, epochs, baseline.val_acc,
                 baseline.params, accepted=True)

    best_acc = baseline.val_acc
    current = macro_arch
    target_kernel = max(bounds.kernels)
    passes = (
        (MICRO_OP, lambda spec: LayerSpec(op=CONV, kernel=spec.kernel)),
        (MICRO_KERNEL, lambda spec: LayerSpec(op=spec.op, kernel=target_kernel)),
    )
    for phase, transform in passes:
        for index in range(macro_arch.depth):
            layers = list(current.layers)
            layers[index] = transform(layers[index])
            candidate = replace(current, layers=tuple(layers))
            candidate = compensate_width(
                candidate, baseline_params, slack=config.param_slack,
                w_min=bounds.w_min, in_channels=config.in_channels,
                num_stages=bounds.num_stages,
            )
            if config.count_params(candidate) > baseline_params * (1.0 + config.param_slack):
                trace.notes.append(
                    f"{phase} layer {index + 1}: width floor {bounds.w_min} reached "
                    "before meeting the parameter budget"
                )
            result = evaluator.evaluate(
                EvalRequest(arch=candidate, epochs=epochs, seed=config.seed)
            )
            accepted = result.val_acc > best_acc
            if accepted:
                best_acc = result.val_acc
                current = candidate
            trace.record(phase, candidate, epochs, result.val_acc, result.params, accepted)
            trace.micro_evals += 1
    return current, trace


def run_search(config: SearchConfig, evaluator: Evaluator) -> SearchResult:
    """Full pipeline: macro grow/prune, then micro replace/update."""
    macro_arch, macro_trace = macro_search(config, evaluator)
    macro_acc = next(
        e.val_acc for e in reversed(macro_trace.events)
        if arch_hash(e.arch) == arch_hash(macro_arch)
    )
    micro_budget = config.micro_epochs if config.micro_epochs is not None else config.bounds.e_min
    final_arch, micro_trace = micro_search(macro_arch, micro_budget, config, evaluator)
    trace = SearchTrace.merged(macro_trace, micro_trace)
    final_acc = max(
        e.val_acc for e in micro_trace.events if e.accepted
    )
    return SearchResult(
        macro_arch=macro_arch,
        final_arch=final_arch,
        macro_acc=macro_acc,
        final_acc=final_acc,
        trace=trace,
    )


def relative_improvement(acc_method: float, acc_random_mean: float) -> float:
    """RI = 100 * (acc_method - acc_random_mean) / acc_random_mean."""
    if acc_random_mean <= 0:
        raise ValueError("random-baseline mean accuracy must be > 0")
    return 100.0 * (acc_method - acc_random_mean) / acc_random_mean


@dataclass(frozen=True)
class BaselineStats:
    """Sample mean/std of accuracy and parameter count over random candidates."""

    n: int
    acc_mean: float
    acc_std: float
    params_mean: float
    params_std: float


def random_baseline(
    config: SearchConfig,
    n: int,
    train_epochs: int,
    evaluator: Evaluator,
) -> tuple[BaselineStats, SearchTrace]:
    """Evaluate n uniformly sampled candidates at a fixed budget.

    Sampling seeds are config.seed + 0 .. n - 1. Standard deviations use the
    (n - 1) denominator; a single-sample baseline reports std 0 by convention.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    trace = SearchTrace()
    accs: list[float] = []
    params: list[float] = []
    for i in range(n):
        arch = sample_random(
            config.bounds, config.seed + i,
            input_resolution=config.input_resolution,
            num_classes=config.num_classes,
        )
        result = evaluator.evaluate(
            EvalRequest(arch=arch, epochs=train_epochs, seed=config.seed)
        )
        trace.record(RANDOM, arch, train_epochs, result.val_acc, result.params, accepted=False)
        accs.append(result.val_acc)
        params.append(float(result.params))
    stats = BaselineStats(
        n=n,
        acc_mean=statistics.fmean(accs),
        acc_std=statistics.stdev(accs) if n > 1 else 0.0,
        params_mean=statistics.fmean(params),
        params_std=statistics.stdev(params) if n > 1 else 0.0,
    )
    return stats, trace


@dataclass(frozen=True)
class RIResult:
    ri: float
    method_acc: float
    final_epochs: int
    baseline: BaselineStats
    search: SearchResult
    baseline_trace: SearchTrace


def ri_experiment(
    config: SearchConfig,
    evaluator: Evaluator,
    n_random: int = 10,
    final_epochs: int | None = None,
) -> RIResult:
    """Full search versus a random-sampling baseline at a matched budget.

    Both the discovered architecture and the random candidates are evaluated
    at final_epochs; by default that is the largest budget the macro search
    granted any candidate, so neither side sees more training than the search
    itself used.
    """
    result = run_search(config, evaluator)
    if final_epochs is None:
        final_epochs = result.trace.max_macro_epochs()
    method = evaluator.evaluate(
        EvalRequest(arch=result.final_arch, epochs=final_epochs, seed=config.seed)
    )
    stats, baseline_trace = random_baseline(config, n_random, final_epochs, evaluator)
    return RIResult(
        ri=relative_improvement(method.val_acc, stats.acc_mean),
        method_acc=method.val_acc,
        final_epochs=final_epochs,
        baseline=stats,
        search=result,
        baseline_trace=baseline_trace,
    )
