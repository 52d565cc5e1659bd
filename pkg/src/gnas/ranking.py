"""Candidate ranking schemes and their rank-correlation experiments.

Static ranking trains every cohort member under one identical budget.
Dynamic ranking sorts the cohort by parameter count and grants each next
(larger) candidate one extra epoch, so slower-learning large networks get the
training their capacity needs before being compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .arch import Architecture, arch_hash, count_params
from .errors import DegenerateInput
from .evaluation import EvalRequest, Evaluator

STATIC = "static"
DYNAMIC_ASCENDING = "dynamic_ascending"
FINAL = "final"
PARAMS = "params"


class CohortEntry(NamedTuple):
    arch_hash: int
    params: int
    epochs_trained: int
    val_acc: float


@dataclass(frozen=True)
class RankedCohort:
    """One evaluated cohort under one ranking scheme."""

    entries: tuple[CohortEntry, ...]
    scheme: str


@dataclass(frozen=True)
class CorrelationReport:
    """Spearman correlation between two ranking schemes over one cohort."""

    scheme_a: str
    scheme_b: str
    rho: float
    n: int
    pairs: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [-1, 1], got {self.rho}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")

    def to_json_obj(self) -> dict:
        return {
            "scheme_a": self.scheme_a,
            "scheme_b": self.scheme_b,
            "rho": self.rho,
            "n": self.n,
            "pairs": [[x, y] for x, y in self.pairs],
        }


def average_ranks(xs: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their rank range."""
    n = len(xs)
    order = sorted(range(n), key=lambda i: xs[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    denom = math.sqrt(vx) * math.sqrt(vy)
    if denom == 0.0:
        raise DegenerateInput("correlation undefined for a constant vector")
    return cov / denom


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    if len(xs) != len(ys):
        raise DegenerateInput(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInput(f"need at least 2 observations, got {len(xs)}")
    return _pearson(average_ranks(xs), average_ranks(ys))


@dataclass(frozen=True)
class RankingExperimentResult:
    """Primary report plus the params companion, with the evaluated cohorts.

    params_report is None when it is undefined (all cohort members share one
    parameter count, so params cannot be ranked against anything).
    """

    report: CorrelationReport
    params_report: CorrelationReport | None
    cohorts: tuple[RankedCohort, ...] = field(default=())


def _companion_report(scheme_a: str, scheme_b: str, xs, ys) -> CorrelationReport | None:
    try:
        rho = spearman(xs, ys)
    except DegenerateInput:
        return None
    return CorrelationReport(scheme_a=scheme_a, scheme_b=scheme_b, rho=rho,
                             n=len(xs), pairs=tuple(zip(xs, ys)))


def _evaluate_cohort(
    cohort: Sequence[Architecture],
    epochs_per_arch: Sequence[int],
    evaluator: Evaluator,
    seed: int,
    scheme: str,
) -> RankedCohort:
    entries = []
    for arch, epochs in zip(cohort, epochs_per_arch):
        result = evaluator.evaluate(EvalRequest(arch=arch, epochs=epochs, seed=seed))
        entries.append(CohortEntry(arch_hash(arch), result.params, epochs, result.val_acc))
    return RankedCohort(entries=tuple(entries), scheme=scheme)


def static_ranking_experiment(
    cohort: Sequence[Architecture],
    short_epochs: int,
    full_epochs: int,
    evaluator: Evaluator,
    seed: int = 0,
) -> RankingExperimentResult:
    """Correlate short-budget rankings with full-budget rankings.

    Every candidate trains at short_epochs and again at full_epochs; the
    primary report is rho(short accuracies, full accuracies) and the
    companion is rho(params, full accuracies).
    """
    if len(cohort) < 2:
        raise DegenerateInput("cohort must contain at least 2 architectures")
    if not short_epochs < full_epochs:
        raise ValueError("short_epochs must be < full_epochs")
    short = _evaluate_cohort(cohort, [short_epochs] * len(cohort), evaluator, seed, STATIC)
    full = _evaluate_cohort(cohort, [full_epochs] * len(cohort), evaluator, seed, FINAL)
    short_acc = [e.val_acc for e in short.entries]
    full_acc = [e.val_acc for e in full.entries]
    params = [float(e.params) for e in full.entries]
    report = CorrelationReport(
        scheme_a=f"{STATIC}@{short_epochs}",
        scheme_b=f"{FINAL}@{full_epochs}",
        rho=spearman(short_acc, full_acc),
        n=len(cohort),
        pairs=tuple(zip(short_acc, full_acc)),
    )
    params_report = _companion_report(PARAMS, f"{FINAL}@{full_epochs}", params, full_acc)
    return RankingExperimentResult(report, params_report, (short, full))


def dynamic_ranking_experiment(
    cohort: Sequence[Architecture],
    base_epochs: int,
    full_epochs: int,
    evaluator: Evaluator,
    seed: int = 0,
    in_channels: int = 3,
    num_stages: int = 3,
) -> RankingExperimentResult:
    """Correlate parameter-aware dynamic rankings with full-budget rankings.

    The cohort is sorted by parameter count ascending (ties broken by the
    structural hash) and the i-th candidate trains for base_epochs + i; the
    cohort of size n consumes exactly the budgets base, base+1, ...,
    base+n-1. Primary report: rho(dynamic accuracies, full accuracies);
    companion: rho(params, dynamic accuracies).
    """
    if len(cohort) < 2:
        raise DegenerateInput("cohort must contain at least 2 architectures")
    if base_epochs < 1:
        raise ValueError("base_epochs must be >= 1")
    ordered = sorted(
        cohort,
        key=lambda a: (count_params(a, in_channels=in_channels, num_stages=num_stages),
                       arch_hash(a)),
    )
    budgets = [base_epochs + i for i in range(len(ordered))]
    dynamic = _evaluate_cohort(ordered, budgets, evaluator, seed, DYNAMIC_ASCENDING)
    final = _evaluate_cohort(ordered, [full_epochs] * len(ordered), evaluator, seed, FINAL)
    dyn_acc = [e.val_acc for e in dynamic.entries]
    full_acc = [e.val_acc for e in final.entries]
    params = [float(e.params) for e in dynamic.entries]
    report = CorrelationReport(
        scheme_a=f"{DYNAMIC_ASCENDING}@{base_epochs}",
        scheme_b=f"{FINAL}@{full_epochs}",
        rho=spearman(dyn_acc, full_acc),
        n=len(ordered),
        pairs=tuple(zip(dyn_acc, full_acc)),
    )
    params_report = _companion_report(PARAMS, f"{DYNAMIC_ASCENDING}@{base_epochs}",
                                      params, dyn_acc)
    return RankingExperimentResult(report, params_report, (dynamic, final))
