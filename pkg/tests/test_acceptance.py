"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import random

import pytest

from gnas import (
    SearchBounds,
    SearchConfig,
    SurrogateConfig,
    SurrogateEvaluator,
    dynamic_ranking_experiment,
    macro_search,
    micro_search,
    ri_experiment,
    run_search,
    sample_random,
    space_size,
    spearman,
    static_ranking_experiment,
)
from gnas.search import GROW, MICRO_BASELINE, MICRO_KERNEL, MICRO_OP, PRUNE

from conftest import oracle_spearman, random_vector_pair

PAPER_BOUNDS = SearchBounds(d_min=5, d_max=100, w_min=16, w_max=128, w_res=2, e_min=10)
RANK_BOUNDS = SearchBounds(d_min=5, d_max=40, w_min=8, w_max=32, w_res=2, e_min=1)


def check(name: str, passed: bool, detail: str = "") -> None:
    verdict = "PASS" if passed else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {verdict}{suffix}")
    assert passed, f"{name}: {detail}"


class TestAcceptance:
    def test_c1_space_size_exact(self):
        """Eq-1 space size: exact big integer, leading digits 6.16e18."""
        exact = space_size(PAPER_BOUNDS, d_f=25)
        expected = 6160924290242838528  # 4**25 * 96 * 57, frozen big-int arithmetic
        rounded = f"{float(exact):.2e}"
        check("C1 space-size", exact == expected and rounded == "6.16e+18",
              f"exact={exact}, rounded={rounded}")

    def test_c2_spearman_oracle_equivalence(self):
        """1,000 random vectors (ties included) match the brute-force oracle to 1e-12."""
        rng = random.Random(20240817)
        worst = 0.0
        for _ in range(1000):
            xs, ys = random_vector_pair(rng, max_len=50)
            worst = max(worst, abs(spearman(xs, ys) - oracle_spearman(xs, ys)))
        check("C2 spearman-oracle", worst <= 1e-12, f"max deviation {worst:.2e}")

    def test_c3_dynamic_ranking_beats_static(self):
        """rho(dynamic, final@50) > rho(static@1, final@50) in >= 16 of 20 seeds."""
        wins = 0
        for seed in range(20):
            cohort = [sample_random(RANK_BOUNDS, seed * 1000 + i) for i in range(50)]
            evaluator = SurrogateEvaluator(SurrogateConfig(seed=seed))
            static = static_ranking_experiment(cohort, 1, 50, evaluator, seed=seed)
            dynamic = dynamic_ranking_experiment(cohort, 1, 50, evaluator, seed=seed)
            if dynamic.report.rho > static.report.rho:
                wins += 1
        check("C3 ranking-mechanism", wins >= 16, f"dynamic wins {wins}/20")

    def test_c4_budget_identity(self):
        """10 seeded searches: micro == 2*d_f and total == D' + W' + 2*d_f + 1."""
        ok = True
        details = []
        for seed in range(10):
            config = SearchConfig(bounds=PAPER_BOUNDS, seed=seed)
            result = run_search(config, SurrogateEvaluator(SurrogateConfig(seed=seed)))
            trace = result.trace
            identity = (trace.micro_evals == 2 * trace.d_f
                        and trace.total_evaluations
                        == trace.d_prime + trace.w_prime + 2 * trace.d_f + 1)
            ok = ok and identity
            details.append(f"s{seed}:{trace.total_evaluations}")
        check("C4 budget-identity", ok, " ".join(details))

    def test_c5_termination_bounds(self):
        """100 seeded searches never leave the bounds or exceed 3 strikes."""
        ok = True
        for seed in range(100):
            config = SearchConfig(bounds=PAPER_BOUNDS, seed=seed)
            evaluator = SurrogateEvaluator(SurrogateConfig(seed=seed))
            macro_arch, trace = macro_search(config, evaluator)
            within = all(
                event.arch.depth <= PAPER_BOUNDS.d_max
                and event.arch.stem_width >= PAPER_BOUNDS.w_min
                for event in trace.events
            )
            strikes = trace.grow_strikes <= 3 and trace.prune_strikes <= 3
            ok = ok and within and strikes
        check("C5 termination-bounds", ok)

    def test_c6_micro_compensation(self):
        """Accepted micro candidates stay within the parameter budget; a
        params-only surrogate leaves the macro architecture unchanged."""
        within_budget = True
        for seed in range(10):
            config = SearchConfig(bounds=PAPER_BOUNDS, seed=seed, param_slack=0.0)
            evaluator = SurrogateEvaluator(SurrogateConfig(seed=seed))
            result = run_search(config, evaluator)
            baseline_params = config.count_params(result.macro_arch)
            for event in result.trace.events:
                if event.phase in (MICRO_OP, MICRO_KERNEL) and event.accepted:
                    if config.count_params(event.arch) > baseline_params:
                        within_budget = False

        bounds = SearchBounds(d_min=5, d_max=20, w_min=8, w_max=32, w_res=2, e_min=5)
        config = SearchConfig(bounds=bounds, seed=0)
        params_only = SurrogateEvaluator(SurrogateConfig(a_d=0.0, sigma=0.0))
        macro_arch, _ = macro_search(config, params_only)
        final_arch, _ = micro_search(macro_arch, bounds.e_min, config, params_only)
        unchanged = final_arch == macro_arch
        check("C6 micro-compensation", within_budget and unchanged,
              f"budget ok={within_budget}, params-only unchanged={unchanged}")

    def test_c7_relative_improvement(self):
        """Full search beats the 10-sample random baseline (RI > 0) in 5/5 seeds
        at the matched final budget."""
        ris = []
        for seed in range(5):
            config = SearchConfig(bounds=PAPER_BOUNDS, seed=seed)
            evaluator = SurrogateEvaluator(SurrogateConfig(seed=seed))
            ris.append(ri_experiment(config, evaluator, n_random=10).ri)
        check("C7 relative-improvement", all(ri > 0 for ri in ris),
              "RI = " + ", ".join(f"{ri:.1f}%" for ri in ris))

    def test_c8_trace_determinism(self, tmp_path):
        """Identical config and seed produce byte-identical trace JSONL."""
        paths = []
        for name in ("a", "b"):
            config = SearchConfig(bounds=PAPER_BOUNDS, seed=3)
            result = run_search(config, SurrogateEvaluator(SurrogateConfig(seed=3)))
            path = tmp_path / f"trace_{name}.jsonl"
            result.trace.write_jsonl(path)
            paths.append(path)
        identical = paths[0].read_bytes() == paths[1].read_bytes()
        check("C8 determinism", identical and paths[0].stat().st_size > 0)
