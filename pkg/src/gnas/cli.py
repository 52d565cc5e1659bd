"""Operator-facing command line: configure, run, and report experiments.

A run is described by one JSON config document; --set KEY=VALUE flags
override individual fields by dotted path. The fully resolved config is
written next to the outputs so any run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys
from pathlib import Path

from . import arch as arch_mod
from .arch import SearchBounds, from_dict, sample_random, space_size, to_dict
from .errors import ConfigError, GnasError, ParseError
from .evaluation import (
    CachingEvaluator,
    EvalRequest,
    ExternalEvaluator,
    SurrogateConfig,
    SurrogateEvaluator,
)
from .ranking import dynamic_ranking_experiment, static_ranking_experiment
from .search import SearchConfig, random_baseline, ri_experiment, run_search

EXPERIMENTS = ("search", "rank_experiment", "random_baseline", "space_size", "eval_one")

# Desk-scale cohort bounds for ranking studies: parameter counts land in the
# band the default surrogate constants were tuned for (~1e4 .. 1e7).
DEFAULT_RANK_BOUNDS = {
    "d_min": 5, "d_max": 40, "w_min": 8, "w_max": 32, "w_res": 2,
    "e_min": 1, "ops": ["sep", "conv"], "kernels": [3, 5], "num_stages": 3,
}

DEFAULT_CONFIG = {
    "experiment": "search",
    "output_dir": "gnas-out",
    "search": {
        "bounds": {
            "d_min": 5, "d_max": 100, "w_min": 16, "w_max": 128, "w_res": 2,
            "e_min": 10, "ops": ["sep", "conv"], "kernels": [3, 5], "num_stages": 3,
        },
        "l_plus": 0.10,
        "l_minus": 0.05,
        "max_strikes": 3,
        "init_op": "sep",
        "init_kernel": 3,
        "seed": 0,
        "param_slack": 0.0,
        "input_resolution": 32,
        "num_classes": 10,
        "in_channels": 3,
        "micro_epochs": None,
    },
    "evaluator": {"surrogate": {"seed": 0}},
    "cache_path": None,
    "ri": None,  # e.g. {"n_random": 10, "final_epochs": null} to report RI after a search
    "rank": {
        "cohort_size": 50,
        "short_epochs": 1,
        "base_epochs": 1,
        "full_epochs": 50,
        "seed": 0,
        "bounds": dict(DEFAULT_RANK_BOUNDS),
    },
    "baseline": {"n": 10, "train_epochs": 50},
    "space": {"d_f": 25},
    "eval_one": {"arch": None, "epochs": None},
}


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

# Replaced wholesale rather than merged: holds exactly one evaluator variant.
_OPAQUE_KEYS = {"evaluator"}


def _merge(defaults, override, path=""):
    """Recursive dict merge; any key absent from the defaults is a typo."""
    if not isinstance(override, dict) or not isinstance(defaults, dict):
        return override
    merged = dict(defaults)
    for key, value in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key: {path + key!r}")
        base = defaults[key]
        if path + key in _OPAQUE_KEYS:
            merged[key] = value
        elif isinstance(base, dict) and isinstance(value, dict):
            merged[key] = _merge(base, value, path + key + ".")
        else:
            merged[key] = value
    return merged


def _parse_override(text: str) -> tuple[list[str], object]:
    if "=" not in text:
        raise ConfigError(f"override must look like KEY=VALUE, got {text!r}")
    key, _, raw = text.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"override has an empty key: {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings are fine unquoted
    return key.split("."), value


def _apply_override(config: dict, dotted: list[str], value, full_key: str) -> None:
    node = config
    for part in dotted[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key: {full_key!r}")
        if not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    leaf = dotted[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown config key: {full_key!r}")
    node[leaf] = value


def resolve_config(config_path: str | None, overrides: list[str],
                   seed: int | None, out_dir: str | None) -> dict:
    loaded = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    config = _merge(copy.deepcopy(DEFAULT_CONFIG), loaded)
    for text in overrides:
        dotted, value = _parse_override(text)
        _apply_override(config, dotted, value, text.split("=", 1)[0])
    if seed is not None:
        config["search"]["seed"] = seed
        config["rank"]["seed"] = seed
        if "surrogate" in config["evaluator"] and config["evaluator"]["surrogate"] is not None:
            config["evaluator"]["surrogate"]["seed"] = seed
    if out_dir is not None:
        config["output_dir"] = out_dir
    if config["experiment"] not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {config['experiment']!r}, expected one of {EXPERIMENTS}"
        )
    return config


def _build(cls, data: dict, path: str):
    """Instantiate a config dataclass, rejecting unknown fields."""
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown config key(s) under {path}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError, GnasError) as exc:
        raise ConfigError(f"invalid {path}: {exc}") from exc


def build_search_config(section: dict) -> SearchConfig:
    data = dict(section)
    data["bounds"] = _build(SearchBounds, {**data.get("bounds", {})}, "search.bounds")
    return _build(SearchConfig, data, "search")


def build_evaluator(section: dict, cache_path: str | None):
    if not isinstance(section, dict) or len(section) != 1:
        raise ConfigError('evaluator must be {"surrogate": {...}} or {"external": {...}}')
    kind, params = next(iter(section.items()))
    if kind == "surrogate":
        config = _build(SurrogateConfig, dict(params or {}), "evaluator.surrogate")
        inner = SurrogateEvaluator(config)
    elif kind == "external":
        params = dict(params or {})
        command = params.pop("command", None)
        timeout_s = params.pop("timeout_s", 3600.0)
        if params:
            raise ConfigError(f"unknown config key(s) under evaluator.external: {sorted(params)}")
        if not command or not isinstance(command, list):
            raise ConfigError("evaluator.external.command must be a non-empty list")
        inner = ExternalEvaluator([str(c) for c in command], timeout_s=float(timeout_s))
    else:
        raise ConfigError(f"unknown evaluator kind {kind!r}")
    return CachingEvaluator(inner, path=cache_path)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _empty_trace_file(path: Path) -> None:
    path.write_text("")


def _run_search(config: dict, evaluator, out: Path) -> dict:
    search_config = build_search_config(config["search"])
    ri_section = config.get("ri")
    if ri_section:
        ri_section = _merge({"n_random": 10, "final_epochs": None}, ri_section, "ri.")
        ri = ri_experiment(search_config, evaluator,
                           n_random=int(ri_section["n_random"]),
                           final_epochs=ri_section["final_epochs"])
        result = ri.search
        trace = result.trace
    else:
        ri = None
        result = run_search(search_config, evaluator)
        trace = result.trace
    trace.write_jsonl(out / "trace.jsonl")
    summary = {
        "experiment": "search",
        "d_prime": trace.d_prime,
        "w_prime": trace.w_prime,
        "micro_evals": trace.micro_evals,
        "d_f": trace.d_f,
        "grow_strikes": trace.grow_strikes,
        "prune_strikes": trace.prune_strikes,
        "n_events": len(trace.events),
        "requested_epochs": sum(e.epochs for e in trace.events),
        "macro_arch": to_dict(result.macro_arch),
        "final_arch": to_dict(result.final_arch),
        "macro_acc": result.macro_acc,
        "final_acc": result.final_acc,
        "final_params": search_config.count_params(result.final_arch),
        "notes": trace.notes,
    }
    if ri is not None:
        summary["ri"] = {
            "ri": ri.ri,
            "method_acc": ri.method_acc,
            "final_epochs": ri.final_epochs,
            "random_acc_mean": ri.baseline.acc_mean,
            "random_acc_std": ri.baseline.acc_std,
            "random_params_mean": ri.baseline.params_mean,
            "random_params_std": ri.baseline.params_std,
        }
    return summary


def _run_rank(config: dict, evaluator, out: Path) -> dict:
    section = config["rank"]
    bounds = _build(SearchBounds, dict(section["bounds"]), "rank.bounds")
    n = int(section["cohort_size"])
    if n < 2:
        raise ConfigError("rank.cohort_size must be >= 2")
    seed = int(section["seed"])
    search = config["search"]
    cohort = [
        sample_random(bounds, seed + i,
                      input_resolution=search["input_resolution"],
                      num_classes=search["num_classes"])
        for i in range(n)
    ]
    static = static_ranking_experiment(
        cohort, int(section["short_epochs"]), int(section["full_epochs"]), evaluator, seed=seed
    )
    dynamic = dynamic_ranking_experiment(
        cohort, int(section["base_epochs"]), int(section["full_epochs"]), evaluator, seed=seed
    )
    reports = {
        "static": static.report,
        "static_params": static.params_report,
        "dynamic": dynamic.report,
        "dynamic_params": dynamic.params_report,
    }
    reports = {name: report for name, report in reports.items() if report is not None}
    for name, report in reports.items():
        (out / f"report_{name}.json").write_text(json.dumps(report.to_json_obj(), indent=2))
    _empty_trace_file(out / "trace.jsonl")
    return {
        "experiment": "rank_experiment",
        "cohort_size": n,
        "rho": {name: report.rho for name, report in reports.items()},
        "schemes": {name: (report.scheme_a, report.scheme_b)
                    for name, report in reports.items()},
    }


def _run_baseline(config: dict, evaluator, out: Path) -> dict:
    section = config["baseline"]
    search_config = build_search_config(config["search"])
    stats, trace = random_baseline(
        search_config, int(section["n"]), int(section["train_epochs"]), evaluator
    )
    trace.write_jsonl(out / "trace.jsonl")
    return {
        "experiment": "random_baseline",
        "n": stats.n,
        "train_epochs": int(section["train_epochs"]),
        "acc_mean": stats.acc_mean,
        "acc_std": stats.acc_std,
        "params_mean": stats.params_mean,
        "params_std": stats.params_std,
        "n_events": stats.n,
    }


def _run_space(config: dict, out: Path) -> dict:
    bounds = _build(SearchBounds, dict(config["search"]["bounds"]), "search.bounds")
    d_f = int(config["space"]["d_f"])
    exact = space_size(bounds, d_f)
    approx = float(exact)
    print(f"N_arch = {exact} (≈ {approx:.2e}) for d_f={d_f}")
    _empty_trace_file(out / "trace.jsonl")
    return {
        "experiment": "space_size",
        "d_f": d_f,
        "exact": str(exact),
        "approx": approx,
        "depth_range": bounds.d_max - bounds.d_min + 1,
        "width_grid": (bounds.w_max - bounds.w_min) // bounds.w_res + 1,
        "choices_per_layer": len(bounds.ops) * len(bounds.kernels),
    }


def _run_eval_one(config: dict, evaluator, out: Path) -> dict:
    section = config["eval_one"]
    search_config = build_search_config(config["search"])
    if section["arch"] is not None:
        candidate = from_dict(section["arch"])
    else:
        candidate = sample_random(
            search_config.bounds, search_config.seed,
            input_resolution=search_config.input_resolution,
            num_classes=search_config.num_classes,
        )
    epochs = section["epochs"] if section["epochs"] is not None else search_config.bounds.e_min
    result = evaluator.evaluate(
        EvalRequest(arch=candidate, epochs=int(epochs), seed=search_config.seed)
    )
    _empty_trace_file(out / "trace.jsonl")
    return {
        "experiment": "eval_one",
        "arch": to_dict(candidate),
        "hash": arch_mod.arch_hash(candidate),
        "epochs": int(epochs),
        "val_acc": result.val_acc,
        "params": result.params,
        "wall_time": result.wall_time,
    }


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

def _fmt_millions(params: float) -> str:
    return f"{params / 1e6:.2f}M"


def render_report(summary: dict) -> str:
    """Fixed-width human-readable view of a summary document."""
    if not isinstance(summary, dict) or "experiment" not in summary:
        raise ParseError("summary is missing the experiment field")
    kind = summary["experiment"]
    lines = [f"{'experiment':<16}{kind}"]
    try:
        if kind == "search":
            if not summary.get("n_events"):
                raise ParseError("summary has an empty events list")
            d_p, w_p = summary["d_prime"], summary["w_prime"]
            micro, d_f = summary["micro_evals"], summary["d_f"]
            total = d_p + w_p + micro + 1
            final = summary["final_arch"]
            lines += [
                f"{'final depth':<16}{d_f}",
                f"{'final width':<16}{final['stem_width']}",
                f"{'evaluations':<16}{d_p} + {w_p} + {micro} + 1 = {total}",
                f"{'epochs total':<16}{summary['requested_epochs']}",
                f"{'macro acc':<16}{summary['macro_acc']:.2f}%",
                f"{'final acc':<16}{summary['final_acc']:.2f}%",
                f"{'params':<16}{_fmt_millions(summary['final_params'])}",
            ]
            if summary.get("ri"):
                ri = summary["ri"]
                lines += [
                    f"{'RI':<16}{ri['ri']:.2f}% at {ri['final_epochs']} epochs "
                    f"(method {ri['method_acc']:.2f}% vs random "
                    f"{ri['random_acc_mean']:.2f}±{ri['random_acc_std']:.2f}%)",
                ]
        elif kind == "rank_experiment":
            for name, rho in summary["rho"].items():
                a, b = summary["schemes"][name]
                lines.append(f"{'rho ' + name:<24}{rho:+.4f}  ({a} vs {b})")
            lines.append(f"{'cohort size':<24}{summary['cohort_size']}")
        elif kind == "random_baseline":
            lines += [
                f"{'samples':<16}{summary['n']}",
                f"{'train epochs':<16}{summary['train_epochs']}",
                f"{'accuracy':<16}{summary['acc_mean']:.2f}±{summary['acc_std']:.2f}%",
                f"{'params':<16}{_fmt_millions(summary['params_mean'])}"
                f"±{_fmt_millions(summary['params_std'])}",
            ]
        elif kind == "space_size":
            lines += [
                f"{'d_f':<16}{summary['d_f']}",
                f"{'exact':<16}{summary['exact']}",
                f"{'approx':<16}{summary['approx']:.2e}",
            ]
        elif kind == "eval_one":
            lines += [
                f"{'hash':<16}{summary['hash']}",
                f"{'epochs':<16}{summary['epochs']}",
                f"{'val acc':<16}{summary['val_acc']:.2f}%",
                f"{'params':<16}{_fmt_millions(summary['params'])}",
            ]
        else:
            raise ParseError(f"unknown experiment kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"summary is missing required fields: {exc}") from exc
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        config = resolve_config(args.config, args.set or [], args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(config["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.resolved.json").write_text(json.dumps(config, indent=2) + "\n")
        experiment = config["experiment"]
        if experiment == "space_size":
            summary = _run_space(config, out)
        else:
            evaluator = build_evaluator(config["evaluator"], config["cache_path"])
            try:
                if experiment == "search":
                    summary = _run_search(config, evaluator, out)
                elif experiment == "rank_experiment":
                    summary = _run_rank(config, evaluator, out)
                elif experiment == "random_baseline":
                    summary = _run_baseline(config, evaluator, out)
                else:
                    summary = _run_eval_one(config, evaluator, out)
            finally:
                inner = getattr(evaluator, "inner", None)
                if isinstance(inner, ExternalEvaluator):
                    inner.shutdown()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GnasError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    report = render_report(summary)
    (out / "report.txt").write_text(report)
    print(report, end="")
    return 0


def cmd_report(args) -> int:
    path = Path(args.summary)
    try:
        if not path.exists():
            raise ParseError(f"summary file not found: {path}")
        try:
            summary = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"summary is not valid JSON: {exc}") from exc
        print(render_report(summary), end="")
    except ParseError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the experiment described by a config file")
    run_p.add_argument("--config", help="path to the JSON run config")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field by dotted path (repeatable)")
    run_p.add_argument("--seed", type=int, help="set search, rank, and surrogate seeds at once")
    run_p.add_argument("--out", help="output directory (overrides output_dir)")
    run_p.set_defaults(func=cmd_run)

    rep_p = sub.add_parser("report", help="render a summary.json as a text table")
    rep_p.add_argument("summary", help="path to a summary.json")
    rep_p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
