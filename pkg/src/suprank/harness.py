"""Experiment configuration, dataset assembly and the trial loop."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml
from joblib import Parallel, delayed

from . import __version__
from .aggregate import AggregationSpec, compute_ranker_weights
from .centrality import ScoreVector, compute_metric, ranking_from_scores, read_edge_list
from .metrics import (
    MetricReport,
    SplitSpec,
    auc,
    average_precision_at_k,
    logistic_regression_baseline,
    roc_curve,
    stratified_split,
)
from .ranking import GroundTruth, Ranking, read_ground_truth

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
LOGISTIC = "logistic_regression"


def generate_synthetic(truth_order: Ranking, r: int, swap_prob: float, seed: int) -> list[Ranking]:
    """``r`` noisy copies of ``truth_order``.

    Each copy is one left-to-right pass over adjacent positions, swapping
    the pair at each position with probability ``swap_prob``.
    """
    if not 0 <= swap_prob < 0.5:
        raise ValueError(f"swap_prob must lie in [0, 0.5), got {swap_prob}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(r):
        order = list(truth_order.order)
        flips = rng.random(max(len(order) - 1, 0)) < swap_prob
        for i in np.flatnonzero(flips):
            order[i], order[i + 1] = order[i + 1], order[i]
        out.append(Ranking(tuple(order)))
    return out


def derive_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence([master, *path]).generate_state(1)[0])


@dataclass
class Dataset:
    """Labelled candidates plus one score vector per named ranker."""

    truth: GroundTruth
    scores: dict  # ranker name -> ScoreVector
    notes: dict = field(default_factory=dict)


@dataclass
class MethodConfig:
    name: str
    spec: Optional[AggregationSpec] = None  # None for the logistic baseline
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    data: dict
    methods: list
    split: SplitSpec
    seed: int = 0
    name: str = "experiment"
    ap_k: int = 100
    ap_denominator: str = "min"
    json_path: Optional[Path] = None
    csv_path: Optional[Path] = None
    include_timing: bool = True
    n_jobs: int = 1
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | str = ".") -> "ExperimentConfig":
        base_dir = Path(base_dir)
        raw = dict(raw)
        known = {"name", "seed", "data", "split", "methods", "evaluation", "output", "n_jobs"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        seed = int(raw.get("seed", 0))
        data = dict(raw.get("data") or {})
        kind = data.get("kind", "graph")
        if kind == "graph":
            graphs = data.get("graphs") or []
            if not graphs:
                raise ValueError("data.graphs must list at least one graph")
            for g in graphs:
                g["path"] = str(_resolve(base_dir, g["path"]))
                g.setdefault("mode", "collapse")
                g.setdefault("name", Path(g["path"]).stem)
            truth = dict(data.get("truth") or {})
            if "path" not in truth or "threshold" not in truth:
                raise ValueError("data.truth needs 'path' and 'threshold'")
            truth["path"] = str(_resolve(base_dir, truth["path"]))
            if not np.isfinite(float(truth["threshold"])):
                raise ValueError("data.truth.threshold must be finite")
            data["truth"] = truth
            data.setdefault("metrics", ["indegree", "outdegree", "pagerank", "hub", "authority"])
        elif kind != "synthetic":
            raise ValueError(f"data.kind must be 'graph' or 'synthetic', got {kind!r}")
        data["kind"] = kind

        split_raw = dict(raw.get("split") or {"train_fraction": 0.2})
        split_raw.setdefault("seed", seed)
        split = SplitSpec(**split_raw)

        methods = []
        names = set()
        for m in raw.get("methods") or []:
            m = dict(m)
            method = m.get("method")
            name = m.pop("name", None) or method
            if name in names:
                raise ValueError(f"duplicate method name {name!r}")
            names.add(name)
            if method == LOGISTIC:
                m.pop("method")
                methods.append(MethodConfig(name, None, m))
            else:
                methods.append(MethodConfig(name, AggregationSpec(name=name, **m)))
        if not methods:
            raise ValueError("config lists no methods")

        ev = dict(raw.get("evaluation") or {})
        out = dict(raw.get("output") or {})
        return cls(
            data=data,
            methods=methods,
            split=split,
            seed=seed,
            name=str(raw.get("name", "experiment")),
            ap_k=int(ev.get("ap_k", 100)),
            ap_denominator=ev.get("ap_denominator", "min"),
            json_path=_resolve(base_dir, out["json"], must_exist=False) if out.get("json") else None,
            csv_path=_resolve(base_dir, out["csv"], must_exist=False) if out.get("csv") else None,
            include_timing=bool(out.get("include_timing", True)),
            n_jobs=int(raw.get("n_jobs", 1)),
            raw=raw,
        )


def _resolve(base: Path, p, must_exist: bool = True) -> Path:
    path = Path(p)
    if not path.is_absolute():
        path = base / path
    if must_exist and not path.exists():
        raise FileNotFoundError(f"config references a missing file: {path}")
    return path


def load_config(path) -> ExperimentConfig:
    """Read a YAML (or JSON) experiment config; relative paths resolve against its directory."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return ExperimentConfig.from_dict(raw, path.parent)


def synthetic_dataset(
    m: int = 500,
    faithful: int = 7,
    adversarial: int = 6,
    noise: int = 0,
    swap_prob: float = 0.1,
    positive_fraction: float = 0.1,
    seed: int = 0,
) -> Dataset:
    """Planted-order study: noisy copies of the truth, of its reverse, and random orders.

    The top ``positive_fraction`` of the planted order is labelled positive.
    Ranker scores are ``m - position``.
    """
    width = len(str(m - 1))
    truth_order = Ranking(tuple(f"c{i:0{width}d}" for i in range(m)))
    rankings = {}
    for i, r in enumerate(generate_synthetic(truth_order, faithful, swap_prob, derive_seed(seed, 1))):
        rankings[f"faithful_{i}"] = r
    for i, r in enumerate(generate_synthetic(truth_order.reversed(), adversarial, swap_prob, derive_seed(seed, 2))):
        rankings[f"adversarial_{i}"] = r
    rng = np.random.default_rng(derive_seed(seed, 3))
    for i in range(noise):
        rankings[f"noise_{i}"] = Ranking(tuple(rng.permutation(truth_order.order)))
    n_pos = max(1, int(round(positive_fraction * m)))
    values = {c: float(m - i) for i, c in enumerate(truth_order.order)}
    truth = GroundTruth.from_values(values, float(m - n_pos + 1))
    scores = {
        name: ScoreVector({c: float(m - p) for p, c in enumerate(r.order, 1)}, name) for name, r in rankings.items()
    }
    return Dataset(truth, scores, {"m": m, "positives": n_pos})


def graph_dataset(graphs: list, metrics: list, truth_path, threshold: float) -> Dataset:
    """Centrality rankers over one or more edge-list graphs, labelled by a value file.

    Candidates with a value but no graph node score 0 on every metric.
    """
    with open(truth_path, encoding="utf-8") as fh:
        values = read_ground_truth(fh, str(truth_path))
    truth = GroundTruth.from_values(values, float(threshold))
    scores = {}
    notes: dict = {"graphs": {}}
    for g in graphs:
        graph = read_edge_list(g["path"], g.get("mode", "collapse"))
        in_graph = sum(1 for c in values if c in graph)
        notes["graphs"][g["name"]] = {
            "nodes": graph.n_nodes,
            "edges": graph.n_edges,
            "dropped_self_loops": graph.dropped_self_loops,
            "labelled_missing_from_graph": len(values) - in_graph,
        }
        for metric in metrics:
            name = metric if len(graphs) == 1 else f"{g['name']}.{metric}"
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                sv = compute_metric(graph, metric)
            scores[name] = ScoreVector({c: sv.scores.get(c, 0.0) for c in truth.ids}, name)
    notes["candidates"] = len(truth)
    notes["positives"] = len(truth.positives)
    return Dataset(truth, scores, notes)


def build_dataset(config: ExperimentConfig) -> Dataset:
    data = config.data
    if data["kind"] == "synthetic":
        params = {k: v for k, v in data.items() if k != "kind"}
        params.setdefault("seed", config.seed)
        return synthetic_dataset(**params)
    return graph_dataset(data["graphs"], data["metrics"], data["truth"]["path"], data["truth"]["threshold"])


def _run_trial(config: ExperimentConfig, dataset: Dataset, rankings: dict, trial: int, split) -> dict:
    # warnings are gathered here so worker processes report them too
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = _trial_body(config, dataset, rankings, trial, split)
    result["warnings"] = [f"{w.category.__name__}: {w.message}" for w in caught]
    return result


def _trial_body(config: ExperimentConfig, dataset: Dataset, rankings: dict, trial: int, split) -> dict:
    train, test = split
    truth = dataset.truth
    test_truth = truth.restrict(test)
    k = min(config.ap_k, len(test))
    names = list(rankings)
    result: dict = {"trial": trial, "rankers": {}, "methods": {}, "weights": {}, "errors": [], "roc": {}}

    def evaluate(r: Ranking) -> tuple[float, float]:
        return auc(r, test_truth), average_precision_at_k(r, test_truth, k, config.ap_denominator)

    test_rankings = [rankings[n].restrict(test) for n in names]
    for n, r in zip(names, test_rankings):
        result["rankers"][n] = evaluate(r)

    # weights see training labels only
    train_truth = truth.restrict(train)
    train_rankings = [rankings[n].restrict(train) for n in names]
    weight_cache: dict = {}
    for mc in config.methods:
        stage = f"aggregate:{mc.name}"
        try:
            if mc.spec is None:
                stage = f"logistic:{mc.name}"
                ranking = logistic_regression_baseline(
                    [dataset.scores[n] for n in names],
                    truth,
                    train,
                    test,
                    seed=derive_seed(config.seed, 4, trial),
                    **mc.params,
                )
            else:
                spec = dataclasses.replace(mc.spec, seed=derive_seed(config.seed, 5, trial))
                weights = None
                if spec.supervised and spec.weights is None:
                    stage = f"weights:{mc.name}"
                    key = (spec.weight_metric, spec.weight_scheme)
                    if key not in weight_cache:
                        weight_cache[key] = compute_ranker_weights(
                            train_rankings, train_truth, spec.weight_metric, spec.weight_scheme, config.ap_k
                        )
                    weights = weight_cache[key]
                    result["weights"][mc.name] = dict(zip(names, weights))
                stage = f"aggregate:{mc.name}"
                ranking = spec.run(test_rankings, weights)
            stage = f"evaluate:{mc.name}"
            result["methods"][mc.name] = evaluate(ranking)
            if trial == 0:
                result["roc"][mc.name] = roc_curve(ranking, test_truth)
        except Exception as exc:  # recorded per trial; the run continues
            result["errors"].append({"trial": trial, "stage": stage, "error": f"{type(exc).__name__}: {exc}"})
    return result


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every configured method over all trials and return the report dict."""
    t0 = time.perf_counter()
    dataset = build_dataset(config)
    t_data = time.perf_counter()
    names = list(dataset.scores)
    rankings = {
        n: ranking_from_scores(dataset.scores[n], derive_seed(config.seed, 6, i), dataset.truth.ids)
        for i, n in enumerate(names)
    }
    splits = stratified_split(dataset.truth, config.split)
    trials = Parallel(n_jobs=config.n_jobs)(
        delayed(_run_trial)(config, dataset, rankings, t, s) for t, s in enumerate(splits)
    )
    t_end = time.perf_counter()

    k = config.ap_k
    ranker_reports = {n: MetricReport(k) for n in names}
    method_reports = {mc.name: MetricReport(k) for mc in config.methods}
    errors, weights, roc, caught = [], [], {}, set()
    for tr in sorted(trials, key=lambda t: t["trial"]):
        for n, (a, p) in tr["rankers"].items():
            ranker_reports[n].add(a, p)
        for n, (a, p) in tr["methods"].items():
            method_reports[n].add(a, p)
        errors.extend(tr["errors"])
        caught.update(tr["warnings"])
        weights.append({"trial": tr["trial"], **tr["weights"]})
        roc.update({n: {"fpr": f, "tpr": t} for n, (f, t) in tr["roc"].items()})

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "software_version": __version__,
        "name": config.name,
        "config": config.raw,
        "dataset": dataset.notes,
        "rankers": {n: r.to_dict() for n, r in ranker_reports.items()},
        "methods": {n: r.to_dict() for n, r in method_reports.items()},
        "weights": weights,
        "roc_trial0": roc,
        "errors": errors,
        "warnings": sorted(caught),
    }
    if config.include_timing:
        report["timing"] = {
            "dataset_seconds": t_data - t0,
            "trials_seconds": t_end - t_data,
            "total_seconds": t_end - t0,
        }
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"


def report_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "name", "auc_mean", "auc_std", "ap_mean", "ap_std", "k", "trials"])
    for kind in ("rankers", "methods"):
        for name, r in report[kind].items():
            writer.writerow(
                [
                    kind[:-1],
                    name,
                    r["auc"]["mean"],
                    r["auc"]["std"],
                    r["ap_at_k"]["mean"],
                    r["ap_at_k"]["std"],
                    r["k"],
                    len(r["auc_trials"]),
                ]
            )
    return buf.getvalue()


def write_report(report: dict, config: ExperimentConfig) -> None:
    if config.json_path:
        config.json_path.parent.mkdir(parents=True, exist_ok=True)
        config.json_path.write_text(report_json(report), encoding="utf-8")
    if config.csv_path:
        config.csv_path.parent.mkdir(parents=True, exist_ok=True)
        config.csv_path.write_text(report_csv(report), encoding="utf-8")


def format_summary(report: dict) -> str:
    lines = [f"{'name':<28}{'AUC %':>9}{'AP@k':>9}"]
    for kind in ("rankers", "methods"):
        for name, r in report[kind].items():
            a, p = r["auc"]["mean"], r["ap_at_k"]["mean"]
            a_s = f"{100 * a:9.2f}" if a is not None else f"{'n/a':>9}"
            p_s = f"{p:9.4f}" if p is not None else f"{'n/a':>9}"
            lines.append(f"{name:<28}{a_s}{p_s}")
        lines.append("")
    for e in report["errors"]:
        lines.append(f"error in trial {e['trial']} at {e['stage']}: {e['error']}")
    return "\n".join(lines).rstrip() + "\n"


def dump_config_template() -> dict[str, Any]:
    """A synthetic-study config, handy as a starting point."""
    return {
        "name": "synthetic",
        "seed": 0,
        "data": {"kind": "synthetic", "m": 500, "faithful": 7, "adversarial": 6, "swap_prob": 0.1,
                 "positive_fraction": 0.1},
        "split": {"train_fraction": 0.2, "trials": 10},
        "methods": [
            {"method": "borda"},
            {"method": "supervised_borda"},
            {"method": "local_kemenization"},
            {"method": "kemeny_quicksort"},
            {"method": "skr"},
            {"method": LOGISTIC},
        ],
        "evaluation": {"ap_k": 100},
    }
