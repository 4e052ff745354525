"""Command-line entry point: ``suprank <subcommand>``."""

from __future__ import annotations

import dataclasses
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .aggregate import METHODS, AggregationSpec
from .centrality import METRICS, compute_metric, ranking_from_scores, read_edge_list
from .harness import format_summary, generate_synthetic, load_config, report_json, run_experiment, write_report
from .metrics import auc, average_precision_at_k
from .ranking import GroundTruth, Ranking, read_ground_truth, read_rankings, write_rankings


def _fail(msg: str) -> None:
    raise click.ClickException(msg)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")


@click.group()
@click.version_option(__version__, prog_name="suprank")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Centrality rankers and supervised rank aggregation."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@cli.command()
@click.argument("edges", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--metric", "metrics", multiple=True, type=click.Choice(METRICS), default=("pagerank",),
              show_default=True, help="Repeat for several metrics.")
@click.option("--mode", type=click.Choice(["collapse", "sum"]), default="collapse", show_default=True,
              help="Collapse parallel edges, or sum their weights.")
@click.option("--ranking", "as_ranking", is_flag=True, help="Print one ranking line per metric instead of scores.")
@click.option("--seed", type=int, default=0, show_default=True, help="Tie-breaking seed for --ranking.")
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path))
def centrality(edges, metrics, mode, as_ranking, seed, out):
    """Score graph nodes from an EDGES file (src<TAB>dst[<TAB>weight])."""
    try:
        graph = read_edge_list(edges, mode)
        vectors = [compute_metric(graph, m) for m in metrics]
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    if as_ranking:
        text = write_rankings(ranking_from_scores(v, seed) for v in vectors)
    else:
        lines = ["node\t" + "\t".join(metrics)]
        for node in graph.nodes:
            lines.append(f"{node}\t" + "\t".join(repr(v.scores[node]) for v in vectors))
        text = "\n".join(lines) + "\n"
    _emit(text, out)


@cli.command()
@click.argument("rankings_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--method", type=click.Choice(METHODS), default="skr", show_default=True)
@click.option("--weights", help="Comma-separated ranker weights (uniform if omitted).")
@click.option("--top-k", default="0.15", show_default=True,
              help="Prefix length, or a fraction of the candidate count if it contains a '.'.")
@click.option("--initial", type=click.Choice(["supervised_borda", "borda"]), default="supervised_borda",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path))
def aggregate(rankings_file, method, weights, top_k, initial, seed, out):
    """Aggregate the rankings in RANKINGS_FILE (one ranking per line, best first)."""
    try:
        with open(rankings_file, encoding="utf-8") as fh:
            rankings = read_rankings(fh, str(rankings_file))
        w = None
        if weights:
            try:
                w = [float(x) for x in weights.split(",")]
            except ValueError:
                _fail(f"--weights must be comma-separated numbers, got {weights!r}")
        k = float(top_k) if "." in top_k else int(top_k)
        spec = AggregationSpec(method=method, top_k=k, initial=initial, seed=seed, weights=w)
        result = spec.run(rankings)
    except ValueError as exc:
        _fail(str(exc))
    _emit(result.to_line() + "\n", out)


@cli.command()
@click.argument("ranking_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("truth_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--threshold", type=float, default=1.0, show_default=True,
              help="Values at or above the threshold are positive.")
@click.option("-k", "--k", "k", type=int, default=100, show_default=True, help="AP@k cutoff (capped at m).")
@click.option("--ap-denominator", type=click.Choice(["min", "k"]), default="min", show_default=True)
def evaluate(ranking_file, truth_file, threshold, k, ap_denominator):
    """Print AUC and AP@k of the first ranking in RANKING_FILE against TRUTH_FILE."""
    try:
        with open(ranking_file, encoding="utf-8") as fh:
            rankings = read_rankings(fh, str(ranking_file))
        if not rankings:
            _fail(f"{ranking_file}: no ranking found")
        with open(truth_file, encoding="utf-8") as fh:
            truth = GroundTruth.from_values(read_ground_truth(fh, str(truth_file)), threshold)
        ranking: Ranking = rankings[0]
        kk = min(k, len(ranking))
        click.echo(f"auc={auc(ranking, truth):.6g}")
        click.echo(f"ap@{kk}={average_precision_at_k(ranking, truth, kk, ap_denominator):.6g}")
    except ValueError as exc:
        _fail(str(exc))


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", type=int, help="Override the config's master seed.")
@click.option("--json", "json_out", type=click.Path(dir_okay=False, path_type=Path), help="Write the JSON report here.")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False, path_type=Path), help="Write the CSV summary here.")
@click.option("--no-timing", is_flag=True, help="Leave wall-clock times out of the report.")
def experiment(config_file, seed, json_out, csv_out, no_timing):
    """Run the experiment described by CONFIG_FILE (YAML or JSON)."""
    try:
        config = load_config(config_file)
    except (ValueError, TypeError, FileNotFoundError) as exc:
        _fail(f"{config_file}: {exc}")
    if seed is not None:
        config.seed = seed
        config.raw["seed"] = seed
        config.split = dataclasses.replace(config.split, seed=seed)
    if json_out:
        config.json_path = json_out
    if csv_out:
        config.csv_path = csv_out
    if no_timing:
        config.include_timing = False
    try:
        report = run_experiment(config)
    except (ValueError, RuntimeError, OSError) as exc:
        _fail(str(exc))
    write_report(report, config)
    if config.json_path is None:
        click.echo(report_json(report), nl=False)
    else:
        click.echo(format_summary(report), nl=False)
    if report["errors"]:
        click.echo(f"{len(report['errors'])} trial stage(s) failed; see the report", err=True)


@cli.command()
@click.option("--m", "m", type=int, default=20, show_default=True, help="Number of candidates.")
@click.option("--r", "r", type=int, default=5, show_default=True, help="Number of rankers.")
@click.option("--swap-prob", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path))
def synth(m, r, swap_prob, seed, out):
    """Print R noisy copies of the order c0 > c1 > ... > c(M-1)."""
    width = len(str(max(m - 1, 0)))
    truth = Ranking(tuple(f"c{i:0{width}d}" for i in range(m)))
    try:
        rankings = generate_synthetic(truth, r, swap_prob, seed)
    except ValueError as exc:
        _fail(str(exc))
    _emit(write_rankings(rankings), out)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="suprank", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
