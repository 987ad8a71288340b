"""Command-line front end.

Exit codes: 0 success, 1 failed validation or verdict, 2 usage error.  Lines
meant for scripts are printed as ``#json {...}``.  For ``experiment``, the
``--workers``/``--output_dir`` flags (``TRIADGRAPH_WORKERS`` stands in for
``--workers``) override the config file.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import engine, metrics, theory
from .engine import Mode, ModelParams

# experiments (pydantic) and validation (scipy) are imported inside their
# commands so that generate/theory/analyze start quickly


def _emit(obj: dict) -> None:
    click.echo("#json " + json.dumps(obj, sort_keys=True))


def _decimal(lo: Fraction, lo_inclusive: bool, hi: Fraction | None = None):
    def convert(ctx, param, value):
        if value is None:
            return None
        try:
            x = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise click.BadParameter(f"{value!r} is not a decimal number") from None
        if x < lo or (x == lo and not lo_inclusive) or (hi is not None and x > hi):
            bracket = "[" if lo_inclusive else "("
            upper = f"{hi}]" if hi is not None else "inf)"
            raise click.BadParameter(f"{value} is outside {bracket}{lo}, {upper}")
        return x
    return convert


alpha_option = click.option("--alpha", required=True, callback=_decimal(Fraction(0), True, Fraction(1)),
                            help="Triangle-step probability in [0, 1].")
delta_option = click.option("--delta", required=True, callback=_decimal(Fraction(-1), False),
                            help="Attractiveness, > -1.")


def _usage_error(message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(2)


@click.group()
def main():
    """Preferential attachment with triangles: simulate, predict, verify."""


@main.command()
@alpha_option
@delta_option
@click.option("--steps", type=click.IntRange(min=0), required=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--mode", type=click.Choice([m.value for m in Mode]), default=Mode.EDGE_CHOICE.value,
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="graph.txt", show_default=True)
def generate(alpha, delta, steps, seed, mode, out):
    """Grow G(steps) and write it in the text export format."""
    try:
        params = ModelParams(float(alpha), float(delta), Mode(mode), seed)
    except engine.ParameterError as exc:
        _usage_error(str(exc))
    g = engine.run(params, steps)
    engine.write_graph(g, out)
    stats = metrics.snapshot_stats(g)
    _emit({"out": str(out), "num_vertices": g.num_vertices, **stats.row()})


@main.command("theory")
@alpha_option
@delta_option
@click.option("--lmax", type=click.IntRange(2, 10**6), default=theory.DEFAULT_LMAX, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (l,p_l,A_l with a JSON header line).")
def theory_cmd(alpha, delta, lmax, out):
    """Limiting degree law and regime for (alpha, delta)."""
    table = theory.degree_law(alpha, delta, lmax)
    h = table.header()
    click.echo(f"A={h['A']:.12g} B={h['B']:.12g} gamma={h['gamma']:.12g} regime={h['regime']}")
    _emit(h)
    if out:
        Path(out).write_text(table.to_csv())


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--joint", is_flag=True, help="Also compute the joint edge-degree histogram.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for stats.csv, deghist.csv and joint.csv.")
def analyze(in_path, joint, out):
    """Observables of a graph file."""
    try:
        g = metrics.read_graph(in_path)
    except (metrics.GraphFormatError, UnicodeDecodeError) as exc:
        _usage_error(f"{in_path}: {exc}")
    stats = metrics.snapshot_stats(g, joint=joint)
    _emit(stats.row())
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "stats.csv").write_text(metrics.stats_csv([stats]))
        (d / "deghist.csv").write_text(metrics.degree_hist_csv(stats.degree_hist))
        if joint:
            (d / "joint.csv").write_text(metrics.joint_hist_csv(stats.joint_hist))
    else:
        click.echo(metrics.stats_csv([stats]), nl=False)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--workers", type=click.IntRange(min=1), envvar="TRIADGRAPH_WORKERS", default=None)
@click.option("--output_dir", "--output-dir", "output_dir", type=click.Path(file_okay=False), default=None)
def experiment(config_path, workers, output_dir):
    """Replicated runs and pass/fail verdicts for a JSON config."""
    from pydantic import ValidationError

    from . import experiments

    try:
        with open(config_path) as fh:
            raw = json.load(fh)
        if workers is not None:
            raw["workers"] = workers
        if output_dir is not None:
            raw["output_dir"] = output_dir
        config = experiments.ExperimentConfig.model_validate(raw)
    except json.JSONDecodeError as exc:
        _usage_error(f"{config_path}: invalid JSON ({exc})")
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        _usage_error(f"{config_path}: {problems}")
    _, verdicts, path = experiments.run_experiment(config)
    for v in verdicts:
        click.echo(f"{'PASS' if v.passed else 'FAIL'} {v.name}: measured={v.measured!r} "
                   f"expected={v.expected!r} tol={v.tolerance!r}")
    passed = all(v.passed for v in verdicts)
    _emit({"verdict": str(path), "passed": passed})
    sys.exit(0 if passed else 1)


@main.command()
@click.option("--t", "t", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--alpha", default=None, callback=_decimal(Fraction(0), True, Fraction(1)))
@click.option("--delta", default=None, callback=_decimal(Fraction(-1), False))
def validate(t, seeds, alpha, delta):
    """Differential oracle checks, sampler chi-square suite, construction equivalence."""
    from . import validation

    grid = validation.DEFAULT_GRID
    if alpha is not None or delta is not None:
        grid = tuple((float(alpha) if alpha is not None else a, float(delta) if delta is not None else d)
                     for a, d in grid)
        grid = tuple(dict.fromkeys(grid))
    try:
        results = validation.run_validation(t, seeds, grid)
    except metrics.OracleSizeError as exc:
        _usage_error(str(exc))
    for r in results:
        click.echo(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
    passed = all(r.passed for r in results)
    _emit({"passed": passed, "checks": len(results), "failed": [r.name for r in results if not r.passed]})
    sys.exit(0 if passed else 1)


if __name__ == "__main__":
    main()
