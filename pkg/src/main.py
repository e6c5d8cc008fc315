"""
Command-line entry point for the Stackelberg simulator
Solves instances, lists regions, runs simulations and benchmarks, and cross-checks the solvers
"""
import logging
import os
import sys
from typing import List, Optional, Sequence

import typer
from rich.console import Console
from rich.table import Table

from src.core.config import ConfigurationError, get_config
from src.core.errors import CAP_ERRORS, StackelbergError
from src.core.game import GameInstance, MixedStrategy
from src.harness.generators import gen_random_instance, gen_single_follower_hard, parse_generator_spec
from src.harness.oracles import brute_force_optimal, run_oracle_suite
from src.harness.simulator import ExperimentConfig, run_bench, run_experiment, traces_to_frame
from src.learners.base import FeedbackMode
from src.solvers.equilibrium import lp_reform_optimal, offline_optimal
from src.solvers.geometry import enumerate_regions
from src.utils.file_handler import load_instance, save_instance, write_table
from src.utils.logger import setup_logging
from src.utils.report import bench_summary, render_bench_report, render_oracle_report, write_report

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="Bayesian Stackelberg learning simulator")

# typer raises click's exception family, from click itself or from the copy typer ships with
CLI_USAGE_ERROR = next(c for c in typer.BadParameter.__mro__ if c.__name__ == "ClickException")

console = Console()

BENCH_PAIRS = {
    FeedbackMode.TYPE: "tf-general,tf-independent",
    FeedbackMode.ACTION: "ucb,linbandit",
}


def _format_strategy(x: MixedStrategy) -> str:
    return "(" + ", ".join(f"{p:.6f}" for p in x.probs) + ")"


def _load(instance: Optional[str], gen: Optional[str]) -> GameInstance:
    if (instance is None) == (gen is None):
        raise typer.BadParameter("give exactly one of --instance PATH or --gen SPEC")
    profile_cap = get_config().profile_cap
    if gen is not None:
        return parse_generator_spec(gen, profile_cap=profile_cap)
    return load_instance(instance, profile_cap=profile_cap)


def _split_learners(text: str) -> List[str]:
    """'tf-general,fixed:0,1' -> ['tf-general', 'fixed:0,1']; numeric pieces extend a fixed strategy"""
    names: List[str] = []
    for piece in (p.strip() for p in text.split(',')):
        if not piece:
            continue
        if names and names[-1].startswith("fixed:") and not piece[0].isalpha():
            names[-1] += ',' + piece
        else:
            names.append(piece)
    return names


def _default_output(name: str) -> str:
    safe = name.replace(':', '_').replace(',', '-')
    return os.path.join(get_config().results_dir, f"{safe}.csv")


@app.callback()
def configure(log_level: Optional[str] = typer.Option(None, "--log-level", help="Override LOG_LEVEL")):
    """Set up logging before any subcommand runs"""
    setup_logging(log_level or get_config().log_level, log_dir=get_config().log_dir)
    logger.debug(f"Effective configuration: {get_config().to_dict()}")


@app.command()
def solve(
    instance: Optional[str] = typer.Option(None, "--instance", help="Instance JSON file"),
    gen: Optional[str] = typer.Option(None, "--gen", help="Generator spec, e.g. hard-single:c=1,eps=0.2,sigma=+"),
    method: str = typer.Option("regions", "--method", help="regions | lp-reform | brute-force"),
    grid: float = typer.Option(0.01, "--grid", help="Lattice step for brute-force"),
) -> int:
    """Compute the leader's optimal strategy"""
    game = _load(instance, gen)
    view = game.public_view()
    if method == "regions":
        eq = offline_optimal(view, game.distribution, profile_cap=get_config().profile_cap)
        x, value, mapping = eq.x_star, eq.value, str(eq.mapping)
    elif method == "lp-reform":
        eq = lp_reform_optimal(view, game.distribution, profile_cap=get_config().profile_cap)
        x, value, mapping = eq.x_star, eq.value, str(eq.mapping)
    elif method == "brute-force":
        x, value = brute_force_optimal(view, game.distribution, grid_step=grid)
        mapping = "-"
    else:
        raise typer.BadParameter(f"unknown method '{method}'")
    console.print(f"x*: {_format_strategy(x)}", markup=False)
    console.print(f"value: {value:.6f}", markup=False)
    console.print(f"mapping: {mapping}", markup=False)
    return 0


@app.command()
def regions(
    instance: Optional[str] = typer.Option(None, "--instance", help="Instance JSON file"),
    gen: Optional[str] = typer.Option(None, "--gen", help="Generator spec"),
) -> int:
    """List the non-empty best-response regions"""
    game = _load(instance, gen)
    found = enumerate_regions(game.public_view(), seeds=get_config().region_seeds)
    boundary = sum(1 for r in found if not r.is_full_dimensional)
    console.print(f"{len(found)} regions ({len(found) - boundary} full-dimensional, {boundary} with slack 0)",
                  markup=False)
    table = Table(show_header=True, header_style="bold")
    for column in ("#", "mapping", "slack", "witness"):
        table.add_column(column)
    for index, region in enumerate(found):
        table.add_row(str(index), str(region.mapping), f"{region.slack:.6f}", _format_strategy(region.witness))
    console.print(table)
    return 0


@app.command()
def simulate(
    instance: Optional[str] = typer.Option(None, "--instance", help="Instance JSON file"),
    gen: Optional[str] = typer.Option(None, "--gen", help="Generator spec"),
    config_file: Optional[str] = typer.Option(None, "--config", help="YAML/JSON experiment document"),
    learner: str = typer.Option("tf-general", "--learner", help="tf-general | tf-independent | ucb | linbandit | fixed:X"),
    feedback: Optional[FeedbackMode] = typer.Option(None, "--feedback", help="type | action"),
    T: int = typer.Option(1000, "-T", "--horizon", help="Number of rounds"),
    seed: int = typer.Option(0, "--seed", help="Root seed"),
    reps: int = typer.Option(1, "--reps", help="Replications"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Parallel workers (default THREADS)"),
    out: Optional[str] = typer.Option(None, "--out", help="Trace CSV path"),
    progress: bool = typer.Option(False, "--progress", help="Show a progress bar"),
) -> int:
    """Run replications of one learner and write the trace file"""
    settings = get_config()
    if config_file is not None:
        cfg = ExperimentConfig.from_file(config_file)
    else:
        if (instance is None) == (gen is None):
            raise typer.BadParameter("give exactly one of --instance PATH, --gen SPEC or --config PATH")
        cfg = ExperimentConfig(
            instance=instance, generator=gen, learner=learner, feedback=feedback, T=T, seed=seed,
            replications=reps, threads=threads or settings.threads, profile_cap=settings.profile_cap,
            oful_cap=settings.oful_cap, region_seeds=settings.region_seeds,
        )
    traces = run_experiment(cfg, progress=progress)
    path = write_table(traces_to_frame(traces), out or _default_output(f"trace_{cfg.learner}_{cfg.seed}"))
    final = sum(trace.cumulative_regret[-1] for trace in traces) / len(traces)
    console.print(f"optimal value: {traces[0].optimal_value:.6f}", markup=False)
    console.print(f"mean final cumulative regret: {final:.6f} over {len(traces)} replications", markup=False)
    console.print(f"trace written to {path}", markup=False)
    return 0


@app.command()
def bench(
    instance: Optional[str] = typer.Option(None, "--instance", help="Instance JSON file"),
    gen: Optional[str] = typer.Option(None, "--gen", help="Generator spec (default: bench preset)"),
    pair: FeedbackMode = typer.Option(FeedbackMode.TYPE, "--feedback", help="type compares the type-feedback pair, action the action-feedback pair"),
    learners: Optional[str] = typer.Option(None, "--learners", help="Comma-separated learner list"),
    T: int = typer.Option(2000, "-T", "--horizon", help="Number of rounds"),
    seed: int = typer.Option(0, "--seed", help="Root seed"),
    reps: int = typer.Option(200, "--reps", help="Replications per learner"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Parallel workers (default THREADS)"),
    confidence: float = typer.Option(0.9, "--confidence", help="Confidence level of the interval"),
    out: Optional[str] = typer.Option(None, "--out", help="Bench CSV path"),
    report: Optional[str] = typer.Option(None, "--report", help="Markdown summary path"),
    progress: bool = typer.Option(False, "--progress", help="Show progress bars"),
) -> int:
    """Compare learners on the benchmark preset and write mean cumulative regret with confidence intervals"""
    settings = get_config()
    if instance is None and gen is None:
        gen = "bench"
    game = _load(instance, gen)
    names = _split_learners(learners or BENCH_PAIRS[pair])
    result = run_bench(game, names, T=T, replications=reps, seed=seed, source=gen or instance,
                       threads=threads or settings.threads, confidence=confidence,
                       profile_cap=settings.profile_cap, region_seeds=settings.region_seeds, progress=progress)
    path = write_table(result.summary, out or _default_output(f"bench_{pair.value}_{seed}"))

    ratios = result.decile_ratios()
    table = Table(show_header=True, header_style="bold")
    for column in ("learner", "final mean", "ci low", "ci high", "last/first decile"):
        table.add_column(column)
    summary = bench_summary(result.summary, ratios, instance=gen or instance, T=T, replications=reps, seed=seed,
                            confidence=confidence, output=path)
    for row in summary['learners']:
        table.add_row(row['learner'], f"{row['final_mean']:.4f}", f"{row['ci_low']:.4f}", f"{row['ci_high']:.4f}",
                      f"{row['window_ratio']:.3f}")
    console.print(table)
    console.print(f"bench table written to {path}", markup=False)
    if report:
        write_report(render_bench_report(summary), report)
    return 0


def _oracle_suite_instances(count: int) -> List[tuple]:
    """Seeded random instances (n ≤ 2, K ≤ 3, A = 2, L ∈ {2, 3}) plus the hard single-follower game"""
    games = [("hard-single:c=1,eps=0.2,sigma=+", gen_single_follower_hard(1, 0.2, '+'))]
    for s in range(count):
        n, K, L = 1 + s % 2, 2 + (s // 2) % 2, 2 + (s // 4) % 2
        games.append((f"random:n={n},L={L},A=2,K={K},seed={s}", gen_random_instance(n, L, 2, K, seed=s)))
    return games


@app.command("oracle-check")
def oracle_check(
    instance: Optional[str] = typer.Option(None, "--instance", help="Instance JSON file"),
    gen: Optional[str] = typer.Option(None, "--gen", help="Generator spec"),
    count: int = typer.Option(50, "--count", help="Random instances in the default suite"),
    grid: float = typer.Option(0.005, "--grid", help="Lattice step of the grid oracle"),
    samples: int = typer.Option(10**4, "--samples", help="Sampled points for region soundness"),
    seed: int = typer.Option(0, "--seed", help="Sampling seed"),
    report: Optional[str] = typer.Option(None, "--report", help="Markdown summary path"),
) -> int:
    """Cross-check the exact solvers against grid search, the joint LP and sampled regions"""
    if instance is not None or gen is not None:
        games = [(gen or instance, _load(instance, gen))]
    else:
        games = _oracle_suite_instances(count)
    reports = []
    for name, game in games:
        reports.append(run_oracle_suite(game.public_view(), game.distribution, name=name, grid_step=grid,
                                        num_samples=samples, seed=seed, profile_cap=get_config().profile_cap))
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        console.print(f"{status} {r.instance}", markup=False)
        for check in r.checks:
            if not check.passed:
                console.print(f"    {check.name}: {check.detail}", markup=False)
    passed = sum(1 for r in reports if r.passed)
    console.print(f"{passed}/{len(reports)} instances passed", markup=False)
    if report:
        write_report(render_oracle_report(reports), report)
    if passed < len(reports):
        logger.error(f"Oracle check failed on {len(reports) - passed} instances")
        return 1
    return 0


@app.command()
def generate(
    gen: str = typer.Option(..., "--gen", help="Generator spec"),
    out: str = typer.Option(..., "--out", help="Instance JSON path"),
) -> int:
    """Write a generated instance as an instance file"""
    game = parse_generator_spec(gen, profile_cap=get_config().profile_cap)
    save_instance(game, out)
    console.print(f"instance written to {out}", markup=False)
    return 0


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and map failures to exit codes: 1 for input errors, 2 for cap and horizon errors"""
    args = list(argv) if argv is not None else sys.argv[1:]
    try:
        result = app(args=args, prog_name="stackelberg-sim", standalone_mode=False)
    except CLI_USAGE_ERROR as e:
        e.show()
        return 1
    except typer.Abort:
        return 1
    except CAP_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except (StackelbergError, ConfigurationError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    return result if isinstance(result, int) else 0


def main():
    """Console entry point"""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
