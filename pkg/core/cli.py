"""Command-line entry point: `mif <command> ...`."""
from typing import Any, Callable, Dict, Optional, Sequence

import click
import pandas as pd

from config.experiment_config import ExperimentConfig, load_config
from core.calibration import ensure_calibration
from core.error_handler import (
    BudgetExceeded,
    CommandScope,
    MifError,
    UnknownSymbol,
    display_error,
    display_info,
    display_warning,
    get_logger,
)
from core.figures import emit_figure
from core.group_core import GroupElement, identity, parse_element, word_length
from core.mif_engine import (
    Calibration,
    build_selfless_map,
    certify_simultaneous,
    certify_single,
    commutator_lower_bound,
    find_nonsolution_random,
    find_simultaneous_random,
    mif_growth,
    minimal_nonsolution,
    scaling_experiment,
    verify_union_bound,
)
from core.mixed_words import WORD_GRAMMAR, format_mixed, parse_mixed_expression
from core.random_walk import (
    MEASURE_GRAMMAR,
    WalkSpec,
    estimate_speed,
    format_measure,
    estimate_tail,
    sample_walk,
    translate_overlap_stats,
)
from core.reports import PLOT_KINDS, Report, default_report_path, emit_plot_data, load_report, save_report
from utils.formatting import format_mapping, format_table

logger = get_logger(__name__)

DEFAULT_TRIALS = 200
GRAMMAR_HELP = f"Word grammar: {WORD_GRAMMAR}\nMeasure grammar: {MEASURE_GRAMMAR}"


# ============================================================
#                   HELPERS
# ============================================================

def _element(text: str, config: ExperimentConfig) -> GroupElement:
    """Group element from CLI text; `e` is the identity."""
    compact = "".join(text.split())
    if compact == "e":
        return identity(config.backend)
    return parse_element(compact, config.backend)


def _calibration(config: ExperimentConfig, c_override: Optional[float]) -> Optional[Calibration]:
    return None if c_override is not None else ensure_calibration(config)


def _trials(config: ExperimentConfig, default: int = DEFAULT_TRIALS) -> int:
    return config.trials if config.trials is not None else default


def _run(
    ctx: click.Context,
    command: str,
    compute: Callable[[ExperimentConfig], Dict[str, Any]],
    kind: Optional[str] = None,
    walk_driven: bool = False
) -> Report:
    """
    Time a computation, wrap it in a report, save it and emit plots on request.

    Walk-driven commands run only on an admissible measure unless the config
    sets allow_inadmissible, which every report records.
    """
    config: ExperimentConfig = ctx.obj["config"]
    if walk_driven:
        config.require_admissible(command)
        if not config.measure.admissible:
            display_warning(f"{command}: measure {format_measure(config.measure)} is not admissible; "
                            f"running under allow_inadmissible")
    with CommandScope(command) as scope:
        payload = compute(config)

    report = Report(command=command, config=config.snapshot(), payload=payload,
                    duration_s=round(scope.duration, 6), kind=kind)
    if ctx.obj["save"]:
        path = save_report(report, default_report_path(report, config.output_dir))
        click.echo(f"report: {path}")
    if ctx.obj["plots"] and kind is not None:
        click.echo(f"plot data: {emit_plot_data(report, kind, output_dir=config.output_dir)}")
        click.echo(f"figure: {emit_figure(report, kind, output_dir=config.output_dir)}")
    return report


# ============================================================
#                   ROOT GROUP
# ============================================================

@click.group(epilog=GRAMMAR_HELP)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Flat key = value config file")
@click.option("--seed", type=int, default=None, help="Master seed")
@click.option("--trials", type=int, default=None, help="Monte Carlo trials")
@click.option("--budget", type=int, default=None, help="Element-count limit for every enumeration")
@click.option("--rank", type=int, default=None, help="Rank of the free group")
@click.option("--output-dir", type=str, default=None, help="Directory for reports")
@click.option("--c-delta", type=float, default=None, help="Concatenation constant C_delta")
@click.option("--save/--no-save", default=True, show_default=True, help="Write a JSON report")
@click.option("--plots", is_flag=True, default=False, help="Also write plot CSV and HTML")
@click.pass_context
def main(ctx, config_path, seed, trials, budget, rank, output_dir, c_delta, save, plots):
    """Mixed identities in free groups: certificates, growth and random walks."""
    config = load_config(config_path).with_overrides(
        master_seed=seed,
        trials=trials,
        budget=budget,
        rank=rank,
        output_dir=output_dir,
        c_delta=c_delta,
    )
    ctx.obj = {"config": config, "save": save, "plots": plots}


# ============================================================
#                   CALIBRATION AND WALKS
# ============================================================

@main.command()
@click.option("--use-cache", is_flag=True, default=False, help="Reuse a cached calibration")
@click.pass_context
def calibrate(ctx, use_cache):
    """Estimate lambda_hat and C1_hat, and check C_delta."""
    def compute(config):
        calibration = ensure_calibration(config, refresh=not use_cache)
        display_info(format_mapping({
            "lambda_hat": calibration.lambda_hat,
            "c1_hat": calibration.c1_hat,
            "c_delta": calibration.c_delta,
        }))
        return {"calibration": calibration}
    _run(ctx, "calibrate", compute, walk_driven=True)


@main.command()
@click.option("--length", "length", type=click.IntRange(min=0), default=20, show_default=True)
@click.pass_context
def walk(ctx, length):
    """Sample one walk from the configured measure."""
    def compute(config):
        positions = sample_walk(WalkSpec(config.measure, config.master_seed, length))
        endpoint = positions[-1]
        display_info(f"x_{length} = {endpoint}  (|x_n| = {word_length(endpoint)})")
        return {"length": length, "positions": positions, "endpoint": endpoint,
                "word_length": word_length(endpoint)}
    _run(ctx, "walk", compute, walk_driven=True)


# ============================================================
#                   EXACT COMPUTATIONS
# ============================================================

@main.command()
@click.argument("word")
@click.pass_context
def complexity(ctx, word):
    """Length of the shortest non-solution of WORD."""
    def compute(config):
        w = parse_mixed_expression(word, config.backend)
        g = minimal_nonsolution(w, config.budget("sweep"))
        display_info(str(word_length(g)))
        display_info(f"nonsolution: {g}")
        return {"word": w, "complexity": word_length(g), "nonsolution": g}
    _run(ctx, "complexity", compute)


@main.command()
@click.argument("n", type=click.IntRange(min=1))
@click.option("--shuffle-seed", type=int, default=None, help="Visit words in a permuted order")
@click.pass_context
def growth(ctx, n, shuffle_seed):
    """Exact M(1), ..., M(N) with witnesses."""
    def compute(config):
        records = []
        for k in range(1, n + 1):
            record = mif_growth(k, config.backend, config.budget("growth"), shuffle_seed=shuffle_seed)
            display_info(f"M({k}) = {record.value}  witness {format_mixed(record.witness_word)}  "
                         f"nonsolution {record.witness_nonsolution}")
            records.append({
                "n": k,
                "M_n": record.value,
                "witness_word": record.witness_word,
                "witness_nonsolution": record.witness_nonsolution,
                "words_checked": record.words_checked,
            })
        return {"records": records}
    _run(ctx, "growth", compute, kind="growth")


@main.command()
@click.argument("g")
@click.argument("n", type=click.IntRange(min=1))
@click.pass_context
def certify(ctx, g, n):
    """Simultaneous certificate for G over W_N."""
    def compute(config):
        element = _element(g, config)
        certificate = certify_simultaneous(element, n, config.hyp_params(),
                                           budget=config.budget("ball"))
        display_info(f"verdict: {certificate.verdict}")
        display_info(f"margin: {certificate.margin}  bullets: {certificate.bullet_maxima}")
        return {"certificate": certificate}
    _run(ctx, "certify", compute)


@main.command("certify-single")
@click.argument("word")
@click.argument("g")
@click.pass_context
def certify_single_command(ctx, word, g):
    """Decide WORD(G) != e and try to certify infinite order."""
    def compute(config):
        w = parse_mixed_expression(word, config.backend)
        result = certify_single(w, _element(g, config), config.hyp_params())
        attempt = result.attempt
        display_info(f"nonsolution: {str(result.nonsolution).lower()}")
        display_info(f"certificate: {'pass' if result.certificate else 'none'}")
        return {
            "word": w,
            "core": result.core,
            "g": result.candidate,
            "nonsolution": result.nonsolution,
            "certified": result.certificate is not None,
            "worst_margin": attempt.worst_margin if attempt else None,
            "profile": attempt.profile.to_frame() if attempt else [],
        }
    _run(ctx, "certify-single", compute)


@main.command("lower-bound")
@click.argument("n", type=click.IntRange(min=1))
@click.pass_context
def lower_bound(ctx, n):
    """Shortest g commuting with no h of length 1..N."""
    def compute(config):
        result = commutator_lower_bound(n, config.backend, config.budget("sweep"))
        display_info(f"{result.length}  witness {result.witness}")
        return {"lower_bound": result}
    _run(ctx, "lower-bound", compute)


# ============================================================
#                   RANDOMIZED SEARCHES
# ============================================================

@main.command("find-single")
@click.argument("word")
@click.option("--c", "c_override", type=float, default=None, help="Use this C instead of calibrating")
@click.pass_context
def find_single(ctx, word, c_override):
    """Random non-solution of WORD from a walk of length C log2 |WORD|."""
    def compute(config):
        w = parse_mixed_expression(word, config.backend)
        calibration = _calibration(config, c_override)
        result = find_nonsolution_random(w, config.master_seed, calibration=calibration,
                                         c_override=c_override, measure=config.measure,
                                         attempt_limit=config.attempt_limit)
        display_info(f"g = {result.g}  (|g| = {word_length(result.g)}, attempts {result.attempts})")
        return {"word": w, "search": result,
                "calibration": calibration.provenance() if calibration else None}
    _run(ctx, "find-single", compute, walk_driven=True)


@main.command("find-simul")
@click.argument("n", type=click.IntRange(min=1))
@click.option("--c", "c_override", type=float, default=None, help="Use this C instead of calibrating")
@click.option("--strict", is_flag=True, default=False, help="Also require the lambda m / 10 thresholds")
@click.pass_context
def find_simul(ctx, n, c_override, strict):
    """Random g certified for all of W_N at once."""
    def compute(config):
        calibration = _calibration(config, c_override)
        if strict and calibration is None:
            calibration = ensure_calibration(config)
        result = find_simultaneous_random(
            n, config.master_seed, config.backend, calibration=calibration, c_override=c_override,
            measure=config.measure, params=config.hyp_params(),
            attempt_limit=config.attempt_limit, budget=config.budget("ball"), strict=strict,
        )
        display_info(f"g = {result.g}  (|g| = {word_length(result.g)}, attempts {result.attempts})")
        display_info(f"margin: {result.certificate.margin}")
        return {"search": result}
    _run(ctx, "find-simul", compute, walk_driven=True)


@main.command("union-bound")
@click.argument("n", type=click.IntRange(min=1))
@click.option("--word", type=str, default=None, help="Take the constants from this word")
@click.pass_context
def union_bound(ctx, n, word):
    """Frequency of a large constant overlap against 2 C1 / N."""
    def compute(config):
        calibration = ensure_calibration(config)
        w = parse_mixed_expression(word, config.backend) if word else None
        report = verify_union_bound(n, _trials(config, 1000), config.master_seed, calibration,
                                    config.backend, measure=config.measure, word=w)
        display_info(f"frequency {report.frequency:.4f}  bound {report.bound:.4f}")
        return {"union_bound": report, "calibration": calibration.provenance()}
    _run(ctx, "union-bound", compute, walk_driven=True)


@main.command()
@click.argument("n", type=click.IntRange(min=1))
@click.option("--c", "c_override", type=float, default=None, help="Use this C instead of calibrating")
@click.pass_context
def selfless(ctx, n, c_override):
    """Selfless map phi_N with x -> g_2N."""
    def compute(config):
        calibration = _calibration(config, c_override)
        result = build_selfless_map(n, config.master_seed, config.backend, calibration=calibration,
                                    c_override=c_override, measure=config.measure,
                                    attempt_limit=config.attempt_limit, budget=config.budget("mixed_ball"))
        display_info(f"x -> {result.image_of_x}  f({n}) = {result.f_value}")
        return {"selfless": result}
    _run(ctx, "selfless", compute, walk_driven=True)


@main.command()
@click.option("--j", "j_values", type=int, multiple=True, default=(1, 2, 3, 4, 5, 6), show_default=True)
@click.option("--c", "c_override", type=float, default=None, help="Use this C instead of calibrating")
@click.pass_context
def scaling(ctx, j_values, c_override):
    """Non-solution length for [x, h] with |h| = 2^j."""
    def compute(config):
        calibration = _calibration(config, c_override)
        df = scaling_experiment(j_values, config.master_seed, config.backend, calibration=calibration,
                                c_override=c_override, measure=config.measure,
                                attempt_limit=config.attempt_limit)
        display_info(format_table(df))
        return {"rows": df}
    _run(ctx, "scaling", compute, kind="scaling", walk_driven=True)


# ============================================================
#                   STATISTICS
# ============================================================

@main.group()
def stats():
    """Monte Carlo statistics of the walk."""


@stats.command()
@click.option("--n", "n", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--g", "g", type=str, default="a", show_default=True)
@click.option("--inverse", is_flag=True, default=False, help="Use x_n^-1")
@click.pass_context
def tail(ctx, n, g, inverse):
    """Survival function of D(g, x_n)."""
    def compute(config):
        estimate = estimate_tail(config.measure, _element(g, config), n, _trials(config),
                                 config.master_seed, inverse=inverse)
        frame = estimate.to_frame()
        display_info(format_table(frame))
        display_info(f"fitted C1: {estimate.fitted_c1}  log2 slope: {estimate.slope}")
        return {"n": n, "g": g, "inverse": inverse, "trials": estimate.trials,
                "survival": frame, "fitted_c1": estimate.fitted_c1, "slope": estimate.slope}
    _run(ctx, "stats tail", compute, kind="tail", walk_driven=True)


@stats.command()
@click.option("--n", "n", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--radius", type=click.IntRange(min=0), default=2, show_default=True)
@click.pass_context
def overlap(ctx, n, radius):
    """Ball-restricted translate overlaps of x_n."""
    def compute(config):
        result = translate_overlap_stats(config.measure, n, _trials(config), radius,
                                         config.master_seed, budget=config.budget("ball"))
        display_info(format_mapping({k: v for k, v in result.quantiles.items()}))
        return {"n": n, "radius": radius, "ball_restricted": result.ball_restricted,
                "trials": result.frame, "quantiles": result.quantiles}
    _run(ctx, "stats overlap", compute, walk_driven=True)


@stats.command()
@click.option("--n", "n_values", type=click.IntRange(min=1), multiple=True, default=(10, 100, 1000), show_default=True)
@click.pass_context
def speed(ctx, n_values):
    """Speed estimates d(e, x_n)/n."""
    def compute(config):
        rows = []
        for n in n_values:
            estimate = estimate_speed(config.measure, n, _trials(config), config.master_seed)
            rows.append({"n": n, "lambda_hat": estimate.lambda_hat, "stderr": estimate.stderr,
                         "q05": estimate.quantile(0.05)})
        display_info(format_table(pd.DataFrame(rows)))
        return {"rows": rows}
    _run(ctx, "stats speed", compute, kind="speed", walk_driven=True)


# ============================================================
#                   REPORT TOOLS
# ============================================================

@main.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("kind", type=click.Choice(PLOT_KINDS))
@click.pass_context
def plot(ctx, report_path, kind):
    """Write plot CSV and HTML for a saved report."""
    config: ExperimentConfig = ctx.obj["config"]
    report = load_report(report_path)
    display_info(f"plot data: {emit_plot_data(report, kind, output_dir=config.output_dir)}")
    display_info(f"figure: {emit_figure(report, kind, output_dir=config.output_dir)}")


# ============================================================
#                   DISPATCH
# ============================================================

def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and map outcomes to exit codes.

    Returns:
        0 on success, 1 on a domain error, 2 on a budget or usage error
    """
    try:
        result = main.main(args=list(argv) if argv is not None else None,
                           prog_name="mif", standalone_mode=False)
        return result if isinstance(result, int) else 0
    except BudgetExceeded as e:
        display_error(e, "Budget exceeded")
        return 2
    except UnknownSymbol as e:
        display_error(e, "Parse error")
        click.echo(GRAMMAR_HELP, err=True)
        return 1
    except MifError as e:
        display_error(e, type(e).__name__)
        return 1
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        click.echo(GRAMMAR_HELP, err=True)
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
