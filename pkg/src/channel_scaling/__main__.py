import functools
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import Optional
from typing import TypeVar

import click
import httpx
import pandas as pd
from pydantic import ValidationError

from channel_scaling import __version__
from channel_scaling import run_problem
from channel_scaling.common import BuiltinChannel
from channel_scaling.common import Encoding
from channel_scaling.exceptions import ChannelScalingError
from channel_scaling.exceptions import InfeasibleScalingError
from channel_scaling.exceptions import InvalidConfigError
from channel_scaling.models import ProblemConfig
from channel_scaling.operations.measures import complexity_c1
from channel_scaling.operations.measures import complexity_c2
from channel_scaling.operations.measures import synergy_d2


EXIT_INVALID_CONFIG = 1
EXIT_INFEASIBLE = 2

F = TypeVar("F", bound=Callable[..., Any])


def exit_codes(command: F) -> F:
    """
    Map failures to exit codes: 1 for invalid problems and unusable files, 2 for infeasible
    scalings.
    """

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except InfeasibleScalingError as e:
            click.echo(f"Infeasible scaling: {e}", err=True)
            ctx.exit(EXIT_INFEASIBLE)
        except (ValidationError, ChannelScalingError, ValueError, httpx.HTTPError) as e:
            click.echo(f"Invalid problem: {e}", err=True)
            ctx.exit(EXIT_INVALID_CONFIG)
        except OSError as e:
            click.echo(f"Could not access {e.filename}: {e.strerror}", err=True)
            ctx.exit(EXIT_INVALID_CONFIG)

    return wrapper  # type: ignore


def solver_flags(command: F) -> F:
    options = [
        click.option(
            "--output",
            "output",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="Where to write the result (projection) or trace CSV.",
        ),
        click.option(
            "--tolerance",
            type=float,
            default=None,
            help="L-infinity tolerance on the p-weighted prescribed marginals.",
        ),
        click.option(
            "--max-sweeps",
            type=int,
            default=None,
            help="Budget of full sweeps over the constraint list.",
        ),
        click.option(
            "--bits",
            is_flag=True,
            default=False,
            help="Report divergences in bits instead of nats.",
        ),
        click.option(
            "--trace",
            is_flag=True,
            default=False,
            help="Write the per-sweep convergence trace as CSV.",
        ),
        click.option(
            "--dump-config",
            "dump",
            is_flag=True,
            default=False,
            help="Print the fully resolved problem file and exit.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _resolve(
    config_path: Optional[str],
    builtin: Optional[str],
    overrides: Dict[str, Any],
    **builtin_params: Any,
) -> ProblemConfig:
    if config_path is not None:
        config = run_problem.get_problem_config(config_path)
    elif builtin is not None:
        config = run_problem.builtin_config(BuiltinChannel(builtin), **builtin_params)
    else:
        raise InvalidConfigError("config", "pass either --config or --builtin")
    return run_problem.apply_overrides(config, **overrides)


def _trace_path(output: Optional[Path], default: str) -> Path:
    return output.with_suffix(".trace.csv") if output is not None else Path(default)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """
    I- and rI-projections of finite channels by channel iterative scaling.
    """


@main.command()
@click.option("--config", "config_path", required=True, help="Problem file, path or URL.")
@solver_flags
@exit_codes
def project(
    config_path: str,
    output: Optional[Path],
    tolerance: Optional[float],
    max_sweeps: Optional[int],
    bits: bool,
    trace: bool,
    dump: bool,
) -> None:
    """
    Project the problem's channel onto the exponential family given by its constraints.
    """
    overrides = dict(tolerance=tolerance, max_sweeps=max_sweeps, bits=bits, trace=trace)
    config = _resolve(config_path, None, overrides)
    if dump:
        click.echo(run_problem.dump_config(config).decode())
        return
    problem = run_problem.build_problem(config)
    result, divergence = run_problem.run_projection(problem)
    run_problem.write_payload(
        run_problem.projection_payload(result, divergence, problem.options.log_base), output
    )
    if problem.options.trace_enabled:
        run_problem.write_trace(
            run_problem.trace_frame(result.trace, "channel"),
            _trace_path(output, "projection.trace.csv"),
        )


@main.command()
@click.option("--config", "config_path", default=None, help="Problem file, path or URL.")
@click.option("--builtin", type=click.Choice(["xor", "and"]), default=None, help="Named gate.")
@click.option(
    "--noise",
    type=float,
    default=0.0,
    show_default=True,
    help="Weight of uniform rows mixed into the gate.",
)
@solver_flags
@exit_codes
def synergy(
    config_path: Optional[str],
    builtin: Optional[str],
    noise: float,
    output: Optional[Path],
    tolerance: Optional[float],
    max_sweeps: Optional[int],
    bits: bool,
    trace: bool,
    dump: bool,
) -> None:
    """
    Pairwise synergy d2 of a two-input, one-output channel.
    """
    overrides = dict(tolerance=tolerance, max_sweeps=max_sweeps, bits=bits, trace=trace)
    config = _resolve(config_path, builtin, overrides, noise=noise)
    if dump:
        click.echo(run_problem.dump_config(config).decode())
        return
    problem = run_problem.build_problem(config)
    measure = synergy_d2(problem.p, problem.k, problem.options)
    click.echo(run_problem.render_report([("d2", measure)], problem.options.log_base))
    if problem.options.trace_enabled:
        run_problem.write_trace(
            run_problem.trace_frame(measure.result.trace, "channel"),
            _trace_path(output, "synergy.trace.csv"),
        )


@main.command()
@click.option("--config", "config_path", default=None, help="Problem file, path or URL.")
@click.option(
    "--builtin",
    type=click.Choice(["interaction", "control"]),
    default=None,
    help="The interaction channel with X3 marginalized out, or the control channel.",
)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=2.0, show_default=True)
@click.option(
    "--encoding",
    type=click.Choice([e.value for e in Encoding]),
    default=Encoding.signed.value,
    show_default=True,
    help="Values of the binary nodes: signed {-1,+1} or binary {0,1}.",
)
@solver_flags
@exit_codes
def complexity(
    config_path: Optional[str],
    builtin: Optional[str],
    alpha: float,
    beta: float,
    encoding: str,
    output: Optional[Path],
    tolerance: Optional[float],
    max_sweeps: Optional[int],
    bits: bool,
    trace: bool,
    dump: bool,
) -> None:
    """
    Complexity measures c1 and c2 of a two-input, two-output channel.
    """
    overrides = dict(tolerance=tolerance, max_sweeps=max_sweeps, bits=bits, trace=trace)
    config = _resolve(
        config_path, builtin, overrides, alpha=alpha, beta=beta, encoding=Encoding(encoding)
    )
    if dump:
        click.echo(run_problem.dump_config(config).decode())
        return
    problem = run_problem.build_problem(config)
    c1 = complexity_c1(problem.p, problem.k, problem.options)
    c2 = complexity_c2(problem.p, problem.k, problem.options)
    click.echo(run_problem.render_report([("c1", c1), ("c2", c2)], problem.options.log_base))
    if problem.options.trace_enabled:
        frame = pd.concat(
            [
                run_problem.trace_frame(c1.result.trace, "c1"),
                run_problem.trace_frame(c2.result.trace, "c2"),
            ],
            ignore_index=True,
        )
        run_problem.write_trace(frame, _trace_path(output, "complexity.trace.csv"))


@main.command()
@click.option("--config", "config_path", required=True, help="Problem file, path or URL.")
@click.option(
    "--output",
    "output",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Trace CSV with both methods.",
)
@click.option("--tolerance", type=float, default=None)
@click.option("--max-sweeps", type=int, default=None)
@exit_codes
def compare(
    config_path: str,
    output: Path,
    tolerance: Optional[float],
    max_sweeps: Optional[int],
) -> None:
    """
    Run channel scaling and classical joint scaling on the same problem and trace both.
    """
    config = _resolve(config_path, None, dict(tolerance=tolerance, max_sweeps=max_sweeps))
    problem = run_problem.build_problem(config)
    frame, channel_result, joint_result = run_problem.run_comparison(problem)
    output.parent.mkdir(parents=True, exist_ok=True)
    run_problem.write_trace(frame, output)
    step_costs = run_problem.step_costs(problem, channel_result, joint_result)
    for method, result in (("channel", channel_result), ("joint", joint_result)):
        cost = result.trace[-1].elapsed_ns / result.sweeps_used
        click.echo(
            f"{method}: {result.sweeps_used} sweeps, converged: {str(result.converged).lower()}, "
            f"residual: {result.residual:.3e}, {cost:.0f} ns per sweep, "
            f"{step_costs[method]:.0f} ns per scaling step"
        )
    agreement = run_problem.limits_agreement(channel_result, joint_result, problem.p)
    click.echo(f"max |p*channel limit - joint limit|: {agreement:.3e}")


if __name__ == "__main__":  # pragma: no cover
    main()
