from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import TypeVar
from typing import Union

import click
import httpx
import numpy as np
import orjson
import pandas as pd
from httpx import ConnectError
from httpx import ConnectTimeout
from pydantic import ValidationError

from channel_scaling.common import BuiltinChannel
from channel_scaling.common import Encoding
from channel_scaling.common import LogBase
from channel_scaling.common import gate_builtins
from channel_scaling.exceptions import InvalidConfigError
from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.jinja_config import JINJA_ENV
from channel_scaling.jinja_config import REPORT_TEMPLATE
from channel_scaling.models import Channel
from channel_scaling.models import ChannelConfig
from channel_scaling.models import DivergenceValue
from channel_scaling.models import ExampleChannelParams
from channel_scaling.models import FamilySpec
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointProjectionResult
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProblemConfig
from channel_scaling.models import ProductSpace
from channel_scaling.models import ProjectionResult
from channel_scaling.models import SolverOptions
from channel_scaling.models import TraceRecord
from channel_scaling.operations.divergence import kl_channel
from channel_scaling.operations.example_channels import CONTROL_SPACE
from channel_scaling.operations.example_channels import GATE_SPACE
from channel_scaling.operations.example_channels import make_gate
from channel_scaling.operations.example_channels import make_interaction_channel
from channel_scaling.operations.example_channels import marginalized_interaction_channel
from channel_scaling.operations.marginals import compose
from channel_scaling.operations.marginals import uniform_channel
from channel_scaling.operations.marginals import uniform_input
from channel_scaling.operations.measures import MeasureResult
from channel_scaling.operations.projection import channel_ipf
from channel_scaling.operations.projection import joint_ipf
from channel_scaling.operations.projection import lift_channel_problem


T = TypeVar("T")

SWEEP_UNIT = "full sweep over all constraints"
COMPARE_COLUMNS = ["sweep", "method", "divergence_to_target_nats", "residual_linf", "elapsed_ns"]


class Problem(NamedTuple):
    p: InputDistribution
    k: Channel
    k0: Channel
    specs: Tuple[MarginalSpec, ...]
    options: SolverOptions


def get_problem_config(source: Union[str, Path]) -> ProblemConfig:
    """
    Load a problem file from a local path or an http(s) URL.
    :param source: path or URL of the JSON document
    :return: the validated ProblemConfig
    """
    try:
        if not isinstance(source, Path) and (
            source.startswith("http://") or source.startswith("https://")
        ):
            response = httpx.get(source)
            response.raise_for_status()
            return ProblemConfig(**orjson.loads(response.content))

        with open(source, "rb") as f:
            return ProblemConfig(**orjson.loads(f.read()))
    except FileNotFoundError:
        click.echo(f"File {source} not found. Please pass the path to a problem file.", err=True)
        raise
    except (ConnectError, ConnectTimeout):
        click.echo(f"Could not connect to {source}.", err=True)
        raise ConnectError(f"Could not connect to {source}.") from None
    except (ValidationError, orjson.JSONDecodeError):
        click.echo(f"File {source} is not a valid problem file or its JSON is malformed.", err=True)
        raise


def builtin_config(
    builtin: BuiltinChannel,
    noise: float = 0.0,
    alpha: float = 1.0,
    beta: float = 2.0,
    encoding: Encoding = Encoding.signed,
) -> ProblemConfig:
    space = GATE_SPACE if builtin in gate_builtins else CONTROL_SPACE
    return ProblemConfig(
        input_alphabets=list(space.input_cards),
        output_alphabets=list(space.output_cards),
        channel=ChannelConfig(
            builtin=builtin, noise=noise, alpha=alpha, beta=beta, encoding=encoding
        ),
    )


def apply_overrides(
    config: ProblemConfig,
    tolerance: Optional[float] = None,
    max_sweeps: Optional[int] = None,
    bits: bool = False,
    trace: bool = False,
) -> ProblemConfig:
    """
    Command-line flags take precedence over the options block of the problem file.
    """
    options = config.options.dict()
    if tolerance is not None:
        options["tolerance"] = tolerance
    if max_sweeps is not None:
        options["max_sweeps"] = max_sweeps
    if bits:
        options["log_base"] = LogBase.two
    if trace:
        options["trace"] = True
    return ProblemConfig(**{**config.dict(), "options": options})


def dump_config(config: ProblemConfig) -> bytes:
    return orjson.dumps(config.dict(), option=orjson.OPT_INDENT_2)


def _validated(field: str, build: Callable[[], T]) -> T:
    try:
        return build()
    except ValidationError as e:
        raise InvalidConfigError(field, e.errors()[0]["msg"]) from None


def _builtin_channel(channel: ChannelConfig) -> Channel:
    assert channel.builtin is not None  # noqa: S101
    if channel.builtin in gate_builtins:
        return make_gate(gate_builtins[channel.builtin], channel.noise)
    params = ExampleChannelParams.with_encoding(channel.alpha, channel.beta, channel.encoding)
    if channel.builtin is BuiltinChannel.interaction:
        return marginalized_interaction_channel(params)
    return make_interaction_channel(params, with_x3=False)


def build_problem(config: ProblemConfig, keep_iterates: bool = False) -> Problem:
    """
    Turn a problem file into core values, re-validating every invariant.
    :raises InvalidConfigError: naming the offending field
    """
    if config.channel.builtin is not None:
        k = _builtin_channel(config.channel)
        space = k.space
        for field, given, expected in (
            ("input_alphabets", config.input_alphabets, space.input_cards),
            ("output_alphabets", config.output_alphabets, space.output_cards),
        ):
            if given is not None and tuple(given) != expected:
                raise InvalidConfigError(
                    field, f"builtin '{config.channel.builtin.value}' needs {list(expected)}"
                )
    else:
        space = _validated(
            "input_alphabets",
            lambda: ProductSpace(
                input_cards=config.input_alphabets, output_cards=config.output_alphabets
            ),
        )
        k = _validated("channel.rows", lambda: Channel(space=space, rows=config.channel.rows))

    if config.input_distribution == "uniform":
        p = uniform_input(space)
    else:
        p = _validated(
            "input_distribution",
            lambda: InputDistribution(space=space, probs=config.input_distribution),
        )

    if config.reference_channel == "uniform":
        k0 = uniform_channel(space)
    else:
        k0 = _validated(
            "reference_channel", lambda: Channel(space=space, rows=config.reference_channel)
        )

    for index, spec in enumerate(config.constraints):
        try:
            spec.validate_for(space)
        except SpaceMismatchError as e:
            raise InvalidConfigError("constraints", str(e), index) from None

    return Problem(
        p=p,
        k=k,
        k0=k0,
        specs=tuple(config.constraints),
        options=config.options.solver_options(keep_iterates),
    )


def _family(problem: Problem) -> FamilySpec:
    if not problem.specs:
        raise InvalidConfigError("constraints", "at least one constraint is required")
    return FamilySpec(specs=problem.specs, prescription=problem.k)


def run_projection(problem: Problem) -> Tuple[ProjectionResult, DivergenceValue]:
    """
    rI-projection of the problem's channel from its reference channel: D_p(k||limit).
    """
    family = _family(problem)
    result = channel_ipf(problem.k0, problem.p, family, problem.options, target=problem.k)
    return result, kl_channel(problem.p, problem.k, result.limit)


def run_comparison(
    problem: Problem,
) -> Tuple[pd.DataFrame, ProjectionResult, JointProjectionResult]:
    """
    Solve the same problem with channel scaling and with classical joint scaling (input marginal
    first, then the (I,J) constraints), both traced.
    :return: merged trace sorted by (method, sweep), and both results
    """
    family = _family(problem)
    options = problem.options.copy(update={"trace_enabled": True})
    channel_result = channel_ipf(problem.k0, problem.p, family, options, target=problem.k)
    q0, constraints = lift_channel_problem(problem.p, problem.k0, family, interleave_inputs=False)
    joint_result = joint_ipf(q0, constraints, options, target=compose(problem.p, problem.k))
    frame = pd.concat(
        [
            trace_frame(channel_result.trace, "channel"),
            trace_frame(joint_result.trace, "joint"),
        ],
        ignore_index=True,
    )
    frame = frame.sort_values(["method", "sweep"], kind="stable").reset_index(drop=True)
    return frame[COMPARE_COLUMNS], channel_result, joint_result


def limits_agreement(
    channel_result: ProjectionResult, joint_result: JointProjectionResult, p: InputDistribution
) -> float:
    """
    L-infinity distance between p times the channel limit and the joint limit.
    """
    composed = compose(p, channel_result.limit)
    return float(np.max(np.abs(composed.probs - joint_result.limit.probs)))


def step_costs(
    problem: Problem, channel_result: ProjectionResult, joint_result: JointProjectionResult
) -> Dict[str, float]:
    """
    Mean elapsed ns of a single scaling step for each method of run_comparison. A joint sweep
    has one step more than a channel sweep, the input constraint.
    """
    steps = {"channel": len(problem.specs), "joint": len(problem.specs) + 1}
    results: Dict[str, Union[ProjectionResult, JointProjectionResult]] = {
        "channel": channel_result,
        "joint": joint_result,
    }
    return {
        method: result.trace[-1].elapsed_ns / (result.sweeps_used * steps[method])
        for method, result in results.items()
    }


def trace_frame(trace: Sequence[TraceRecord], method: str) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "sweep": [record.sweep for record in trace],
            "method": method,
            "divergence_to_prescription_nats": [
                record.divergence_to_prescription_nats for record in trace
            ],
            "divergence_to_target_nats": [record.divergence_from_target_nats for record in trace],
            "residual_linf": [record.residual for record in trace],
            "elapsed_ns": [record.elapsed_ns for record in trace],
        },
        columns=[
            "sweep",
            "method",
            "divergence_to_prescription_nats",
            "divergence_to_target_nats",
            "residual_linf",
            "elapsed_ns",
        ],
    )


def write_trace(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def _format_value(divergence: DivergenceValue, log_base: LogBase) -> str:
    return "inf" if divergence.infinite else f"{divergence.in_base(log_base):.6f}"


def unit_name(log_base: LogBase) -> str:
    return "bits" if log_base is LogBase.two else "nats"


def projection_payload(
    result: ProjectionResult, divergence: DivergenceValue, log_base: LogBase
) -> Dict[str, Any]:
    return {
        "limit": result.limit.rows.tolist(),
        "divergence": None if divergence.infinite else divergence.in_base(log_base),
        "infinite": divergence.infinite,
        "unit": unit_name(log_base),
        "sweeps": result.sweeps_used,
        "sweep_unit": SWEEP_UNIT,
        "residual": result.residual,
        "converged": result.converged,
        "pythagoras_defect": result.pythagoras_defect,
    }


def write_payload(payload: Dict[str, Any], output: Optional[Union[str, Path]] = None) -> None:
    content = orjson.dumps(payload, option=orjson.OPT_INDENT_2)
    if output is None:
        click.echo(content.decode())
        return
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    with open(output, "wb") as f:
        f.write(content + b"\n")


def render_report(measures: List[Tuple[str, MeasureResult]], log_base: LogBase) -> str:
    """
    Human-readable report of measure values and their convergence metadata.
    """
    entries = [
        {
            "name": name,
            "value": _format_value(measure.divergence, log_base),
            "sweeps": measure.result.sweeps_used,
            "residual": f"{measure.result.residual:.3e}",
            "converged": str(measure.result.converged).lower(),
        }
        for name, measure in measures
    ]
    return JINJA_ENV.get_template(REPORT_TEMPLATE).render(
        measures=entries, unit=unit_name(log_base), sweep_unit=SWEEP_UNIT
    )
