"""
Divergences of channels from exponential families of restricted interactions: pairwise synergy
and the two complexity measures, all computed as rI-projections from the uniform channel.
"""
from typing import NamedTuple
from typing import Sequence
from typing import Tuple

from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import Channel
from channel_scaling.models import DivergenceValue
from channel_scaling.models import InputDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProjectionResult
from channel_scaling.models import SolverOptions
from channel_scaling.operations.common import check_same_space
from channel_scaling.operations.projection import ri_project


# E_1: each input interacts with the output separately
SYNERGY_SPECS: Tuple[MarginalSpec, ...] = (
    MarginalSpec(I=(0,), J=(0,)),
    MarginalSpec(I=(1,), J=(0,)),
)
# F_1: X1 -> Y1 and X2 -> Y2 only
NON_COMPLEX_SPECS: Tuple[MarginalSpec, ...] = (
    MarginalSpec(I=(0,), J=(0,)),
    MarginalSpec(I=(1,), J=(1,)),
)
# F_2: F_1 plus an interaction between the outputs
NOISY_NON_COMPLEX_SPECS: Tuple[MarginalSpec, ...] = NON_COMPLEX_SPECS + (
    MarginalSpec(I=(), J=(0, 1)),
)
CONDITIONAL_INDEPENDENCE_SPECS: Tuple[MarginalSpec, ...] = (
    MarginalSpec(I=(0, 1), J=(0,)),
    MarginalSpec(I=(0, 1), J=(1,)),
)


class MeasureResult(NamedTuple):
    divergence: DivergenceValue
    result: ProjectionResult


def _check_shape(k: Channel, n_inputs: int, n_outputs: int, measure: str) -> None:
    space = k.space
    if (space.n_inputs, space.n_outputs) != (n_inputs, n_outputs):
        raise SpaceMismatchError(
            f"{measure} needs a channel with {n_inputs} input and {n_outputs} output factors, got "
            f"{space.n_inputs} and {space.n_outputs}"
        )


def divergence_from_family(
    p: InputDistribution,
    k: Channel,
    specs: Sequence[MarginalSpec],
    opts: SolverOptions = SolverOptions(),
) -> MeasureResult:
    """
    D_p(k||E) for the exponential family generated from the uniform channel by the marginal specs.
    For slowly converging problems the value is an upper estimate; check result.residual.
    """
    check_same_space(p.space, k.space)
    _, divergence, result = ri_project(k, specs, p=p, opts=opts)
    return MeasureResult(divergence, result)


def synergy_d2(
    p: InputDistribution, k: Channel, opts: SolverOptions = SolverOptions()
) -> MeasureResult:
    _check_shape(k, 2, 1, "Synergy")
    return divergence_from_family(p, k, SYNERGY_SPECS, opts)


def complexity_c1(
    p: InputDistribution, k: Channel, opts: SolverOptions = SolverOptions()
) -> MeasureResult:
    _check_shape(k, 2, 2, "Complexity")
    return divergence_from_family(p, k, NON_COMPLEX_SPECS, opts)


def complexity_c2(
    p: InputDistribution, k: Channel, opts: SolverOptions = SolverOptions()
) -> MeasureResult:
    _check_shape(k, 2, 2, "Complexity")
    return divergence_from_family(p, k, NOISY_NON_COMPLEX_SPECS, opts)
