from typing import Sequence
from typing import Tuple

import numpy as np

from channel_scaling.exceptions import DegenerateInputError
from channel_scaling.models import Channel
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProductSpace
from channel_scaling.models import SubsetPair
from channel_scaling.operations.common import channel_marginal_tensor
from channel_scaling.operations.common import check_same_space
from channel_scaling.operations.common import marginal_tensor


def uniform_input(space: ProductSpace) -> InputDistribution:
    return InputDistribution(space=space, probs=np.full(space.input_size, 1.0 / space.input_size))


def uniform_channel(space: ProductSpace) -> Channel:
    return Channel(
        space=space,
        rows=np.full((space.input_size, space.output_size), 1.0 / space.output_size),
    )


def compose(p: InputDistribution, k: Channel) -> JointDistribution:
    """
    The joint q(x,y) = p(x) k(x;y).
    """
    space = check_same_space(p.space, k.space)
    return JointDistribution(space=space, probs=(p.probs[:, None] * k.rows).reshape(-1))


def disintegrate(q: JointDistribution) -> Tuple[InputDistribution, Channel]:
    """
    Split a joint into its X-marginal and the conditional channel.
    :raises DegenerateInputError: some x has zero marginal probability
    """
    space = q.space
    table = q.probs.reshape(space.input_size, space.output_size)
    p = table.sum(axis=1)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise DegenerateInputError(int(zero[0]))
    return (
        InputDistribution(space=space, probs=p),
        Channel(space=space, rows=table / p[:, None]),
    )


def joint_marginal(q: JointDistribution, spec: SubsetPair) -> JointDistribution:
    """
    Marginal of q on X_I x Y_J, flattened on the reduced space (inputs first).
    """
    reduced = q.space.reduced(spec)
    tensor = q.probs.reshape(q.space.tensor_shape)
    return JointDistribution(
        space=reduced, probs=marginal_tensor(q.space, tensor, spec).reshape(-1)
    )


def input_marginal(p: InputDistribution, inputs: Sequence[int]) -> InputDistribution:
    """
    Marginal p(x_I) as a distribution on the reduced space X_I (no outputs).
    """
    pair = SubsetPair(I=tuple(inputs), J=())
    reduced = p.space.reduced(pair)
    reduced_inputs = ProductSpace(input_cards=reduced.input_cards, output_cards=())
    axes = tuple(i for i in range(p.space.n_inputs) if i not in pair.I)
    return InputDistribution(
        space=reduced_inputs,
        probs=p.probs.reshape(p.space.input_cards).sum(axis=axes).reshape(-1),
    )


def channel_marginal(p: InputDistribution, k: Channel, spec: MarginalSpec) -> Channel:
    """
    Marginal operator for channels: k(x_I;y_J) = sum p(x_{I^c}|x_I) k(x;y) over x_{I^c}, y_{J^c}.
    For I = () this is the single-row channel sum_x p(x) k(x;y_J).
    :param p: strictly positive input distribution
    :param k: channel on the same space as p
    :param spec: the (I,J) pair, J nonempty
    :return: channel from X_I to Y_J
    """
    space = check_same_space(p.space, k.space)
    reduced = space.reduced(spec)
    tensor = channel_marginal_tensor(space, p.probs, k.rows, spec)
    return Channel(space=reduced, rows=tensor.reshape(reduced.input_size, reduced.output_size))


def product_channel(first: Channel, second: Channel) -> Channel:
    """
    k(x, x'; y, y') = first(x;y) second(x';y') on the concatenated factor lists.
    """
    space = ProductSpace(
        input_cards=first.space.input_cards + second.space.input_cards,
        output_cards=first.space.output_cards + second.space.output_cards,
    )
    return Channel(space=space, rows=np.kron(first.rows, second.rows))
