import itertools
from typing import Optional

import numpy as np

from channel_scaling.common import GateKind
from channel_scaling.models import Channel
from channel_scaling.models import ExampleChannelParams
from channel_scaling.models import InputDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProductSpace
from channel_scaling.operations.marginals import channel_marginal
from channel_scaling.operations.marginals import uniform_input


GATE_SPACE = ProductSpace(input_cards=(2, 2), output_cards=(2,))
INTERACTION_SPACE = ProductSpace(input_cards=(2, 2, 2), output_cards=(2, 2))
CONTROL_SPACE = ProductSpace(input_cards=(2, 2), output_cards=(2, 2))


def make_gate(kind: GateKind, noise: float = 0.0) -> Channel:
    """
    Two-input logic gate on {0,1}, mixed with uniform rows by weight noise.
    :param kind: XOR or AND
    :param noise: weight of the uniform channel, in [0, 1)
    :return: channel on GATE_SPACE
    """
    if not 0.0 <= noise < 1.0:
        raise ValueError(f"noise must lie in [0, 1), got {noise}")
    rows = np.zeros((GATE_SPACE.input_size, GATE_SPACE.output_size))
    for x in range(GATE_SPACE.input_size):
        x1, x2 = GATE_SPACE.decode_input(x)
        y = x1 ^ x2 if kind is GateKind.xor else x1 & x2
        rows[x, y] = 1.0
    rows = (1.0 - noise) * rows + noise / GATE_SPACE.output_size
    return Channel(space=GATE_SPACE, rows=rows)


def make_interaction_channel(params: ExampleChannelParams, with_x3: bool = True) -> Channel:
    """
    k(x;y) = exp((alpha x1 x2 + beta x3)(y1 - y2)) / Z(x) on binary nodes. Without x3 this is the
    control channel h(x;y) = exp(alpha x1 x2 (y1 - y2)) / Z(x).
    """
    space = INTERACTION_SPACE if with_x3 else CONTROL_SPACE
    inputs = np.array(list(itertools.product(params.input_encoding, repeat=space.n_inputs)))
    outputs = np.array(list(itertools.product(params.output_encoding, repeat=space.n_outputs)))
    field = params.alpha * inputs[:, 0] * inputs[:, 1]
    if with_x3:
        field = field + params.beta * inputs[:, 2]
    log_energy = field[:, None] * (outputs[:, 0] - outputs[:, 1])[None, :]
    energy = np.exp(log_energy - log_energy.max(axis=1, keepdims=True))
    return Channel(space=space, rows=energy / energy.sum(axis=1, keepdims=True))


def marginalized_interaction_channel(
    params: ExampleChannelParams, p: Optional[InputDistribution] = None
) -> Channel:
    """
    The interaction channel with X3 marginalized out under p (uniform by default).
    """
    channel = make_interaction_channel(params, with_x3=True)
    p = uniform_input(INTERACTION_SPACE) if p is None else p
    return channel_marginal(p, channel, MarginalSpec(I=(0, 1), J=(0, 1)))
