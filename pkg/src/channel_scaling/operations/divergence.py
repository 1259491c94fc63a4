import math

import numpy as np

from channel_scaling.models import Channel
from channel_scaling.models import DivergenceValue
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.operations.common import check_same_space
from channel_scaling.operations.marginals import channel_marginal


def kl_nats(first: np.ndarray, second: np.ndarray) -> float:
    """
    sum first * log(first / second) over the support of first, with 0 log(0/z) = 0.
    :return: the value in nats, math.inf on a support violation
    """
    support = first > 0
    if np.any(second[support] <= 0):
        return math.inf
    a, b = first[support], second[support]
    return float(np.sum(a * np.log(a / b)))


def _divergence(nats: float) -> DivergenceValue:
    if math.isinf(nats):
        return DivergenceValue(infinite=True)
    return DivergenceValue(nats=nats)


def kl_joint(q1: JointDistribution, q2: JointDistribution) -> DivergenceValue:
    check_same_space(q1.space, q2.space)
    return _divergence(kl_nats(q1.probs, q2.probs))


def kl_channel(p: InputDistribution, k: Channel, m: Channel) -> DivergenceValue:
    """
    D_p(k||m) = sum_x p(x) sum_y k(x;y) log(k(x;y)/m(x;y)), evaluated on the composed joints.
    """
    check_same_space(p.space, k.space, m.space)
    weights = p.probs[:, None]
    return _divergence(kl_nats(weights * k.rows, weights * m.rows))


def mutual_information(p: InputDistribution, k: Channel) -> DivergenceValue:
    """
    I(X;Y) as the divergence of k from the channel whose rows all equal the output marginal.
    """
    space = check_same_space(p.space, k.space)
    output = channel_marginal(p, k, MarginalSpec(I=(), J=tuple(range(space.n_outputs))))
    independent = Channel(space=space, rows=np.repeat(output.rows, space.input_size, axis=0))
    return kl_channel(p, k, independent)
