"""
The scaling operators: joint scaling (with input scaling as the special case I = [N], J = ()),
unnormalized channel IJ-scaling and its row-normalized version.
"""
from typing import Tuple

import numpy as np

from channel_scaling.exceptions import DegenerateRowError
from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import Channel
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import NonnegativeKernel
from channel_scaling.models import NormalizationVector
from channel_scaling.models import ProductSpace
from channel_scaling.models import SubsetPair
from channel_scaling.operations.common import channel_marginal_tensor
from channel_scaling.operations.common import check_reduced_space
from channel_scaling.operations.common import check_same_space
from channel_scaling.operations.common import expand_reduced
from channel_scaling.operations.common import marginal_tensor
from channel_scaling.operations.common import scaling_ratio
from channel_scaling.operations.marginals import channel_marginal


def joint_scale_array(
    space: ProductSpace, probs: np.ndarray, pair: SubsetPair, prescribed: np.ndarray
) -> np.ndarray:
    tensor = probs.reshape(space.tensor_shape)
    current = marginal_tensor(space, tensor, pair)
    target = expand_reduced(space, prescribed, pair)
    return (tensor * scaling_ratio(space, target, current, pair)).reshape(-1)


def ij_scale_raw_array(
    space: ProductSpace, p: np.ndarray, rows: np.ndarray, kbar: np.ndarray, pair: SubsetPair
) -> np.ndarray:
    """
    k(x;y) kbar(x_I;y_J) / k(x_I;y_J) with kbar already at full rank.
    """
    current = channel_marginal_tensor(space, p, rows, pair)
    scaled = rows.reshape(space.tensor_shape) * scaling_ratio(space, kbar, current, pair)
    return scaled.reshape(space.input_size, space.output_size)


def normalize_rows_array(raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    z = raw.sum(axis=1)
    zero = np.flatnonzero(z <= 0)
    if zero.size:
        raise DegenerateRowError(int(zero[0]))
    return raw / z[:, None], z


def joint_scale(
    q: JointDistribution, spec: SubsetPair, prescribed: JointDistribution
) -> JointDistribution:
    """
    q'(x,y) = q(x,y) prescribed(x_I,y_J) / q(x_I,y_J), the I-projection of q onto the joints with
    the prescribed (I,J)-marginal. With spec = SubsetPair.inputs_only(space) this is input scaling.
    :param q: joint to be scaled
    :param spec: the (I,J) pair; J may be empty
    :param prescribed: distribution on the reduced space X_I x Y_J
    :return: scaled joint
    :raises InfeasibleScalingError: prescribed positive where the marginal of q is zero
    """
    check_reduced_space(q.space, spec, prescribed.space, "Prescribed marginal")
    return JointDistribution(
        space=q.space, probs=joint_scale_array(q.space, q.probs, spec, prescribed.probs)
    )


def input_scale(q: JointDistribution, p: InputDistribution) -> JointDistribution:
    """
    Scale q to have X-marginal p.
    """
    pair = SubsetPair.inputs_only(q.space)
    reduced = q.space.reduced(pair)
    if p.space.input_cards != reduced.input_cards:
        raise SpaceMismatchError("Input distribution and joint have different input factors")
    return joint_scale(q, pair, JointDistribution(space=reduced, probs=p.probs))


def ij_scale_raw(
    p: InputDistribution, k: Channel, kbar_marg: Channel, spec: MarginalSpec
) -> NonnegativeKernel:
    """
    Unnormalized IJ-scaling. kbar_marg is the prescribed marginal channel from X_I to Y_J.
    """
    space = check_same_space(p.space, k.space)
    check_reduced_space(space, spec, kbar_marg.space, "Prescribed marginal channel")
    kbar = expand_reduced(space, kbar_marg.rows, spec)
    rows = ij_scale_raw_array(space, p.probs, k.rows, kbar, spec)
    return NonnegativeKernel(space=space, rows=rows)


def ij_scale_raw_from_prescription(
    p: InputDistribution, k: Channel, prescription: Channel, spec: MarginalSpec
) -> NonnegativeKernel:
    """
    Same as ij_scale_raw, taking the full prescription channel and marginalizing it first.
    """
    return ij_scale_raw(p, k, channel_marginal(p, prescription, spec), spec)


def normalize_rows(raw: NonnegativeKernel) -> Tuple[Channel, NormalizationVector]:
    """
    Divide every row by Z(x), its sum.
    :raises DegenerateRowError: a row sums to zero
    """
    rows, z = normalize_rows_array(raw.rows)
    return Channel(space=raw.space, rows=rows), NormalizationVector(z=z)


def normalized_ij_scale(
    p: InputDistribution, k: Channel, kbar_marg: Channel, spec: MarginalSpec
) -> Channel:
    channel, _ = normalize_rows(ij_scale_raw(p, k, kbar_marg, spec))
    return channel
