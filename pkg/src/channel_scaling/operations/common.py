from typing import Tuple

import numpy as np

from channel_scaling.exceptions import InfeasibleScalingError
from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import ProductSpace
from channel_scaling.models import SubsetPair


def check_same_space(*spaces: ProductSpace) -> ProductSpace:
    """
    Return the common space of the arguments.
    :param spaces: spaces that have to coincide
    :return: the first space
    """
    first = spaces[0]
    for other in spaces[1:]:
        if other != first:
            raise SpaceMismatchError(
                f"Product spaces differ: {list(first.input_cards)}->{list(first.output_cards)} "
                f"vs {list(other.input_cards)}->{list(other.output_cards)}"
            )
    return first


def broadcast_shape(space: ProductSpace, pair: SubsetPair) -> Tuple[int, ...]:
    """
    Shape of an (I,J)-marginal kept at full rank, i.e. with singleton axes outside I and J.
    """
    return tuple(card if i in pair.I else 1 for i, card in enumerate(space.input_cards)) + tuple(
        card if j in pair.J else 1 for j, card in enumerate(space.output_cards)
    )


def summed_axes(space: ProductSpace, pair: SubsetPair) -> Tuple[int, ...]:
    n = space.n_inputs
    return tuple(i for i in range(n) if i not in pair.I) + tuple(
        n + j for j in range(space.n_outputs) if j not in pair.J
    )


def joint_tensor(space: ProductSpace, p: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return (p[:, None] * rows).reshape(space.tensor_shape)


def marginal_tensor(space: ProductSpace, tensor: np.ndarray, pair: SubsetPair) -> np.ndarray:
    return tensor.sum(axis=summed_axes(space, pair), keepdims=True)


def input_weights(space: ProductSpace, p: np.ndarray, pair: SubsetPair) -> np.ndarray:
    """
    p(x_I) kept at full joint rank, so it broadcasts against (I,J)-marginals.
    """
    axes = tuple(i for i in range(space.n_inputs) if i not in pair.I)
    weights = p.reshape(space.input_cards).sum(axis=axes, keepdims=True)
    return weights.reshape(weights.shape + (1,) * space.n_outputs)


def channel_marginal_tensor(
    space: ProductSpace, p: np.ndarray, rows: np.ndarray, pair: SubsetPair
) -> np.ndarray:
    """
    k(x_I;y_J) of the marginal operator, kept at full rank.
    """
    joint = marginal_tensor(space, joint_tensor(space, p, rows), pair)
    return joint / input_weights(space, p, pair)


def expand_reduced(space: ProductSpace, reduced: np.ndarray, pair: SubsetPair) -> np.ndarray:
    """
    Reshape values given on X_I x Y_J (flat or 2-d) so they broadcast over the full space.
    """
    return np.asarray(reduced).reshape(broadcast_shape(space, pair))


def scaling_ratio(
    space: ProductSpace, prescribed: np.ndarray, current: np.ndarray, pair: SubsetPair
) -> np.ndarray:
    """
    prescribed / current with 0/0 := 0, both given at full rank (see broadcast_shape).
    :raises InfeasibleScalingError: prescribed is positive where current vanishes
    """
    infeasible = (current <= 0) & (prescribed > 0)
    if np.any(infeasible):
        coords = np.argwhere(infeasible)[0]
        cell = tuple(int(coords[i]) for i in pair.I) + tuple(
            int(coords[space.n_inputs + j]) for j in pair.J
        )
        raise InfeasibleScalingError(cell, pair.I, pair.J)
    ratio = np.zeros(np.broadcast(prescribed, current).shape)
    np.divide(prescribed, current, out=ratio, where=current > 0)
    return ratio


def check_reduced_space(
    space: ProductSpace, pair: SubsetPair, given: ProductSpace, what: str
) -> None:
    expected = space.reduced(pair)
    if given != expected:
        raise SpaceMismatchError(
            f"{what} lives on {list(given.input_cards)}->{list(given.output_cards)}, expected the "
            f"reduced space {list(expected.input_cards)}->{list(expected.output_cards)}"
        )
