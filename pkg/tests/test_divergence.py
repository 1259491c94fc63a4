import math

import numpy as np
import pytest
from pydantic import ValidationError

from channel_scaling.common import LogBase
from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import Channel
from channel_scaling.models import DivergenceValue
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import ProductSpace
from channel_scaling.operations.divergence import kl_channel
from channel_scaling.operations.divergence import kl_joint
from channel_scaling.operations.divergence import mutual_information
from channel_scaling.operations.marginals import compose
from channel_scaling.operations.marginals import disintegrate
from channel_scaling.operations.marginals import uniform_channel
from channel_scaling.operations.marginals import uniform_input
from tests.conftest import random_channel
from tests.conftest import random_input
from tests.conftest import random_joint
from tests.conftest import random_space


SINGLE = ProductSpace(input_cards=(2,), output_cards=(2,))


def test_kl_joint_example():
    q1 = JointDistribution(space=SINGLE, probs=[0.5, 0.5, 0.0, 0.0])
    q2 = JointDistribution(space=SINGLE, probs=[0.25, 0.25, 0.25, 0.25])
    assert kl_joint(q1, q2).nats == pytest.approx(math.log(2), abs=1e-15)
    assert kl_joint(q1, q1).nats == 0.0


def test_kl_joint_support_violation():
    q1 = JointDistribution(space=SINGLE, probs=[0.25, 0.25, 0.25, 0.25])
    q2 = JointDistribution(space=SINGLE, probs=[0.5, 0.5, 0.0, 0.0])
    divergence = kl_joint(q1, q2)
    assert divergence.infinite
    assert math.isinf(float(divergence))


def test_kl_channel_example():
    p = InputDistribution(space=SINGLE, probs=[0.5, 0.5])
    k = Channel(space=SINGLE, rows=[[1.0, 0.0], [0.0, 1.0]])
    assert kl_channel(p, k, uniform_channel(SINGLE)).nats == pytest.approx(math.log(2))
    assert kl_channel(p, uniform_channel(SINGLE), k).infinite


def test_kl_channel_space_mismatch():
    other = ProductSpace(input_cards=(2,), output_cards=(3,))
    with pytest.raises(SpaceMismatchError):
        kl_channel(uniform_input(SINGLE), uniform_channel(SINGLE), uniform_channel(other))


def test_units():
    divergence = DivergenceValue(nats=math.log(2))
    assert divergence.bits == pytest.approx(1.0)
    assert divergence.in_base(LogBase.two) == pytest.approx(1.0)
    assert divergence.in_base(LogBase.e) == math.log(2)


def test_divergence_value_invariants():
    assert DivergenceValue(nats=-1e-14).nats == 0.0
    assert DivergenceValue(infinite=True).nats == math.inf
    with pytest.raises(ValidationError):
        DivergenceValue(nats=-0.1)
    with pytest.raises(ValidationError):
        DivergenceValue(nats=math.inf)


def test_nonnegative(rng):
    for _ in range(200):
        space = random_space(rng)
        first, second = random_joint(rng, space), random_joint(rng, space)
        assert kl_joint(first, second).nats >= 0.0


def test_chain_rule(rng):
    """D(p1 k1 || p2 k2) = D(p1 || p2) + D_p1(k1 || k2)."""
    for _ in range(500):
        space = random_space(rng)
        q1, q2 = random_joint(rng, space), random_joint(rng, space)
        p1, k1 = disintegrate(q1)
        p2, k2 = disintegrate(q2)
        inputs = float(np.sum(p1.probs * np.log(p1.probs / p2.probs)))
        assert kl_joint(q1, q2).nats == pytest.approx(
            inputs + kl_channel(p1, k1, k2).nats, abs=1e-10
        )


def test_channel_divergence_is_joint_divergence(rng):
    for _ in range(50):
        space = random_space(rng)
        p = random_input(rng, space)
        k, m = random_channel(rng, space), random_channel(rng, space)
        assert kl_channel(p, k, m).nats == pytest.approx(
            kl_joint(compose(p, k), compose(p, m)).nats, abs=1e-12
        )


def test_mutual_information():
    p = InputDistribution(space=SINGLE, probs=[0.5, 0.5])
    copy = Channel(space=SINGLE, rows=[[1.0, 0.0], [0.0, 1.0]])
    assert mutual_information(p, copy).bits == pytest.approx(1.0)
    assert mutual_information(p, uniform_channel(SINGLE)).nats == 0.0
