import numpy as np
import pytest

from channel_scaling.exceptions import DegenerateRowError
from channel_scaling.exceptions import InfeasibleScalingError
from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import Channel
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import NonnegativeKernel
from channel_scaling.models import ProductSpace
from channel_scaling.models import SubsetPair
from channel_scaling.operations.common import channel_marginal_tensor
from channel_scaling.operations.divergence import kl_joint
from channel_scaling.operations.marginals import channel_marginal
from channel_scaling.operations.marginals import compose
from channel_scaling.operations.marginals import disintegrate
from channel_scaling.operations.marginals import joint_marginal
from channel_scaling.operations.marginals import uniform_channel
from channel_scaling.operations.marginals import uniform_input
from channel_scaling.operations.scaling import ij_scale_raw
from channel_scaling.operations.scaling import ij_scale_raw_from_prescription
from channel_scaling.operations.scaling import input_scale
from channel_scaling.operations.scaling import joint_scale
from channel_scaling.operations.scaling import normalize_rows
from channel_scaling.operations.scaling import normalized_ij_scale
from tests.conftest import random_channel
from tests.conftest import random_input
from tests.conftest import random_joint
from tests.conftest import random_pair
from tests.conftest import random_space
from tests.conftest import random_spec


SINGLE = ProductSpace(input_cards=(2,), output_cards=(2,))


def test_joint_scale_example():
    q = JointDistribution(space=SINGLE, probs=[0.25, 0.25, 0.25, 0.25])
    pair = SubsetPair(I=[], J=[0])
    prescribed = JointDistribution(space=SINGLE.reduced(pair), probs=[0.8, 0.2])
    scaled = joint_scale(q, pair, prescribed)
    np.testing.assert_allclose(scaled.probs, [0.4, 0.1, 0.4, 0.1])


def test_joint_scale_zero_over_zero():
    q = JointDistribution(space=SINGLE, probs=[0.5, 0.0, 0.5, 0.0])
    pair = SubsetPair(I=[], J=[0])
    prescribed = JointDistribution(space=SINGLE.reduced(pair), probs=[1.0, 0.0])
    np.testing.assert_allclose(joint_scale(q, pair, prescribed).probs, q.probs)


def test_joint_scale_infeasible():
    q = JointDistribution(space=SINGLE, probs=[0.5, 0.0, 0.5, 0.0])
    pair = SubsetPair(I=[], J=[0])
    prescribed = JointDistribution(space=SINGLE.reduced(pair), probs=[0.5, 0.5])
    with pytest.raises(InfeasibleScalingError) as error:
        joint_scale(q, pair, prescribed)
    assert error.value.cell == (1,)


def test_joint_scale_wrong_reduced_space():
    q = JointDistribution(space=SINGLE, probs=[0.25, 0.25, 0.25, 0.25])
    with pytest.raises(SpaceMismatchError):
        joint_scale(q, SubsetPair(I=[0], J=[]), q)


def test_joint_scale_matches_prescription(rng):
    for _ in range(500):
        space = random_space(rng)
        q, r = random_joint(rng, space), random_joint(rng, space)
        pair = random_pair(rng, space)
        prescribed = joint_marginal(r, pair)
        scaled = joint_scale(q, pair, prescribed)
        np.testing.assert_allclose(
            joint_marginal(scaled, pair).probs, prescribed.probs, rtol=0, atol=1e-12
        )


def test_joint_scale_is_i_projection(rng):
    """Any r with the prescribed marginal satisfies D(r||q) = D(r||q') + D(q'||q)."""
    for _ in range(200):
        space = random_space(rng)
        q, r = random_joint(rng, space), random_joint(rng, space)
        pair = random_pair(rng, space)
        scaled = joint_scale(q, pair, joint_marginal(r, pair))
        assert kl_joint(r, q).nats == pytest.approx(
            kl_joint(r, scaled).nats + kl_joint(scaled, q).nats, abs=1e-10
        )


def test_input_scale(rng):
    for _ in range(500):
        space = random_space(rng)
        q, p = random_joint(rng, space), random_input(rng, space)
        scaled_p, scaled_k = disintegrate(input_scale(q, p))
        _, k = disintegrate(q)
        np.testing.assert_allclose(scaled_p.probs, p.probs, rtol=0, atol=1e-12)
        np.testing.assert_allclose(scaled_k.rows, k.rows, rtol=0, atol=1e-12)


def test_input_scale_wrong_space():
    q = JointDistribution(space=SINGLE, probs=[0.25, 0.25, 0.25, 0.25])
    other = ProductSpace(input_cards=(3,), output_cards=(2,))
    with pytest.raises(SpaceMismatchError):
        input_scale(q, uniform_input(other))


def test_raw_scaling_has_prescribed_marginal(rng):
    for _ in range(500):
        space = random_space(rng)
        p = random_input(rng, space)
        k, prescription = random_channel(rng, space), random_channel(rng, space)
        spec = random_spec(rng, space)
        raw = ij_scale_raw_from_prescription(p, k, prescription, spec)
        reached = channel_marginal_tensor(space, p.probs, raw.rows, spec)
        expected = channel_marginal_tensor(space, p.probs, prescription.rows, spec)
        np.testing.assert_allclose(reached, expected, rtol=0, atol=1e-12)


def test_joint_level_scaling_matches_channel_scaling(rng):
    """Joint scaling of p k followed by input scaling to p equals p times the normalized scaling."""
    for _ in range(500):
        space = random_space(rng)
        p = random_input(rng, space)
        k, prescription = random_channel(rng, space), random_channel(rng, space)
        spec = random_spec(rng, space)
        kbar = channel_marginal(p, prescription, spec)
        joint_target = joint_marginal(compose(p, prescription), spec)
        lifted = input_scale(joint_scale(compose(p, k), spec, joint_target), p)
        np.testing.assert_allclose(
            lifted.probs,
            compose(p, normalized_ij_scale(p, k, kbar, spec)).probs,
            rtol=0,
            atol=1e-12,
        )


def test_raw_scaling_is_joint_scaling_of_composition(rng):
    """p sigma_IJ k equals the joint scaling of p k onto the (I,J)-marginal of p kbar."""
    for _ in range(500):
        space = random_space(rng)
        p = random_input(rng, space)
        k, prescription = random_channel(rng, space), random_channel(rng, space)
        spec = random_spec(rng, space)
        raw = ij_scale_raw_from_prescription(p, k, prescription, spec)
        joint_target = joint_marginal(compose(p, prescription), spec)
        np.testing.assert_allclose(
            (p.probs[:, None] * raw.rows).reshape(-1),
            joint_scale(compose(p, k), spec, joint_target).probs,
            rtol=0,
            atol=1e-12,
        )


def test_scaling_keeps_positivity(rng):
    for _ in range(100):
        space = random_space(rng)
        p = random_input(rng, space)
        k, prescription = random_channel(rng, space), random_channel(rng, space)
        spec = random_spec(rng, space)
        scaled = normalized_ij_scale(p, k, channel_marginal(p, prescription, spec), spec)
        assert np.all(scaled.rows > 0)


def test_full_spec_scaling_reaches_prescription(rng):
    space = random_space(rng)
    p = random_input(rng, space)
    k, prescription = random_channel(rng, space), random_channel(rng, space)
    full = MarginalSpec(I=range(space.n_inputs), J=range(space.n_outputs))
    scaled = normalized_ij_scale(p, k, channel_marginal(p, prescription, full), full)
    np.testing.assert_allclose(scaled.rows, prescription.rows, rtol=0, atol=1e-12)


def test_ij_scale_raw_wrong_marginal_space(gate_space):
    p = uniform_input(gate_space)
    k = uniform_channel(gate_space)
    with pytest.raises(SpaceMismatchError):
        ij_scale_raw(p, k, k, MarginalSpec(I=[0], J=[0]))


def test_normalize_rows():
    raw = NonnegativeKernel(space=SINGLE, rows=[[1.0, 3.0], [2.0, 2.0]])
    channel, z = normalize_rows(raw)
    np.testing.assert_allclose(channel.rows, [[0.25, 0.75], [0.5, 0.5]])
    np.testing.assert_allclose(z.z, [4.0, 4.0])
    assert isinstance(channel, Channel)


def test_normalize_zero_row():
    raw = NonnegativeKernel(space=SINGLE, rows=[[1.0, 3.0], [0.0, 0.0]])
    with pytest.raises(DegenerateRowError) as error:
        normalize_rows(raw)
    assert error.value.x == 1


def test_scaling_uses_conditional_input_weights():
    space = ProductSpace(input_cards=(2, 2), output_cards=(2,))
    p = InputDistribution(space=space, probs=[0.1, 0.3, 0.2, 0.4])
    k = uniform_channel(space)
    spec = MarginalSpec(I=[0], J=[0])
    kbar = Channel(space=space.reduced(spec), rows=[[0.9, 0.1], [0.2, 0.8]])
    scaled = normalized_ij_scale(p, k, kbar, spec)
    np.testing.assert_allclose(channel_marginal(p, scaled, spec).rows, kbar.rows, atol=1e-15)
