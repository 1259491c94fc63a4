from pathlib import Path
from typing import Callable
from typing import Generator
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import pytest

from channel_scaling.models import Channel
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProductSpace
from channel_scaling.models import SubsetPair
from channel_scaling.operations.divergence import kl_channel
from channel_scaling.operations.marginals import uniform_channel
from channel_scaling.operations.projection import exp_tilt


test_data_folder = Path(__file__).parent / "test_data"
xor_path = test_data_folder / "xor_synergy.json"
and_path = test_data_folder / "and_synergy.json"
two_outputs_path = test_data_folder / "two_outputs.json"
malformed_constraint_path = test_data_folder / "malformed_constraint.json"
malformed_json_path = test_data_folder / "malformed_json.json"
infeasible_path = test_data_folder / "infeasible_reference.json"


def random_cards(rng: np.random.Generator, max_factors: int, max_card: int) -> Tuple[int, ...]:
    n = int(rng.integers(1, max_factors + 1))
    return tuple(int(card) for card in rng.integers(2, max_card + 1, size=n))


def random_space(rng: np.random.Generator, max_factors: int = 2, max_card: int = 3) -> ProductSpace:
    return ProductSpace(
        input_cards=random_cards(rng, max_factors, max_card),
        output_cards=random_cards(rng, max_factors, max_card),
    )


def random_input(rng: np.random.Generator, space: ProductSpace) -> InputDistribution:
    probs = rng.uniform(0.2, 1.0, size=space.input_size)
    return InputDistribution(space=space, probs=probs / probs.sum())


def random_channel(rng: np.random.Generator, space: ProductSpace) -> Channel:
    rows = rng.uniform(0.05, 1.0, size=(space.input_size, space.output_size))
    return Channel(space=space, rows=rows / rows.sum(axis=1, keepdims=True))


def random_joint(rng: np.random.Generator, space: ProductSpace) -> JointDistribution:
    probs = rng.uniform(0.05, 1.0, size=space.input_size * space.output_size)
    return JointDistribution(space=space, probs=probs / probs.sum())


def random_pair(rng: np.random.Generator, space: ProductSpace) -> SubsetPair:
    inputs = [i for i in range(space.n_inputs) if rng.random() < 0.5]
    outputs = [j for j in range(space.n_outputs) if rng.random() < 0.5]
    return SubsetPair(I=inputs, J=outputs)


def random_spec(rng: np.random.Generator, space: ProductSpace) -> MarginalSpec:
    inputs = [i for i in range(space.n_inputs) if rng.random() < 0.5]
    outputs = [j for j in range(space.n_outputs) if rng.random() < 0.5]
    if not outputs:
        outputs = [int(rng.integers(space.n_outputs))]
    return MarginalSpec(I=inputs, J=outputs)


RandomProblem = Tuple[ProductSpace, InputDistribution, Channel]


@pytest.fixture(name="rng")
def rng_fixture() -> Generator[np.random.Generator, None, None]:
    yield np.random.default_rng(20240917)


@pytest.fixture(name="random_problem")
def random_problem_fixture(
    rng: np.random.Generator,
) -> Callable[[], RandomProblem]:
    def build() -> RandomProblem:
        space = random_space(rng)
        return space, random_input(rng, space), random_channel(rng, space)

    return build


@pytest.fixture(name="gate_space", scope="module")
def gate_space_fixture() -> ProductSpace:
    return ProductSpace(input_cards=(2, 2), output_cards=(2,))


def theta_oracle(
    p: InputDistribution,
    k: Channel,
    specs: Sequence[MarginalSpec],
    k0: Optional[Channel] = None,
    min_step: float = 1e-7,
    max_passes: int = 100_000,
) -> float:
    """
    min over theta of D_p(k || exp_tilt(k0, specs, theta)) by coordinate search with step halving.
    Independent of the scaling code except for exp_tilt and the divergence.
    """
    k0 = uniform_channel(k.space) if k0 is None else k0
    sizes = [
        k.space.reduced(spec).input_size * k.space.reduced(spec).output_size for spec in specs
    ]
    splits = np.cumsum(sizes)[:-1]

    def value(theta: np.ndarray) -> float:
        return kl_channel(p, k, exp_tilt(k0, specs, np.split(theta, splits))).nats

    theta = np.zeros(sum(sizes))
    best = value(theta)
    step = 1.0
    for _ in range(max_passes):
        if step < min_step:
            break
        improved = False
        for i in range(theta.size):
            for direction in (step, -step):
                candidate = theta.copy()
                candidate[i] += direction
                current = value(candidate)
                if current < best:
                    theta, best, improved = candidate, current, True
                    break
        if not improved:
            step /= 2
    return best
