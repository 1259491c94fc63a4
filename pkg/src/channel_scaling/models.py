import math
from typing import Any
from typing import Dict
from typing import List
from typing import Literal
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
from pydantic import BaseModel
from pydantic import Field
from pydantic import root_validator
from pydantic import validator

from channel_scaling.common import NORMALIZATION_SLACK
from channel_scaling.common import POSITIVITY_THRESHOLD
from channel_scaling.common import BuiltinChannel
from channel_scaling.common import Encoding
from channel_scaling.common import LogBase
from channel_scaling.common import encoding_values
from channel_scaling.exceptions import SpaceMismatchError


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


def _as_float_array(value: Any) -> np.ndarray:
    return np.array(value, dtype=float)


def _renormalized(values: np.ndarray, what: str, axis: Optional[int] = None) -> np.ndarray:
    """
    Divide by the computed sum(s) if they are within NORMALIZATION_SLACK of one.
    :param values: nonnegative array
    :param what: name used in the error message
    :param axis: None for a total sum, 1 for row sums
    :return: renormalized copy
    """
    totals = values.sum(axis=axis, keepdims=axis is not None)
    worst = float(np.max(np.abs(totals - 1.0)))
    if not worst <= NORMALIZATION_SLACK:
        raise ValueError(f"{what} must sum to 1 within {NORMALIZATION_SLACK} (off by {worst:.3e})")
    return values / totals


def _encode(cards: Tuple[int, ...], coords: Sequence[int]) -> int:
    if len(coords) != len(cards):
        raise ValueError(f"Expected {len(cards)} coordinates, got {len(coords)}")
    if not cards:
        return 0
    return int(np.ravel_multi_index(tuple(int(c) for c in coords), cards))


def _decode(cards: Tuple[int, ...], index: int) -> Tuple[int, ...]:
    if not cards:
        if index != 0:
            raise ValueError(f"Index {index} out of range for the one-point space")
        return ()
    return tuple(int(c) for c in np.unravel_index(index, cards))


class ProductSpace(BaseModel):
    """
    Cardinalities of the input factors X_1..X_N and output factors Y_1..Y_M. Flat indices are
    mixed-radix with the last coordinate varying fastest; in joint indices inputs come first.
    Empty factor lists denote the one-point space and only occur for reduced spaces X_I x Y_J.
    """

    input_cards: Tuple[int, ...]
    output_cards: Tuple[int, ...]

    class Config:
        frozen = True

    @validator("input_cards", "output_cards")
    def _cards_positive(cls, cards: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(card < 1 for card in cards):
            raise ValueError(f"every cardinality must be at least 1, got {list(cards)}")
        if math.prod(cards) > np.iinfo(np.intp).max:
            raise ValueError(f"total size of {list(cards)} exceeds the index range")
        return cards

    @property
    def n_inputs(self) -> int:
        return len(self.input_cards)

    @property
    def n_outputs(self) -> int:
        return len(self.output_cards)

    @property
    def input_size(self) -> int:
        return math.prod(self.input_cards)

    @property
    def output_size(self) -> int:
        return math.prod(self.output_cards)

    @property
    def tensor_shape(self) -> Tuple[int, ...]:
        return self.input_cards + self.output_cards

    def encode_input(self, coords: Sequence[int]) -> int:
        return _encode(self.input_cards, coords)

    def decode_input(self, index: int) -> Tuple[int, ...]:
        return _decode(self.input_cards, index)

    def encode_output(self, coords: Sequence[int]) -> int:
        return _encode(self.output_cards, coords)

    def decode_output(self, index: int) -> Tuple[int, ...]:
        return _decode(self.output_cards, index)

    def encode_joint(self, coords: Sequence[int]) -> int:
        return _encode(self.tensor_shape, coords)

    def decode_joint(self, index: int) -> Tuple[int, ...]:
        return _decode(self.tensor_shape, index)

    def reduced(self, pair: "SubsetPair") -> "ProductSpace":
        """
        The space X_I x Y_J.
        """
        pair.validate_for(self)
        return ProductSpace(
            input_cards=tuple(self.input_cards[i] for i in pair.I),
            output_cards=tuple(self.output_cards[j] for j in pair.J),
        )


class SubsetPair(BaseModel):
    """
    A pair (I, J) of input and output index subsets, stored sorted and duplicate-free. Both may be
    empty; joint-level constraints with J = () express a prescribed input marginal.
    """

    I: Tuple[int, ...] = ()  # noqa: E741
    J: Tuple[int, ...] = ()

    class Config:
        frozen = True

    @validator("I", "J", pre=True)
    def _sorted_unique(cls, indices: Any) -> Tuple[int, ...]:
        values = [int(i) for i in indices]
        if any(i < 0 for i in values):
            raise ValueError(f"indices must be nonnegative, got {values}")
        return tuple(sorted(set(values)))

    @classmethod
    def inputs_only(cls, space: ProductSpace) -> "SubsetPair":
        return cls(I=tuple(range(space.n_inputs)), J=())

    def validate_for(self, space: ProductSpace) -> None:
        if any(i >= space.n_inputs for i in self.I) or any(j >= space.n_outputs for j in self.J):
            raise SpaceMismatchError(
                f"Subsets I={list(self.I)}, J={list(self.J)} do not fit a space with "
                f"{space.n_inputs} inputs and {space.n_outputs} outputs"
            )


class MarginalSpec(SubsetPair):
    """
    An (I, J) pair for channel marginals: I may be empty, J may not.
    """

    @validator("J")
    def _outputs_nonempty(cls, outputs: Tuple[int, ...]) -> Tuple[int, ...]:
        if not outputs:
            raise ValueError("J must be a nonempty set of output indices")
        return outputs


class _ArrayModel(BaseModel):
    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True
        copy_on_model_validation = "none"

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        for name in self.__fields__:
            mine, theirs = getattr(self, name), getattr(other, name)
            if isinstance(mine, np.ndarray):
                if not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True


class InputDistribution(_ArrayModel):
    space: ProductSpace
    probs: np.ndarray

    _as_array = validator("probs", pre=True, allow_reuse=True)(_as_float_array)

    @validator("probs")
    def _strictly_positive(cls, probs: np.ndarray, values: Dict[str, Any]) -> np.ndarray:
        space: Optional[ProductSpace] = values.get("space")
        if space is None:
            return probs
        if probs.shape != (space.input_size,):
            raise ValueError(f"expected {space.input_size} probabilities, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        low = np.flatnonzero(probs <= POSITIVITY_THRESHOLD)
        if low.size:
            raise ValueError(
                f"input distribution must be strictly positive, "
                f"entry {int(low[0])} is {probs[low[0]]}"
            )
        return _frozen(_renormalized(probs, "input distribution"))


class Channel(_ArrayModel):
    """
    Row-stochastic kernel k(x;y), rows indexed by flat inputs, columns by flat outputs.
    """

    space: ProductSpace
    rows: np.ndarray

    _as_array = validator("rows", pre=True, allow_reuse=True)(_as_float_array)

    @validator("rows")
    def _row_stochastic(cls, rows: np.ndarray, values: Dict[str, Any]) -> np.ndarray:
        space: Optional[ProductSpace] = values.get("space")
        if space is None:
            return rows
        expected = (space.input_size, space.output_size)
        if rows.shape != expected:
            raise ValueError(f"expected rows of shape {expected}, got {rows.shape}")
        if not np.all(np.isfinite(rows)) or np.any(rows < 0):
            raise ValueError("channel entries must be finite and nonnegative")
        return _frozen(_renormalized(rows, "every channel row", axis=1))


class JointDistribution(_ArrayModel):
    space: ProductSpace
    probs: np.ndarray

    _as_array = validator("probs", pre=True, allow_reuse=True)(_as_float_array)

    @validator("probs")
    def _normalized(cls, probs: np.ndarray, values: Dict[str, Any]) -> np.ndarray:
        space: Optional[ProductSpace] = values.get("space")
        if space is None:
            return probs
        size = space.input_size * space.output_size
        if probs.shape != (size,):
            raise ValueError(f"expected {size} probabilities, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("joint probabilities must be finite and nonnegative")
        return _frozen(_renormalized(probs, "joint distribution"))


class NonnegativeKernel(_ArrayModel):
    """
    Element of F(X,Y): nonnegative, rows need not sum to one.
    """

    space: ProductSpace
    rows: np.ndarray

    _as_array = validator("rows", pre=True, allow_reuse=True)(_as_float_array)

    @validator("rows")
    def _nonnegative(cls, rows: np.ndarray, values: Dict[str, Any]) -> np.ndarray:
        space: Optional[ProductSpace] = values.get("space")
        if space is None:
            return rows
        expected = (space.input_size, space.output_size)
        if rows.shape != expected:
            raise ValueError(f"expected rows of shape {expected}, got {rows.shape}")
        if not np.all(np.isfinite(rows)) or np.any(rows < 0):
            raise ValueError("kernel entries must be finite and nonnegative")
        return _frozen(rows)


class NormalizationVector(_ArrayModel):
    z: np.ndarray

    _as_array = validator("z", pre=True, allow_reuse=True)(_as_float_array)

    @validator("z")
    def _positive(cls, z: np.ndarray) -> np.ndarray:
        if z.ndim != 1 or np.any(z <= 0):
            raise ValueError("normalization constants must form a positive vector")
        return _frozen(z)


class DivergenceValue(BaseModel):
    """
    A KL divergence in nats. Support violations are flagged with infinite=True, nats is then inf.
    """

    nats: float = 0.0
    infinite: bool = False

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def _nonnegative(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["infinite"]:
            values["nats"] = math.inf
            return values
        nats = values["nats"]
        if not math.isfinite(nats):
            raise ValueError("finite divergences need a finite value, use infinite=True otherwise")
        # summation rounding can leave tiny negatives
        if nats < 0:
            if nats < -1e-9:
                raise ValueError(f"divergence must be nonnegative, got {nats}")
            values["nats"] = 0.0
        return values

    @property
    def bits(self) -> float:
        return self.nats / math.log(2)

    def in_base(self, base: LogBase) -> float:
        return self.bits if base is LogBase.two else self.nats

    def __float__(self) -> float:
        return self.nats


class FamilySpec(_ArrayModel):
    """
    Ordered constraint list plus the prescription channel whose marginals define the mixture family.
    The list order is the sweep order.
    """

    specs: Tuple[MarginalSpec, ...]
    prescription: Channel

    @root_validator(skip_on_failure=True)
    def _specs_fit(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        specs: Tuple[MarginalSpec, ...] = values["specs"]
        if not specs:
            raise ValueError("a family needs at least one marginal spec")
        for spec in specs:
            spec.validate_for(values["prescription"].space)
        return values


class SolverOptions(BaseModel):
    tolerance: float = Field(1e-9, gt=0)
    max_sweeps: int = Field(100_000, ge=1)
    trace_enabled: bool = False
    log_base: LogBase = LogBase.e
    keep_iterates: bool = False

    class Config:
        frozen = True


class TraceRecord(BaseModel):
    """
    Diagnostics after one full sweep over the constraint list.
    """

    sweep: int
    divergence_to_prescription_nats: Optional[float] = None
    divergence_from_target_nats: Optional[float] = None
    residual: float
    elapsed_ns: int

    class Config:
        frozen = True


class ProjectionResult(_ArrayModel):
    limit: Channel
    sweeps_used: int
    converged: bool
    residual: float
    trace: List[TraceRecord] = []
    iterates: List[np.ndarray] = []
    pythagoras_defect: Optional[float] = None


class JointProjectionResult(_ArrayModel):
    limit: JointDistribution
    sweeps_used: int
    converged: bool
    residual: float
    trace: List[TraceRecord] = []
    iterates: List[np.ndarray] = []
    pythagoras_defect: Optional[float] = None


class ExampleChannelParams(BaseModel):
    alpha: float = 1.0
    beta: float = 2.0
    input_encoding: Tuple[float, float] = encoding_values[Encoding.signed]
    output_encoding: Tuple[float, float] = encoding_values[Encoding.signed]

    class Config:
        frozen = True

    @validator("input_encoding", "output_encoding")
    def _distinct(cls, encoding: Tuple[float, float]) -> Tuple[float, float]:
        if encoding[0] == encoding[1]:
            raise ValueError(f"the two values of an encoding must differ, got {encoding}")
        return encoding

    @classmethod
    def with_encoding(
        cls, alpha: float, beta: float, encoding: Encoding = Encoding.signed
    ) -> "ExampleChannelParams":
        values = encoding_values[encoding]
        return cls(alpha=alpha, beta=beta, input_encoding=values, output_encoding=values)


class ChannelConfig(BaseModel):
    """
    Either explicit row-major rows or a builtin channel with its parameters.
    """

    rows: Optional[List[List[float]]] = None
    builtin: Optional[BuiltinChannel] = None
    noise: float = Field(0.0, ge=0.0, lt=1.0)
    alpha: float = 1.0
    beta: float = 2.0
    encoding: Encoding = Encoding.signed

    @root_validator(skip_on_failure=True)
    def _exactly_one_source(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if (values["rows"] is None) == (values["builtin"] is None):
            raise ValueError("give exactly one of 'rows' or 'builtin'")
        return values


class OptionsConfig(BaseModel):
    tolerance: float = Field(1e-9, gt=0)
    max_sweeps: int = Field(100_000, ge=1)
    log_base: LogBase = LogBase.e
    trace: bool = False

    def solver_options(self, keep_iterates: bool = False) -> SolverOptions:
        return SolverOptions(
            tolerance=self.tolerance,
            max_sweeps=self.max_sweeps,
            trace_enabled=self.trace,
            log_base=self.log_base,
            keep_iterates=keep_iterates,
        )


class ProblemConfig(BaseModel):
    input_alphabets: Optional[List[int]] = None
    output_alphabets: Optional[List[int]] = None
    input_distribution: Union[Literal["uniform"], List[float]] = "uniform"
    channel: ChannelConfig
    constraints: List[MarginalSpec] = []
    reference_channel: Union[Literal["uniform"], List[List[float]]] = "uniform"
    options: OptionsConfig = OptionsConfig()

    @root_validator(skip_on_failure=True)
    def _alphabets_for_explicit_rows(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["channel"].rows is not None:
            for field in ("input_alphabets", "output_alphabets"):
                if values[field] is None:
                    raise ValueError(f"'{field}' is required when the channel is given as rows")
        for field in ("input_alphabets", "output_alphabets"):
            alphabets = values[field]
            if alphabets is not None and (not alphabets or any(card < 1 for card in alphabets)):
                raise ValueError(f"'{field}' must be a nonempty list of positive cardinalities")
        return values
