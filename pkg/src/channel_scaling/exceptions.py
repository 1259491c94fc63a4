from typing import Optional
from typing import Tuple


class ChannelScalingError(Exception):
    """
    Base class of the errors raised by channel_scaling. Value-invariant violations on construction
    are reported by pydantic as ValidationError instead.
    """


class SpaceMismatchError(ChannelScalingError):
    """
    Raised when two objects that have to live on the same product space don't, or when a measure
    gets a channel with the wrong number of factors.
    """


class DegenerateInputError(ChannelScalingError):
    def __init__(self, x: int) -> None:
        self.x = x
        super().__init__(f"X-marginal of the joint distribution is zero at input index {x}")


class DegenerateRowError(ChannelScalingError):
    def __init__(self, x: int) -> None:
        self.x = x
        super().__init__(f"Row {x} of the kernel sums to zero and cannot be normalized")


class InfeasibleScalingError(ChannelScalingError):
    """
    Raised when a prescribed marginal is positive on a cell where the current marginal vanishes.
    :param cell: coordinates of the offending cell on the reduced space, inputs first
    """

    def __init__(
        self,
        cell: Tuple[int, ...],
        I: Tuple[int, ...],  # noqa: N803
        J: Tuple[int, ...],  # noqa: N803
    ) -> None:
        self.cell = cell
        super().__init__(
            f"Prescribed marginal for I={list(I)}, J={list(J)} is positive at cell {list(cell)} "
            f"where the current marginal is zero"
        )


class InvalidConfigError(ChannelScalingError):
    def __init__(self, field: str, message: str, index: Optional[int] = None) -> None:
        self.field = field if index is None else f"{field} -> {index}"
        super().__init__(f"{self.field}: {message}")
