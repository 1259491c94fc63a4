from enum import Enum
from typing import Dict
from typing import Tuple


NORMALIZATION_SLACK = 1e-12
POSITIVITY_THRESHOLD = 1e-15


class LogBase(str, Enum):
    """
    Enum for the units divergences are presented in. Internally everything is nats.
    """

    e = "e"
    two = "2"


class Encoding(str, Enum):
    """
    Enum for the two-point value sets binary nodes are mapped to.
    """

    signed = "signed"
    binary = "binary"


class GateKind(str, Enum):
    xor = "xor"
    and_ = "and"


class BuiltinChannel(str, Enum):
    """
    Enum for the channels that can be requested by name from the command line or a problem file.
    """

    xor = "xor"
    and_ = "and"
    interaction = "interaction"
    control = "control"


encoding_values: Dict[Encoding, Tuple[float, float]] = {
    Encoding.signed: (-1.0, 1.0),
    Encoding.binary: (0.0, 1.0),
}

gate_builtins: Dict[BuiltinChannel, GateKind] = {
    BuiltinChannel.xor: GateKind.xor,
    BuiltinChannel.and_: GateKind.and_,
}
