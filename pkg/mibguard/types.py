"""
Common types for the detection pipeline.
"""

import re
from enum import Enum
from typing import TypeAlias

import numpy as np
import numpy.typing as npt


Number: TypeAlias = int | float
Vector: TypeAlias = npt.ArrayLike
FloatArray: TypeAlias = npt.NDArray[np.float64]
IntArray: TypeAlias = npt.NDArray[np.int64]
AttributeSchema: TypeAlias = tuple[str, ...]


class ClassLabel(Enum):
    """Traffic class of an observation window"""

    NORMAL = 0
    "Normal traffic"
    ICMP_ECHO = 1
    "ICMP echo (ping) flood"
    TCP_SYN = 2
    "TCP SYN spoofing flood"
    UDP_FLOOD = 3
    "UDP flood"
    HTTP_FLOOD = 4
    "HTTP request flood"
    SLOWLORIS = 5
    "Slowloris (incomplete HTTP headers)"
    SLOWPOST = 6
    "Slow HTTP POST bodies"
    BRUTE_FORCE = 7
    "Brute-force login attempts"

    @property
    def index(self) -> int:
        """Stable class index, used for every tie-break"""
        return self.value

    @property
    def canonical(self) -> str:
        """Canonical display name, e.g. "IcmpEcho" """
        return _CANONICAL_NAMES[self]

    @classmethod
    def from_index(cls, index: int) -> "ClassLabel":
        """Return the label with the given class index"""
        return cls(int(index))

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        """
        Parse a canonical name or a known alias. Case, spaces, "-" and "_" are
        ignored. Raises ValueError for anything else.
        """
        key = _alias_key(text)
        try:
            return _ALIASES[key]
        except KeyError as exc:
            raise ValueError(f"unknown class label: {text!r}") from exc

    def __str__(self):
        return self.canonical


NUM_CLASSES = len(ClassLabel)
LABELS = tuple(ClassLabel)

_CANONICAL_NAMES = {
    ClassLabel.NORMAL: "Normal",
    ClassLabel.ICMP_ECHO: "IcmpEcho",
    ClassLabel.TCP_SYN: "TcpSyn",
    ClassLabel.UDP_FLOOD: "UdpFlood",
    ClassLabel.HTTP_FLOOD: "HttpFlood",
    ClassLabel.SLOWLORIS: "Slowloris",
    ClassLabel.SLOWPOST: "Slowpost",
    ClassLabel.BRUTE_FORCE: "BruteForce",
}


def _alias_key(text: str) -> str:
    return re.sub(r"[\s_\-]+", "", text).lower()


# Display strings of the published dataset's summary table, then the short
# forms used in its CSV class column.
_ALIAS_TEXT = {
    ClassLabel.NORMAL: ["Normal", "normal traffic"],
    ClassLabel.ICMP_ECHO: ["ICMP-Echo Attack", "icmp-echo"],
    ClassLabel.TCP_SYN: ["TCP-SYN Attack", "tcp-syn"],
    ClassLabel.UDP_FLOOD: ["UDP Flood Attack", "udp-flood"],
    ClassLabel.HTTP_FLOOD: ["HTTP Flood Attack", "httpFlood"],
    ClassLabel.SLOWLORIS: ["Slowloris Attack", "slowloris"],
    ClassLabel.SLOWPOST: ["Slowpost Attack", "slowpost"],
    ClassLabel.BRUTE_FORCE: ["Brute Force Attack", "bruteForce"],
}

_ALIASES = {_alias_key(label.canonical): label for label in ClassLabel}
_ALIASES.update(
    {_alias_key(text): label for label, texts in _ALIAS_TEXT.items() for text in texts}
)


class Evaluator(Enum):
    """Attribute evaluator used with the ranker search"""

    RELIEFF = "relieff"
    "Nearest hit / nearest miss weighting"
    INFO_GAIN = "infogain"
    "Entropy reduction of the class after discretization"
    CORRELATION = "correlation"
    "Prior-weighted |Pearson r| against one-vs-rest class indicators"


class ClassifierKind(Enum):
    """Classifier family"""

    BAYES = "bayes"
    "Gaussian naive Bayes"
    IBK = "ibk"
    "Lazy k-nearest-neighbour"
    TREE = "j48"
    "C4.5-style gain ratio tree"
    RULES = "rules"
    "Sequential covering decision list"
    BAGGING = "bagging"
    "Bootstrap aggregation of a base classifier"


class OutputFormat(Enum):
    """Output format of reporting subcommands"""

    TEXT = "text"
    "Fixed-width table"
    JSON = "json"
    "Loss-free JSON document"


class PduType(Enum):
    """SNMP v2c PDU types handled by the codec"""

    GET_REQUEST = "get-request"
    "Manager asks for the values of a list of objects"
    RESPONSE = "response"
    "Agent answers a request"


class ValueKind(Enum):
    """Syntax of a variable binding value"""

    INTEGER = "integer"
    OCTET_STRING = "string"
    OBJECT_ID = "objectId"
    COUNTER32 = "counter32"
    GAUGE32 = "gauge32"
    TIME_TICKS = "timeTicks"
    NULL = "unSpecified"
    "Placeholder value of request bindings"
    NO_SUCH_OBJECT = "noSuchObject"
    "Exception value: the agent does not implement the object"
    NO_SUCH_INSTANCE = "noSuchInstance"
    "Exception value: the object exists but not this instance"
    END_OF_MIB_VIEW = "endOfMibView"
    "Exception value: nothing follows in the agent's view"

    @property
    def is_exception(self) -> bool:
        """True for the v2c exception values that replace a missing object"""
        return self in (
            ValueKind.NO_SUCH_OBJECT,
            ValueKind.NO_SUCH_INSTANCE,
            ValueKind.END_OF_MIB_VIEW,
        )
