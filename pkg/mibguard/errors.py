"""
Exception hierarchy. Each class carries the command line exit code for its
category of failure.
"""


class MibguardError(Exception):
    """Base class for all expected failures"""

    exit_code = 2


class UsageError(MibguardError):
    """Invalid flags or option strings"""

    exit_code = 1


class DatasetError(MibguardError, ValueError):
    """Malformed or unusable dataset. Positions are 1-based file positions."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} (at {', '.join(where)})"
        super().__init__(message)


class FeatureError(MibguardError, ValueError):
    """Attribute evaluation or ranking precondition failed"""


class ModelError(MibguardError, ValueError):
    """Training, prediction or model file failure"""


class SchemaMismatchError(ModelError):
    """Input does not match the schema a model was trained on"""


class EvaluationError(MibguardError, ValueError):
    """Confusion matrix or metric precondition failed"""


class CodecError(MibguardError, ValueError):
    """Datagram is not a decodable SNMP v2c message"""


class CollectorError(MibguardError):
    """Failure on the live collection path"""

    exit_code = 3


class PollTimeoutError(CollectorError):
    """No response from the agent after every retry"""


class AgentStatusError(CollectorError):
    """Agent answered with a non-zero error-status"""

    def __init__(self, status: int, index: int):
        self.status = status
        self.index = index
        super().__init__(f"agent returned error-status {status} at index {index}")


class MissingVarbindError(CollectorError):
    """A required object is absent from the response"""

    def __init__(self, oid: str, reason: str = "missing varbind"):
        self.oid = oid
        super().__init__(f"{reason}: {oid}")


class DeltaError(CollectorError, ValueError):
    """Snapshots cannot be differenced"""


class CounterResetError(DeltaError):
    """Agent restarted between snapshots (sysUpTime went backwards)"""
