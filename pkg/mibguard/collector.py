"""
Live collection: poll the six ICMP counters from an SNMP agent, difference
consecutive snapshots into per-window deltas and classify every window.
"""

import itertools
import json
import logging
import queue
import random
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import IO, Callable, Iterator

from .errors import (
    AgentStatusError,
    CodecError,
    CollectorError,
    CounterResetError,
    DeltaError,
    MibguardError,
    MissingVarbindError,
    PollTimeoutError,
    SchemaMismatchError,
    UsageError,
)
from .model import ClassDistribution, TrainedModel
from .oids import ICMP_ATTRIBUTES, OIDS, SYS_UPTIME, canonical_attribute
from .snmp import (
    MAX_COUNTER32,
    NO_ERROR,
    SnmpMessage,
    VarBind,
    decode_message,
    encode_message,
    get_request,
)
from .types import LABELS, ClassLabel, PduType, ValueKind

log = logging.getLogger(__name__)

COUNTER_MODULUS = 2**32
MIN_INTERVAL = 1.0
"""Shortest polling interval in seconds"""

MAX_DATAGRAM = 65535

Clock = Callable[[], float]
Sleep = Callable[[float], None]

_COUNTER_KINDS = (ValueKind.COUNTER32, ValueKind.GAUGE32, ValueKind.INTEGER)

_request_ids = itertools.count(random.randrange(1, 2**30))


@dataclass(frozen=True)
class AgentEndpoint:
    """Where and how to poll an agent"""

    host: str
    port: int = 161
    community: str = "public"
    timeout: float = 1.0
    "Seconds to wait for each attempt"
    retries: int = 1
    "Attempts after the first one"

    def __post_init__(self):
        if not self.timeout > 0:
            raise UsageError("endpoint timeout must be > 0")
        if self.retries < 0:
            raise UsageError("endpoint retries must be >= 0")
        if not 0 < self.port < 65536:
            raise UsageError(f"invalid port {self.port}")

    @classmethod
    def parse(cls, target: str, **kwargs) -> "AgentEndpoint":
        """Endpoint from "host" or "host:port" """
        host, colon, port = target.rpartition(":")
        if not colon:
            return cls(target, **kwargs)
        try:
            return cls(host, int(port), **kwargs)
        except ValueError as exc:
            raise UsageError(f"invalid agent address {target!r}") from exc

    @property
    def address(self) -> tuple[str, int]:
        """Socket address of the agent"""
        return self.host, self.port

    def __str__(self):
        return f"{self.host}:{self.port}"


@dataclass(frozen=True)
class CounterSnapshot:
    """Cumulative values of the six ICMP counters at one instant"""

    timestamp_ms: int
    "Monotonic milliseconds at response receipt"
    counters: dict[str, int]
    "Counter value per short attribute name"
    uptime: int | None = None
    "sysUpTime.0 in hundredths of a second, when requested"

    def __post_init__(self):
        missing = [name for name in ICMP_ATTRIBUTES if name not in self.counters]
        if missing:
            raise CollectorError(f"snapshot lacks {', '.join(missing)}")
        for name, value in self.counters.items():
            if not 0 <= value <= MAX_COUNTER32:
                raise CollectorError(f"{name} value {value} is not a Counter32")


@dataclass(frozen=True)
class DeltaVector:
    """Counter activity over one window, in ICMP attribute order"""

    start_ms: int
    end_ms: int
    deltas: dict[str, float] = field(default_factory=dict)

    @property
    def seconds(self) -> float:
        """Window length"""
        return (self.end_ms - self.start_ms) / 1000

    def rates(self) -> "DeltaVector":
        """Deltas divided by the window length"""
        return DeltaVector(
            self.start_ms,
            self.end_ms,
            {name: value / self.seconds for name, value in self.deltas.items()},
        )

    def vector(self, schema: tuple[str, ...]) -> list[float]:
        """Values aligned to a model schema; long attribute names are accepted"""
        return [self.deltas[canonical_attribute(name)] for name in schema]


def _request_oids(detect_restart: bool) -> list[str]:
    oids = [OIDS[name] for name in ICMP_ATTRIBUTES]
    if detect_restart:
        oids.append(SYS_UPTIME)
    return oids


def _await_response(
    sock: socket.socket, request_id: int, timeout: float
) -> SnmpMessage | None:
    deadline = time.monotonic() + timeout
    while (remaining := deadline - time.monotonic()) > 0:
        sock.settimeout(remaining)
        try:
            data, _ = sock.recvfrom(MAX_DATAGRAM)
        except (socket.timeout, ConnectionError):
            return None
        try:
            message = decode_message(data)
        except CodecError as exc:
            log.debug("ignoring undecodable datagram: %s", exc)
            continue
        if message.pdu_type != PduType.RESPONSE or message.request_id != request_id:
            log.debug("ignoring response to request %d", message.request_id)
            continue
        return message
    return None


def _varbind_value(varbind: VarBind | None, oid: str, kinds: tuple) -> int:
    if varbind is None:
        raise MissingVarbindError(oid)
    if varbind.is_exception:
        raise MissingVarbindError(oid, varbind.kind.value)
    if varbind.kind not in kinds:
        raise MissingVarbindError(oid, f"unexpected {varbind.kind.value} value")
    return int(varbind.value)


def poll(
    endpoint: AgentEndpoint,
    detect_restart: bool = False,
    clock: Clock = time.monotonic,
) -> CounterSnapshot:
    """
    Read the six ICMP counters with one GetRequest, resent up to
    endpoint.retries times. Responses to other requests are ignored.

    Raises PollTimeoutError, AgentStatusError or MissingVarbindError.
    """
    request_id = next(_request_ids) % 2**31
    payload = encode_message(
        get_request(endpoint.community, request_id, _request_oids(detect_restart))
    )

    attempts = endpoint.retries + 1
    reply = None
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as sock:
        for attempt in range(1, attempts + 1):
            try:
                sock.sendto(payload, endpoint.address)
            except OSError as exc:
                raise CollectorError(f"cannot send to {endpoint}: {exc}") from exc
            reply = _await_response(sock, request_id, endpoint.timeout)
            if reply is not None:
                break
            log.debug("attempt %d/%d to %s timed out", attempt, attempts, endpoint)
    if reply is None:
        raise PollTimeoutError(f"no response from {endpoint} after {attempts} attempts")
    timestamp_ms = int(clock() * 1000)

    if reply.error_status != NO_ERROR:
        raise AgentStatusError(reply.error_status, reply.error_index)

    by_oid = {varbind.oid: varbind for varbind in reply.varbinds}
    counters = {
        name: _varbind_value(by_oid.get(OIDS[name]), OIDS[name], _COUNTER_KINDS)
        for name in ICMP_ATTRIBUTES
    }
    uptime = None
    if detect_restart:
        uptime = _varbind_value(
            by_oid.get(SYS_UPTIME), SYS_UPTIME, (ValueKind.TIME_TICKS,)
        )
    return CounterSnapshot(timestamp_ms, counters, uptime)


def delta(prev: CounterSnapshot, curr: CounterSnapshot) -> DeltaVector:
    """
    Per-counter difference of two snapshots, assuming at most one wrap of each
    32-bit counter in between.

    Raises DeltaError for non-increasing timestamps and CounterResetError when
    both snapshots carry sysUpTime and it went backwards.
    """
    if curr.timestamp_ms <= prev.timestamp_ms:
        raise DeltaError(
            f"snapshot at {curr.timestamp_ms} ms does not follow {prev.timestamp_ms} ms"
        )
    if prev.uptime is not None and curr.uptime is not None:
        if curr.uptime < prev.uptime:
            raise CounterResetError(
                f"agent restarted: sysUpTime {prev.uptime} -> {curr.uptime}"
            )
    return DeltaVector(
        prev.timestamp_ms,
        curr.timestamp_ms,
        {
            name: float((curr.counters[name] - prev.counters[name]) % COUNTER_MODULUS)
            for name in ICMP_ATTRIBUTES
        },
    )


@dataclass(frozen=True)
class WindowEvent:
    """A classified window"""

    window: DeltaVector
    label: ClassLabel
    distribution: ClassDistribution

    def to_dict(self) -> dict:
        """JSON line form"""
        return {
            "window_start": self.window.start_ms,
            "window_end": self.window.end_ms,
            "deltas": dict(self.window.deltas),
            "label": self.label.canonical,
            "distribution": {
                label.canonical: float(p)
                for label, p in zip(LABELS, self.distribution)
            },
        }


@dataclass(frozen=True)
class GapEvent:
    """A window lost to a failed poll or an agent restart"""

    timestamp_ms: int
    reason: str

    def to_dict(self) -> dict:
        """JSON line form"""
        return {"gap": True, "time": self.timestamp_ms, "error": self.reason}


StreamEvent = WindowEvent | GapEvent

_DONE = object()


@dataclass(frozen=True)
class _PollerCrash:
    error: Exception


def check_stream_schema(model: TrainedModel):
    """Raise SchemaMismatchError unless the model reads only ICMP attributes"""
    known = set(ICMP_ATTRIBUTES)
    foreign = [name for name in model.schema if canonical_attribute(name) not in known]
    if foreign:
        raise SchemaMismatchError(
            f"model attributes {', '.join(foreign)} are not ICMP counters"
        )


def _poll_loop(
    endpoint: AgentEndpoint,
    interval: float,
    polls: int | None,
    detect_restart: bool,
    clock: Clock,
    sleep: Sleep,
    events: queue.Queue,
    stop: threading.Event,
):
    count = 0
    try:
        while not stop.is_set() and (polls is None or count < polls):
            started = clock()
            try:
                events.put(poll(endpoint, detect_restart, clock))
            except (MibguardError, OSError) as exc:
                events.put(exc)
            count += 1
            if polls is None or count < polls:
                sleep(max(0.0, started + interval - clock()))
    except Exception as exc:  # pylint: disable=broad-exception-caught
        log.exception("polling %s stopped", endpoint)
        events.put(_PollerCrash(exc))
    finally:
        events.put(_DONE)


def classify_stream(
    endpoint: AgentEndpoint,
    model: TrainedModel,
    interval: float,
    sink: IO[str] | None = None,
    polls: int | None = None,
    rates: bool = False,
    detect_restart: bool = False,
    clock: Clock = time.monotonic,
    sleep: Sleep = time.sleep,
) -> Iterator[StreamEvent]:
    """
    Poll every `interval` seconds and yield one event per window. The first
    poll only sets the baseline. A failed poll yields a GapEvent and drops the
    baseline; a detected restart yields a GapEvent and rebases on the new
    snapshot. Events are also written to `sink` as JSON lines.

    `polls` limits the number of polls; None polls until the iterator is closed.
    A bounded stream in which every poll failed raises CollectorError after its
    gap events.
    """
    check_stream_schema(model)
    if interval < MIN_INTERVAL:
        raise UsageError(f"interval must be >= {MIN_INTERVAL:g} s")

    events: queue.Queue = queue.Queue()
    stop = threading.Event()
    poller = threading.Thread(
        target=_poll_loop,
        args=(endpoint, interval, polls, detect_restart, clock, sleep, events, stop),
        name="collector-poll",
        daemon=True,
    )
    poller.start()

    def emit(event: StreamEvent) -> StreamEvent:
        if sink is not None:
            sink.write(json.dumps(event.to_dict()) + "\n")
            sink.flush()
        return event

    prev: CounterSnapshot | None = None
    successes = 0
    failure: Exception | None = None
    try:
        while (item := events.get()) is not _DONE:
            if isinstance(item, _PollerCrash):
                raise item.error
            if isinstance(item, Exception):
                log.warning("poll of %s failed: %s", endpoint, item)
                failure = item
                prev = None
                yield emit(GapEvent(int(clock() * 1000), str(item)))
                continue
            successes += 1
            if prev is None:
                prev = item
                continue
            try:
                window = delta(prev, item)
            except DeltaError as exc:
                log.info("gap at %d ms: %s", item.timestamp_ms, exc)
                prev = item
                yield emit(GapEvent(item.timestamp_ms, str(exc)))
                continue
            prev = item

            features = window.rates() if rates else window
            vector = features.vector(model.schema)
            label = model.predict(vector)
            log.debug("%d-%d ms: %s", window.start_ms, window.end_ms, label)
            yield emit(WindowEvent(window, label, model.predict_distribution(vector)))
        if polls is not None and successes == 0 and failure is not None:
            raise CollectorError(
                f"none of {polls} polls of {endpoint} succeeded"
            ) from failure
    finally:
        stop.set()
