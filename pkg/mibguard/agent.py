"""
Simulated SNMP agent serving scripted ICMP counters over UDP.

A scenario describes per-window counter increments; the agent derives the
cumulative value of every counter from its clock, so request handling never
advances or blocks the scenario.
"""

import json
import logging
import socketserver
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from typing_extensions import Self

from .errors import CodecError, UsageError
from .oids import ATTRIBUTE_BY_OID, ICMP_ATTRIBUTES, SYS_UPTIME, canonical_attribute
from .snmp import (
    GEN_ERR,
    SnmpMessage,
    VarBind,
    decode_message,
    encode_message,
    response,
)
from .types import PduType, ValueKind

log = logging.getLogger(__name__)

COUNTER_MODULUS = 2**32

Clock = Callable[[], float]
"""Monotonic time in seconds"""


def _counter_names(values: dict, what: str) -> dict[str, int]:
    result = {}
    for name, value in values.items():
        short = canonical_attribute(name)
        if short not in ICMP_ATTRIBUTES:
            raise UsageError(f"{what}: unknown ICMP attribute {name!r}")
        if int(value) < 0:
            raise UsageError(f"{what}: {name} must be >= 0")
        result[short] = int(value)
    return result


@dataclass(frozen=True)
class Phase:
    """Counter increments per window from `start` until the next phase"""

    start: int
    increments: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    """
    Scripted agent state. The value of a counter in window w is its initial
    value plus the increments of every earlier window, modulo 2^32.
    """

    window_seconds: float = 1.0
    community: str = "public"
    initial: dict[str, int] = field(default_factory=dict)
    phases: tuple[Phase, ...] = ()
    omit: tuple[str, ...] = ()
    "Attributes whose varbinds are left out of every response"

    def __post_init__(self):
        if not self.window_seconds > 0:
            raise UsageError("scenario window_seconds must be > 0")
        starts = [phase.start for phase in self.phases]
        if any(start < 0 for start in starts) or starts != sorted(set(starts)):
            raise UsageError("scenario phases need distinct, increasing starts >= 0")
        object.__setattr__(self, "initial", _counter_names(self.initial, "initial"))
        object.__setattr__(
            self,
            "phases",
            tuple(
                Phase(phase.start, _counter_names(phase.increments, "increments"))
                for phase in self.phases
            ),
        )
        omitted = _counter_names(dict.fromkeys(self.omit, 0), "omit")
        object.__setattr__(self, "omit", tuple(omitted))

    def counters(self, window: int) -> dict[str, int]:
        """Cumulative value of every counter during a window"""
        totals = {name: self.initial.get(name, 0) for name in ICMP_ATTRIBUTES}
        for index, phase in enumerate(self.phases):
            end = self.phases[index + 1].start if index + 1 < len(self.phases) else None
            end = window if end is None else min(end, window)
            elapsed = max(0, end - phase.start)
            for name, step in phase.increments.items():
                totals[name] += step * elapsed
        return {name: value % COUNTER_MODULUS for name, value in totals.items()}

    def to_dict(self) -> dict:
        """JSON document form"""
        return {
            "window_seconds": self.window_seconds,
            "community": self.community,
            "initial": dict(self.initial),
            "phases": [
                {"start": phase.start, "increments": dict(phase.increments)}
                for phase in self.phases
            ],
            "omit": list(self.omit),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Parse the JSON document form"""
        try:
            return cls(
                window_seconds=float(data.get("window_seconds", 1.0)),
                community=str(data.get("community", "public")),
                initial=dict(data.get("initial", {})),
                phases=tuple(
                    Phase(int(phase["start"]), dict(phase.get("increments", {})))
                    for phase in data.get("phases", [])
                ),
                omit=tuple(data.get("omit", [])),
            )
        except UsageError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid scenario: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario JSON document"""
    try:
        with open(path, encoding="utf-8") as file:
            return Scenario.from_dict(json.load(file))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read scenario {path}: {exc}") from exc


CONSTANT_COUNTERS = {"iOM": 100, "iIM": 90, "iOU": 5, "iIU": 4, "iIE": 50, "iOE": 40}
IDLE_COUNTERS = {"iOM": 1520, "iIM": 1610, "iOU": 12, "iIU": 9, "iIE": 730, "iOE": 702}
ECHO_FLOOD_START = 3
ECHO_FLOOD_RATE = 10000

PRESETS: dict[str, Scenario] = {
    "constant": Scenario(initial=CONSTANT_COUNTERS),
    "idle": Scenario(initial=IDLE_COUNTERS),
    "echo-flood": Scenario(
        initial=IDLE_COUNTERS,
        phases=(
            Phase(
                ECHO_FLOOD_START,
                {name: ECHO_FLOOD_RATE for name in ("iOM", "iIM", "iIE", "iOE")},
            ),
        ),
    ),
}
"""Built-in scenarios by name"""


def scenario_by_name(name: str) -> Scenario:
    """A preset name or the path of a scenario JSON document"""
    if name in PRESETS:
        return PRESETS[name]
    return load_scenario(name)


class _RequestHandler(socketserver.BaseRequestHandler):
    def handle(self):
        data, sock = self.request
        reply = self.server.agent.answer(data)
        if reply is not None:
            sock.sendto(reply, self.client_address)


class SimulatedAgent:
    """
    UDP agent answering GetRequests for the ICMP counters and sysUpTime.0.
    Requests are served one at a time on a background thread.

    Use as a context manager, or call start() and stop().
    """

    def __init__(
        self,
        scenario: Scenario,
        host: str = "127.0.0.1",
        port: int = 0,
        clock: Clock = time.monotonic,
    ):
        self.scenario = scenario
        self.clock = clock
        self.epoch = clock()
        self.requests = 0
        self._server = socketserver.UDPServer((host, port), _RequestHandler)
        self._server.agent = self
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        """Bound (host, port)"""
        host, port = self._server.server_address[:2]
        return host, port

    def window(self) -> int:
        """Scenario window of the current clock reading"""
        return int((self.clock() - self.epoch) // self.scenario.window_seconds)

    def uptime(self) -> int:
        """sysUpTime in hundredths of a second"""
        return int((self.clock() - self.epoch) * 100) % COUNTER_MODULUS

    def restart(self):
        """Reset the counters and sysUpTime as if the agent had rebooted"""
        self.epoch = self.clock()
        log.info("agent restarted")

    def answer(self, data: bytes) -> bytes | None:
        """Response datagram for a request datagram, or None to drop it"""
        self.requests += 1
        try:
            request = decode_message(data)
        except CodecError as exc:
            log.warning("malformed request: %s", exc)
            failure = SnmpMessage(self.scenario.community, PduType.RESPONSE, 0)
            return encode_message(
                response(failure, error_status=GEN_ERR, error_index=0)
            )

        if request.community != self.scenario.community:
            log.warning("dropped request with community %r", request.community)
            return None
        if request.pdu_type != PduType.GET_REQUEST:
            log.warning("unsupported %s PDU", request.pdu_type.value)
            return encode_message(response(request, error_status=GEN_ERR))

        counters = self.scenario.counters(self.window())
        varbinds = []
        for varbind in request.varbinds:
            name = ATTRIBUTE_BY_OID.get(varbind.oid)
            if name in self.scenario.omit:
                continue
            if name is not None:
                value = VarBind(varbind.oid, ValueKind.COUNTER32, counters[name])
            elif varbind.oid == SYS_UPTIME:
                value = VarBind(varbind.oid, ValueKind.TIME_TICKS, self.uptime())
            else:
                value = VarBind(varbind.oid, ValueKind.NO_SUCH_OBJECT)
            varbinds.append(value)
        return encode_message(response(request, tuple(varbinds)))

    def start(self) -> Self:
        """Serve requests on a daemon thread"""
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="simulated-agent", daemon=True
        )
        self._thread.start()
        log.info("simulated agent listening on %s:%d", *self.address)
        return self

    def stop(self):
        """Stop serving and release the port"""
        if self._thread is not None:
            self._server.shutdown()
            self._thread.join()
            self._thread = None
        self._server.server_close()

    def serve_forever(self):
        """Serve on the calling thread until interrupted"""
        log.info("simulated agent listening on %s:%d", *self.address)
        try:
            self._server.serve_forever()
        finally:
            self._server.server_close()

    def __enter__(self) -> Self:
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()


def serve_simulated_agent(
    scenario: Scenario,
    port: int = 0,
    host: str = "127.0.0.1",
    clock: Clock = time.monotonic,
) -> SimulatedAgent:
    """Start a simulated agent on a background thread"""
    return SimulatedAgent(scenario, host, port, clock).start()
