"""
Polling, differencing and live classification against the simulated agent
"""

import io
import json
import unittest
from dataclasses import replace

from mibguard.agent import CONSTANT_COUNTERS, PRESETS, Scenario, SimulatedAgent
from mibguard.classifiers import train
from mibguard.collector import (
    AgentEndpoint,
    CounterSnapshot,
    DeltaVector,
    GapEvent,
    WindowEvent,
    classify_stream,
    delta,
    poll,
)
from mibguard.dataset import Dataset
from mibguard.errors import (
    CollectorError,
    CounterResetError,
    DeltaError,
    MissingVarbindError,
    PollTimeoutError,
    SchemaMismatchError,
    UsageError,
)
from mibguard.oids import ICMP_ATTRIBUTES, OIDS
from mibguard.synth import PRESETS as SYNTH_PRESETS
from mibguard.synth import synth_generate
from mibguard.types import ClassLabel


class FakeClock:
    """Shared agent and collector clock; sleeping advances it instantly"""

    def __init__(self, now: float = 100.0):
        self.now = now
        self.after_sleep = []

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float):
        self.now += seconds
        if self.after_sleep:
            self.after_sleep.pop(0)()


def snapshot(timestamp_ms: int, uptime=None, **counters) -> CounterSnapshot:
    values = dict.fromkeys(ICMP_ATTRIBUTES, 0)
    values.update(counters)
    return CounterSnapshot(timestamp_ms, values, uptime)


class EndpointTest(unittest.TestCase):
    def test_parse(self):
        self.assertEqual(AgentEndpoint.parse("10.0.0.1").address, ("10.0.0.1", 161))
        endpoint = AgentEndpoint.parse("router:1161", community="ops")
        self.assertEqual(endpoint.address, ("router", 1161))
        self.assertEqual(endpoint.community, "ops")
        self.assertEqual(str(endpoint), "router:1161")

    def test_invalid(self):
        for target in ("router:snmp", "router:0", "router:70000"):
            with self.assertRaises(UsageError, msg=target):
                AgentEndpoint.parse(target)
        with self.assertRaises(UsageError):
            AgentEndpoint("router", timeout=0)
        with self.assertRaises(UsageError):
            AgentEndpoint("router", retries=-1)


class DeltaTest(unittest.TestCase):
    def test_plain_difference(self):
        window = delta(snapshot(1000, iOM=10, iIE=3), snapshot(3000, iOM=25, iIE=3))
        self.assertEqual(window.deltas["iOM"], 15.0)
        self.assertEqual(window.deltas["iIE"], 0.0)
        self.assertEqual(list(window.deltas), list(ICMP_ATTRIBUTES))
        self.assertEqual(window.seconds, 2.0)
        self.assertEqual(window.rates().deltas["iOM"], 7.5)

    def test_wrap(self):
        window = delta(snapshot(0, iIM=2**32 - 10), snapshot(1000, iIM=5))
        self.assertEqual(window.deltas["iIM"], 15.0)

    def test_translation_invariance(self):
        prev, curr = snapshot(0, iOE=100), snapshot(1000, iOE=160)
        for offset in (0, 1, 2**31, 2**32 - 100):
            shifted = delta(
                snapshot(0, iOE=(100 + offset) % 2**32),
                snapshot(1000, iOE=(160 + offset) % 2**32),
            )
            self.assertEqual(shifted.deltas, delta(prev, curr).deltas)

    def test_timestamps_must_increase(self):
        with self.assertRaises(DeltaError):
            delta(snapshot(1000), snapshot(1000))
        with self.assertRaises(DeltaError):
            delta(snapshot(2000), snapshot(1000))

    def test_restart(self):
        with self.assertRaises(CounterResetError):
            delta(snapshot(0, uptime=500), snapshot(1000, uptime=20))
        delta(snapshot(0, uptime=500), snapshot(1000))

    def test_vector_accepts_long_names(self):
        deltas = dict.fromkeys(ICMP_ATTRIBUTES, 1.0)
        deltas["iIE"] = 9.0
        window = DeltaVector(0, 1000, deltas)
        self.assertEqual(window.vector(("icmpInEchos", "iOM")), [9.0, 1.0])

    def test_snapshot_validation(self):
        with self.assertRaises(CollectorError):
            CounterSnapshot(0, {"iOM": 1})
        with self.assertRaises(CollectorError):
            snapshot(0, iOM=2**32)


class AgentCase(unittest.TestCase):
    def start_agent(self, scenario: Scenario) -> AgentEndpoint:
        self.clock = FakeClock()
        self.agent = SimulatedAgent(scenario, clock=self.clock).start()
        self.addCleanup(self.agent.stop)
        host, port = self.agent.address
        return AgentEndpoint(host, port, scenario.community, timeout=1.0, retries=0)


class PollTest(AgentCase):
    def test_constant_counters(self):
        endpoint = self.start_agent(PRESETS["constant"])
        snap = poll(endpoint, clock=self.clock)
        self.assertEqual(snap.counters, CONSTANT_COUNTERS)
        self.assertEqual(snap.timestamp_ms, 100000)
        self.assertIsNone(snap.uptime)

    def test_uptime(self):
        endpoint = self.start_agent(PRESETS["constant"])
        self.clock.now += 3
        self.assertEqual(poll(endpoint, True, self.clock).uptime, 300)

    def test_timeout_after_retries(self):
        endpoint = self.start_agent(PRESETS["constant"])
        endpoint = replace(endpoint, community="wrong", timeout=0.2, retries=2)
        with self.assertLogs("mibguard.agent", "WARNING"):
            with self.assertRaises(PollTimeoutError) as ctx:
                poll(endpoint, clock=self.clock)
        self.assertIn("after 3 attempts", str(ctx.exception))
        self.assertEqual(self.agent.requests, 3)

    def test_missing_counter(self):
        endpoint = self.start_agent(Scenario(initial=CONSTANT_COUNTERS, omit=("iIE",)))
        with self.assertRaises(MissingVarbindError) as ctx:
            poll(endpoint, clock=self.clock)
        self.assertEqual(ctx.exception.oid, OIDS["iIE"])


class ClassifyStreamTest(AgentCase):
    @classmethod
    def setUpClass(cls):
        cls.model = train(synth_generate(SYNTH_PRESETS["echo-flood"](1)), "j48")

    def stream(self, endpoint: AgentEndpoint, polls: int, **kwargs) -> list:
        return list(
            classify_stream(
                endpoint,
                self.model,
                1.0,
                polls=polls,
                clock=self.clock,
                sleep=self.clock.sleep,
                **kwargs,
            )
        )

    def test_echo_flood(self):
        endpoint = self.start_agent(PRESETS["echo-flood"])
        sink = io.StringIO()
        events = self.stream(endpoint, 8, sink=sink)

        self.assertEqual(len(events), 7)
        self.assertTrue(all(isinstance(event, WindowEvent) for event in events))
        labels = [event.label for event in events]
        normal, echo = ClassLabel.NORMAL, ClassLabel.ICMP_ECHO
        self.assertEqual(labels, [normal] * 3 + [echo] * 4)
        self.assertEqual(events[0].window.start_ms, 100000)
        self.assertEqual(events[0].window.end_ms, 101000)
        self.assertEqual(events[3].window.deltas["iIE"], 10000.0)

        lines = [json.loads(line) for line in sink.getvalue().splitlines()]
        self.assertEqual(len(lines), 7)
        self.assertEqual(lines[3]["label"], "IcmpEcho")
        self.assertEqual(lines[3]["window_end"] - lines[3]["window_start"], 1000)
        self.assertAlmostEqual(sum(lines[3]["distribution"].values()), 1.0)

    def test_idle_stays_normal(self):
        endpoint = self.start_agent(PRESETS["idle"])
        events = self.stream(endpoint, 5)
        self.assertEqual([e.label for e in events], [ClassLabel.NORMAL] * 4)

    def test_failed_poll_drops_the_baseline(self):
        scenario = PRESETS["idle"]
        endpoint = replace(self.start_agent(scenario), timeout=0.2)

        def lock_out():
            self.agent.scenario = replace(scenario, community="other")

        def let_in():
            self.agent.scenario = scenario

        self.clock.after_sleep = [lambda: None, lock_out, let_in]
        with self.assertLogs("mibguard", "WARNING"):
            events = self.stream(endpoint, 5)
        self.assertEqual(
            [type(event) for event in events], [WindowEvent, GapEvent, WindowEvent]
        )
        self.assertIn("no response", events[1].reason)
        self.assertEqual(events[1].to_dict()["gap"], True)

    def test_every_poll_failed(self):
        scenario = PRESETS["idle"]
        endpoint = replace(self.start_agent(scenario), community="other", timeout=0.2)
        stream = classify_stream(
            endpoint, self.model, 1.0, polls=2, clock=self.clock, sleep=self.clock.sleep
        )
        events = []
        with self.assertLogs("mibguard", "WARNING"):
            with self.assertRaisesRegex(CollectorError, "none of 2 polls"):
                for event in stream:
                    events.append(event)
        self.assertEqual([type(event) for event in events], [GapEvent, GapEvent])

    def test_poller_crash_reaches_the_caller(self):
        endpoint = self.start_agent(PRESETS["idle"])

        def broken_clock() -> float:
            raise RuntimeError("clock stopped")

        with self.assertLogs("mibguard.collector", "ERROR"):
            with self.assertRaisesRegex(RuntimeError, "clock stopped"):
                list(
                    classify_stream(
                        endpoint, self.model, 1.0, polls=3, clock=broken_clock
                    )
                )

    def test_restart_rebases(self):
        endpoint = self.start_agent(PRESETS["idle"])
        self.clock.after_sleep = [lambda: None, self.agent.restart]
        events = self.stream(endpoint, 4, detect_restart=True)
        self.assertEqual(
            [type(event) for event in events], [WindowEvent, GapEvent, WindowEvent]
        )
        self.assertIn("restarted", events[1].reason)

    def test_model_must_read_icmp_counters(self):
        endpoint = self.start_agent(PRESETS["idle"])
        model = train(Dataset(("ifInOctets",), [[1], [2]], [0, 1]), "bayes")
        with self.assertRaises(SchemaMismatchError):
            next(classify_stream(endpoint, model, 1.0, polls=1))

    def test_interval_floor(self):
        endpoint = self.start_agent(PRESETS["idle"])
        with self.assertRaises(UsageError):
            next(classify_stream(endpoint, self.model, 0.5, polls=1))
