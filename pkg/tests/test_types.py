"""
Class labels and attribute names
"""

import unittest

from mibguard.oids import ATTRIBUTE_BY_OID, ICMP_ATTRIBUTES, OIDS, canonical_attribute
from mibguard.types import LABELS, NUM_CLASSES, ClassLabel


class ClassLabelTest(unittest.TestCase):
    def test_index_order(self):
        names = [label.canonical for label in LABELS]
        self.assertEqual(
            names,
            [
                "Normal",
                "IcmpEcho",
                "TcpSyn",
                "UdpFlood",
                "HttpFlood",
                "Slowloris",
                "Slowpost",
                "BruteForce",
            ],
        )
        self.assertEqual(NUM_CLASSES, 8)
        self.assertEqual([label.index for label in LABELS], list(range(8)))

    def test_parse_is_case_insensitive(self):
        self.assertEqual(ClassLabel.parse("icmpecho"), ClassLabel.ICMP_ECHO)
        self.assertEqual(ClassLabel.parse("BRUTEFORCE"), ClassLabel.BRUTE_FORCE)

    def test_parse_aliases(self):
        self.assertEqual(ClassLabel.parse("ICMP-Echo Attack"), ClassLabel.ICMP_ECHO)
        self.assertEqual(ClassLabel.parse("TCP-SYN Attack"), ClassLabel.TCP_SYN)
        self.assertEqual(ClassLabel.parse("udp-flood"), ClassLabel.UDP_FLOOD)
        self.assertEqual(ClassLabel.parse("httpFlood"), ClassLabel.HTTP_FLOOD)
        self.assertEqual(ClassLabel.parse(" Normal "), ClassLabel.NORMAL)

    def test_parse_rejects_unknown(self):
        with self.assertRaises(ValueError):
            ClassLabel.parse("Smurf")

    def test_round_trip_through_index(self):
        for label in LABELS:
            self.assertIs(ClassLabel.from_index(label.index), label)
            self.assertIs(ClassLabel.parse(str(label)), label)


class AttributeNameTest(unittest.TestCase):
    def test_long_names(self):
        self.assertEqual(canonical_attribute("icmpInEchos"), "iIE")
        self.assertEqual(canonical_attribute("ICMPOUTMSGS"), "iOM")
        self.assertEqual(canonical_attribute("iOU"), "iOU")
        self.assertEqual(canonical_attribute("tcpInSegs"), "tcpInSegs")

    def test_oids(self):
        self.assertEqual(OIDS["iIE"], "1.3.6.1.2.1.5.8.0")
        self.assertEqual(OIDS["iOE"], "1.3.6.1.2.1.5.21.0")
        self.assertEqual(len(ATTRIBUTE_BY_OID), len(ICMP_ATTRIBUTES))
