"""
ICMP group object identifiers and attribute names
"""

ICMP_GROUP = "1.3.6.1.2.1.5"
SYS_UPTIME = "1.3.6.1.2.1.1.3.0"

ICMP_OUT_MSGS = "iOM"
ICMP_IN_MSGS = "iIM"
ICMP_OUT_DEST_UNREACHS = "iOU"
ICMP_IN_DEST_UNREACHS = "iIU"
ICMP_IN_ECHOS = "iIE"
ICMP_OUT_ECHOS = "iOE"

ICMP_ATTRIBUTES = (
    ICMP_OUT_MSGS,
    ICMP_IN_MSGS,
    ICMP_OUT_DEST_UNREACHS,
    ICMP_IN_DEST_UNREACHS,
    ICMP_IN_ECHOS,
    ICMP_OUT_ECHOS,
)
"""Canonical six-attribute schema, in column order"""

LONG_NAMES = {
    ICMP_OUT_MSGS: "icmpOutMsgs",
    ICMP_IN_MSGS: "icmpInMsgs",
    ICMP_OUT_DEST_UNREACHS: "icmpOutDestUnreachs",
    ICMP_IN_DEST_UNREACHS: "icmpInDestUnreachs",
    ICMP_IN_ECHOS: "icmpInEchos",
    ICMP_OUT_ECHOS: "icmpOutEchos",
}

OIDS = {
    ICMP_IN_MSGS: f"{ICMP_GROUP}.1.0",
    ICMP_IN_DEST_UNREACHS: f"{ICMP_GROUP}.3.0",
    ICMP_IN_ECHOS: f"{ICMP_GROUP}.8.0",
    ICMP_OUT_MSGS: f"{ICMP_GROUP}.14.0",
    ICMP_OUT_DEST_UNREACHS: f"{ICMP_GROUP}.16.0",
    ICMP_OUT_ECHOS: f"{ICMP_GROUP}.21.0",
}
"""Instance OIDs of the six counters (RFC 1213)"""

ATTRIBUTE_BY_OID = {oid: name for name, oid in OIDS.items()}

_SHORT_NAMES = {long.lower(): short for short, long in LONG_NAMES.items()}


def canonical_attribute(name: str) -> str:
    """
    Return the short form of an ICMP attribute name given in its long form.
    Any other name is returned unchanged.
    """
    return _SHORT_NAMES.get(name.strip().lower(), name.strip())
