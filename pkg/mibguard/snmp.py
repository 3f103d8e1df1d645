"""
SNMP v2c GetRequest / Response messages and their BER encoding.

Only the parts of the v2c message grammar the poller and the simulated agent
exchange are defined: GetRequest and Response PDUs with Integer, OctetString,
ObjectIdentifier, Counter32, Gauge32, TimeTicks, Null and the three exception
values.
"""

from dataclasses import dataclass, field

from pyasn1.codec.ber import decoder, encoder
from pyasn1.error import PyAsn1Error
from pyasn1.type import constraint, namedtype, tag, univ

from .errors import CodecError
from .types import PduType, ValueKind

SNMP_V2C = 1
"""Message version field of SNMP v2c"""

NO_ERROR = 0
GEN_ERR = 5

MAX_COUNTER32 = 2**32 - 1


def _application(number: int) -> tag.Tag:
    return tag.Tag(tag.tagClassApplication, tag.tagFormatSimple, number)


def _context(number: int, fmt=tag.tagFormatSimple) -> tag.Tag:
    return tag.Tag(tag.tagClassContext, fmt, number)


class Counter32(univ.Integer):
    """Wrapping 32-bit counter"""

    tagSet = univ.Integer.tagSet.tagImplicitly(_application(1))
    subtypeSpec = univ.Integer.subtypeSpec + constraint.ValueRangeConstraint(
        0, MAX_COUNTER32
    )


class Gauge32(univ.Integer):
    """Non-wrapping 32-bit gauge"""

    tagSet = univ.Integer.tagSet.tagImplicitly(_application(2))
    subtypeSpec = univ.Integer.subtypeSpec + constraint.ValueRangeConstraint(
        0, MAX_COUNTER32
    )


class TimeTicks(univ.Integer):
    """Hundredths of a second"""

    tagSet = univ.Integer.tagSet.tagImplicitly(_application(3))
    subtypeSpec = univ.Integer.subtypeSpec + constraint.ValueRangeConstraint(
        0, MAX_COUNTER32
    )


class NoSuchObject(univ.Null):
    """Exception value: object not implemented"""

    tagSet = univ.Null.tagSet.tagImplicitly(_context(0))


class NoSuchInstance(univ.Null):
    """Exception value: instance not present"""

    tagSet = univ.Null.tagSet.tagImplicitly(_context(1))


class EndOfMibView(univ.Null):
    """Exception value: end of the view"""

    tagSet = univ.Null.tagSet.tagImplicitly(_context(2))


class BindValue(univ.Choice):
    """Value of a variable binding; component names match ValueKind values"""

    componentType = namedtype.NamedTypes(
        namedtype.NamedType(ValueKind.INTEGER.value, univ.Integer()),
        namedtype.NamedType(ValueKind.OCTET_STRING.value, univ.OctetString()),
        namedtype.NamedType(ValueKind.OBJECT_ID.value, univ.ObjectIdentifier()),
        namedtype.NamedType(ValueKind.COUNTER32.value, Counter32()),
        namedtype.NamedType(ValueKind.GAUGE32.value, Gauge32()),
        namedtype.NamedType(ValueKind.TIME_TICKS.value, TimeTicks()),
        namedtype.NamedType(ValueKind.NULL.value, univ.Null()),
        namedtype.NamedType(ValueKind.NO_SUCH_OBJECT.value, NoSuchObject()),
        namedtype.NamedType(ValueKind.NO_SUCH_INSTANCE.value, NoSuchInstance()),
        namedtype.NamedType(ValueKind.END_OF_MIB_VIEW.value, EndOfMibView()),
    )


class VarBindSpec(univ.Sequence):
    """VarBind ::= SEQUENCE { name, value }"""

    componentType = namedtype.NamedTypes(
        namedtype.NamedType("name", univ.ObjectIdentifier()),
        namedtype.NamedType("value", BindValue()),
    )


class VarBindListSpec(univ.SequenceOf):
    """VarBindList ::= SEQUENCE OF VarBind"""

    componentType = VarBindSpec()


class PduSpec(univ.Sequence):
    """Fields shared by GetRequest and Response PDUs"""

    componentType = namedtype.NamedTypes(
        namedtype.NamedType("request-id", univ.Integer()),
        namedtype.NamedType("error-status", univ.Integer()),
        namedtype.NamedType("error-index", univ.Integer()),
        namedtype.NamedType("variable-bindings", VarBindListSpec()),
    )


class GetRequestPduSpec(PduSpec):
    """[0] IMPLICIT PDU"""

    tagSet = univ.Sequence.tagSet.tagImplicitly(_context(0, tag.tagFormatConstructed))


class ResponsePduSpec(PduSpec):
    """[2] IMPLICIT PDU"""

    tagSet = univ.Sequence.tagSet.tagImplicitly(_context(2, tag.tagFormatConstructed))


class PdusSpec(univ.Choice):
    """PDU types carried by a message"""

    componentType = namedtype.NamedTypes(
        namedtype.NamedType(PduType.GET_REQUEST.value, GetRequestPduSpec()),
        namedtype.NamedType(PduType.RESPONSE.value, ResponsePduSpec()),
    )


class MessageSpec(univ.Sequence):
    """Community-based message"""

    componentType = namedtype.NamedTypes(
        namedtype.NamedType("version", univ.Integer()),
        namedtype.NamedType("community", univ.OctetString()),
        namedtype.NamedType("data", PdusSpec()),
    )


_PDU_SPECS = {
    PduType.GET_REQUEST: GetRequestPduSpec,
    PduType.RESPONSE: ResponsePduSpec,
}

_INTEGER_KINDS = (
    ValueKind.INTEGER,
    ValueKind.COUNTER32,
    ValueKind.GAUGE32,
    ValueKind.TIME_TICKS,
)


@dataclass(frozen=True)
class VarBind:
    """Object identifier plus a typed value"""

    oid: str
    kind: ValueKind = ValueKind.NULL
    value: int | bytes | str | None = None
    "int for integer kinds, bytes for strings, dotted str for OIDs, else None"

    @property
    def is_exception(self) -> bool:
        """True if the agent answered with an exception value"""
        return self.kind.is_exception


@dataclass(frozen=True)
class SnmpMessage:
    """A community-based v2c message carrying one PDU"""

    community: str
    pdu_type: PduType
    request_id: int
    varbinds: tuple[VarBind, ...] = field(default_factory=tuple)
    error_status: int = NO_ERROR
    error_index: int = 0
    version: int = SNMP_V2C


def get_request(community: str, request_id: int, oids: list[str]) -> SnmpMessage:
    """GetRequest for a list of objects"""
    return SnmpMessage(
        community, PduType.GET_REQUEST, request_id, tuple(VarBind(oid) for oid in oids)
    )


def response(
    request: SnmpMessage,
    varbinds: tuple[VarBind, ...] = (),
    error_status: int = NO_ERROR,
    error_index: int = 0,
) -> SnmpMessage:
    """Response to a request, echoing its community and request-id"""
    return SnmpMessage(
        request.community,
        PduType.RESPONSE,
        request.request_id,
        tuple(varbinds),
        error_status,
        error_index,
        request.version,
    )


def _encode_value(varbind: VarBind) -> BindValue:
    value = BindValue()
    match varbind.kind:
        case kind if kind in _INTEGER_KINDS:
            value[kind.value] = int(varbind.value)
        case ValueKind.OCTET_STRING:
            value[varbind.kind.value] = bytes(varbind.value)
        case ValueKind.OBJECT_ID:
            value[varbind.kind.value] = str(varbind.value)
        case _:
            value[varbind.kind.value] = ""
    return value


def encode_message(message: SnmpMessage) -> bytes:
    """BER encoding of a message"""
    try:
        bindings = VarBindListSpec()
        bindings.clear()
        for varbind in message.varbinds:
            item = VarBindSpec()
            item["name"] = varbind.oid
            item["value"] = _encode_value(varbind)
            bindings.append(item)

        pdu = _PDU_SPECS[message.pdu_type]()
        pdu["request-id"] = message.request_id
        pdu["error-status"] = message.error_status
        pdu["error-index"] = message.error_index
        pdu["variable-bindings"] = bindings

        pdus = PdusSpec()
        pdus[message.pdu_type.value] = pdu

        msg = MessageSpec()
        msg["version"] = message.version
        msg["community"] = message.community.encode("utf-8")
        msg["data"] = pdus
        return encoder.encode(msg)
    except (PyAsn1Error, TypeError, ValueError) as exc:
        raise CodecError(f"cannot encode message: {exc}") from exc


def _decode_value(value: BindValue) -> tuple[ValueKind, int | bytes | str | None]:
    kind = ValueKind(value.getName())
    component = value.getComponent()
    if kind in _INTEGER_KINDS:
        return kind, int(component)
    if kind == ValueKind.OCTET_STRING:
        return kind, component.asOctets()
    if kind == ValueKind.OBJECT_ID:
        return kind, str(component)
    return kind, None


def decode_message(data: bytes) -> SnmpMessage:
    """
    Parse a BER-encoded v2c message. Raises CodecError for anything that is not
    exactly one well-formed GetRequest or Response message.
    """
    try:
        msg, rest = decoder.decode(data, asn1Spec=MessageSpec())
        if rest:
            raise CodecError(f"{len(rest)} trailing bytes after the message")
        version = int(msg["version"])
        if version != SNMP_V2C:
            raise CodecError(f"unsupported SNMP version field {version}")

        pdus = msg["data"]
        pdu = pdus.getComponent()
        varbinds = []
        for item in pdu["variable-bindings"]:
            kind, value = _decode_value(item["value"])
            varbinds.append(VarBind(str(item["name"]), kind, value))

        return SnmpMessage(
            community=msg["community"].asOctets().decode("utf-8"),
            pdu_type=PduType(pdus.getName()),
            request_id=int(pdu["request-id"]),
            varbinds=tuple(varbinds),
            error_status=int(pdu["error-status"]),
            error_index=int(pdu["error-index"]),
            version=version,
        )
    except CodecError:
        raise
    except (PyAsn1Error, TypeError, ValueError, KeyError) as exc:
        raise CodecError(f"malformed SNMP message: {exc}") from exc
