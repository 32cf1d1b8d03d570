"""Bit-exact hexadecimal encodings for decisions and context.

All encodings are fixed-width uppercase hex and round-trip exactly; they
appear verbatim in API responses and audit entries, so the digit layout is
part of the public contract (documented digit-by-digit in
docs/encodings.md).

Component encoding (10 digits, five 2-digit fields):
    group | access level (0x10 + level) | access type | bond bucket | consent

Context array (32 digits):
    user component (10) | device component (10) | output component (10) |
    critical-trust bucket (2)

Final decision fields:
    F1  2 digits   access level, 0x10 + level ("10" is level 0)
    F2  6 digits   compute resource id (3) | storage resource id (3)
    F3  16 digits  expiry as UTC epoch seconds (8) | constraint flags (8)
    F4  1 digit    CRUD operation bits: Create=8 Read=4 Update=2 Delete=1
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

LEVEL_FIELD_BASE = 0x10
ACCESS_LEVELS = range(0, 5)

OP_BITS = {"Create": 8, "Read": 4, "Update": 2, "Delete": 1}
ALL_OPS = frozenset(OP_BITS)

_HEX_DIGITS = frozenset("0123456789ABCDEF")


class EncodingError(ValueError):
    """Out-of-range field on encode, or malformed text on decode."""


def _check_range(name: str, value: int, low: int, high: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not low <= value <= high:
        raise EncodingError(f"{name} must be an integer in [{low}, {high}], got {value!r}")
    return value


def _check_hex(text: str, length: int, what: str) -> str:
    if len(text) != length:
        raise EncodingError(f"{what} must be exactly {length} hex digits, got {len(text)}")
    if not set(text) <= _HEX_DIGITS:
        raise EncodingError(f"{what} contains non-hex characters: {text!r}")
    return text


def score_bucket(score: float) -> int:
    """Map a [0, 1] score to a byte: round(score * 255), banker's rounding."""
    if not 0.0 <= score <= 1.0:
        raise EncodingError(f"score must be in [0, 1], got {score}")
    return round(score * 255)


@dataclass(frozen=True)
class ComponentFields:
    group: int        # 0..255
    level: int        # 0..4
    access_type: int  # 0..255
    bond_bucket: int  # 0..255
    consent: int      # 0 or 1

    def validate(self) -> "ComponentFields":
        _check_range("group", self.group, 0, 255)
        _check_range("level", self.level, 0, 4)
        _check_range("access_type", self.access_type, 0, 255)
        _check_range("bond_bucket", self.bond_bucket, 0, 255)
        _check_range("consent", self.consent, 0, 1)
        return self


def encode_component(fields: ComponentFields) -> str:
    fields.validate()
    return (
        f"{fields.group:02X}"
        f"{LEVEL_FIELD_BASE + fields.level:02X}"
        f"{fields.access_type:02X}"
        f"{fields.bond_bucket:02X}"
        f"{fields.consent:02X}"
    )


def decode_component(text: str) -> ComponentFields:
    _check_hex(text, 10, "component encoding")
    level_field = int(text[2:4], 16)
    if not LEVEL_FIELD_BASE <= level_field <= LEVEL_FIELD_BASE + 4:
        raise EncodingError(f"level field must be 10..14, got {text[2:4]}")
    consent = int(text[8:10], 16)
    if consent > 1:
        raise EncodingError(f"consent field must be 00 or 01, got {text[8:10]}")
    return ComponentFields(
        group=int(text[0:2], 16),
        level=level_field - LEVEL_FIELD_BASE,
        access_type=int(text[4:6], 16),
        bond_bucket=int(text[6:8], 16),
        consent=consent,
    )


def build_context_array(user_enc: str, device_enc: str, output_enc: str, ct: float) -> str:
    """Concatenate the three component encodings and the CT bucket."""
    for enc in (user_enc, device_enc, output_enc):
        decode_component(enc)  # validates shape and field ranges
    return f"{user_enc}{device_enc}{output_enc}{score_bucket(ct):02X}"


def split_context_array(text: str) -> tuple[str, str, str, int]:
    """Slice a context array back into (user, device, output, ct_bucket)."""
    _check_hex(text, 32, "context array")
    user_enc, device_enc, output_enc = text[0:10], text[10:20], text[20:30]
    for enc in (user_enc, device_enc, output_enc):
        decode_component(enc)
    return user_enc, device_enc, output_enc, int(text[30:32], 16)


@dataclass(frozen=True)
class FinalFields:
    f1_level: str        # 2 hex digits
    f2_resources: str    # 6 hex digits
    f3_constraints: str  # 16 hex digits
    f4_operations: str   # 1 hex digit


def encode_operations(ops: frozenset[str] | set[str]) -> str:
    unknown = set(ops) - ALL_OPS
    if unknown:
        raise EncodingError(f"unknown operations: {sorted(unknown)}")
    return f"{sum(OP_BITS[op] for op in set(ops)):01X}"


def decode_operations(digit: str) -> frozenset[str]:
    _check_hex(digit, 1, "operations field")
    bits = int(digit, 16)
    return frozenset(op for op, bit in OP_BITS.items() if bits & bit)


def encode_final(
    level: int,
    compute_id: int,
    storage_id: int,
    expiry: int,
    constraint_flags: int,
    ops: frozenset[str] | set[str],
) -> FinalFields:
    _check_range("level", level, 0, 4)
    _check_range("compute_id", compute_id, 0, 0xFFF)
    _check_range("storage_id", storage_id, 0, 0xFFF)
    if not isinstance(expiry, int) or isinstance(expiry, bool) or not 0 <= expiry < 2**32:
        raise EncodingError(
            f"expiry must be epoch seconds in [1970, 2**32), got {expiry!r}"
        )
    _check_range("constraint_flags", constraint_flags, 0, 0xFFFFFFFF)
    return FinalFields(
        f1_level=f"{LEVEL_FIELD_BASE + level:02X}",
        f2_resources=f"{compute_id:03X}{storage_id:03X}",
        f3_constraints=f"{expiry:08X}{constraint_flags:08X}",
        f4_operations=encode_operations(ops),
    )


def decode_final(fields: FinalFields) -> dict:
    _check_hex(fields.f1_level, 2, "F1")
    _check_hex(fields.f2_resources, 6, "F2")
    _check_hex(fields.f3_constraints, 16, "F3")
    level_field = int(fields.f1_level, 16)
    if not LEVEL_FIELD_BASE <= level_field <= LEVEL_FIELD_BASE + 4:
        raise EncodingError(f"F1 must be 10..14, got {fields.f1_level}")
    expiry = int(fields.f3_constraints[:8], 16)
    return {
        "level": level_field - LEVEL_FIELD_BASE,
        "compute_id": int(fields.f2_resources[:3], 16),
        "storage_id": int(fields.f2_resources[3:], 16),
        "expiry": expiry,
        "expiry_utc": datetime.fromtimestamp(expiry, timezone.utc).isoformat(),
        "constraint_flags": int(fields.f3_constraints[8:], 16),
        "operations": sorted(decode_operations(fields.f4_operations)),
    }
