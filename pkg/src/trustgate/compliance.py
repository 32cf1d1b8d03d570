"""Stage-one regulatory gate: protected-identifier scanning and consent.

Detection is mechanical by design: attribute names are matched against
keyword phrases, and values/free text against regexes, for the classes a
regex can recognize. Names, biometrics, and photographs are keyed by
attribute name only; free-text entity recognition is out of scope. When an
attribute's name declares an identifier class, that declaration wins and
the value is not re-scanned (a fax number would otherwise surface again as
a phone pattern).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .textnorm import normalize_name

VERDICT_PASS = "Pass"
VERDICT_BLOCK = "Block"

CONSENT_ATTRIBUTE_NAMES = frozenset({"patient consent", "user consent"})
AFFIRMATIVE_CONSENT_VALUES = frozenset({"true", "1", "yes", "granted"})

_EXCERPT_LIMIT = 80


class IdentifierClass(Enum):
    """The 18 protected patient-identifier classes."""

    NAME = "Name"
    SSN = "SSN"
    SUB_STATE_GEOGRAPHY = "SubStateGeography"
    PHONE = "Phone"
    FAX = "Fax"
    DEVICE_ID = "DeviceId"
    EMAIL = "Email"
    WEB_URL = "WebUrl"
    VEHICLE_ID = "VehicleId"
    IP_ADDRESS = "IpAddress"
    MEDICAL_RECORD_NUMBER = "MedicalRecordNumber"
    BIOMETRIC = "Biometric"
    HEALTH_PLAN_NUMBER = "HealthPlanNumber"
    FACE_PHOTO = "FacePhoto"
    ACCOUNT_NUMBER = "AccountNumber"
    OTHER_UNIQUE_ID = "OtherUniqueId"
    CERTIFICATE_LICENSE = "CertificateLicense"
    DATE_ELEMENT = "DateElement"


@dataclass(frozen=True)
class Finding:
    identifier: IdentifierClass
    source: str  # "attribute:<name>" or "text:<offset>"
    excerpt: str


@dataclass(frozen=True)
class ComplianceReport:
    findings: tuple[Finding, ...]
    consent_present: bool
    verdict: str
    reasons: tuple[str, ...] = ()


@dataclass(frozen=True)
class IdentifierTable:
    """Compiled form of the versioned pattern data file."""

    version: int
    # (normalized keyword phrase, token count, class), longest phrase first
    keywords: tuple[tuple[str, int, IdentifierClass], ...]
    value_patterns: tuple[tuple[IdentifierClass, re.Pattern], ...]


def _compile_table(raw: dict) -> IdentifierTable:
    keywords = []
    value_patterns = []
    seen = set()
    for row in raw["classes"]:
        cls = IdentifierClass(row["class"])
        if cls in seen:
            raise ValueError(f"duplicate identifier class {cls.value}")
        seen.add(cls)
        for phrase in row.get("keywords", ()):
            normalized = normalize_name(phrase)
            keywords.append((normalized, len(normalized.split()), cls))
        pattern = row.get("value_pattern")
        if pattern:
            value_patterns.append((cls, re.compile(pattern, re.IGNORECASE)))
    if seen != set(IdentifierClass):
        missing = sorted(c.value for c in set(IdentifierClass) - seen)
        raise ValueError(f"identifier table missing classes: {missing}")
    # Longest phrase wins, so "ip address" claims the attribute before a
    # generic single-token phrase could.
    keywords.sort(key=lambda row: (-row[1], row[0]))
    return IdentifierTable(
        version=int(raw["version"]),
        keywords=tuple(keywords),
        value_patterns=tuple(value_patterns),
    )


@lru_cache(maxsize=8)
def load_identifier_table(path: str | None = None) -> IdentifierTable:
    """Load the identifier table, from the bundled file by default."""
    if path is None:
        text = resources.files("trustgate.data").joinpath("identifier_patterns.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return _compile_table(json.loads(text))


def _phrase_in_name(phrase: str, name_tokens: list[str], phrase_len: int) -> bool:
    if phrase_len == 1:
        return phrase in name_tokens
    joined = phrase.split()
    for start in range(len(name_tokens) - phrase_len + 1):
        if name_tokens[start : start + phrase_len] == joined:
            return True
    return False


def classify_attribute_name(name: str, table: IdentifierTable | None = None) -> IdentifierClass | None:
    """The identifier class an attribute name declares, if any."""
    table = table or load_identifier_table()
    tokens = normalize_name(name).split()
    if not tokens:
        return None
    for phrase, length, cls in table.keywords:
        if _phrase_in_name(phrase, tokens, length):
            return cls
    return None


def _excerpt(text: str) -> str:
    return text if len(text) <= _EXCERPT_LIMIT else text[: _EXCERPT_LIMIT - 3] + "..."


def scan_identifiers(
    attributes: list[tuple[str, str]],
    free_text: str = "",
    table: IdentifierTable | None = None,
) -> list[Finding]:
    """All protected-identifier findings in the attributes and free text.

    Attributes are checked in order: a name-keyed class yields one finding
    for the attribute; otherwise the value is scanned with every value
    pattern (at most one finding per class per attribute). Free text then
    yields one finding per regex match, ordered by offset.
    """
    table = table or load_identifier_table()
    findings: list[Finding] = []
    for name, value in attributes:
        declared = classify_attribute_name(name, table)
        if declared is not None:
            findings.append(
                Finding(identifier=declared, source=f"attribute:{name}", excerpt=_excerpt(value))
            )
            continue
        for cls, pattern in table.value_patterns:
            match = pattern.search(value)
            if match:
                findings.append(
                    Finding(identifier=cls, source=f"attribute:{name}", excerpt=_excerpt(match.group(0)))
                )
    if free_text:
        text_hits = []
        for cls, pattern in table.value_patterns:
            for match in pattern.finditer(free_text):
                text_hits.append((match.start(), cls, match.group(0)))
        text_hits.sort(key=lambda hit: (hit[0], hit[1].value))
        findings.extend(
            Finding(identifier=cls, source=f"text:{offset}", excerpt=_excerpt(grabbed))
            for offset, cls, grabbed in text_hits
        )
    return findings


def check_consent(attributes: list[tuple[str, str]]) -> bool:
    """True iff a consent attribute carries an affirmative value."""
    for name, value in attributes:
        if normalize_name(name) in CONSENT_ATTRIBUTE_NAMES:
            if value.strip().lower() in AFFIRMATIVE_CONSENT_VALUES:
                return True
    return False


def compliance_gate(
    attributes: list[tuple[str, str]],
    free_text: str = "",
    table: IdentifierTable | None = None,
) -> ComplianceReport:
    """Pass unless protected identifiers are present without consent."""
    findings = tuple(scan_identifiers(attributes, free_text, table))
    consent = check_consent(attributes)
    if findings and not consent:
        reasons = tuple(
            f"protected identifier {f.identifier.value} at {f.source} without patient consent"
            for f in findings
        )
        return ComplianceReport(
            findings=findings, consent_present=consent, verdict=VERDICT_BLOCK, reasons=reasons
        )
    reasons = ()
    if findings:
        reasons = (f"{len(findings)} protected identifier(s) recorded with consent present",)
    return ComplianceReport(
        findings=findings, consent_present=consent, verdict=VERDICT_PASS, reasons=reasons
    )
