"""Validation of wire-format request bodies.

Hand-rolled so error reports carry exact field paths and so schema
violations (wrong shape or type) stay distinguishable from out-of-range
values: the service maps the former to 400 and the latter to 422.

Attribute lists are arrays of [name, value] string pairs. The four
microservice check outcomes arrive as booleans; zero-trust posture means
an absent check is a failed check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .encoding import ALL_OPS
from .engine import AccessRequest, GroupIds, ResourcePolicy, Thresholds
from .scoring import AttributeTriple, MicroserviceChecks, ScoringConfig

KIND_SCHEMA = "schema"
KIND_RANGE = "range"


class ValidationError(ValueError):
    def __init__(self, path: str, message: str, kind: str = KIND_SCHEMA):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.kind = kind


def _require(obj: dict, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _attributes(obj: Any, path: str) -> tuple[tuple[str, str], ...]:
    if not isinstance(obj, list):
        raise ValidationError(path, f"expected an array of [name, value] pairs, got {type(obj).__name__}")
    attrs = []
    for i, item in enumerate(obj):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValidationError(f"{path}[{i}]", "expected a [name, value] pair")
        name, value = item
        if not isinstance(name, str) or not isinstance(value, str):
            raise ValidationError(f"{path}[{i}]", "name and value must both be strings")
        if not name.strip():
            raise ValidationError(f"{path}[{i}]", "attribute name must be non-empty", KIND_RANGE)
        attrs.append((name, value))
    return tuple(attrs)


def _triple(body: dict) -> AttributeTriple:
    for key in ("user", "device", "output"):
        if key not in body:
            raise ValidationError(key, "required attribute list is missing")
    return AttributeTriple(
        user=_attributes(body["user"], "user"),
        device=_attributes(body["device"], "device"),
        output=_attributes(body["output"], "output"),
    )


def _string_list(obj: Any, path: str) -> tuple[str, ...]:
    if not isinstance(obj, list) or any(not isinstance(s, str) for s in obj):
        raise ValidationError(path, "expected an array of strings")
    return tuple(obj)


def _string(obj: Any, path: str) -> str:
    if not isinstance(obj, str):
        raise ValidationError(path, f"expected a string, got {type(obj).__name__}")
    return obj


def _bool(obj: Any, path: str) -> bool:
    if not isinstance(obj, bool):
        raise ValidationError(path, f"expected a boolean, got {type(obj).__name__}")
    return obj


def _int_in_range(obj: Any, path: str, low: int, high: int) -> int:
    if not isinstance(obj, int) or isinstance(obj, bool):
        raise ValidationError(path, f"expected an integer, got {type(obj).__name__}")
    if not low <= obj <= high:
        raise ValidationError(path, f"must be in [{low}, {high}], got {obj}", KIND_RANGE)
    return obj


def _number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ValidationError(path, f"expected a number, got {type(obj).__name__}")
    return float(obj)


def _checks(obj: Any, path: str) -> MicroserviceChecks:
    obj = _require(obj, path)
    known = ("authentication", "authorization", "encryption", "logging")
    for key in obj:
        if key not in known:
            raise ValidationError(f"{path}.{key}", "unknown check name")
    return MicroserviceChecks(
        authentication=_bool(obj.get("authentication", False), f"{path}.authentication"),
        authorization=_bool(obj.get("authorization", False), f"{path}.authorization"),
        encryption=_bool(obj.get("encryption", False), f"{path}.encryption"),
        logging=_bool(obj.get("logging", False), f"{path}.logging"),
    )


def _operations(obj: Any, path: str) -> frozenset[str]:
    ops = _string_list(obj, path)
    unknown = set(ops) - ALL_OPS
    if unknown:
        raise ValidationError(path, f"unknown operations {sorted(unknown)}", KIND_RANGE)
    return frozenset(ops)


def _scoring_overrides(obj: Any, path: str, base: ScoringConfig) -> ScoringConfig:
    obj = _require(obj, path)
    updates: dict[str, Any] = {}
    for key, value in obj.items():
        if key == "cosine_threshold":
            value = _number(value, f"{path}.{key}")
            if not 0.0 < value <= 1.0:
                raise ValidationError(f"{path}.{key}", "must be in (0, 1]", KIND_RANGE)
            updates[key] = value
        elif key == "ngram_order":
            updates[key] = _int_in_range(value, f"{path}.{key}", 1, 16)
        elif key == "weight_orientation":
            value = _string(value, f"{path}.{key}")
            if value not in ("given_first", "given_second"):
                raise ValidationError(f"{path}.{key}", f"unknown orientation {value!r}", KIND_RANGE)
            updates[key] = value
        elif key == "bt_a_mode":
            value = _string(value, f"{path}.{key}")
            if value not in ("normalized", "paper-literal"):
                raise ValidationError(f"{path}.{key}", f"unknown mode {value!r}", KIND_RANGE)
            updates[key] = value
        else:
            raise ValidationError(f"{path}.{key}", "unknown scoring option")
    return replace(base, **updates)


def _thresholds_override(obj: Any, path: str, base: Thresholds) -> Thresholds:
    obj = _require(obj, path)
    updates = {}
    for key in obj:
        if key not in ("ct", "bt"):
            raise ValidationError(f"{path}.{key}", "unknown threshold")
        value = _number(obj[key], f"{path}.{key}")
        if not 0.0 < value <= 1.0:
            raise ValidationError(f"{path}.{key}", "must be in (0, 1]", KIND_RANGE)
        updates[key] = value
    return replace(base, **updates)


def _resources_override(obj: Any, path: str, base: ResourcePolicy) -> ResourcePolicy:
    obj = _require(obj, path)
    limits = {
        "compute_id": 0xFFF,
        "storage_id": 0xFFF,
        "expiry": 2**32 - 1,
        "constraint_flags": 0xFFFFFFFF,
    }
    updates = {}
    for key in obj:
        if key not in limits:
            raise ValidationError(f"{path}.{key}", "unknown resource field")
        updates[key] = _int_in_range(obj[key], f"{path}.{key}", 0, limits[key])
    return replace(base, **updates)


@dataclass(frozen=True)
class DecideBody:
    request: AccessRequest
    scoring: ScoringConfig | None
    thresholds: Thresholds | None
    resources: ResourcePolicy | None


_DECIDE_KEYS = frozenset(
    {
        "user", "device", "output", "operations", "candidate_report",
        "patient_history", "checks", "group_ids", "requested_level",
        "config", "thresholds", "resources",
    }
)


def validate_decide_body(
    body: Any,
    base_scoring: ScoringConfig,
    base_thresholds: Thresholds,
    base_resources: ResourcePolicy,
) -> DecideBody:
    body = _require(body, "body")
    for key in body:
        if key not in _DECIDE_KEYS:
            raise ValidationError(key, "unknown field")
    triple = _triple(body)

    group_raw = _require(body.get("group_ids", {}), "group_ids")
    for key in group_raw:
        if key not in ("user", "device", "output"):
            raise ValidationError(f"group_ids.{key}", "unknown component")
    group_ids = GroupIds(
        user=_int_in_range(group_raw.get("user", 0), "group_ids.user", 0, 255),
        device=_int_in_range(group_raw.get("device", 0), "group_ids.device", 0, 255),
        output=_int_in_range(group_raw.get("output", 0), "group_ids.output", 0, 255),
    )

    request = AccessRequest(
        triple=triple,
        operations=_operations(body.get("operations", []), "operations"),
        candidate_report=_string(body.get("candidate_report", ""), "candidate_report"),
        patient_history=_string_list(body.get("patient_history", []), "patient_history"),
        checks=_checks(body.get("checks", {}), "checks"),
        group_ids=group_ids,
        requested_level=_int_in_range(body.get("requested_level", 0), "requested_level", 0, 4),
    )
    scoring = (
        _scoring_overrides(body["config"], "config", base_scoring) if "config" in body else None
    )
    thresholds = (
        _thresholds_override(body["thresholds"], "thresholds", base_thresholds)
        if "thresholds" in body
        else None
    )
    resources = (
        _resources_override(body["resources"], "resources", base_resources)
        if "resources" in body
        else None
    )
    return DecideBody(request=request, scoring=scoring, thresholds=thresholds, resources=resources)


@dataclass(frozen=True)
class ScoreBody:
    triple: AttributeTriple
    history: tuple[str, ...]
    candidate_report: str
    checks: MicroserviceChecks
    scoring: ScoringConfig | None


_SCORE_KEYS = frozenset(
    {"user", "device", "output", "candidate_report", "patient_history", "checks", "config"}
)


def validate_score_body(body: Any, base_scoring: ScoringConfig) -> ScoreBody:
    body = _require(body, "body")
    for key in body:
        if key not in _SCORE_KEYS:
            raise ValidationError(key, "unknown field")
    return ScoreBody(
        triple=_triple(body),
        history=_string_list(body.get("patient_history", []), "patient_history"),
        candidate_report=_string(body.get("candidate_report", ""), "candidate_report"),
        checks=_checks(body.get("checks", {}), "checks"),
        scoring=(
            _scoring_overrides(body["config"], "config", base_scoring)
            if "config" in body
            else None
        ),
    )
