"""Canonical JSON and the public wire representation of scores/decisions.

One serializer produces every byte that leaves the system (API responses,
CLI output, audit entries), so library and service output are identical
and hashes are language-independent:

* object keys sorted lexicographically, no insignificant whitespace;
* non-ASCII escaped as \\uXXXX; UTF-8 bytes;
* every float rendered with exactly 6 decimal places, round-half-even
  (ties resolve on the exact binary value); negative zero normalized.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from .scoring import BondTrustBreakdown, TrustScores, ct_status


def _canonical(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float not representable on the wire: {obj}")
        if obj == 0.0:
            obj = 0.0
        out.append(f"{obj:.6f}")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _canonical(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ValueError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _canonical(obj[key], out)
        out.append("}")
    else:
        raise ValueError(f"type {type(obj).__name__} not representable on the wire")


def canonical_json(obj: Any) -> str:
    parts: list[str] = []
    _canonical(obj, parts)
    return "".join(parts)


def sha256_hex(obj: Any) -> str:
    """SHA-256 of the canonical JSON form, as lowercase hex."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def bond_to_wire(bond: BondTrustBreakdown | None) -> dict | None:
    if bond is None:
        return None
    return {
        "components": [float(c) for c in bond.bt_a_components],
        "normalized": [float(c) for c in bond.btn],
        "weight_sums": [float(c) for c in bond.weight_sums],
        "ratios": [float(c) for c in bond.ratios],
        "bt_a": float(bond.bt_a),
        "bt_b": float(bond.bt_b),
        "bt": float(bond.bt),
        "mode": bond.mode,
        "warnings": list(bond.warnings),
    }


def scores_to_wire(scores: TrustScores, ct_threshold: float) -> dict:
    return {
        "ct": float(scores.ct),
        "ct_status": ct_status(scores.ct, ct_threshold),
        "bond": bond_to_wire(scores.bond),
    }


def compliance_to_wire(report) -> dict:
    return {
        "verdict": report.verdict,
        "consent_present": report.consent_present,
        "findings": [
            {"class": f.identifier.value, "source": f.source, "excerpt": f.excerpt}
            for f in report.findings
        ],
        "reasons": list(report.reasons),
    }


def decision_to_wire(decision, ct_threshold: float) -> dict:
    """Public JSON form of a final decision (API responses, CLI output)."""
    scores = None
    if decision.scores is not None:
        scores = {
            "ct": float(decision.scores.ct),
            "ct_status": ct_status(decision.scores.ct, ct_threshold),
            "bond": bond_to_wire(decision.scores.bond),
        }
    return {
        "status": decision.status,
        "reasons": list(decision.reasons),
        "scores": scores,
        "compliance": compliance_to_wire(decision.compliance),
        "context_array": decision.context_array,
        "final": {
            "f1": decision.fields.f1_level,
            "f2": decision.fields.f2_resources,
            "f3": decision.fields.f3_constraints,
            "f4": decision.fields.f4_operations,
        },
    }


def render(obj: Any) -> str:
    """Canonical JSON plus a trailing newline, as printed by the CLI and
    returned by the API."""
    return canonical_json(obj) + "\n"
