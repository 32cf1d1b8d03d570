"""Decision engine: compliance gate, scoring, status, and encodings.

The evaluation pipeline for one request is fixed: the regulatory gate runs
first and a Block is a hard Deny with scoring skipped; otherwise critical
trust and the bond-trust pipeline run, the two-threshold rule produces the
status, and every stage's output is encoded into the returned record.
Scoring failures degrade to Verify with diagnostic reasons, never to a
silent Accept. Evaluation takes no wall-clock input, so a fixed request
against a fixed store, model, and config always yields the same decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compliance import ComplianceReport, compliance_gate, VERDICT_BLOCK
from .embeddings import CooccurrenceModel, EmbeddingStore
from .encoding import (
    ComponentFields,
    FinalFields,
    build_context_array,
    encode_component,
    encode_final,
    score_bucket,
)
from .scoring import (
    AttributeTriple,
    MicroserviceChecks,
    ScoringConfig,
    ScoringError,
    ScoringFactors,
    TrustScores,
    bond_scores,
    critical_trust,
)

STATUS_ACCEPT = "Accept"
STATUS_VERIFY = "Verify"
STATUS_DENY = "Deny"

# Access-type codes: which of the three zero-trust components a 10-digit
# encoding describes.
COMPONENT_TYPE_CODES = {"user": 0x01, "device": 0x02, "output": 0x03}


@dataclass(frozen=True)
class Thresholds:
    ct: float = 0.99
    bt: float = 0.7

    def validate(self) -> None:
        for name, value in (("ct", self.ct), ("bt", self.bt)):
            if not 0.0 < value <= 1.0:
                raise ScoringError("thresholds", f"{name} threshold must be in (0, 1], got {value}")


@dataclass(frozen=True)
class GroupIds:
    user: int = 0
    device: int = 0
    output: int = 0


@dataclass(frozen=True)
class AccessRequest:
    triple: AttributeTriple
    operations: frozenset[str] = frozenset()
    candidate_report: str = ""
    patient_history: tuple[str, ...] = ()
    checks: MicroserviceChecks = MicroserviceChecks(False, False, False, False)
    group_ids: GroupIds = GroupIds()
    requested_level: int = 0

    def all_attributes(self) -> list[tuple[str, str]]:
        return list(self.triple.user) + list(self.triple.device) + list(self.triple.output)


@dataclass(frozen=True)
class ResourcePolicy:
    """What an accepted request is granted: resource ids, expiry instant
    (absolute UTC epoch seconds, supplied by policy, never sampled from the
    clock here), and the 32-bit constraint flag field."""

    compute_id: int = 0
    storage_id: int = 0
    expiry: int = 0x7FFFFFFF
    constraint_flags: int = 0


@dataclass(frozen=True)
class FinalDecision:
    status: str
    reasons: tuple[str, ...]
    ct: float | None
    scores: TrustScores | None
    compliance: ComplianceReport
    context_array: str
    fields: FinalFields


def decide(ct: float, bt: float, thresholds: Thresholds) -> str:
    """Two-threshold rule: zero on either score denies outright; both at or
    above their thresholds accepts; anything else requires verification."""
    for name, value in (("ct", ct), ("bt", bt)):
        if not 0.0 <= value <= 1.0:
            raise ScoringError("decide", f"{name} must be in [0, 1], got {value}")
    thresholds.validate()
    if ct == 0.0 or bt == 0.0:
        return STATUS_DENY
    if ct >= thresholds.ct and bt >= thresholds.bt:
        return STATUS_ACCEPT
    return STATUS_VERIFY


def _component_encodings(
    request: AccessRequest, scores: TrustScores | None, consent_present: bool
) -> tuple[str, str, str]:
    # Bond buckets carry the pairwise match ratios: the user digit pair
    # reflects user-device, the device pair device-output, and the output
    # pair user-output. Unscored requests encode zero buckets.
    if scores is not None and scores.bond is not None:
        ratios = scores.bond.ratios
        buckets = {
            "user": score_bucket(ratios[0]),
            "output": score_bucket(ratios[1]),
            "device": score_bucket(ratios[2]),
        }
    else:
        buckets = {"user": 0, "device": 0, "output": 0}
    consent = 1 if consent_present else 0
    group_ids = {
        "user": request.group_ids.user,
        "device": request.group_ids.device,
        "output": request.group_ids.output,
    }
    encodings = []
    for component in ("user", "device", "output"):
        fields = ComponentFields(
            group=group_ids[component],
            level=request.requested_level,
            access_type=COMPONENT_TYPE_CODES[component],
            bond_bucket=buckets[component],
            consent=consent,
        )
        encodings.append(encode_component(fields))
    return tuple(encodings)  # type: ignore[return-value]


def evaluate_request(
    request: AccessRequest,
    resources: ResourcePolicy,
    store: EmbeddingStore,
    model: CooccurrenceModel,
    scoring_config: ScoringConfig,
    thresholds: Thresholds,
    factors: ScoringFactors,
) -> FinalDecision:
    report = compliance_gate(request.all_attributes(), request.candidate_report)

    scores: TrustScores | None = None
    ct: float | None = None
    reasons: list[str] = []

    if report.verdict == VERDICT_BLOCK:
        status = STATUS_DENY
        reasons.extend(report.reasons)
        reasons.append("regulatory compliance block; trust scoring skipped")
    else:
        ct = critical_trust(request.checks, factors)
        try:
            bond = bond_scores(
                request.triple,
                list(request.patient_history),
                request.candidate_report,
                store,
                model,
                scoring_config,
            )
            scores = TrustScores(ct=ct, bond=bond)
            status = decide(ct, bond.bt, thresholds)
            if status == STATUS_DENY:
                if ct == 0.0:
                    reasons.append("critical trust is zero")
                if bond.bt == 0.0:
                    reasons.append("bond trust is zero")
            elif status == STATUS_VERIFY:
                if ct < thresholds.ct:
                    reasons.append(f"ct {ct:.6f} below threshold {thresholds.ct:.6f}")
                if bond.bt < thresholds.bt:
                    reasons.append(f"bt {bond.bt:.6f} below threshold {thresholds.bt:.6f}")
            else:
                reasons.append(
                    f"ct {ct:.6f} and bt {bond.bt:.6f} meet thresholds "
                    f"({thresholds.ct:.6f}, {thresholds.bt:.6f})"
                )
        except ScoringError as exc:
            # Fail safe without failing open: unscorable requests verify.
            status = STATUS_VERIFY
            scores = TrustScores(ct=ct, bond=None)  # type: ignore[arg-type]
            reasons.append(f"scoring error at {exc.stage}: {exc}")

    user_enc, device_enc, output_enc = _component_encodings(request, scores, report.consent_present)
    context = build_context_array(user_enc, device_enc, output_enc, ct if ct is not None else 0.0)

    if status == STATUS_ACCEPT:
        fields = encode_final(
            level=request.requested_level,
            compute_id=resources.compute_id,
            storage_id=resources.storage_id,
            expiry=resources.expiry,
            constraint_flags=resources.constraint_flags,
            ops=request.operations,
        )
    else:
        # No grant: operations and resource ids are withheld until a request
        # is actually accepted.
        fields = encode_final(
            level=request.requested_level,
            compute_id=0,
            storage_id=0,
            expiry=resources.expiry,
            constraint_flags=resources.constraint_flags,
            ops=frozenset(),
        )

    return FinalDecision(
        status=status,
        reasons=tuple(reasons),
        ct=ct,
        scores=scores,
        compliance=report,
        context_array=context,
        fields=fields,
    )


@dataclass
class DecisionEngine:
    """Bundles the shared read-only scoring state with the policy knobs."""

    store: EmbeddingStore
    model: CooccurrenceModel
    scoring_config: ScoringConfig = field(default_factory=ScoringConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    factors: ScoringFactors = field(default_factory=ScoringFactors)
    resources: ResourcePolicy = field(default_factory=ResourcePolicy)

    def evaluate(
        self,
        request: AccessRequest,
        resources: ResourcePolicy | None = None,
        scoring_config: ScoringConfig | None = None,
        thresholds: Thresholds | None = None,
    ) -> FinalDecision:
        return evaluate_request(
            request,
            resources or self.resources,
            self.store,
            self.model,
            scoring_config or self.scoring_config,
            thresholds or self.thresholds,
            self.factors,
        )

    def score(
        self,
        triple: AttributeTriple,
        history: list[str],
        candidate_report: str,
        checks: MicroserviceChecks,
        scoring_config: ScoringConfig | None = None,
    ) -> TrustScores:
        ct = critical_trust(checks, self.factors)
        bond = bond_scores(
            triple,
            history,
            candidate_report,
            self.store,
            self.model,
            scoring_config or self.scoring_config,
        )
        return TrustScores(ct=ct, bond=bond)
