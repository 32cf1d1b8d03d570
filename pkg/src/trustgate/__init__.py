"""Zero-trust, context-aware access decisions for distributed medical
devices: critical-trust and bond-trust scoring, a regulatory compliance
gate, hexadecimal decision encodings, and an auditable gateway."""

from .compliance import (
    ComplianceReport,
    Finding,
    IdentifierClass,
    check_consent,
    compliance_gate,
    scan_identifiers,
)
from .embeddings import (
    CooccurrenceModel,
    EmbeddingError,
    EmbeddingStore,
    attribute_weight,
    build_cooccurrence,
    cosine_similarity,
    derive_embeddings_from_cooccurrence,
    embed_attribute,
    load_embeddings,
    save_embeddings,
    top_k_context,
)
from .encoding import (
    ComponentFields,
    EncodingError,
    FinalFields,
    build_context_array,
    decode_component,
    decode_final,
    encode_component,
    encode_final,
    split_context_array,
)
from .engine import (
    AccessRequest,
    DecisionEngine,
    FinalDecision,
    GroupIds,
    ResourcePolicy,
    Thresholds,
    decide,
    evaluate_request,
)
from .scoring import (
    AttributeTriple,
    BondTrustBreakdown,
    MicroserviceChecks,
    ScoringConfig,
    ScoringError,
    ScoringFactors,
    TrustScores,
    bond_scores,
    bond_trust,
    bt_a_aggregate,
    bt_b_score,
    critical_trust,
    ct_status,
    score_request,
    similarity_logical,
    softmax_normalize,
)

__version__ = "0.1.0"
