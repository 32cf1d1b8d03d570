"""Critical-trust and bond-trust scoring.

Critical trust is a weighted sum of four boolean microservice outcomes
(authentication, authorization, encryption, logging). Bond trust combines
a semantic part (attribute-embedding similarity across the user, device,
and output attribute sets, weighted by corpus co-occurrence) with a
syntactic part (clipped n-gram precision of the candidate report against
the stored history, with a brevity penalty). All operations here are pure
functions of their inputs.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embeddings import (
    CooccurrenceModel,
    EmbeddingError,
    EmbeddingStore,
    attribute_weight,
    cosine_similarity,
    embed_attribute,
)
from .textnorm import tokenize

logger = logging.getLogger(__name__)

Attribute = tuple[str, str]  # (name, value)

CT_STATUS_ALLOW = "Allow"
CT_STATUS_VERIFY = "Verify"
CT_STATUS_DENY = "Deny"

BT_A_MODE_NORMALIZED = "normalized"
BT_A_MODE_PAPER_LITERAL = "paper-literal"

# Component order is fixed: user-device, user-output, device-output.
COMPONENT_LABELS = ("user-device", "user-output", "device-output")


class ScoringError(ValueError):
    """A scoring stage could not produce a score; carries the stage label."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class MicroserviceChecks:
    """Boolean outcomes of the four cloud microservice checks."""

    authentication: bool
    authorization: bool
    encryption: bool
    logging: bool

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (self.authentication, self.authorization, self.encryption, self.logging)


@dataclass(frozen=True)
class ScoringFactors:
    """Importance weights for the four checks; must sum to 1."""

    s1: float = 0.3
    s2: float = 0.4
    s3: float = 0.2
    s4: float = 0.1

    def validate(self) -> None:
        values = (self.s1, self.s2, self.s3, self.s4)
        if any(v < 0 for v in values):
            raise ScoringError("scoring-factors", f"factors must be non-negative: {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ScoringError("scoring-factors", f"factors must sum to 1, got {sum(values)!r}")


@dataclass(frozen=True)
class ScoringConfig:
    """Tunables for the bond-trust pipeline.

    cosine_threshold: alignment pairs at or above this cosine count as
        similar (boundary inclusive).
    ngram_order: highest n-gram order for the report score.
    weight_orientation: see `attribute_weight`.
    bt_a_mode: "normalized" averages the per-pair weighted match ratios;
        "paper-literal" sums the softmax outputs, which is identically 1
        and kept only for fidelity checks.
    """

    cosine_threshold: float = 0.7
    ngram_order: int = 4
    weight_orientation: str = "given_first"
    bt_a_mode: str = BT_A_MODE_NORMALIZED

    def validate(self) -> None:
        if not 0.0 < self.cosine_threshold <= 1.0:
            raise ScoringError("config", f"cosine_threshold must be in (0, 1], got {self.cosine_threshold}")
        if self.ngram_order < 1:
            raise ScoringError("config", f"ngram_order must be >= 1, got {self.ngram_order}")
        if self.weight_orientation not in ("given_first", "given_second"):
            raise ScoringError("config", f"unknown weight_orientation {self.weight_orientation!r}")
        if self.bt_a_mode not in (BT_A_MODE_NORMALIZED, BT_A_MODE_PAPER_LITERAL):
            raise ScoringError("config", f"unknown bt_a_mode {self.bt_a_mode!r}")


@dataclass(frozen=True)
class AttributeTriple:
    """User (x), device (y), and output-data (z) attribute sets."""

    user: tuple[Attribute, ...]
    device: tuple[Attribute, ...]
    output: tuple[Attribute, ...]

    @classmethod
    def from_lists(cls, user, device, output) -> "AttributeTriple":
        return cls(
            user=tuple((str(n), str(v)) for n, v in user),
            device=tuple((str(n), str(v)) for n, v in device),
            output=tuple((str(n), str(v)) for n, v in output),
        )

    def validate(self) -> None:
        for category, attrs in (("user", self.user), ("device", self.device), ("output", self.output)):
            for name, _ in attrs:
                if not name.strip():
                    raise ScoringError("attributes", f"empty attribute name in {category} set")


@dataclass(frozen=True)
class AlignedPair:
    left: Attribute
    right: Attribute
    cosine: float


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[AlignedPair, ...]
    skipped_left: int   # attributes with no in-vocabulary token
    skipped_right: int


@dataclass(frozen=True)
class ComponentScore:
    """One pairwise component: raw weighted sum, weight sum, and the ratio
    used both for normalized aggregation and for encoding buckets."""

    label: str
    raw: float
    weight_sum: float
    pair_count: int

    @property
    def ratio(self) -> float:
        if self.weight_sum <= 0.0:
            return 0.0
        return min(1.0, self.raw / self.weight_sum)


@dataclass(frozen=True)
class BondTrustBreakdown:
    bt_a_components: tuple[float, float, float]
    btn: tuple[float, float, float]
    weight_sums: tuple[float, float, float]
    ratios: tuple[float, float, float]
    bt_a: float
    bt_b: float
    bt: float
    mode: str
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class TrustScores:
    """Everything the decision stage needs for one request."""

    ct: float
    bond: BondTrustBreakdown


def critical_trust(checks: MicroserviceChecks, factors: ScoringFactors) -> float:
    """Weighted sum S1*A1 + S2*A2 + S3*A3 + S4*A4 in plain IEEE arithmetic."""
    factors.validate()
    a1, a2, a3, a4 = (1.0 if c else 0.0 for c in checks.as_tuple())
    return factors.s1 * a1 + factors.s2 * a2 + factors.s3 * a3 + factors.s4 * a4


def ct_status(ct: float, ct_threshold: float) -> str:
    """Deny at exactly zero, Allow at or above the threshold, else Verify."""
    if not 0.0 <= ct <= 1.0:
        raise ScoringError("critical-trust", f"ct must be in [0, 1], got {ct}")
    if ct == 0.0:
        return CT_STATUS_DENY
    if ct >= ct_threshold:
        return CT_STATUS_ALLOW
    return CT_STATUS_VERIFY


def similarity_logical(cosine: float, threshold: float) -> int:
    """1 iff the cosine reaches the threshold (boundary inclusive)."""
    if not -1.0 - 1e-12 <= cosine <= 1.0 + 1e-12:
        raise ScoringError("similarity", f"cosine must be in [-1, 1], got {cosine}")
    return 1 if cosine >= threshold else 0


def align_attributes(
    store: EmbeddingStore,
    left: list[Attribute] | tuple[Attribute, ...],
    right: list[Attribute] | tuple[Attribute, ...],
) -> Alignment:
    """Greedy one-to-one matching of attribute values by descending cosine.

    Values embed as the mean of their in-vocabulary token vectors;
    unembeddable attributes are skipped and counted. Candidate pairs are
    taken best-cosine-first (ties by left then right position), each
    attribute used at most once; leftovers on the longer side are excluded.
    """
    if not left or not right:
        raise ScoringError("align", "both attribute lists must be non-empty")

    def embeddable(attrs):
        kept, skipped = [], 0
        for position, attr in enumerate(attrs):
            try:
                vec = embed_attribute(store, attr[1])
            except EmbeddingError:
                skipped += 1
                continue
            if not np.any(vec):
                skipped += 1
                continue
            kept.append((position, attr, vec))
        return kept, skipped

    left_kept, left_skipped = embeddable(left)
    right_kept, right_skipped = embeddable(right)

    candidates = []
    for li, (lpos, lattr, lvec) in enumerate(left_kept):
        for ri, (rpos, rattr, rvec) in enumerate(right_kept):
            candidates.append((-cosine_similarity(lvec, rvec), lpos, rpos, li, ri))
    candidates.sort()

    used_left: set[int] = set()
    used_right: set[int] = set()
    pairs = []
    for neg_cos, _, _, li, ri in candidates:
        if li in used_left or ri in used_right:
            continue
        used_left.add(li)
        used_right.add(ri)
        pairs.append(AlignedPair(left=left_kept[li][1], right=right_kept[ri][1], cosine=-neg_cos))
    return Alignment(pairs=tuple(pairs), skipped_left=left_skipped, skipped_right=right_skipped)


def pair_weight(
    model: CooccurrenceModel, left_value: str, right_value: str, orientation: str = "given_first"
) -> float:
    """Co-occurrence weight of an aligned pair: the mean of
    `attribute_weight` over all token cross-pairs present in the model.
    Pairs with no in-model token on either side weigh 0."""
    left_tokens = [t for t in tokenize(left_value) if t in model]
    right_tokens = [t for t in tokenize(right_value) if t in model]
    if not left_tokens or not right_tokens:
        return 0.0
    weights = [
        attribute_weight(model, lt, rt, orientation)
        for lt in left_tokens
        for rt in right_tokens
    ]
    return sum(weights) / len(weights)


def bond_trust_component(
    pairs: tuple[AlignedPair, ...] | list[AlignedPair],
    model: CooccurrenceModel,
    config: ScoringConfig,
    label: str = "component",
) -> ComponentScore:
    """Sum of weight_i * Sim_i over the aligned pairs of one category pair."""
    if not pairs:
        raise ScoringError(label, "no aligned pairs to score")
    raw = 0.0
    weight_sum = 0.0
    for pair in pairs:
        weight = pair_weight(model, pair.left[1], pair.right[1], config.weight_orientation)
        sim = similarity_logical(pair.cosine, config.cosine_threshold)
        raw += weight * sim
        weight_sum += weight
    return ComponentScore(label=label, raw=raw, weight_sum=weight_sum, pair_count=len(pairs))


def softmax_normalize(components: tuple[float, float, float]) -> tuple[float, float, float]:
    """exp(c_i) / sum_j exp(c_j), computed with max-shift stabilization."""
    values = [float(c) for c in components]
    if any(not math.isfinite(v) for v in values):
        raise ScoringError("softmax", f"components must be finite, got {values}")
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return tuple(e / total for e in exps)  # type: ignore[return-value]


def bt_a_aggregate(
    btn: tuple[float, float, float],
    raw: tuple[float, float, float],
    weight_sums: tuple[float, float, float],
    mode: str = BT_A_MODE_NORMALIZED,
) -> float:
    """Collapse the three pairwise components into one semantic score.

    "paper-literal" sums the softmax outputs; that sum is 1 by algebraic
    identity, so the exact constant is returned. "normalized" (default)
    averages the per-component ratios raw_i / weight_sum_i, which keeps the
    score discriminative; a zero weight sum means there is no co-occurrence
    evidence at all for that component and the caller must fall back to
    verification.
    """
    if mode == BT_A_MODE_PAPER_LITERAL:
        return 1.0
    if mode != BT_A_MODE_NORMALIZED:
        raise ScoringError("bond-trust-a", f"unknown mode {mode!r}")
    ratios = []
    for label, r, ws in zip(COMPONENT_LABELS, raw, weight_sums):
        if ws <= 0.0:
            raise ScoringError(
                "bond-trust-a",
                f"zero attribute weight sum for {label}; no co-occurrence evidence, verify manually",
            )
        ratios.append(r / ws)
    return min(1.0, max(0.0, sum(ratios) / 3.0))


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def ngram_precision(candidate: str, references: list[str], n: int) -> float:
    """Clipped n-gram precision of a single order: the fraction of candidate
    n-grams also present in the references, with candidate counts clipped at
    the per-n-gram maximum over all references. 0 when either side has no
    n-grams of this order."""
    if n < 1:
        raise ScoringError("ngram-precision", f"order must be >= 1, got {n}")
    candidate_tokens = tokenize(candidate)
    counts = _ngrams(candidate_tokens, n)
    total = sum(counts.values())
    if not references or total == 0:
        return 0.0
    max_counts: Counter = Counter()
    for reference in references:
        ref_counts = _ngrams(tokenize(reference), n)
        for gram in counts:
            max_counts[gram] = max(max_counts[gram], ref_counts.get(gram, 0))
    clipped = sum(min(count, max_counts[gram]) for gram, count in counts.items())
    return clipped / total


def bt_b_score(candidate: str, references: list[str], n: int = 4) -> float:
    """Syntactic report score: brevity penalty times the geometric mean of
    clipped n-gram precisions for orders 1..n.

    Candidate counts are clipped at the maximum count over all references;
    the brevity reference length is the one closest to the candidate's
    (ties to the shorter). No history means no basis for trust: empty
    references score 0. An empty candidate, or one shorter than n tokens,
    also scores 0 since the top-order precision is undefined.
    """
    if n < 1:
        raise ScoringError("report-score", f"n-gram order must be >= 1, got {n}")
    if not references:
        return 0.0
    candidate_tokens = tokenize(candidate)
    if not candidate_tokens:
        logger.warning("empty candidate report scores 0")
        return 0.0
    if len(candidate_tokens) < n:
        logger.warning(
            "candidate of %d tokens is shorter than n-gram order %d; scoring 0",
            len(candidate_tokens),
            n,
        )
        return 0.0
    reference_tokens = [tokenize(r) for r in references]

    log_sum = 0.0
    for order in range(1, n + 1):
        counts = _ngrams(candidate_tokens, order)
        max_counts: Counter = Counter()
        for ref in reference_tokens:
            ref_counts = _ngrams(ref, order)
            for gram in counts:
                max_counts[gram] = max(max_counts[gram], ref_counts.get(gram, 0))
        clipped = sum(min(count, max_counts[gram]) for gram, count in counts.items())
        total = sum(counts.values())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)

    out_len = len(candidate_tokens)
    ref_len = min((len(r) for r in reference_tokens), key=lambda rl: (abs(rl - out_len), rl))
    brevity = min(1.0, math.exp(1.0 - ref_len / out_len))
    return brevity * math.exp(log_sum / n)


def bond_trust(bt_a: float, bt_b: float) -> float:
    """Arithmetic mean of the semantic and syntactic scores."""
    for label, value in (("bt_a", bt_a), ("bt_b", bt_b)):
        if not 0.0 <= value <= 1.0:
            raise ScoringError("bond-trust", f"{label} must be in [0, 1], got {value}")
    return (bt_a + bt_b) / 2.0


def bond_scores(
    triple: AttributeTriple,
    history: list[str],
    candidate_report: str,
    store: EmbeddingStore,
    model: CooccurrenceModel,
    config: ScoringConfig,
) -> BondTrustBreakdown:
    """Run the full bond-trust pipeline for one request.

    Alignments form over (user, device), (user, output), (device, output);
    each yields a weighted logical-similarity component. The components are
    softmax-normalized, aggregated per `bt_a_aggregate`, combined with the
    report score, and averaged into the final bond trust.
    """
    config.validate()
    triple.validate()
    warnings: list[str] = []

    category_pairs = (
        ("user-device", triple.user, triple.device),
        ("user-output", triple.user, triple.output),
        ("device-output", triple.device, triple.output),
    )
    components: list[ComponentScore] = []
    for label, left, right in category_pairs:
        try:
            alignment = align_attributes(store, left, right)
        except ScoringError as exc:
            raise ScoringError(f"align:{label}", str(exc)) from exc
        if alignment.skipped_left or alignment.skipped_right:
            warnings.append(
                f"{label}: skipped {alignment.skipped_left}+{alignment.skipped_right} "
                "attributes with no in-vocabulary token"
            )
        if not alignment.pairs:
            raise ScoringError(f"align:{label}", "no embeddable attribute pairs")
        components.append(bond_trust_component(alignment.pairs, model, config, label=label))

    raw = tuple(c.raw for c in components)
    weight_sums = tuple(c.weight_sum for c in components)
    ratios = tuple(c.ratio for c in components)
    btn = softmax_normalize(raw)  # type: ignore[arg-type]
    bt_a = bt_a_aggregate(btn, raw, weight_sums, config.bt_a_mode)  # type: ignore[arg-type]
    bt_b = bt_b_score(candidate_report, history, config.ngram_order)
    return BondTrustBreakdown(
        bt_a_components=raw,  # type: ignore[arg-type]
        btn=btn,
        weight_sums=weight_sums,  # type: ignore[arg-type]
        ratios=ratios,  # type: ignore[arg-type]
        bt_a=bt_a,
        bt_b=bt_b,
        bt=bond_trust(bt_a, bt_b),
        mode=config.bt_a_mode,
        warnings=tuple(warnings),
    )


def score_request(
    triple: AttributeTriple,
    history: list[str],
    candidate_report: str,
    checks: MicroserviceChecks,
    factors: ScoringFactors,
    store: EmbeddingStore,
    model: CooccurrenceModel,
    config: ScoringConfig,
) -> TrustScores:
    """Critical trust plus the bond-trust breakdown for one request."""
    ct = critical_trust(checks, factors)
    bond = bond_scores(triple, history, candidate_report, store, model, config)
    return TrustScores(ct=ct, bond=bond)
