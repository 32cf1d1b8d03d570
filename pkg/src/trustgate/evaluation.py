"""Misuse-detection evaluation: confusion matrices, per-specialty metrics,
and the scorer comparison table.

The legit class is the positive class throughout. Six scorers are
compared: bare clipped n-gram precision at orders 1-4, the full
brevity-penalized report score ("BLEU"), and the proposed combined bond
trust. Every scorer classifies with the same inclusive threshold. Samples
the bond pipeline cannot score (no co-occurrence evidence) count as bond
trust 0, the conservative reading of the verify-on-error contract.
"""

from __future__ import annotations

import io
import csv
from collections import Counter
from dataclasses import dataclass

from .datasynth import LABEL_LEGIT, LABEL_MISUSE, LabeledSample, corpus_to_sequences
from .embeddings import build_cooccurrence, derive_embeddings_from_cooccurrence
from .scoring import ScoringConfig, ScoringError, bond_scores, bt_b_score, ngram_precision

SCORERS = ("1-gram", "2-gram", "3-gram", "4-gram", "BLEU", "proposed")

# Context documents are short; this window spans any of them, so the model
# sees every within-record pair.
EVAL_WINDOW = 20


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


def classify(score: float, threshold: float) -> str:
    """Legit at or above the threshold (boundary inclusive), else misuse."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score must be in [0, 1], got {score}")
    return LABEL_LEGIT if score >= threshold else LABEL_MISUSE


def confusion(predictions: list[str], labels: list[str]) -> ConfusionMatrix:
    if len(predictions) != len(labels):
        raise ValueError(f"{len(predictions)} predictions vs {len(labels)} labels")
    tp = fp = fn = tn = 0
    for pred, label in zip(predictions, labels):
        if pred == LABEL_LEGIT and label == LABEL_LEGIT:
            tp += 1
        elif pred == LABEL_LEGIT and label == LABEL_MISUSE:
            fp += 1
        elif pred == LABEL_MISUSE and label == LABEL_LEGIT:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def metrics(cm: ConfusionMatrix) -> ClassMetrics:
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return ClassMetrics(precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class ScoredSample:
    sample: LabeledSample
    scores: dict[str, float]  # scorer name -> score in [0, 1]


def score_samples(
    samples: list[LabeledSample],
    corpus: list[str],
    config: ScoringConfig | None = None,
    window: int = EVAL_WINDOW,
) -> list[ScoredSample]:
    """Build the co-occurrence model and embeddings from the trusted corpus,
    then score every sample under all six scorers."""
    config = config or ScoringConfig()
    model = build_cooccurrence(corpus_to_sequences(corpus), window=window)
    store = derive_embeddings_from_cooccurrence(model)
    scored = []
    for sample in samples:
        history = list(sample.history)
        scores = {
            f"{n}-gram": ngram_precision(sample.candidate_report, history, n)
            for n in range(1, 5)
        }
        scores["BLEU"] = bt_b_score(sample.candidate_report, history, config.ngram_order)
        try:
            scores["proposed"] = bond_scores(
                sample.triple, history, sample.candidate_report, store, model, config
            ).bt
        except ScoringError:
            scores["proposed"] = 0.0
        scored.append(ScoredSample(sample=sample, scores=scores))
    return scored


def specialty_breakdown(
    scored: list[ScoredSample], threshold: float, scorer: str = "proposed"
) -> dict[str, ClassMetrics]:
    by_specialty: dict[str, tuple[list[str], list[str]]] = {}
    for row in scored:
        preds, labels = by_specialty.setdefault(row.sample.specialty, ([], []))
        preds.append(classify(row.scores[scorer], threshold))
        labels.append(row.sample.label)
    return {
        specialty: metrics(confusion(preds, labels))
        for specialty, (preds, labels) in sorted(by_specialty.items())
    }


def confidence_comparison(
    scored: list[ScoredSample], label: str | None = LABEL_LEGIT
) -> dict[str, float]:
    """Mean score per scorer over samples with the given label (all samples
    when label is None). Empty selections yield 0.0 means."""
    selected = [row for row in scored if label is None or row.sample.label == label]
    means = {}
    for scorer in SCORERS:
        if selected:
            means[scorer] = sum(row.scores[scorer] for row in selected) / len(selected)
        else:
            means[scorer] = 0.0
    return means


@dataclass(frozen=True)
class EvaluationReport:
    threshold: float
    sample_count: int
    confusions: dict[str, ConfusionMatrix]      # scorer -> confusion
    scorer_metrics: dict[str, ClassMetrics]     # scorer -> metrics
    specialty_metrics: dict[str, ClassMetrics]  # specialty -> metrics (proposed)
    confidence: dict[str, float]                # scorer -> mean legit score
    mismatch_counts: dict[str, int]


def evaluate(
    samples: list[LabeledSample],
    corpus: list[str],
    threshold: float = 0.7,
    config: ScoringConfig | None = None,
) -> EvaluationReport:
    if not samples:
        raise ValueError("cannot evaluate an empty sample list")
    scored = score_samples(samples, corpus, config)
    labels = [row.sample.label for row in scored]
    confusions = {}
    scorer_metrics = {}
    for scorer in SCORERS:
        preds = [classify(row.scores[scorer], threshold) for row in scored]
        cm = confusion(preds, labels)
        confusions[scorer] = cm
        scorer_metrics[scorer] = metrics(cm)
    return EvaluationReport(
        threshold=threshold,
        sample_count=len(scored),
        confusions=confusions,
        scorer_metrics=scorer_metrics,
        specialty_metrics=specialty_breakdown(scored, threshold),
        confidence=confidence_comparison(scored),
        mismatch_counts=dict(Counter(row.sample.mismatch_kind for row in scored)),
    )


def report_to_json_dict(report: EvaluationReport) -> dict:
    return {
        "threshold": report.threshold,
        "sample_count": report.sample_count,
        "scorers": {
            scorer: {
                "tp": cm.tp,
                "fp": cm.fp,
                "fn": cm.fn,
                "tn": cm.tn,
                "precision": report.scorer_metrics[scorer].precision,
                "recall": report.scorer_metrics[scorer].recall,
                "f1": report.scorer_metrics[scorer].f1,
                "mean_legit_confidence": report.confidence[scorer],
            }
            for scorer, cm in report.confusions.items()
        },
        "specialties": {
            specialty: {"precision": m.precision, "recall": m.recall, "f1": m.f1}
            for specialty, m in report.specialty_metrics.items()
        },
        "mismatch_counts": dict(sorted(report.mismatch_counts.items())),
    }


def report_to_csv(report: EvaluationReport) -> str:
    """One deterministic CSV: scorer rows first, then per-specialty rows."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["section", "name", "tp", "fp", "fn", "tn",
         "precision", "recall", "f1", "mean_legit_confidence"]
    )
    for scorer in SCORERS:
        cm = report.confusions[scorer]
        m = report.scorer_metrics[scorer]
        writer.writerow(
            ["scorer", scorer, cm.tp, cm.fp, cm.fn, cm.tn,
             f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}",
             f"{report.confidence[scorer]:.6f}"]
        )
    for specialty, m in report.specialty_metrics.items():
        writer.writerow(
            ["specialty", specialty, "", "", "", "",
             f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}", ""]
        )
    return out.getvalue()


def report_to_text(report: EvaluationReport) -> str:
    lines = [
        f"samples: {report.sample_count}   classification threshold: {report.threshold}",
        "",
        f"{'scorer':<10} {'tp':>6} {'fp':>6} {'fn':>6} {'tn':>6} "
        f"{'prec':>8} {'recall':>8} {'f1':>8} {'conf':>8}",
    ]
    for scorer in SCORERS:
        cm = report.confusions[scorer]
        m = report.scorer_metrics[scorer]
        lines.append(
            f"{scorer:<10} {cm.tp:>6} {cm.fp:>6} {cm.fn:>6} {cm.tn:>6} "
            f"{m.precision:>8.4f} {m.recall:>8.4f} {m.f1:>8.4f} "
            f"{report.confidence[scorer]:>8.4f}"
        )
    lines.append("")
    lines.append(f"{'specialty':<14} {'prec':>8} {'recall':>8} {'f1':>8}")
    for specialty, m in report.specialty_metrics.items():
        lines.append(
            f"{specialty:<14} {m.precision:>8.4f} {m.recall:>8.4f} {m.f1:>8.4f}"
        )
    return "\n".join(lines) + "\n"
