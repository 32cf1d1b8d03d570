"""Attribute vector store, cosine similarity, and co-occurrence statistics.

The store holds one dense vector per token, either loaded from a word2vec
text file or derived from corpus co-occurrence counts (positive PMI rows).
Weights for the bond-trust pipeline come from the same co-occurrence model.
Both structures are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import math

import numpy as np

from .textnorm import tokenize

# Fallback vectors are dense over the vocabulary; keep desk-scale memory
# bounded.
PPMI_VOCAB_CAP = 10_000


class EmbeddingError(ValueError):
    """Malformed embedding input or an out-of-contract query."""


class EmbeddingFormatError(EmbeddingError):
    """Parse failure in word2vec text input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmbeddingStore:
    """Immutable token -> vector map with a single shared dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise EmbeddingError("store requires at least one vector")
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) != 1:
            raise EmbeddingError(f"inconsistent dimensions: {sorted(dims)}")
        self._vectors = {t: np.asarray(v, dtype=float) for t, v in vectors.items()}
        for token, vec in self._vectors.items():
            if not np.any(vec):
                raise EmbeddingError(f"zero vector for token {token!r}")
            vec.setflags(write=False)
        self.dimension = dims.pop()

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def tokens(self) -> list[str]:
        return list(self._vectors)

    def vector(self, token: str) -> np.ndarray:
        try:
            return self._vectors[token]
        except KeyError:
            raise EmbeddingError(f"unknown token {token!r}") from None


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product over the product of L2 norms, in [-1, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise EmbeddingError("cosine similarity undefined for zero vectors")
    return float(np.dot(a, b)) / (norm_a * norm_b)


def load_embeddings(source: TextIO) -> EmbeddingStore:
    """Parse word2vec text format: "<count> <dim>" header, then one token
    and `dim` floats per line. Errors carry the offending line number."""
    header = source.readline()
    if not header:
        raise EmbeddingFormatError(1, "empty input, expected '<count> <dimension>' header")
    parts = header.split()
    if len(parts) != 2:
        raise EmbeddingFormatError(1, f"expected '<count> <dimension>', got {header.strip()!r}")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingFormatError(1, f"non-integer header fields {header.strip()!r}") from None
    if count < 1 or dim < 1:
        raise EmbeddingFormatError(1, f"count and dimension must be >= 1, got {count} {dim}")

    vectors: dict[str, np.ndarray] = {}
    line_number = 1
    for raw in source:
        line_number += 1
        if not raw.strip():
            continue
        fields = raw.split()
        token = fields[0]
        if len(fields) - 1 != dim:
            raise EmbeddingFormatError(
                line_number, f"expected {dim} components for {token!r}, got {len(fields) - 1}"
            )
        if token in vectors:
            raise EmbeddingFormatError(line_number, f"duplicate token {token!r}")
        try:
            values = np.array([float(x) for x in fields[1:]], dtype=float)
        except ValueError:
            raise EmbeddingFormatError(line_number, f"non-numeric component for {token!r}") from None
        if not np.any(values):
            raise EmbeddingFormatError(line_number, f"zero vector for token {token!r}")
        vectors[token] = values
    if len(vectors) != count:
        raise EmbeddingFormatError(
            line_number, f"header declared {count} tokens, found {len(vectors)}"
        )
    return EmbeddingStore(vectors)


def save_embeddings(store: EmbeddingStore, sink: TextIO) -> None:
    """Write word2vec text format. Components use shortest round-trip
    decimal form, so a reload reproduces bit-identical vectors."""
    sink.write(f"{len(store)} {store.dimension}\n")
    for token in store.tokens():
        components = " ".join(repr(float(x)) for x in store.vector(token))
        sink.write(f"{token} {components}\n")


def top_k_context(store: EmbeddingStore, token: str, k: int) -> list[tuple[str, float]]:
    """The k most cosine-similar tokens to `token`, descending; exact ties
    break by ascending token order. k beyond the vocabulary returns all."""
    if k < 1:
        raise EmbeddingError(f"k must be >= 1, got {k}")
    query = store.vector(token)
    scored = [
        (other, cosine_similarity(query, store.vector(other)))
        for other in store.tokens()
        if other != token
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def embed_attribute(store: EmbeddingStore, attribute: str) -> np.ndarray:
    """Component-wise mean of the in-vocabulary token vectors of a value.

    Out-of-vocabulary tokens are skipped; if none remain the attribute is
    unembeddable and an error lists the tokens seen.
    """
    tokens = tokenize(attribute)
    known = [t for t in tokens if t in store]
    if not known:
        raise EmbeddingError(f"no in-vocabulary token in {attribute!r} (tokens: {tokens})")
    return np.mean([store.vector(t) for t in known], axis=0)


@dataclass(frozen=True)
class CooccurrenceModel:
    """Ordered pair counts within a token window, plus raw token counts.

    Counting is ordered, so the pair map is symmetric by construction:
    (a, b) and (b, a) are always incremented together.
    """

    window: int
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    token_counts: dict[str, int] = field(default_factory=dict)
    total: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.token_counts

    def pair_count(self, a: str, b: str) -> int:
        return self.pair_counts.get((a, b), 0)


def build_cooccurrence(corpus: Iterable[Sequence[str]], window: int) -> CooccurrenceModel:
    """Count ordered pairs (t_i, t_j), i != j, |i - j| <= window, within
    each sequence. An empty corpus yields an empty model."""
    if window < 1:
        raise EmbeddingError(f"window must be >= 1, got {window}")
    pair_counts: Counter[tuple[str, str]] = Counter()
    token_counts: Counter[str] = Counter()
    total = 0
    for sequence in corpus:
        tokens = list(sequence)
        token_counts.update(tokens)
        total += len(tokens)
        for i, left in enumerate(tokens):
            for j in range(max(0, i - window), min(len(tokens), i + window + 1)):
                if j != i:
                    pair_counts[(left, tokens[j])] += 1
    return CooccurrenceModel(
        window=window,
        pair_counts=dict(pair_counts),
        token_counts=dict(token_counts),
        total=total,
    )


def attribute_weight(
    model: CooccurrenceModel, a: str, b: str, orientation: str = "given_first"
) -> float:
    """Conditional co-occurrence weight for a token pair, clamped to [0, 1].

    "given_first" divides the ordered pair count by the first token's count
    (probability of b in the context of a); "given_second" divides by the
    second token's count.
    """
    for token in (a, b):
        if token not in model.token_counts:
            raise EmbeddingError(f"token {token!r} not in co-occurrence model")
    if orientation == "given_first":
        denominator = model.token_counts[a]
    elif orientation == "given_second":
        denominator = model.token_counts[b]
    else:
        raise EmbeddingError(f"unknown weight orientation {orientation!r}")
    # Ordered window counting can exceed the token count (self pairs), so
    # the ratio is clamped.
    return min(1.0, model.pair_count(a, b) / denominator)


def derive_embeddings_from_cooccurrence(model: CooccurrenceModel) -> EmbeddingStore:
    """Positive-PMI rows of the co-occurrence matrix as dense vectors.

    Component j of token t is max(0, log(P(t, v_j) / (P(t)P(v_j)))) with all
    probabilities taken from the pair-count matrix and its marginals;
    undefined entries are 0. Components follow sorted vocabulary order, so
    the dimension is the vocabulary size. A token whose row comes out all
    zero (no informative co-occurrence) gets a unit self component instead,
    keeping every stored vector non-zero.
    """
    if not model.token_counts:
        raise EmbeddingError("cannot derive embeddings from an empty model")
    vocabulary = sorted(model.token_counts)
    if len(vocabulary) > PPMI_VOCAB_CAP:
        raise EmbeddingError(
            f"vocabulary of {len(vocabulary)} exceeds fallback cap {PPMI_VOCAB_CAP}"
        )
    index = {token: i for i, token in enumerate(vocabulary)}
    size = len(vocabulary)

    counts = np.zeros((size, size), dtype=float)
    for (a, b), count in model.pair_counts.items():
        counts[index[a], index[b]] = count
    total_pairs = counts.sum()

    vectors: dict[str, np.ndarray] = {}
    if total_pairs > 0:
        marginals = counts.sum(axis=1) / total_pairs
        joint = counts / total_pairs
        for token in vocabulary:
            i = index[token]
            row = np.zeros(size, dtype=float)
            if marginals[i] > 0:
                for j in range(size):
                    if joint[i, j] > 0 and marginals[j] > 0:
                        pmi = math.log(joint[i, j] / (marginals[i] * marginals[j]))
                        if pmi > 0:
                            row[j] = pmi
            if not np.any(row):
                row[i] = 1.0
            vectors[token] = row
    else:
        for token in vocabulary:
            row = np.zeros(size, dtype=float)
            row[index[token]] = 1.0
            vectors[token] = row
    return EmbeddingStore(vectors)
