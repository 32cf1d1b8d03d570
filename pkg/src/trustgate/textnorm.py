"""Shared text normalization.

Every module that touches free text (embeddings, weights, report scoring,
compliance name matching) uses the same rule so token identities never
drift between subsystems.
"""

from __future__ import annotations

import re

# One or more letters/digits; underscores and all punctuation act as
# separators. Case is folded before matching.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character.

    Empty tokens are dropped; an empty or punctuation-only input yields [].
    """
    return _TOKEN_RE.findall(text.lower())


def normalize_name(name: str) -> str:
    """Canonical form of an attribute name: tokens joined by single spaces."""
    return " ".join(tokenize(name))
