"""Lexical label folding: rule lemmatizer plus a file-backed synonym lexicon.

Semantic synonymy (attack ~ strike) lives in the lexicon file; this module
only knows how to fold surface variation (case, separators, inflection).
The lemmatizer is a small suffix-rule cascade run to a fixed point, with an
exception table consulted before the rules on every pass, so irregular and
silent-e forms can be pinned explicitly.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from .errors import EmptyLabel, MalformedJson, SchemaViolation

log = logging.getLogger(__name__)

_SPLIT = re.compile(r"[_\s]+")
_VOWELS = set("aeiouy")
# pairs like ll/ss/zz are part of the stem, not inflection doubling
_KEEP_DOUBLED = {"ll", "ss", "zz"}


def fold_label(label: str) -> str:
    """Case and separator folding only; no lemmatization."""
    if not label or not label.strip():
        raise EmptyLabel(repr(label))
    return "_".join(t for t in _SPLIT.split(label.strip().lower()) if t)


@dataclass(frozen=True)
class SynonymLexicon:
    groups: tuple[frozenset[str], ...] = ()
    lemma_exceptions: dict[str, str] = field(default_factory=dict)
    _group_of: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def empty(cls) -> "SynonymLexicon":
        return cls()

    @classmethod
    def build(cls, groups, lemma_exceptions=None) -> "SynonymLexicon":
        """Normalize group entries to lexical keys and merge overlapping groups."""
        exceptions = {
            str(k).lower(): str(v).lower() for k, v in (lemma_exceptions or {}).items()
        }
        proto = cls((), exceptions)
        merged: list[set[str]] = []
        for raw_group in groups:
            keys = {lexical_key(str(label), proto) for label in raw_group}
            if len(keys) < 2:
                continue
            overlapping = [g for g in merged if g & keys]
            for g in overlapping:
                log.warning("synonym groups overlap on %s; merging", sorted(g & keys))
                keys |= g
                merged.remove(g)
            merged.append(keys)
        merged.sort(key=lambda g: sorted(g)[0])
        group_of = {label: i for i, g in enumerate(merged) for label in g}
        return cls(tuple(frozenset(g) for g in merged), exceptions, group_of)

    def same_group(self, key_a: str, key_b: str) -> bool:
        ia = self._group_of.get(key_a)
        return ia is not None and ia == self._group_of.get(key_b)

    def group_of(self, key: str) -> frozenset[str] | None:
        i = self._group_of.get(key)
        return self.groups[i] if i is not None else None


def load_lexicon(raw: bytes | str) -> SynonymLexicon:
    """Parse the lexicon JSON: {"groups": [[...], ...], "lemma_exceptions": {...}}."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid lexicon JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("$", "lexicon must be an object")
    groups = obj.get("groups", [])
    exceptions = obj.get("lemma_exceptions", {})
    if not isinstance(groups, list) or not all(
        isinstance(g, list) and all(isinstance(x, str) and x for x in g) for g in groups
    ):
        raise SchemaViolation("$.groups", "expected list of lists of nonempty strings")
    if not isinstance(exceptions, dict) or not all(
        isinstance(k, str) and isinstance(v, str) and k and v for k, v in exceptions.items()
    ):
        raise SchemaViolation("$.lemma_exceptions", "expected map of string to string")
    return SynonymLexicon.build(groups, exceptions)


def _strip_suffix_once(token: str) -> str:
    """One pass of the rule cascade; returns the token unchanged if no rule fits."""
    if token.endswith("ies") and len(token) >= 5:
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("es") and token[:-2].endswith(("s", "x", "z", "ch", "sh")):
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) >= 3:
        return token[:-1]
    for suffix in ("ing", "ed"):
        if not token.endswith(suffix):
            continue
        stem = token[: -len(suffix)]
        if len(stem) < 2 or not (_VOWELS & set(stem)):
            continue
        if suffix == "ed" and token.endswith("eed"):
            continue  # need, feed, ...
        if (
            len(stem) >= 3
            and stem[-1] == stem[-2]
            and stem[-1] not in _VOWELS
            and stem[-2:] not in _KEEP_DOUBLED
        ):
            stem = stem[:-1]
        return stem
    return token


def lemmatize_token(token: str, lexicon: SynonymLexicon) -> str:
    """Fold one lowercase token to its lemma; exception table wins each pass."""
    path = [token]
    seen = {token}
    while True:
        nxt = lexicon.lemma_exceptions.get(token, token)
        if nxt == token:
            nxt = _strip_suffix_once(token)
        if nxt == token:
            return token
        if nxt in seen:
            # cyclic exception table: pick a fixed representative so the
            # result is still idempotent
            return min(path[path.index(nxt):])
        seen.add(nxt)
        path.append(nxt)
        token = nxt


def lexical_key(label: str, lexicon: SynonymLexicon) -> str:
    """Lowercase, split on separators, lemmatize each token, rejoin with '_'."""
    folded = fold_label(label)
    return "_".join(lemmatize_token(t, lexicon) for t in folded.split("_"))
