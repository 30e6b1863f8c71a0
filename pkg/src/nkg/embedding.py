"""Embedding providers behind a single contract: embed(label) -> unit vector.

Three implementations:

- HashedNgramProvider: deterministic character-trigram feature hashing,
  needs no data files or network. Captures surface similarity only;
  semantic synonymy is the lexicon's job.
- VectorFileProvider: precomputed vectors from a JSON file, exact labels only.
- RemoteProvider: HTTP client for an external embedding service
  (POST <endpoint>/embed with {"texts": [...]}).

All providers return L2-normalized float vectors of one fixed dimension per
provider instance, and the same label always yields the same vector.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request

import numpy as np

from .errors import (
    BadStatus,
    DimensionMismatch,
    EmptyLabel,
    MalformedJson,
    MissingLabel,
    RemoteTimeout,
    SchemaViolation,
)
from .lexicon import fold_label

DEFAULT_DIM = 256
DEFAULT_TIMEOUT = 10.0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def embed_hashed(label: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Trigram feature hashing: each token of the folded label is hashed into
    `dim` signed buckets, token vectors are unit-normalized and averaged, and
    the result is normalized again."""
    tokens = fold_label(label).split("_")  # raises EmptyLabel on blank input
    total = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        vec = np.zeros(dim, dtype=np.float64)
        padded = f"^{token}$"
        for i in range(len(padded) - 2):
            h = _fnv1a(padded[i : i + 3].encode("utf-8"))
            vec[h % dim] += 1.0 if h % 2 == 0 else -1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        total += vec
    total /= len(tokens)
    norm = np.linalg.norm(total)
    return total / norm if norm > 0 else total


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _normalized(values, dim: int, context: str) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.shape != (dim,):
        raise DimensionMismatch(f"{context}: expected {dim} values, got shape {vec.shape}")
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


class HashedNgramProvider:
    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim
        self.provider_id = f"hashed:fnv1a-trigram:{dim}"
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, label: str) -> np.ndarray:
        if label not in self._cache:
            self._cache[label] = embed_hashed(label, self.dim)
        return self._cache[label]


class VectorFileProvider:
    """Serves exactly the labels listed in a vector file; nothing else."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int, source: str = "<memory>"):
        self.dim = dim
        self.provider_id = f"file:{source}"
        self._vectors = vectors

    def embed(self, label: str) -> np.ndarray:
        try:
            return self._vectors[label]
        except KeyError:
            raise MissingLabel(label) from None

    @property
    def labels(self) -> set[str]:
        return set(self._vectors)


def parse_vector_file(raw: bytes | str, source: str = "<memory>") -> VectorFileProvider:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid vector file JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("vectors"), dict):
        raise SchemaViolation("$", 'vector file must be {"dim": int, "vectors": {...}}')
    dim = obj.get("dim", DEFAULT_DIM)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaViolation("$.dim", "dim must be a positive integer")
    vectors = {
        label: _normalized(values, dim, f"vector for {label!r}")
        for label, values in obj["vectors"].items()
    }
    return VectorFileProvider(vectors, dim, source)


def load_vector_file(path: str) -> VectorFileProvider:
    with open(path, "rb") as fh:
        return parse_vector_file(fh.read(), source=path)


def remote_embed(
    endpoint: str, labels: list[str], timeout: float = DEFAULT_TIMEOUT
) -> list[np.ndarray]:
    """One batched POST to <endpoint>/embed; returns one vector per label."""
    if any(not label for label in labels):
        raise EmptyLabel("remote embedding request")
    url = endpoint.rstrip("/") + "/embed"
    body = json.dumps({"texts": list(labels)}).encode("utf-8")
    request = urllib.request.Request(
        url, data=body, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            payload = response.read()
    except urllib.error.HTTPError as exc:
        raise BadStatus(exc.code, exc.reason) from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, TimeoutError):
            raise RemoteTimeout(f"no answer from {url} within {timeout}s") from exc
        raise BadStatus(0, f"{url}: {exc.reason}") from exc
    except TimeoutError as exc:
        raise RemoteTimeout(f"no answer from {url} within {timeout}s") from exc
    try:
        obj = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise BadStatus(200, f"non-JSON response from {url}") from exc
    vectors = obj.get("vectors") if isinstance(obj, dict) else None
    if not isinstance(vectors, list):
        raise BadStatus(200, 'response missing "vectors" list')
    if len(vectors) != len(labels):
        raise DimensionMismatch(
            f"sent {len(labels)} labels, endpoint returned {len(vectors)} vectors"
        )
    if not vectors:
        return []
    dim = len(vectors[0])
    return [_normalized(v, dim, f"vector for {label!r}") for label, v in zip(labels, vectors)]


class RemoteProvider:
    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.timeout = timeout
        self.provider_id = f"remote:{endpoint}"
        self.dim: int | None = None
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, label: str) -> np.ndarray:
        if label not in self._cache:
            self.embed_batch([label])
        return self._cache[label]

    def embed_batch(self, labels: list[str]) -> list[np.ndarray]:
        missing = [l for l in dict.fromkeys(labels) if l not in self._cache]
        if missing:
            for label, vec in zip(missing, remote_embed(self.endpoint, missing, self.timeout)):
                if self.dim is None:
                    self.dim = len(vec)
                elif len(vec) != self.dim:
                    raise DimensionMismatch(
                        f"endpoint switched dimension {self.dim} -> {len(vec)}"
                    )
                self._cache[label] = vec
        return [self._cache[label] for label in labels]
