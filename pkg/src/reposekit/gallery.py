"""Per-part appearance galleries and closest-domain selection.

A gallery groups candidate target images into named appearance domains,
one list of domains per facial part. Each domain carries one embedding
per candidate plus file references to that candidate's feature map and
landmarks. Selection picks, per part, the domain whose mean embedding is
most similar to the reference part embedding by cosine.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGalleryError,
    FormatError,
    MissingPartError,
    NonFiniteError,
    VersionUnsupportedError,
    ZeroQueryError,
)
from .formats import read_embedding
from .model import FacialPart

# Embedding values are float64 arrays of shape (d,).
Embedding = np.ndarray

MANIFEST_VERSION = 1


def _check_embedding(values, context: str) -> np.ndarray:
    emb = np.asarray(values, dtype=np.float64).reshape(-1)
    if emb.size == 0:
        raise ValueError(f"{context}: embedding must be non-empty")
    if not np.isfinite(emb).all():
        raise NonFiniteError(int(np.flatnonzero(~np.isfinite(emb))[0]), context=context)
    return emb


@dataclass(frozen=True, eq=False)
class TargetRef:
    """File references for one gallery candidate."""

    features: str
    landmarks: str


@dataclass(frozen=True, eq=False)
class Domain:
    """A named appearance domain: k embeddings plus their file references."""

    name: str
    embeddings: np.ndarray
    targets: tuple[TargetRef, ...]

    def __post_init__(self) -> None:
        emb = np.array(self.embeddings, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] < 1:
            raise ValueError(f"domain embeddings must be (k, d), got shape {emb.shape}")
        if not np.isfinite(emb).all():
            raise NonFiniteError(self.name, context="domain embedding")
        norms = np.linalg.norm(emb, axis=1)
        if (norms == 0.0).any():
            raise ZeroQueryError(f"domain {self.name!r} contains a zero-norm embedding")
        targets = tuple(self.targets)
        if len(targets) != emb.shape[0]:
            raise ValueError(
                f"domain {self.name!r}: {len(targets)} target refs for {emb.shape[0]} embeddings")
        emb.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dimension(self) -> int:
        return self.embeddings.shape[1]

    def mean_embedding(self) -> Embedding:
        # Sort per dimension so the mean does not depend on entry order.
        return np.sort(self.embeddings, axis=0).sum(axis=0) / self.size


@dataclass(frozen=True, eq=False)
class GalleryManifest:
    """Domains per facial part; every domain holds exactly k candidates."""

    parts: Mapping[FacialPart, tuple[Domain, ...]]
    k: int

    def __post_init__(self) -> None:
        parts = {part: tuple(domains) for part, domains in dict(self.parts).items()}
        missing = [p for p in FacialPart if p not in parts]
        if missing:
            raise MissingPartError(missing[0])
        k = int(self.k)
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        dim: int | None = None
        for part, domains in parts.items():
            if not domains:
                raise EmptyGalleryError(f"part {part.value} has no domains")
            for domain in domains:
                if domain.size != k:
                    raise ValueError(
                        f"domain {domain.name!r} holds {domain.size} entries, expected {k}")
                if dim is None:
                    dim = domain.dimension
                elif domain.dimension != dim:
                    raise DimensionMismatchError(domain.dimension, dim)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "k", k)

    @property
    def dimension(self) -> int:
        first = next(iter(self.parts.values()))
        return first[0].dimension


def closest_domain(ref_embedding, domains: Sequence[Domain]) -> Domain:
    """Domain whose mean embedding has the highest cosine similarity.

    Ties resolve to the earliest domain in list order.
    """
    domains = list(domains)
    if not domains:
        raise EmptyGalleryError("no candidate domains")
    ref = _check_embedding(ref_embedding, "reference embedding")
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0.0:
        raise ZeroQueryError("reference embedding has zero norm")
    scores = np.empty(len(domains))
    for i, domain in enumerate(domains):
        if domain.dimension != ref.shape[0]:
            raise DimensionMismatchError(domain.dimension, ref.shape[0])
        mean = domain.mean_embedding()
        norm = float(np.linalg.norm(mean))
        # A cancelled-out mean cannot win against any valid candidate.
        scores[i] = -2.0 if norm == 0.0 else float(mean @ ref) / (norm * ref_norm)
    return domains[int(np.argmax(scores))]


def assemble_targets(ref_embeddings: Mapping[FacialPart, Embedding],
                     gallery: GalleryManifest) -> dict[FacialPart, Domain]:
    """Pick the closest domain for every facial part."""
    selection: dict[FacialPart, Domain] = {}
    for part in FacialPart:
        if part not in ref_embeddings:
            raise MissingPartError(part)
        selection[part] = closest_domain(ref_embeddings[part], gallery.parts[part])
    return selection


def _resolve(base: Path, ref: str) -> str:
    path = Path(ref)
    return str(path if path.is_absolute() else (base / path))


def load_gallery_manifest(path) -> GalleryManifest:
    """Read a JSON gallery manifest; file references resolve relative to it.

    Schema: {"version": 1, "k": int, "parts": {part name: [{"name": str,
    "entries": [{"embedding", "features", "landmarks"}, ...]}, ...]}}.
    Embeddings are loaded from the referenced embedding files.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"gallery manifest is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError("gallery manifest must be a JSON object")
    version = payload.get("version")
    if version != MANIFEST_VERSION:
        raise VersionUnsupportedError(version)
    raw_parts = payload.get("parts")
    if not isinstance(raw_parts, dict):
        raise FormatError("gallery manifest needs a 'parts' object")
    base = path.parent
    by_value = {part.value: part for part in FacialPart}
    parts: dict[FacialPart, tuple[Domain, ...]] = {}
    for key, raw_domains in raw_parts.items():
        if key not in by_value:
            raise FormatError(f"unknown facial part {key!r}")
        if not isinstance(raw_domains, list):
            raise FormatError(f"part {key!r} must map to a list of domains")
        domains = []
        for raw in raw_domains:
            name = raw.get("name")
            entries = raw.get("entries")
            if not isinstance(name, str) or not isinstance(entries, list) or not entries:
                raise FormatError(f"malformed domain in part {key!r}")
            embeddings = []
            targets = []
            for entry in entries:
                try:
                    emb_ref = entry["embedding"]
                    feat_ref = entry["features"]
                    lm_ref = entry["landmarks"]
                except (TypeError, KeyError) as exc:
                    raise FormatError(f"malformed entry in domain {name!r}") from exc
                emb = read_embedding(_resolve(base, emb_ref))
                if embeddings and emb.shape[0] != embeddings[0].shape[0]:
                    raise DimensionMismatchError(emb.shape[0], embeddings[0].shape[0])
                embeddings.append(emb)
                targets.append(TargetRef(_resolve(base, feat_ref), _resolve(base, lm_ref)))
            domains.append(Domain(name, np.stack(embeddings), tuple(targets)))
        parts[by_value[key]] = tuple(domains)
    k = payload.get("k")
    if not isinstance(k, int):
        raise FormatError("gallery manifest needs an integer 'k'")
    return GalleryManifest(parts, k)
