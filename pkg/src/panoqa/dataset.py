"""Dataset manifests, per-image feature assembly, and the feature cache.

A manifest is a CSV with header path,mos and optional trailing
distortion and reference columns. Two optional comment directives may
precede the header: "# name: <text>" and "# mos_scale: <low> <high>".
Paths are the image ids everywhere downstream and resolve relative to
the manifest's directory.

The cache stores one small text file per (image content, extraction
config) pair, keyed by sha256 over the image file bytes plus the
config fingerprint, so edits to either invalidate the entry. Writes go
through a temp file and an atomic rename.
"""

import csv
import hashlib
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .errors import ManifestError, PanoqaError
from .raster import load_erp
from .viewport import combine_local_global, extract_local_naturalness
from .nss import extract_naturalness
from .wavelet import extract_multifrequency

MANIFEST_COLUMNS = ("path", "mos", "distortion", "reference")


@dataclass(frozen=True)
class ManifestEntry:
    path: str              # as written in the CSV; the image id
    resolved: str          # absolute filesystem path
    mos: float
    distortion: str | None = None
    reference: str | None = None


@dataclass
class DatasetManifest:
    name: str
    mos_scale: tuple
    entries: list

    def __len__(self):
        return len(self.entries)

    def ids(self):
        return [e.path for e in self.entries]

    def scores(self):
        return np.array([e.mos for e in self.entries])

    def references(self):
        return [e.reference for e in self.entries]

    def mos_by_id(self):
        return {e.path: e.mos for e in self.entries}


def _parse_directives(lines):
    name = None
    scale = None
    rows = []
    for lineno, line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("name:"):
                name = body[5:].strip()
            elif body.lower().startswith("mos_scale:"):
                parts = body[10:].split()
                if len(parts) != 2:
                    raise ManifestError(
                        f"line {lineno}: mos_scale needs two numbers, got {body!r}")
                try:
                    scale = (float(parts[0]), float(parts[1]))
                except ValueError:
                    raise ManifestError(
                        f"line {lineno}: mos_scale values must be numbers") from None
            continue
        if stripped:
            rows.append((lineno, line))
    return name, scale, rows


def load_manifest(path, mos_scale=None, name=None):
    """Parse and validate a manifest CSV.

    mos_scale and name arguments override the in-file directives; when
    neither is given the scale defaults to the observed score range.
    Duplicate paths, malformed rows, and out-of-scale scores are
    rejected with the offending line number.
    """
    manifest_path = Path(path)
    text = manifest_path.read_text(encoding="utf-8")
    file_name, file_scale, rows = _parse_directives(
        list(enumerate(text.splitlines(), start=1)))
    if not rows:
        raise ManifestError(f"{path}: no header row found")

    header_lineno, header_line = rows[0]
    header = next(csv.reader([header_line]))
    header = [h.strip() for h in header]
    expected = list(MANIFEST_COLUMNS[: len(header)])
    if len(header) < 2 or len(header) > 4 or header != expected:
        raise ManifestError(
            f"line {header_lineno}: header must be path,mos[,distortion][,reference], "
            f"got {','.join(header)}")

    base = manifest_path.resolve().parent
    entries = []
    seen = set()
    for lineno, line in rows[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(header):
            raise ManifestError(
                f"line {lineno}: expected {len(header)} cells, got {len(cells)}")
        rel = cells[0].strip()
        if not rel:
            raise ManifestError(f"line {lineno}: empty path")
        if rel in seen:
            raise ManifestError(f"line {lineno}: duplicate path {rel!r}")
        seen.add(rel)
        try:
            mos = float(cells[1])
        except ValueError:
            raise ManifestError(
                f"line {lineno}: mos {cells[1]!r} is not a number") from None
        if not np.isfinite(mos):
            raise ManifestError(f"line {lineno}: mos must be finite")
        distortion = cells[2].strip() if len(cells) > 2 and cells[2].strip() else None
        reference = cells[3].strip() if len(cells) > 3 and cells[3].strip() else None
        entries.append(ManifestEntry(
            path=rel, resolved=str((base / rel).resolve()), mos=mos,
            distortion=distortion, reference=reference))
    if not entries:
        raise ManifestError(f"{path}: manifest holds no entries")

    scale = mos_scale if mos_scale is not None else file_scale
    if scale is not None:
        low, high = float(scale[0]), float(scale[1])
        if not low < high:
            raise ManifestError(f"mos_scale low {low} must be below high {high}")
        for (lineno, _), entry in zip(rows[1:], entries):
            if not low <= entry.mos <= high:
                raise ManifestError(
                    f"line {lineno}: mos {entry.mos} outside scale [{low}, {high}]")
        scale = (low, high)
    else:
        scores = [e.mos for e in entries]
        scale = (min(scores), max(scores))
    resolved_name = name or file_name or manifest_path.stem
    return DatasetManifest(name=resolved_name, mos_scale=scale, entries=entries)


def extract_image_features(img, cfg=PipelineConfig()):
    """Full per-image vector: multifrequency entropies, then local and
    global naturalness. Length cfg.feature_dim."""
    zca = cfg.zca_config()
    mscn_cfg = cfg.mscn_config()
    frequency = extract_multifrequency(img, cfg.levels)
    local = extract_local_naturalness(img, cfg.sampling_config(), zca, mscn_cfg)
    global_vec = extract_naturalness(img, zca, mscn_cfg)
    return np.concatenate([frequency, combine_local_global(local, global_vec)])


@dataclass
class DatasetFeatures:
    """Feature rows in manifest order, minus any failed images."""

    ids: list
    matrix: np.ndarray
    failures: list           # (id, error text) pairs
    cache_hits: int = 0
    cache_misses: int = 0


def _cache_key(image_path, fingerprint):
    digest = hashlib.sha256()
    with open(image_path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    digest.update(b"\n")
    digest.update(fingerprint.encode("ascii"))
    return digest.hexdigest()


def _cache_read(cache_dir, key, dim):
    entry = Path(cache_dir) / f"{key}.csv"
    if not entry.is_file():
        return None
    try:
        vector = np.array([float(tok) for tok in
                           entry.read_text(encoding="ascii").strip().split(",")])
    except ValueError:
        return None
    return vector if vector.size == dim else None


def _cache_write(cache_dir, key, vector):
    directory = Path(cache_dir)
    directory.mkdir(parents=True, exist_ok=True)
    text = ",".join(format(v, ".17g") for v in vector) + "\n"
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
        os.replace(tmp, directory / f"{key}.csv")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _compute_one(resolved, cfg):
    return extract_image_features(load_erp(resolved), cfg)


def extract_dataset_features(manifest, cfg=PipelineConfig(), cache_dir=None,
                             jobs=1, strict=False):
    """Extract (or fetch cached) features for every manifest entry.

    Rows come back in manifest order. Failures are collected per image
    and excluded; with strict=True the first failure is re-raised
    instead. jobs > 1 computes cache misses in parallel processes
    without changing the output order.
    """
    dim = cfg.feature_dim
    fingerprint = cfg.fingerprint()
    vectors = {}
    failures = []
    hits = misses = 0
    keys = {}
    pending = []

    for entry in manifest.entries:
        if cache_dir is not None:
            try:
                key = _cache_key(entry.resolved, fingerprint)
            except OSError as exc:
                if strict:
                    raise
                failures.append((entry.path, str(exc)))
                continue
            keys[entry.path] = key
            cached = _cache_read(cache_dir, key, dim)
            if cached is not None:
                vectors[entry.path] = cached
                hits += 1
                continue
            misses += 1
        pending.append(entry)

    def record(entry, vector):
        vectors[entry.path] = vector
        if cache_dir is not None:
            _cache_write(cache_dir, keys[entry.path], vector)

    def record_failure(entry, exc):
        if strict:
            raise exc
        failures.append((entry.path, str(exc)))

    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_compute_one, e.resolved, cfg) for e in pending]
            for entry, future in zip(pending, futures):
                try:
                    vector = future.result()
                except (PanoqaError, OSError) as exc:
                    record_failure(entry, exc)
                    continue
                record(entry, vector)
    else:
        for entry in pending:
            try:
                vector = _compute_one(entry.resolved, cfg)
            except (PanoqaError, OSError) as exc:
                record_failure(entry, exc)
                continue
            record(entry, vector)

    ids = [e.path for e in manifest.entries if e.path in vectors]
    matrix = (np.vstack([vectors[i] for i in ids]) if ids
              else np.empty((0, dim)))
    return DatasetFeatures(ids=ids, matrix=matrix, failures=failures,
                           cache_hits=hits, cache_misses=misses)
