"""Orthonormal 2-tap wavelet decomposition and subband-entropy features.

One analysis level splits a grid into four half-resolution subbands
with the separable orthonormal (1/sqrt(2)) averaging/differencing pair:
ll keeps the local mean structure, hl and lh carry horizontal and
vertical detail, hh the diagonal residue. Deeper levels recurse on ll.

The per-level feature is the Shannon entropy of each subband after
min-max rescaling onto the 256-symbol intensity alphabet. Entropy of
the detail bands tracks texture richness and drops as an image is
blurred or compressed, which is what makes these four numbers per level
useful quality evidence.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .raster import Raster

MAX_LEVELS = 3
ENTROPY_BINS = 256


@dataclass(frozen=True)
class SubbandSet:
    """The four equally sized subbands produced by one analysis level."""

    ll: Raster
    hl: Raster
    lh: Raster
    hh: Raster
    level: int

    def __post_init__(self):
        shapes = {band.data.shape for band in self.bands()}
        if len(shapes) != 1:
            raise ValidationError(f"subband shapes differ: {sorted(shapes)}")
        if not 1 <= self.level <= MAX_LEVELS:
            raise ValidationError(f"subband level {self.level} outside 1..{MAX_LEVELS}")

    def bands(self):
        return (self.ll, self.hl, self.lh, self.hh)


def _check_levels(levels):
    if levels not in (1, 2, 3):
        raise ValidationError(f"decomposition depth must be 1, 2, or 3, got {levels!r}")


def haar_decompose(img, levels=1):
    """Decompose a raster into `levels` sets of orthonormal subbands.

    A trailing odd row/column is dropped before each level. Returns a
    list of SubbandSet, index 0 being the finest level; level k+1 is the
    decomposition of level k's ll band.
    """
    _check_levels(levels)
    h, w = img.data.shape
    need = 2 ** levels
    if h < need or w < need:
        raise ValidationError(
            f"image {w}x{h} too small for {levels} level(s); need at least {need}x{need}")
    sets = []
    cur = img.data
    for level in range(1, levels + 1):
        h2, w2 = cur.shape[0] // 2, cur.shape[1] // 2
        cur = cur[: 2 * h2, : 2 * w2]
        a = cur[0::2, 0::2]
        b = cur[0::2, 1::2]
        c = cur[1::2, 0::2]
        d = cur[1::2, 1::2]
        ll = (a + b + c + d) / 2.0
        hl = (a - b + c - d) / 2.0
        lh = (a + b - c - d) / 2.0
        hh = (a - b - c + d) / 2.0
        sets.append(SubbandSet(
            ll=Raster(ll, img.source_range),
            hl=Raster(hl, img.source_range),
            lh=Raster(lh, img.source_range),
            hh=Raster(hh, img.source_range),
            level=level,
        ))
        cur = ll
    return sets


def haar_reconstruct(bands):
    """Invert one analysis level, returning the even-dimension original."""
    ll, hl, lh, hh = (band.data for band in bands.bands())
    h2, w2 = ll.shape
    out = np.empty((2 * h2, 2 * w2), dtype=np.float64)
    out[0::2, 0::2] = (ll + hl + lh + hh) / 2.0
    out[0::2, 1::2] = (ll - hl + lh - hh) / 2.0
    out[1::2, 0::2] = (ll + hl - lh - hh) / 2.0
    out[1::2, 1::2] = (ll - hl - lh + hh) / 2.0
    return Raster(out, bands.ll.source_range)


def subband_entropy(band):
    """Shannon entropy (bits) of a subband's rescaled histogram.

    Coefficients are min-max rescaled to [0, 255], rounded to integers,
    and binned into 256 symbols; empty bins contribute nothing. A
    constant band has zero entropy. The result lies in [0, 8].
    """
    v = band.data.ravel()
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return 0.0
    scaled = np.rint((v - lo) * (255.0 / (hi - lo)))
    counts = np.bincount(np.clip(scaled, 0, 255).astype(np.int64), minlength=ENTROPY_BINS)
    p = counts[counts > 0] / v.size
    return float(-(p * np.log2(p)).sum())


def extract_multifrequency(img, levels=1):
    """Entropy feature vector over all subbands of all levels.

    Level-major layout, (ll, hl, lh, hh) within each level; length is
    4 * levels and every entry lies in [0, 8].
    """
    sets = haar_decompose(img, levels)
    return np.array([subband_entropy(band) for one in sets for band in one.bands()])
