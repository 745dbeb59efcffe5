"""Natural-scene-statistics features.

The recipe per scale: decorrelate the grid with a zero-phase whitening
filter learned from the grid's own patch covariance, normalize every
pixel by its local mean and contrast, then summarize the normalized
coefficients with a symmetric generalized Gaussian fit and each of the
four neighbor-product orientation maps with an asymmetric generalized
Gaussian fit. Natural images keep these statistics in a narrow regime;
distortions push the fitted parameters away from it.

Per scale that is 2 + 4 * 4 = 18 values; two scales (full resolution
and a 2x2-block-mean half resolution) give the 36-value vector.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from .errors import DegenerateDataError, ValidationError
from .raster import Raster, downsample_half

NSS_FEATURE_COUNT = 36
NSS_SCALES = 2
MIN_FIT_SAMPLES = 100

# Both fitters invert the same moment-ratio function of the shape
# parameter on a fixed grid: 0.2 to 10 in steps of 0.001.
SHAPE_GRID = np.linspace(0.2, 10.0, 9801)
_SHAPE_RATIO = (gamma_fn(2.0 / SHAPE_GRID) ** 2
                / (gamma_fn(1.0 / SHAPE_GRID) * gamma_fn(3.0 / SHAPE_GRID)))


@dataclass(frozen=True)
class ZcaConfig:
    """Whitening-filter settings: patch side (odd) and the eigenvalue floor."""

    patch_size: int = 5
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValidationError(f"patch_size must be odd and >= 3, got {self.patch_size}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class MscnConfig:
    """Local-normalization settings.

    window_radius 3 means a 7x7 window; c is the contrast stabilizer,
    1.0 being calibrated for inputs on a [0, 255] scale.
    """

    window_radius: int = 3
    sigma: float = 7.0 / 6.0
    c: float = 1.0

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValidationError(f"window_radius must be >= 1, got {self.window_radius}")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not self.c > 0:
            raise ValidationError(f"c must be positive, got {self.c}")


@dataclass(frozen=True)
class GgdParams:
    """Symmetric generalized Gaussian: shape tau and second moment sigma^2."""

    shape: float
    variance: float


@dataclass(frozen=True)
class AggdParams:
    """Asymmetric generalized Gaussian: shape, per-side second moments, mean."""

    shape: float
    left_variance: float
    right_variance: float
    mean: float


def zca_kernel(img, cfg=ZcaConfig()):
    """Learn the zero-phase whitening kernel from an image's own patches.

    Covariance is estimated over all non-overlapping patch_size^2
    patches of the mean-removed image and symmetrized under the
    180-degree patch flip, which makes the center row of
    V (Lambda + eps I)^(-1/2) V^T an exactly zero-phase filter. Returns
    the kernel as a patch_size x patch_size array.
    """
    p = cfg.patch_size
    h, w = img.data.shape
    if h < p or w < p:
        raise ValidationError(f"image {w}x{h} smaller than the {p}x{p} whitening patch")
    x = img.data - img.data.mean()
    hp, wp = h // p, w // p
    patches = (x[: hp * p, : wp * p]
               .reshape(hp, p, wp, p)
               .transpose(0, 2, 1, 3)
               .reshape(hp * wp, p * p))
    cov = patches.T @ patches / patches.shape[0]
    flip = np.arange(p * p - 1, -1, -1)
    cov = 0.5 * (cov + cov[np.ix_(flip, flip)])
    lam, vec = np.linalg.eigh(cov)
    lam = np.maximum(lam, 0.0) + cfg.epsilon
    whitener = (vec / np.sqrt(lam)) @ vec.T
    return whitener[(p * p) // 2].reshape(p, p)


def zca_whiten(img, cfg=ZcaConfig()):
    """Apply the learned whitening kernel with reflect padding.

    The filter runs over the mean-removed image, so the output is a
    zero-mean decorrelated grid of the same dimensions.
    """
    kernel = zca_kernel(img, cfg)
    x = img.data - img.data.mean()
    return Raster(ndimage.convolve(x, kernel, mode="reflect"), img.source_range)


def gaussian_window(radius=3, sigma=7.0 / 6.0):
    """Circularly symmetric Gaussian weights on a (2r+1)^2 grid, sum 1."""
    ys, xs = np.mgrid[-radius: radius + 1, -radius: radius + 1]
    w = np.exp(-(xs * xs + ys * ys) / (2.0 * sigma * sigma))
    return w / w.sum()


def mscn(img, cfg=MscnConfig()):
    """Mean-subtracted contrast-normalized coefficients.

    Per pixel: (v - mu) / (sigma + c) with mu and sigma the local
    Gaussian-weighted mean and standard deviation, reflect padding at
    the borders. Output dims equal input dims.
    """
    size = 2 * cfg.window_radius + 1
    h, w = img.data.shape
    if h < size or w < size:
        raise ValidationError(f"image {w}x{h} smaller than the {size}x{size} window")
    x = img.data
    if x.max() == x.min():
        # exactly zero, not the rounding residue the convolution leaves
        return Raster(np.zeros_like(x), img.source_range)
    weights = gaussian_window(cfg.window_radius, cfg.sigma)
    mu = ndimage.convolve(x, weights, mode="reflect")
    second = ndimage.convolve(x * x, weights, mode="reflect")
    sigma = np.sqrt(np.maximum(second - mu * mu, 0.0))
    return Raster((x - mu) / (sigma + cfg.c), img.source_range)


def paired_products(field):
    """Neighbor products of a coefficient field, one map per orientation.

    Order: horizontal, vertical, main diagonal, secondary diagonal.
    Each map loses one row and/or column relative to the input.
    """
    m = np.asarray(field, dtype=np.float64)
    return (
        m[:, :-1] * m[:, 1:],
        m[:-1, :] * m[1:, :],
        m[:-1, :-1] * m[1:, 1:],
        m[:-1, 1:] * m[1:, :-1],
    )


def _checked_samples(samples):
    v = np.asarray(samples, dtype=np.float64).ravel()
    if v.size < MIN_FIT_SAMPLES:
        raise ValidationError(f"need at least {MIN_FIT_SAMPLES} samples, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("samples contain non-finite values")
    return v


def _grid_shape(ratio):
    # first grid point on ties, i.e. the smallest matching shape
    return float(SHAPE_GRID[np.argmin(np.abs(_SHAPE_RATIO - ratio))])


def fit_ggd(samples):
    """Moment-match a zero-mean symmetric generalized Gaussian.

    The shape comes from inverting E[|x|]^2 / E[x^2] on the fixed grid;
    the variance is the raw second moment. Raises DegenerateDataError
    when every sample is zero.
    """
    v = _checked_samples(samples)
    second = float(np.mean(v * v))
    if second == 0.0:
        raise DegenerateDataError("cannot fit a distribution to all-zero samples")
    rho = float(np.mean(np.abs(v))) ** 2 / second
    return GgdParams(shape=_grid_shape(rho), variance=second)


def fit_aggd(samples):
    """Moment-match a zero-mode asymmetric generalized Gaussian.

    Side second moments come from the strictly negative and strictly
    positive samples; the shape from the asymmetry-corrected moment
    ratio on the fixed grid; the mean from the fitted side scales (it
    carries the sign of right_sigma - left_sigma).
    """
    v = _checked_samples(samples)
    neg = v[v < 0]
    pos = v[v > 0]
    if neg.size == 0 or pos.size == 0:
        raise ValidationError("samples are one-sided; need mass on both sides of zero")
    left_variance = float(np.mean(neg * neg))
    right_variance = float(np.mean(pos * pos))
    gamma_hat = math.sqrt(left_variance / right_variance)
    r_hat = float(np.mean(np.abs(v))) ** 2 / float(np.mean(v * v))
    big_r = r_hat * (gamma_hat ** 3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat ** 2 + 1.0) ** 2
    shape = _grid_shape(big_r)
    side_scale = math.sqrt(gamma_fn(1.0 / shape) / gamma_fn(3.0 / shape))
    left_scale = math.sqrt(left_variance) * side_scale
    right_scale = math.sqrt(right_variance) * side_scale
    mean = (right_scale - left_scale) * gamma_fn(2.0 / shape) / gamma_fn(1.0 / shape)
    return AggdParams(shape=shape, left_variance=left_variance,
                      right_variance=right_variance, mean=mean)


def extract_naturalness(img, zca=ZcaConfig(), mscn_cfg=MscnConfig()):
    """The 36-value naturalness vector of one raster.

    Per scale (original, then the half-resolution downsample of the
    original): whiten (skipped when zca is None), normalize, fit the
    symmetric model to the coefficients (shape, variance) and the
    asymmetric model to each orientation map (mean, shape, left and
    right variance). Scale-major layout.
    """
    feats = []
    for scale in range(NSS_SCALES):
        scaled = img if scale == 0 else downsample_half(img)
        work = zca_whiten(scaled, zca) if zca is not None else scaled
        coeffs = mscn(work, mscn_cfg).data
        g = fit_ggd(coeffs)
        feats.extend([g.shape, g.variance])
        for product in paired_products(coeffs):
            a = fit_aggd(product)
            feats.extend([a.mean, a.shape, a.left_variance, a.right_variance])
    return np.array(feats)


__all__ = [
    "AggdParams", "GgdParams", "MscnConfig", "ZcaConfig",
    "NSS_FEATURE_COUNT", "extract_naturalness", "fit_aggd", "fit_ggd",
    "gaussian_window", "mscn", "paired_products", "zca_kernel", "zca_whiten",
]
