"""Latitude-adaptive viewport sampling and rectilinear extraction.

An equirectangular grid maps column u to longitude (u/width - 0.5) *
360 degrees and row v to latitude (0.5 - v/height) * 180 degrees.
Viewport centers are planned on latitude rings: a fixed count on the
equator and, stepping toward each pole by the equator spacing, counts
shrinking with the cosine of latitude so the directions stay roughly
uniform on the sphere. Each center is rendered with a gnomonic
(rectilinear) projection; the per-image local naturalness vector is the
mean of the per-viewport vectors.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ValidationError
from .nss import MscnConfig, ZcaConfig, extract_naturalness
from .raster import Raster

LOCAL_FEATURE_COUNT = 36
COMBINED_FEATURE_COUNT = 72


def round_half_up(x):
    """Deterministic round: halves go up, never to even."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ViewportSamplingConfig:
    """Ring plan settings: equator viewport count, field of view, size.

    The ring latitude step is 360/equator_count degrees, i.e. the same
    angle that separates neighboring equator viewports.
    """

    equator_count: int = 8
    fov: float = 90.0
    size: int = 256

    def __post_init__(self):
        if self.equator_count < 4:
            raise ValidationError(f"equator_count must be >= 4, got {self.equator_count}")
        if not 0.0 < self.fov < 180.0:
            raise ValidationError(f"fov must lie in (0, 180) degrees, got {self.fov}")
        if self.size < 2:
            raise ValidationError(f"viewport size must be >= 2, got {self.size}")

    @property
    def ring_step(self):
        return 360.0 / self.equator_count


@dataclass(frozen=True)
class ViewportSpec:
    """One viewport: center direction plus rendering geometry."""

    longitude: float
    latitude: float
    fov: float = 90.0
    size: int = 256

    def __post_init__(self):
        if not -180.0 <= self.longitude < 180.0:
            raise ValidationError(f"longitude {self.longitude} outside [-180, 180)")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError(f"latitude {self.latitude} outside [-90, 90]")
        if not 0.0 < self.fov < 180.0:
            raise ValidationError(f"fov must lie in (0, 180) degrees, got {self.fov}")
        if self.size < 2:
            raise ValidationError(f"viewport size must be >= 2, got {self.size}")


@dataclass(frozen=True)
class ViewportSet:
    """Planned viewport specs paired with their rendered rasters."""

    specs: tuple
    rasters: tuple

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "rasters", tuple(self.rasters))
        if len(self.specs) != len(self.rasters):
            raise ValidationError(
                f"specs and rasters must be parallel, got {len(self.specs)} "
                f"specs and {len(self.rasters)} rasters")

    @property
    def count(self):
        return len(self.specs)


def plan_viewports(cfg=ViewportSamplingConfig()):
    """Plan viewport centers on cosine-weighted latitude rings.

    The equator ring holds equator_count centers; the ring at latitude
    k * ring_step holds round(equator_count * cos(latitude)) centers,
    rings with a zero count (the poles with the defaults) are omitted.
    Longitudes are equally spaced starting at 0. With the defaults this
    yields 8 + 6 + 6 = 20 viewports.
    """
    rings = [(0.0, cfg.equator_count)]
    k = 1
    while k * cfg.ring_step <= 90.0 + 1e-9:
        lat = k * cfg.ring_step
        count = round_half_up(cfg.equator_count * math.cos(math.radians(lat)))
        if count > 0:
            rings.append((lat, count))
            rings.append((-lat, count))
        k += 1
    specs = []
    for lat, count in rings:
        for i in range(count):
            lon = (i * 360.0 / count + 180.0) % 360.0 - 180.0
            specs.append(ViewportSpec(longitude=lon, latitude=lat,
                                      fov=cfg.fov, size=cfg.size))
    return specs


def _bilinear_sample(img, u, v):
    """Bilinear lookup with horizontal wraparound and vertical clamping."""
    h, w = img.shape
    u0 = np.floor(u)
    fu = u - u0
    i0 = u0.astype(np.int64) % w
    i1 = (i0 + 1) % w
    v = np.clip(v, 0.0, float(h - 1))
    v0 = np.floor(v)
    fv = v - v0
    j0 = v0.astype(np.int64)
    j1 = np.minimum(j0 + 1, h - 1)
    top = img[j0, i0] * (1.0 - fu) + img[j0, i1] * fu
    bottom = img[j1, i0] * (1.0 - fu) + img[j1, i1] * fu
    return top * (1.0 - fv) + bottom * fv


def project_viewport(erp, spec):
    """Render one gnomonic viewport from an equirectangular raster.

    Rays through the output pixel centers on the tangent plane are
    rotated to the viewport center (pitch to latitude, then yaw to
    longitude) and sampled bilinearly, wrapping across the longitude
    seam and clamping at the poles.
    """
    n = spec.size
    half = math.tan(math.radians(spec.fov) / 2.0)
    cols = (2.0 * (np.arange(n) + 0.5) / n - 1.0) * half
    rows = (1.0 - 2.0 * (np.arange(n) + 0.5) / n) * half
    xg, yg = np.meshgrid(cols, rows)

    lat0 = math.radians(spec.latitude)
    lon0 = math.radians(spec.longitude)
    # pitch the optical axis up to lat0 ...
    y1 = yg * math.cos(lat0) + math.sin(lat0)
    z1 = -yg * math.sin(lat0) + math.cos(lat0)
    # ... then yaw it to lon0
    x2 = xg * math.cos(lon0) + z1 * math.sin(lon0)
    z2 = -xg * math.sin(lon0) + z1 * math.cos(lon0)

    lon = np.arctan2(x2, z2)
    lat = np.arctan2(y1, np.hypot(x2, z2))

    h, w = erp.data.shape
    u = (lon / (2.0 * math.pi) + 0.5) * w
    v = (0.5 - lat / math.pi) * h
    return Raster(_bilinear_sample(erp.data, u, v), erp.source_range)


def render_viewports(erp, cfg=ViewportSamplingConfig()):
    """Plan the sampling rings and render every viewport of the plan."""
    specs = tuple(plan_viewports(cfg))
    rasters = tuple(project_viewport(erp, spec) for spec in specs)
    return ViewportSet(specs=specs, rasters=rasters)


def extract_local_naturalness(erp, sampling=ViewportSamplingConfig(),
                              zca=ZcaConfig(), mscn_cfg=MscnConfig()):
    """Mean naturalness vector over all planned viewports.

    Viewports whose content is too degenerate to fit (constant sky,
    say) are excluded and the mean runs over the survivors; if every
    viewport is degenerate the image is unusable and an error is
    raised.
    """
    views = render_viewports(erp, sampling)
    vectors = []
    first_error = None
    for view in views.rasters:
        try:
            vectors.append(extract_naturalness(view, zca, mscn_cfg))
        except (DegenerateDataError, ValidationError) as exc:
            if first_error is None:
                first_error = exc
    if not vectors:
        raise DegenerateDataError(
            f"all {views.count} viewports degenerate; first failure: {first_error}")
    return np.mean(np.stack(vectors), axis=0)


def combine_local_global(local_features, global_features):
    """Concatenate the local (viewport-mean) and global vectors, local first."""
    local_vec = np.asarray(local_features, dtype=np.float64)
    global_vec = np.asarray(global_features, dtype=np.float64)
    if local_vec.shape != (LOCAL_FEATURE_COUNT,):
        raise ValidationError(
            f"local vector must have length {LOCAL_FEATURE_COUNT}, got shape {local_vec.shape}")
    if global_vec.shape != (LOCAL_FEATURE_COUNT,):
        raise ValidationError(
            f"global vector must have length {LOCAL_FEATURE_COUNT}, got shape {global_vec.shape}")
    return np.concatenate([local_vec, global_vec])
