"""Luminance rasters and image ingestion.

Every pipeline stage works on a single-channel float64 grid. Color
inputs are reduced to luminance with the ITU-R BT.601 weights at load
time; grayscale files pass through unchanged. Derived grids (wavelet
subbands, whitened maps, tiny downsamples) are also carried as Raster
objects even though they may leave the loaded [0, 255] envelope.
"""

import numpy as np
from PIL import Image

from .errors import ImageFormatError, ValidationError

BT601_WEIGHTS = (0.299, 0.587, 0.114)


class Raster:
    """A read-only single-channel float64 grid.

    data is row-major with shape (height, width). source_range records
    the nominal maximum of the originating pixel format (255 for 8-bit
    sources) and is carried through derived rasters unchanged.
    """

    __slots__ = ("data", "source_range")

    def __init__(self, data, source_range=255.0):
        arr = np.array(data, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValidationError(
                f"raster must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("raster contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "source_range", float(source_range))

    def __setattr__(self, name, value):
        raise AttributeError("Raster is immutable")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def __repr__(self):
        return f"Raster({self.width}x{self.height}, range={self.source_range:g})"


def luminance_from_rgb(rgb):
    """Reduce an (h, w, 3) array to BT.601 luminance, unrounded."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = BT601_WEIGHTS
    return rgb[..., 0] * r + rgb[..., 1] * g + rgb[..., 2] * b


def load_erp(path):
    """Load an equirectangular image file as a luminance Raster.

    Accepts any 8-bit single- or three-channel image Pillow can decode
    (PNG, BMP, PPM/PGM, JPEG, ...). Alpha is dropped, palettes are
    expanded. Raises ImageFormatError for unsupported pixel modes and
    ValidationError for degenerate dimensions; unreadable files raise
    the underlying OSError.
    """
    with Image.open(path) as im:
        im.load()
        if im.mode == "P":
            im = im.convert("RGB")
        if im.mode == "RGBA":
            im = im.convert("RGB")
        if im.mode == "L":
            data = np.asarray(im, dtype=np.float64)
        elif im.mode == "RGB":
            data = luminance_from_rgb(np.asarray(im))
        else:
            raise ImageFormatError(
                f"unsupported image mode {im.mode!r} in {path}; need 8-bit gray or RGB")
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 2:
        raise ValidationError(
            f"image {path} is {data.shape[1] if data.ndim == 2 else '?'}x"
            f"{data.shape[0] if data.ndim == 2 else '?'}; need at least 2x2")
    return Raster(data)


def downsample_half(img):
    """Halve each axis by averaging non-overlapping 2x2 blocks.

    A trailing odd row/column is dropped first. Output dims are
    floor(h/2) x floor(w/2).
    """
    h, w = img.data.shape
    if h < 2 or w < 2:
        raise ValidationError(f"cannot downsample a {w}x{h} raster; need at least 2x2")
    h2, w2 = h // 2, w // 2
    blocks = img.data[: 2 * h2, : 2 * w2].reshape(h2, 2, w2, 2)
    return Raster(blocks.mean(axis=(1, 3)), img.source_range)


def to_uint8(data, normalize=False):
    """Quantize a float grid to uint8 for file dumps.

    With normalize=True the grid is min-max rescaled to [0, 255]
    (constant grids map to 0); otherwise values are clipped.
    """
    arr = np.asarray(data, dtype=np.float64)
    if normalize:
        lo, hi = arr.min(), arr.max()
        arr = np.zeros_like(arr) if hi == lo else (arr - lo) * (255.0 / (hi - lo))
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def write_pgm(path, raster, normalize=False):
    """Write a raster as a binary (P5) PGM file."""
    arr = to_uint8(raster.data, normalize=normalize)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def write_png(path, raster, normalize=False):
    """Write a raster as an 8-bit grayscale PNG."""
    Image.fromarray(to_uint8(raster.data, normalize=normalize), mode="L").save(path)
