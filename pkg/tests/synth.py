"""Synthetic image fabrication shared by the test modules.

Everything here is seeded and deterministic. Two image families:

* textured_erp: smooth waves plus band-limited noise, texture
  everywhere. Good for geometry tests and for panoramas whose every
  viewport, poles included, must carry enough variation for the
  statistical fits.
* rect_scene: a few large high-contrast rectangles over a noisy
  background. Mimics the two key statistics of natural photos that the
  entropy features rely on: broadband noise (decays exponentially
  under blur) and sparse step edges (decay only polynomially), so
  detail-band entropy falls monotonically along a blur ladder.
"""

import csv

import numpy as np
from PIL import Image
from scipy import ndimage


def textured_erp(seed, height=128, width=256, detail=30.0):
    """A seeded full-range panorama with texture everywhere."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    img = np.full((height, width), 128.0)
    for _ in range(6):
        fx = rng.integers(1, 9)
        fy = rng.integers(1, 9)
        phase = rng.uniform(0, 2 * np.pi)
        img += rng.uniform(8, 22) * np.sin(
            2 * np.pi * (fx * xx / width + fy * yy / height) + phase)
    noise = ndimage.gaussian_filter(rng.normal(0, 1, (height, width)), 1.2)
    img += detail * noise / max(np.abs(noise).max(), 1e-12)
    return np.clip(img, 0.0, 255.0)


def rect_scene(seed, height=128, width=256, count=8, noise=16.0):
    """A seeded scene of large random rectangles over noise."""
    rng = np.random.default_rng(seed)
    img = np.full((height, width), float(rng.uniform(90, 165)))
    for _ in range(count):
        rw = rng.integers(30, 90)
        rh = rng.integers(20, 60)
        y = rng.integers(0, height - 10)
        x = rng.integers(0, width - 10)
        img[y: min(y + rh, height), x: min(x + rw, width)] = rng.uniform(25, 230)
    img += rng.normal(0, noise, (height, width))
    return np.clip(img, 0.0, 255.0)


def gaussian_blur(img, sigma):
    """Reference blur used as the distortion oracle in trend tests."""
    if sigma <= 0:
        return np.array(img, dtype=np.float64)
    return ndimage.gaussian_filter(np.asarray(img, dtype=np.float64), sigma)


def add_noise(img, sigma, seed):
    rng = np.random.default_rng(seed)
    return np.clip(img + rng.normal(0, sigma, img.shape), 0.0, 255.0)


def save_gray_png(path, img):
    arr = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255)
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path)


def pseudo_mos(level):
    """Monotone quality score for distortion level 0..7."""
    return 95.0 - 10.0 * level


def build_quality_dataset(root, scenes=8, levels=8, height=128, width=256):
    """Write a scenes x levels distorted image set plus its manifest.

    Level 0 is the clean scene; each step adds both blur and noise, so
    the pseudo-MOS is a fixed monotone function of a single distortion
    strength. Returns the manifest path.
    """
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for scene in range(scenes):
        clean = rect_scene(seed=100 + scene, height=height, width=width)
        for level in range(levels):
            img = gaussian_blur(clean, 0.35 * level)
            img = add_noise(img, 2.5 * level, seed=1000 + scene * levels + level)
            name = f"scene{scene}_level{level}.png"
            save_gray_png(root / name, img)
            rows.append((name, pseudo_mos(level), f"mixed{level}", f"scene{scene}"))
    manifest = root / "manifest.csv"
    with open(manifest, "w", encoding="utf-8", newline="") as fh:
        fh.write("# name: synthetic-ladder\n")
        fh.write("# mos_scale: 0 100\n")
        writer = csv.writer(fh)
        writer.writerow(["path", "mos", "distortion", "reference"])
        writer.writerows(rows)
    return manifest
