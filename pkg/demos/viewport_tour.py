"""Where the viewport sampler looks on the sphere.

Prints the latitude-ring sampling plan for a few equator densities,
then renders the default 20 viewports of a synthetic panorama into a
temporary directory as PNG files.

Run from the repository root:

    python3 demos/viewport_tour.py
"""

import tempfile
from collections import Counter
from pathlib import Path

import numpy as np

from panoqa import (Raster, ViewportSamplingConfig, plan_viewports,
                    render_viewports, write_png)


def make_panorama(seed, height=128, width=256):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    img = np.full((height, width), 128.0)
    for _ in range(6):
        img += rng.uniform(8, 22) * np.sin(
            2 * np.pi * (rng.integers(1, 9) * xx / width
                         + rng.integers(1, 9) * yy / height)
            + rng.uniform(0, 2 * np.pi))
    img += rng.normal(0, 6.0, (height, width))
    return np.clip(img, 0.0, 255.0)


def show_plan(equator_count):
    cfg = ViewportSamplingConfig(equator_count=equator_count)
    specs = plan_viewports(cfg)
    rings = Counter(spec.latitude for spec in specs)
    print(f"equator count {equator_count:2d} -> {len(specs):2d} viewports, "
          f"ring step {cfg.ring_step:.1f} degrees")
    for latitude in sorted(rings, reverse=True):
        marks = ", ".join(f"{s.longitude:+.0f}" for s in specs
                          if s.latitude == latitude)
        print(f"    lat {latitude:+5.1f}: {rings[latitude]} views at "
              f"longitudes {marks}")


def main():
    for equator_count in (4, 8, 12):
        show_plan(equator_count)
        print()

    erp = Raster(make_panorama(seed=11))
    views = render_viewports(erp, ViewportSamplingConfig())
    out_dir = Path(tempfile.mkdtemp(prefix="viewport_tour_"))
    for index, (spec, view) in enumerate(zip(views.specs, views.rasters)):
        write_png(out_dir / f"view_{index:02d}_lat{spec.latitude:+.0f}"
                            f"_lon{spec.longitude:+.0f}.png", view)
    print(f"rendered {views.count} viewports "
          f"({views.rasters[0].data.shape[0]} px square, "
          f"fov {views.specs[0].fov:.0f} degrees) into {out_dir}")


if __name__ == "__main__":
    main()
