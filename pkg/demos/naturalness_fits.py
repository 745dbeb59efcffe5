"""What the naturalness statistics see in clean versus distorted images.

Whitens and divisively normalizes a synthetic scene, fits the
generalized Gaussian to the normalized coefficients and the asymmetric
variant to one neighbor-product field, and shows how additive noise
and blur push the fitted parameters in opposite directions.

Run from the repository root:

    python3 demos/naturalness_fits.py
"""

import numpy as np
from scipy import ndimage

from panoqa import (MscnConfig, Raster, ZcaConfig, fit_aggd, fit_ggd, mscn,
                    paired_products, zca_whiten)


def make_scene(seed, height=192, width=256):
    rng = np.random.default_rng(seed)
    img = np.full((height, width), 110.0)
    for _ in range(10):
        y, x = rng.integers(0, height - 10), rng.integers(0, width - 10)
        img[y: y + rng.integers(16, 64), x: x + rng.integers(24, 80)] = \
            rng.uniform(30, 225)
    img += rng.normal(0, 4.0, (height, width))
    return np.clip(img, 0.0, 255.0)


def describe(label, img):
    field = mscn(zca_whiten(Raster(img), ZcaConfig()), MscnConfig())
    ggd = fit_ggd(field.data.ravel())
    horizontal = paired_products(field.data)[0]
    aggd = fit_aggd(horizontal.ravel())
    print(f"{label:>12}: ggd shape {ggd.shape:5.2f} variance {ggd.variance:5.2f}"
          f" | horizontal product: shape {aggd.shape:5.2f}"
          f" left {aggd.left_variance:6.3f} right {aggd.right_variance:6.3f}"
          f" mean {aggd.mean:+7.4f}")


def main():
    rng = np.random.default_rng(3)
    scene = make_scene(seed=21)

    print("Fitted naturalness parameters per distortion:")
    describe("clean", scene)
    noisy = np.clip(scene + rng.normal(0, 25.0, scene.shape), 0, 255)
    describe("noisy", noisy)
    blurred = ndimage.gaussian_filter(scene, 2.5)
    describe("blurred", blurred)

    print()
    print("Textured and noisy images keep near-Gaussian coefficients")
    print("(shape around 2.5). Blur collapses the variance, drops the")
    print("shape toward heavy-tailed sparsity, and flips the neighbor")
    print("product mean positive as adjacent pixels start to agree. The")
    print("regressor reads 36 such values per image: 2 ggd + 4x4 aggd")
    print("fits, at two scales.")


if __name__ == "__main__":
    main()
