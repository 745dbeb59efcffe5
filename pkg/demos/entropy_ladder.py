"""How subband entropy reacts to progressive blur.

Builds one synthetic scene (rectangles over broadband noise), blurs it
with increasing strength, and prints the Shannon entropy of each
wavelet subband. The detail-band entropies fall monotonically while
the approximation band barely moves, which is exactly the contrast the
multi-frequency features feed to the regressor.

Run from the repository root:

    python3 demos/entropy_ladder.py
"""

import numpy as np
from scipy import ndimage

from panoqa import Raster, extract_multifrequency, haar_decompose, subband_entropy


def make_scene(seed, height=128, width=256):
    rng = np.random.default_rng(seed)
    img = np.full((height, width), 120.0)
    for _ in range(8):
        y, x = rng.integers(0, height - 10), rng.integers(0, width - 10)
        img[y: y + rng.integers(20, 60), x: x + rng.integers(30, 90)] = \
            rng.uniform(25, 230)
    img += rng.normal(0, 16.0, (height, width))
    return np.clip(img, 0.0, 255.0)


def main():
    scene = make_scene(seed=7)
    sigmas = (0.0, 0.5, 1.0, 2.0, 4.0)

    print("blur sigma | E_LL    E_HL    E_LH    E_HH   (bits, level 1)")
    print("-" * 62)
    for sigma in sigmas:
        blurred = ndimage.gaussian_filter(scene, sigma) if sigma else scene
        bands = haar_decompose(Raster(blurred))[0]
        entropies = [subband_entropy(b) for b in bands.bands()]
        print(f"{sigma:10.1f} | " + "  ".join(f"{e:6.3f}" for e in entropies))

    print()
    print("The LL (approximation) entropy is nearly flat; the three detail")
    print("bands drain as blur removes high-frequency structure, HH fastest.")
    print()

    print("Deeper decompositions expose the same trend per frequency level.")
    vec = extract_multifrequency(Raster(scene), levels=3)
    blurred_vec = extract_multifrequency(
        Raster(ndimage.gaussian_filter(scene, 2.0)), levels=3)
    print("level-major feature vector (LL, HL, LH, HH per level):")
    print("  clean :", np.array2string(vec, precision=3))
    print("  sigma2:", np.array2string(blurred_vec, precision=3))


if __name__ == "__main__":
    main()
