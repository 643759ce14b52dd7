"""Regenerate the bundled test images (dev utility, not shipped).

Block-averages the public-domain 512x512 camera-operator image from
scikit-image down to 128 and 64 px and writes them as P5 PGM into the
package data directory.  Requires scikit-image, which is not a package
dependency.
"""

from pathlib import Path

import skimage.data

from compfb.bench.pgm import save_pgm

DATA = Path(__file__).resolve().parents[1] / "src" / "compfb" / "bench" / "data"


def block_mean(img, side):
    f = img.shape[0] // side
    return img.reshape(side, f, side, f).mean(axis=(1, 3))


if __name__ == "__main__":
    cam = skimage.data.camera().astype(float)
    DATA.mkdir(parents=True, exist_ok=True)
    for side in (128, 64):
        out = DATA / f"camera{side}.pgm"
        save_pgm(out, block_mean(cam, side))
        print("wrote", out)
