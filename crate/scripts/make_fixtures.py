"""Regenerate the image fixtures under crates/core/tests/data.

mnist_1k: up to 1000 digits per class (the package holds 863 to 1127 per
class, so 9756 in total) taken from the `mnist` npm package (MIT,
https://www.npmjs.com/package/mnist), written as gzipped IDX files.

natural/: ten RGB photographs bundled with scikit-image, resized to
128x128 and written as binary PPM. Tests cut 32x32 patches from these
to get a CIFAR-sized colour set.

usage: python3 scripts/make_fixtures.py <path to extracted mnist package>
"""
import gzip
import json
import os
import struct
import sys

import numpy as np
import skimage.io as io
import skimage.transform as st

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "crates", "core", "tests", "data")
PER_CLASS = 1000

SOURCES = [
    "astronaut.png", "chelsea.png", "coffee.png", "ihc.png",
    "hubble_deep_field.jpg", "motorcycle_left.png", "motorcycle_right.png",
    "retina.jpg", "rocket.jpg", "color.png",
]


def mnist(pkg):
    images, labels = [], []
    for digit in range(10):
        with open(os.path.join(pkg, "src", "digits", f"{digit}.json")) as f:
            flat = json.load(f)["data"]
        for k in range(min(PER_CLASS, len(flat) // 784)):
            px = flat[k * 784:(k + 1) * 784]
            images.append(bytes(int(round(v * 255)) for v in px))
            labels.append(digit)
    with gzip.GzipFile(os.path.join(OUT, "mnist_1k-images-idx3-ubyte.gz"), "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with gzip.GzipFile(os.path.join(OUT, "mnist_1k-labels-idx1-ubyte.gz"), "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def natural():
    import skimage
    root = os.path.join(os.path.dirname(skimage.__file__), "data")
    for i, name in enumerate(SOURCES):
        im = io.imread(os.path.join(root, name))[..., :3]
        im = st.resize(im, (128, 128), preserve_range=True, anti_aliasing=True)
        im = np.clip(np.round(im), 0, 255).astype(np.uint8)
        with open(os.path.join(OUT, "natural", f"class_{i}.ppm"), "wb") as f:
            f.write(b"P6\n128 128\n255\n")
            f.write(im.tobytes())


if __name__ == "__main__":
    mnist(sys.argv[1])
    natural()
