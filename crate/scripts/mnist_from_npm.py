"""Rebuild IDX files from the 10k MNIST digits bundled in the npm `mnist` package.

The package stores pixels as value/255 rounded to three decimals, which is
enough resolution to recover the original bytes exactly.

usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 scripts/mnist_from_npm.py package/src/digits data/mnist
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path

SIDE = 28


def main(src: Path, dst: Path, seed: int = 7) -> None:
    images, labels = [], []
    for digit in range(10):
        raw = json.loads((src / f"{digit}.json").read_text())["data"]
        pixels = [int(round(v * 255.0)) for v in raw]
        assert all(0 <= p <= 255 for p in pixels)
        n = len(pixels) // (SIDE * SIDE)
        for i in range(n):
            images.append(bytes(pixels[i * SIDE * SIDE:(i + 1) * SIDE * SIDE]))
            labels.append(digit)
    order = list(range(len(labels)))
    random.Random(seed).shuffle(order)
    dst.mkdir(parents=True, exist_ok=True)
    n = len(order)
    with gzip.GzipFile(dst / "mnist10k-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, SIDE, SIDE))
        for i in order:
            f.write(images[i])
    with gzip.GzipFile(dst / "mnist10k-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(labels[i] for i in order))
    print(f"wrote {n} images to {dst}")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
