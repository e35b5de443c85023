"""Rebuild the gzipped IDX fixtures under tests/data/.

MNIST digits come from the 5,000-image sample bundled in the ``mlxtend``
wheel (``mlxtend/data/data/mnist_5k.csv.gz``, 500 per class, pixels 0..255).
Fashion-MNIST images come from the ``fashion-mnist`` npm package
(``src/clothes/<label>.json``, 28x28 uint8 images per class).
The two-blob CSVs are synthetic and generated from the package's own seeded
stream, so they need no download.

Usage::

    python scripts/build_fixtures.py --mlxtend-wheel mlxtend-0.24.0-py3-none-any.whl \
        --fashion-dir node_modules/fashion-mnist/src/clothes --out tests/data
    python scripts/build_fixtures.py --blobs-only --out tests/data
"""

import argparse
import gzip
import io
import json
import struct
import zipfile
from pathlib import Path

import numpy as np

from rvfldl.rand import RandomStream

BLOB_DIM = 10
BLOB_SEPARATION = 2.0


def make_blobs(n_per_class, seed, d=BLOB_DIM, sep=BLOB_SEPARATION):
    """Two Gaussian classes with unit covariance.

    Class 0 is centred at ``sep`` on the first ``d // 2`` coordinates, class 1
    at ``sep`` on the remaining ones.  Returns ``(d x 2n data, labels)``.
    """
    stream = RandomStream(seed)
    means = np.zeros((2, d))
    means[0, : d // 2] = sep
    means[1, d // 2:] = sep
    blocks = [means[c][:, None] + stream.standard_normal(d * n_per_class).reshape(d, n_per_class)
              for c in (0, 1)]
    return np.concatenate(blocks, axis=1), np.repeat([0, 1], n_per_class)


def write_blobs_csv(path, Y, labels):
    lines = [",".join([repr(float(v)) for v in Y[:, j]] + [str(int(labels[j]))]) for j in range(Y.shape[1])]
    Path(path).write_text("\n".join(lines) + "\n")


def write_idx_images(path, images):
    n, h, w = images.shape
    head = struct.pack(">IIII", 0x00000803, n, h, w)
    with gzip.GzipFile(path, "wb", mtime=0) as fh:
        fh.write(head + images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    head = struct.pack(">II", 0x00000801, len(labels))
    with gzip.GzipFile(path, "wb", mtime=0) as fh:
        fh.write(head + np.asarray(labels, dtype=np.uint8).tobytes())


def interleave(labels, per_class, offset=0):
    """Indices taking ``per_class`` items of every class, class-interleaved."""
    idx = [np.flatnonzero(labels == c)[offset:offset + per_class] for c in range(10)]
    return np.stack(idx, axis=1).ravel()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mlxtend-wheel")
    ap.add_argument("--fashion-dir")
    ap.add_argument("--blobs-only", action="store_true")
    ap.add_argument("--out", default="tests/data")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    write_blobs_csv(out / "blobs-train.csv", *make_blobs(100, seed=7))
    write_blobs_csv(out / "blobs-test.csv", *make_blobs(100, seed=8))
    if args.blobs_only:
        return
    if not (args.mlxtend_wheel and args.fashion_dir):
        ap.error("--mlxtend-wheel and --fashion-dir are required unless --blobs-only is given")

    with zipfile.ZipFile(args.mlxtend_wheel) as zf:
        raw = gzip.decompress(zf.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",")
    pixels = table[:, :-1].astype(np.uint8).reshape(-1, 28, 28)
    labels = table[:, -1].astype(np.uint8)

    train = interleave(labels, 200)
    test = interleave(labels, 50, offset=200)
    write_idx_images(out / "mnist-train-images-idx3-ubyte.gz", pixels[train])
    write_idx_labels(out / "mnist-train-labels-idx1-ubyte.gz", labels[train])
    write_idx_images(out / "mnist-test-images-idx3-ubyte.gz", pixels[test])
    write_idx_labels(out / "mnist-test-labels-idx1-ubyte.gz", labels[test])

    imgs, labs = [], []
    for c in range(10):
        data = json.loads(Path(args.fashion_dir, f"{c}.json").read_text())["data"]
        imgs.append(np.asarray(data[:100], dtype=np.uint8).reshape(-1, 28, 28))
        labs.append(np.full(100, c, dtype=np.uint8))
    imgs = np.stack(imgs, axis=1).reshape(-1, 28, 28)
    labs = np.stack(labs, axis=1).ravel()
    write_idx_images(out / "fashion-images-idx3-ubyte.gz", imgs)
    write_idx_labels(out / "fashion-labels-idx1-ubyte.gz", labs)


if __name__ == "__main__":
    main()
