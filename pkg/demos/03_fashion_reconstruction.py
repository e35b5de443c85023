"""
Reconstructing Fashion-MNIST images
===================================

This script learns an unsupervised dictionary of 450 Horseshoe atoms plus
450 enhancement atoms. It codes each image without labels, rebuilds it as
D1 x and scores it with the global SSIM.  A few originals and
reconstructions are written next to each other as PGM files, which most
image viewers open.
"""

import tempfile
from pathlib import Path

import numpy as np

from rvfldl.data import load_idx
from rvfldl.pipeline import reconstruct_raw, ssim_per_image
from rvfldl.training import TrainConfig, train_unsupervised

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
ds = load_idx(DATA / "fashion-images-idx3-ubyte.gz")
Y = ds.data[:, :1000]
print("images:", Y.shape[1], "shape:", ds.image_shape)

# %% Pixel values are divided by 255 before training and multiplied back
# afterwards.
cfg = TrainConfig(K=450, normalize="unit_interval", runs_r=5, folds_T=3)
model = train_unsupervised(Y, cfg, threads=4)
Yhat = reconstruct_raw(model, Y)
scores = ssim_per_image(Y, Yhat, ds.image_shape)
print(f"mean SSIM {scores.mean():.4f}, worst {scores.min():.4f}, "
      f"relative error {np.linalg.norm(Y - Yhat) / np.linalg.norm(Y):.4f}")

# %% Side-by-side strips: original on the left, reconstruction on the right.
out = Path(tempfile.mkdtemp(prefix="rvfldl-recon-"))
h, w = ds.image_shape
for j in range(5):
    strip = np.hstack([Y[:, j].reshape(h, w), np.clip(Yhat[:, j], 0, 255).reshape(h, w)])
    px = np.rint(strip).astype(np.uint8)
    (out / f"pair_{j}.pgm").write_bytes(f"P5\n{2 * w} {h}\n255\n".encode() + px.tobytes())
print("wrote", sorted(p.name for p in out.iterdir()), "to", out)
