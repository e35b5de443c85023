"""
The rvfldl command, end to end
==============================

This script writes run configurations to a scratch directory and runs every
verb: train, classify, reconstruct, eval and sweep.  It prints the JSON
reports as it goes.  The same commands work from a shell, e.g.
``rvfldl train --config run.json --out results``.
"""

import json
import tempfile
from pathlib import Path

from rvfldl.cli import run

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
work = Path(tempfile.mkdtemp(prefix="rvfldl-cli-"))
blobs = {"format": "csv", "path": str(DATA / "blobs-train.csv"), "has_labels": True}
blobs_test = {"format": "csv", "path": str(DATA / "blobs-test.csv"), "has_labels": True}
fashion = {"format": "idx", "images": str(DATA / "fashion-images-idx3-ubyte.gz"), "limit": 300}


def step(verb, name, **config):
    path = work / f"{name}.json"
    path.write_text(json.dumps(config, indent=2))
    code = run([verb, "--config", str(path), "--out", str(work / name), "--seed", "1"])
    report = json.loads((work / name / "report.json").read_text()) if code == 0 else None
    print(f"\n$ rvfldl {verb} --config {path.name}   -> exit {code}")
    print(json.dumps(report, indent=1, sort_keys=True)[:600])
    return work / name


# %% Train a supervised model, then classify the held-out blobs with both
# read-outs.
train_dir = step("train", "train", task="train-sup", data=blobs, train={"K": 20})
model = str(train_dir / "model.rvfldl")
step("classify", "classify-svc", task="classify", model=model, data=blobs, query=blobs_test)
step("classify", "classify-argmax", task="classify", model=model, query=blobs_test, predict="argmax")

# %% Sparsity and recoding error of the training data under the model.
step("eval", "eval", task="eval", model=model, data=blobs)

# %% An unsupervised image model and its reconstructions, with PGM dumps.
img_dir = step("train", "train-img", task="train-unsup", data=fashion,
               train={"K": 200, "normalize": "unit_interval", "runs_r": 2})
step("reconstruct", "reconstruct", task="reconstruct", model=str(img_dir / "model.rvfldl"),
     query=fashion, reconstruct={"dump_pgm": True})

# %% A 3 x 2 sweep over mu1 and mu3, averaged over two seeds.  The tidy CSV
# is ready for plotting.
sweep_dir = step("sweep", "sweep", task="sweep", data=blobs, query=blobs_test,
                 train={"K": 20, "runs_r": 2}, predict="argmax",
                 sweep={"mu1": [0.0, 0.2, 0.6], "mu3": [0.1, 0.6], "seeds": [0, 1]})
print((sweep_dir / "sweep.csv").read_text())

# %% A failure: a missing dataset gives exit code 2 and one JSON line on
# stderr.
step("train", "broken", task="train-sup", data={"format": "csv", "path": "missing.csv"})
