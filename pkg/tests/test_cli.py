"""The ``rvfldl`` command: exit codes, outputs, determinism and report schemas."""

import csv
import json
import os
import shutil
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conftest import DATA
from helpers import planted
from rvfldl.cli import load_schema, run

BLOBS = {"format": "csv", "path": str(DATA / "blobs-train.csv"), "has_labels": True}
BLOBS_TEST = {"format": "csv", "path": str(DATA / "blobs-test.csv"), "has_labels": True}
FAST = {"K": 20, "runs_r": 2, "folds_T": 2}


def write_config(tmp_path, name="run.json", **cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def cli(verb, config, out, *extra):
    return run([verb, "--config", str(config), "--out", str(out), *extra])


def last_error(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    return json.loads(lines[-1])


def report(out):
    return json.loads((out / "report.json").read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def sup_model(tmp_path_factory):
    d = tmp_path_factory.mktemp("sup")
    cfg = write_config(d, task="train-sup", data=BLOBS, train=FAST)
    assert cli("train", cfg, d / "out") == 0
    return d / "out" / "model.rvfldl"


@pytest.fixture(scope="module")
def planted_images(tmp_path_factory):
    """Planted-model data (d = 64 = 8 x 8) as an image CSV, plus an unsupervised model of it."""
    d = tmp_path_factory.mktemp("planted")
    Y, _, _ = planted(64, 64, 200, 3, 5)
    with open(d / "planted.csv", "w", newline="") as fh:
        csv.writer(fh).writerows([[repr(float(v)) for v in col] for col in Y.T])
    data = {"format": "csv", "path": "planted.csv", "image_shape": [8, 8]}
    train = {"K": 64, "runs_r": 2, "folds_T": 2, "normalize": "none", "dynamic_range": 8.0, "master_seed": 1}
    assert cli("train", write_config(d, task="train-unsup", data=data, train=train), d / "out") == 0
    return d, data


class TestTrain:
    def test_supervised_outputs(self, sup_model):
        out = sup_model.parent
        assert sup_model.is_file()
        r = report(out)
        assert (r["command"], r["task"], r["d"], r["c"], r["runs"]) == ("train", "train-sup", 10, 2, 4)
        lines = (out / "provenance.jsonl").read_text().splitlines()
        assert len(lines) == 4
        rec = json.loads(lines[0])
        assert set(rec) == {"fold", "run", "seed", "objectives"}
        meta = json.loads((out / "metadata.json").read_text())
        assert len(meta["timings"]["runs"]) == 4

    def test_byte_identical_outputs(self, tmp_path):
        cfg = write_config(tmp_path, task="train-sup", data=BLOBS, train=FAST)
        assert cli("train", cfg, tmp_path / "a", "--seed", "42") == 0
        assert cli("train", cfg, tmp_path / "b", "--seed", "42", "--threads", "3") == 0
        for name in ("model.rvfldl", "provenance.jsonl", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert cli("train", cfg, tmp_path / "c", "--seed", "43") == 0
        assert (tmp_path / "a" / "model.rvfldl").read_bytes() != (tmp_path / "c" / "model.rvfldl").read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, task="train-sup", data=BLOBS, train={**FAST, "master_seed": 5})
        assert cli("train", cfg, tmp_path / "a") == 0
        assert cli("train", cfg, tmp_path / "b", "--seed", "5") == 0
        assert (tmp_path / "a" / "model.rvfldl").read_bytes() == (tmp_path / "b" / "model.rvfldl").read_bytes()

    def test_relative_paths_resolve_against_config(self, tmp_path):
        shutil.copy(DATA / "blobs-train.csv", tmp_path / "b.csv")
        sub = tmp_path / "cfg"
        sub.mkdir()
        cfg = write_config(sub, task="train-unsup", train={"K": 5, "runs_r": 1, "folds_T": 1},
                           data={"format": "csv", "path": "../b.csv", "has_labels": True})
        assert cli("train", cfg, tmp_path / "out") == 0

    def test_missing_dataset_names_path(self, tmp_path, capsys):
        missing = str(tmp_path / "nowhere.csv")
        cfg = write_config(tmp_path, task="train-sup", data={"format": "csv", "path": missing})
        assert cli("train", cfg, tmp_path / "out") == 2
        err = last_error(capsys)
        assert err["exit_code"] == 2 and err["path"] == missing and missing in err["message"]
        assert not (tmp_path / "out" / "report.json").exists()

    def test_unlabelled_supervised_is_data_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, task="train-sup", data={**BLOBS, "has_labels": False})
        assert cli("train", cfg, tmp_path / "out") == 3
        assert last_error(capsys)["error"] == "data"


class TestConfigErrors:
    @pytest.mark.parametrize("cfg", [
        {"task": "train-sup", "data": BLOBS, "colour": "blue"},
        {"task": "train-sup"},
        {"task": "train-sup", "data": BLOBS, "train": {"K": 0}},
        {"task": "train-sup", "data": BLOBS, "train": {"kappa": 1}},
        {"task": "classify", "data": BLOBS},
        {"task": "eval", "model": "m", "data": BLOBS},  # wrong verb for the task
    ])
    def test_exit_two(self, tmp_path, capsys, cfg):
        assert cli("train", write_config(tmp_path, **cfg), tmp_path / "out") == 2
        err = last_error(capsys)
        assert err["error"] == "config" and err["message"]

    def test_missing_config(self, tmp_path, capsys):
        assert cli("train", tmp_path / "none.json", tmp_path) == 2
        assert "none.json" in last_error(capsys)["path"]

    def test_bad_json(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{")
        assert cli("train", p, tmp_path) == 2

    def test_usage(self, capsys):
        assert run(["frobnicate"]) == 2
        assert run(["train"]) == 2
        assert len(capsys.readouterr().err.strip().splitlines()) == 2

    def test_seed_range(self, tmp_path, capsys):
        cfg = write_config(tmp_path, task="train-sup", data=BLOBS)
        assert cli("train", cfg, tmp_path, "--seed", str(1 << 64)) == 2

    def test_single_json_line_from_console_script(self, tmp_path):
        cfg = write_config(tmp_path, task="train-sup", data={"format": "csv", "path": "gone.csv"})
        proc = subprocess.run([sys.executable, "-m", "rvfldl.cli", "train", "--config", str(cfg),
                               "--out", str(tmp_path)], capture_output=True, text=True)
        assert proc.returncode == 2
        lines = proc.stderr.strip().splitlines()
        assert len(lines) == 1 and json.loads(lines[0])["exit_code"] == 2


class TestClassify:
    @pytest.mark.parametrize("mode", ["svc", "argmax"])
    def test_blobs_accuracy(self, sup_model, tmp_path, mode):
        cfg = write_config(tmp_path, task="classify", model=str(sup_model), query=BLOBS_TEST,
                           data=BLOBS, predict=mode)
        assert cli("classify", cfg, tmp_path / "out") == 0
        r = report(tmp_path / "out")
        assert r["accuracy"] >= 0.95 and r["predict"] == mode
        rows = read_csv(tmp_path / "out" / "predictions.csv")
        assert len(rows) == 200 and list(rows[0]) == ["index", "predicted", "score_0", "score_1"]
        for row in rows[:20]:
            scores = [float(row["score_0"]), float(row["score_1"])]
            assert int(row["predicted"]) == int(np.argmax(scores))

    def test_unlabelled_query(self, sup_model, tmp_path):
        # the same points as the test split, minus the label column
        Y = np.loadtxt(DATA / "blobs-test.csv", delimiter=",")[:, :10]
        np.savetxt(tmp_path / "q.csv", Y, delimiter=",", fmt="%.17g")
        cfg = write_config(tmp_path, task="classify", model=str(sup_model), predict="argmax",
                           query={"format": "csv", "path": "q.csv"})
        assert cli("classify", cfg, tmp_path / "out") == 0
        assert "accuracy" not in report(tmp_path / "out")
        assert len(read_csv(tmp_path / "out" / "predictions.csv")) == 200

    def test_dimension_mismatch(self, sup_model, tmp_path, capsys):
        Y = np.ones((5, 9))
        np.savetxt(tmp_path / "q.csv", Y, delimiter=",")
        cfg = write_config(tmp_path, task="classify", model=str(sup_model), predict="argmax",
                           query={"format": "csv", "path": "q.csv"})
        assert cli("classify", cfg, tmp_path / "out") == 3
        assert "d=9" in last_error(capsys)["message"]

    def test_corrupt_model(self, tmp_path, capsys):
        (tmp_path / "m.rvfldl").write_bytes(b"not a model")
        cfg = write_config(tmp_path, task="classify", model="m.rvfldl", predict="argmax", query=BLOBS_TEST)
        assert cli("classify", cfg, tmp_path / "out") == 3

    def test_svc_needs_training_data(self, sup_model, tmp_path):
        cfg = write_config(tmp_path, task="classify", model=str(sup_model), query=BLOBS_TEST)
        assert cli("classify", cfg, tmp_path / "out") == 2


class TestReconstruct:
    def test_planted_mean_ssim(self, planted_images, tmp_path):
        d, data = planted_images
        cfg = write_config(d, "rec.json", task="reconstruct", model="out/model.rvfldl", query=data,
                           reconstruct={"dump_pgm": True})
        assert cli("reconstruct", cfg, tmp_path) == 0
        r = report(tmp_path)
        assert r["mean_ssim"] >= 0.95 and r["image_shape"] == [8, 8]
        assert len(read_csv(tmp_path / "ssim.csv")) == 200
        pgm = (tmp_path / "pgm" / "recon_00000.pgm").read_bytes()
        assert pgm.startswith(b"P5\n8 8\n255\n") and len(pgm) == 11 + 64

    def test_zero_image(self, planted_images, tmp_path):
        d, _ = planted_images
        np.savetxt(tmp_path / "z.csv", np.zeros((2, 64)), delimiter=",")
        cfg = write_config(tmp_path, task="reconstruct", model=str(d / "out" / "model.rvfldl"),
                           query={"format": "csv", "path": "z.csv", "image_shape": [8, 8]})
        assert cli("reconstruct", cfg, tmp_path / "out") == 0
        assert report(tmp_path / "out")["mean_ssim"] == 1.0

    def test_zero_image_under_l2(self, tmp_path):
        np.savetxt(tmp_path / "t.csv", np.abs(planted(16, 16, 40, 2, 3)[0]).T, delimiter=",")
        np.savetxt(tmp_path / "z.csv", np.zeros((1, 16)), delimiter=",")
        train = write_config(tmp_path, "t.json", task="train-unsup", train={"K": 16, "runs_r": 1, "folds_T": 1},
                             data={"format": "csv", "path": "t.csv"})
        assert cli("train", train, tmp_path / "m") == 0
        cfg = write_config(tmp_path, task="reconstruct", model="m/model.rvfldl",
                           query={"format": "csv", "path": "z.csv", "image_shape": [4, 4]})
        assert cli("reconstruct", cfg, tmp_path / "out") == 0
        assert report(tmp_path / "out")["mean_ssim"] == 1.0

    @pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores permissions")
    def test_unwritable_chmod(self, planted_images, tmp_path):
        d, data = planted_images
        locked = tmp_path / "locked"
        locked.mkdir(mode=0o500)
        cfg = write_config(d, "rec2.json", task="reconstruct", model="out/model.rvfldl", query=data)
        assert cli("reconstruct", cfg, locked / "out") != 0

    def test_unwritable_out_is_a_file(self, planted_images, tmp_path, capsys):
        d, data = planted_images
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write_config(d, "rec3.json", task="reconstruct", model="out/model.rvfldl", query=data)
        assert cli("reconstruct", cfg, blocker / "out") != 0
        assert "not writable" in last_error(capsys)["message"]

    def test_needs_image_shape(self, planted_images, tmp_path):
        d, data = planted_images
        q = {k: v for k, v in data.items() if k != "image_shape"}
        cfg = write_config(d, "rec4.json", task="reconstruct", model="out/model.rvfldl", query=q)
        assert cli("reconstruct", cfg, tmp_path) == 2


@pytest.fixture(scope="module")
def eval_report(tmp_path_factory):
    d = tmp_path_factory.mktemp("eval")
    train = write_config(d, "t.json", task="train-unsup", data=BLOBS, train=FAST)
    assert cli("train", train, d / "m") == 0
    cfg = write_config(d, task="eval", model="m/model.rvfldl", data=BLOBS)
    assert cli("eval", cfg, d / "out") == 0
    return report(d / "out")


class TestEval:
    def test_fields_and_ratio(self, eval_report):
        r = eval_report
        assert r["sparsity_ratio"] == pytest.approx(
            r["sparsity_with_enhancement"] / r["sparsity_without_enhancement"], rel=1e-12, abs=1e-12)
        assert r["timing"] == "metadata.json" and r["relative_error"] >= 0

    def test_ratio_bounded_for_horseshoe_codes(self, eval_report):
        assert eval_report["sparsity_ratio"] <= 2


class TestSweep:
    def sweep(self, tmp_path, grid, **extra):
        cfg = write_config(tmp_path, task="sweep", data=BLOBS, query=BLOBS_TEST, sweep=grid,
                           train={"K": 20, "runs_r": 1, "folds_T": 2}, **extra)
        return cli("sweep", cfg, tmp_path / "out")

    def test_two_by_two(self, tmp_path):
        assert self.sweep(tmp_path, {"mu1": [0.2, 0.6], "mu2": [0.2, 0.6]}, predict="argmax") == 0
        rows = read_csv(tmp_path / "out" / "sweep.csv")
        assert len(rows) == 4
        assert list(rows[0]) == ["mu1", "mu2", "mu3", "degree", "reg_C", "n_seeds", "accuracy_mean", "accuracy_std"]
        assert report(tmp_path / "out")["grid_points"] == 4

    def test_defaults_in_top_half(self, tmp_path):
        grid = {"mu1": [0.0, 0.2, 0.6], "mu3": [0.1, 0.6], "seeds": [0, 1]}
        assert self.sweep(tmp_path, grid) == 0
        rows = read_csv(tmp_path / "out" / "sweep.csv")
        acc = [float(r["accuracy_mean"]) for r in rows]
        default = next(float(r["accuracy_mean"]) for r in rows
                       if (float(r["mu1"]), float(r["mu2"]), float(r["mu3"])) == (0.2, 0.2, 0.1))
        assert sum(a > default for a in acc) < len(acc) / 2
        assert all(r["n_seeds"] == "2" for r in rows)

    def test_duplicates_removed_with_warning(self, tmp_path, caplog):
        assert self.sweep(tmp_path, {"mu1": [0.2, 0.2, 0.4]}, predict="argmax") == 0
        assert len(read_csv(tmp_path / "out" / "sweep.csv")) == 2
        r = report(tmp_path / "out")
        assert r["duplicates_removed"] == 1 and "duplicate" in r["warnings"][0]
        assert any("duplicate" in m for m in caplog.messages)

    @pytest.mark.parametrize("grid", [{}, {"mu1": []}, {"seeds": [3]}])
    def test_empty_grid(self, tmp_path, capsys, grid):
        assert self.sweep(tmp_path, grid) == 2
        assert "empty" in last_error(capsys)["message"]


class TestSchemas:
    def test_reports_validate(self, sup_model, tmp_path):
        schema = load_schema("report.schema.json")
        jsonschema.validate(report(sup_model.parent), schema)
        cfg = write_config(tmp_path, task="classify", model=str(sup_model), query=BLOBS_TEST, predict="argmax")
        assert cli("classify", cfg, tmp_path / "out") == 0
        jsonschema.validate(report(tmp_path / "out"), schema)

    def test_schema_rejects_missing_fields(self):
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate({"command": "eval", "format_version": 1}, load_schema("report.schema.json"))

    def test_schemas_are_valid_documents(self):
        for name in ("config.schema.json", "report.schema.json"):
            jsonschema.Draft202012Validator.check_schema(load_schema(name))
