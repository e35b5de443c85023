"""Binary model files."""

import json
import struct

import numpy as np
import pytest

from rvfldl.model_io import (
    MAGIC,
    ModelConsistencyError,
    ModelMagicError,
    ModelVersionError,
    dumps_model,
    load_model,
    loads_model,
    save_model,
)
from rvfldl.pipeline import predict
from rvfldl.training import TrainConfig, train_supervised, train_unsupervised


@pytest.fixture(scope="module")
def models(blobs):
    train, _ = blobs
    cfg = TrainConfig(K=12, runs_r=2, folds_T=2, master_seed=3)
    return (train_supervised(train.data, train.labels, cfg),
            train_unsupervised(train.data, cfg))


def split_header(buf):
    (hlen,) = struct.unpack("<I", buf[8:12])
    return json.loads(buf[12:12 + hlen]), 12 + hlen


class TestRoundTrip:
    @pytest.mark.parametrize("which", [0, 1])
    def test_bit_exact(self, models, tmp_path, which):
        m = models[which]
        save_model(m, tmp_path / "m.rvfldl")
        back = load_model(tmp_path / "m.rvfldl")
        assert back.dictionary.tobytes() == m.dictionary.tobytes()
        assert back.enhancement.weights.tobytes() == m.enhancement.weights.tobytes()
        assert back.enhancement.biases.tobytes() == m.enhancement.biases.tobytes()
        if m.classifier is None:
            assert back.classifier is None
        else:
            assert back.classifier.tobytes() == m.classifier.tobytes()
        assert back.config == m.config
        assert [(r.fold, r.run, r.seed, r.objectives) for r in back.provenance] == \
               [(r.fold, r.run, r.seed, r.objectives) for r in m.provenance]

    def test_serialisation_is_stable(self, models):
        assert dumps_model(models[0]) == dumps_model(loads_model(dumps_model(models[0])))

    def test_predictions_preserved(self, models, blobs):
        _, test = blobs
        m = models[0]
        before = predict(m, test.data)
        after = predict(loads_model(dumps_model(m)), test.data)
        np.testing.assert_array_equal(before[0], after[0])
        assert before[1].tobytes() == after[1].tobytes()


class TestLayout:
    def test_header_and_payload_order(self, models):
        m = models[0]
        buf = dumps_model(m)
        assert buf[:8] == MAGIC
        header, pos = split_header(buf)
        assert (header["d"], header["K"], header["L"], header["c"]) == (10, 12, 12, 2)
        assert header["format_version"] == 1 and header["activation"] == "sigmoid"
        assert len(header["runs"]) == 4
        for mat in (m.dictionary, m.classifier, m.enhancement.weights, m.enhancement.biases[:, None]):
            rows, cols = struct.unpack("<II", buf[pos:pos + 8])
            assert (rows, cols) == mat.shape
            got = np.frombuffer(buf[pos + 8:pos + 8 + 8 * rows * cols], "<f8").reshape(rows, cols)
            np.testing.assert_array_equal(got, mat)
            pos += 8 + 8 * rows * cols
        assert pos == len(buf)

    def test_unsupervised_sentinel(self, models):
        buf = dumps_model(models[1])
        header, pos = split_header(buf)
        assert header["c"] == 0
        pos += 8 + 8 * 10 * 24
        assert struct.unpack("<II", buf[pos:pos + 8]) == (0, 24)


class TestErrors:
    def test_corrupt_magic(self, models):
        buf = bytearray(dumps_model(models[0]))
        buf[0] ^= 0xFF
        with pytest.raises(ModelMagicError):
            loads_model(bytes(buf))

    def rewrite_header(self, buf, **changes):
        header, pos = split_header(buf)
        header.update(changes)
        h = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
        return MAGIC + struct.pack("<I", len(h)) + h + buf[pos:]

    def test_dimension_disagreement(self, models):
        buf = self.rewrite_header(dumps_model(models[0]), d=9)
        with pytest.raises(ModelConsistencyError, match="D1"):
            loads_model(buf)

    def test_version(self, models):
        with pytest.raises(ModelVersionError):
            loads_model(self.rewrite_header(dumps_model(models[0]), format_version=2))

    def test_truncated(self, models):
        with pytest.raises(ModelConsistencyError, match="ends inside"):
            loads_model(dumps_model(models[0])[:-3])

    def test_trailing_bytes(self, models):
        with pytest.raises(ModelConsistencyError, match="trailing"):
            loads_model(dumps_model(models[0]) + b"\x00")
