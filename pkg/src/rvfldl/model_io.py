"""Binary model files.

Layout (all integers little-endian)::

    magic      8 bytes   b"RVFLDL1\\n"
    hlen       uint32    length of the JSON header in bytes
    header     hlen bytes of UTF-8 JSON (keys sorted, no whitespace)
    payload    four matrices, each: rows uint32, cols uint32,
               rows*cols float64 in row-major order
               -- D1 (d x (K+L)), W (c x (K+L); 0 x (K+L) when unsupervised),
                  enhancement weights (L x K), enhancement biases (L x 1)

The header carries no timestamps, so saving the same model twice produces
identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .enhance import EnhancementMap
from .training import RunRecord, TrainConfig, TrainedModel

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "ModelConsistencyError",
    "ModelFormatError",
    "ModelMagicError",
    "ModelVersionError",
    "dumps_model",
    "load_model",
    "loads_model",
    "save_model",
]

MAGIC = b"RVFLDL1\n"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Base class for unreadable model files."""


class ModelMagicError(ModelFormatError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class ModelConsistencyError(ModelFormatError):
    """Header and payload disagree, or the payload is truncated."""


def _header(model: TrainedModel) -> dict:
    cfg = model.config
    return {
        "format_version": FORMAT_VERSION,
        "d": model.d,
        "K": cfg.K,
        "L": cfg.L,
        "c": model.n_classes,
        "activation": model.enhancement.activation,
        "config": cfg.to_dict(),
        "runs": [
            {"fold": r.fold, "run": r.run, "seed": r.seed, "objectives": r.objectives}
            for r in model.provenance
        ],
        "created_by": {"package": "rvfldl", "version": __version__},
    }


def _pack(m: np.ndarray) -> bytes:
    m = np.ascontiguousarray(m, dtype="<f8")
    return struct.pack("<II", *m.shape) + m.tobytes(order="C")


def dumps_model(model: TrainedModel) -> bytes:
    header = json.dumps(_header(model), sort_keys=True, separators=(",", ":")).encode("utf-8")
    K_L = model.atoms
    W = model.classifier if model.classifier is not None else np.zeros((0, K_L))
    parts = [
        MAGIC,
        struct.pack("<I", len(header)),
        header,
        _pack(model.dictionary),
        _pack(W),
        _pack(model.enhancement.weights),
        _pack(model.enhancement.biases.reshape(-1, 1)),
    ]
    return b"".join(parts)


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(dumps_model(model))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise ModelConsistencyError(
                f"file ends inside {what}: need {n} bytes at offset {self.pos}, have {len(self.buf) - self.pos}"
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def matrix(self, what: str, expect: tuple) -> np.ndarray:
        rows, cols = struct.unpack("<II", self.take(8, f"{what} dims"))
        if (rows, cols) != expect:
            raise ModelConsistencyError(f"{what} payload is {rows}x{cols}, header implies {expect[0]}x{expect[1]}")
        raw = self.take(8 * rows * cols, what)
        return np.frombuffer(raw, dtype="<f8").reshape(rows, cols).astype(np.float64)


def loads_model(buf: bytes) -> TrainedModel:
    if buf[:len(MAGIC)] != MAGIC:
        raise ModelMagicError(f"not a model file: magic {buf[:len(MAGIC)]!r}, expected {MAGIC!r}")
    rd = _Reader(buf)
    rd.pos = len(MAGIC)
    (hlen,) = struct.unpack("<I", rd.take(4, "header length"))
    try:
        header = json.loads(rd.take(hlen, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelConsistencyError(f"header is not valid JSON: {exc}") from None
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"model format version {version!r}, this reader supports {FORMAT_VERSION}")
    try:
        d, K, L, c = (int(header[k]) for k in ("d", "K", "L", "c"))
        cfg = TrainConfig.from_dict(header["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelConsistencyError(f"malformed header: {exc}") from None
    if (cfg.K, cfg.L) != (K, L):
        raise ModelConsistencyError(f"header dims K={K}, L={L} disagree with its config")

    D1 = rd.matrix("D1", (d, K + L))
    W = rd.matrix("W", (c, K + L))
    weights = rd.matrix("enhancement weights", (L, K))
    biases = rd.matrix("enhancement biases", (L, 1))[:, 0]
    if rd.pos != len(buf):
        raise ModelConsistencyError(f"{len(buf) - rd.pos} trailing bytes after the payload")

    runs = [RunRecord(r["fold"], r["run"], r["seed"], r["objectives"]) for r in header.get("runs", [])]
    return TrainedModel(
        dictionary=D1,
        classifier=W if c > 0 else None,
        enhancement=EnhancementMap(weights, biases, header.get("activation", "sigmoid")),
        config=cfg,
        provenance=runs,
    )


def load_model(path) -> TrainedModel:
    return loads_model(Path(path).read_bytes())
