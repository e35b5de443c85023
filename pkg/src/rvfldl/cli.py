"""The ``rvfldl`` command: train, classify, reconstruct, eval and sweep.

Usage::

    rvfldl <verb> --config run.json [--seed N] [--threads N] [--out DIR]

The configuration is a JSON document validated against
``schemas/config.schema.json``; relative dataset and model paths are resolved
against the directory holding the configuration file.  Every output written
to ``--out`` is a deterministic function of the configuration and seed; wall
times and dates go to ``metadata.json`` only.

Exit codes: 0 success, 1 internal error, 2 usage/configuration error,
3 data error.  Failures print one JSON object on one line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import platform
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .data import DataFormatError, LabeledDataset, load_csv_matrix, load_idx
from .model_io import ModelFormatError, dumps_model, load_model
from .pipeline import fit_svc, predict, reconstruct_raw, reconstruction_error, sparsity_report, ssim_per_image
from .training import TrainConfig, train_supervised, train_unsupervised

logger = logging.getLogger("rvfldl")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3
VERBS = ("train", "classify", "reconstruct", "eval", "sweep")
SVC_DEFAULTS = {"degree": 2, "reg_C": 1.0, "tol": 1e-3, "max_iter": 1_000_000}


class CliError(Exception):
    exit_code = EXIT_INTERNAL
    kind = "internal"

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path


class ConfigError(CliError):
    exit_code = EXIT_CONFIG
    kind = "config"


class DataError(CliError):
    exit_code = EXIT_DATA
    kind = "data"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("rvfldl").joinpath("schemas", name).read_text("utf-8"))


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema("report.schema.json"))


# ---------------------------------------------------------------- config ---

class RunContext:
    """Parsed configuration plus the command-line overrides."""

    def __init__(self, verb: str, config_path: Path, raw: dict, seed, threads: int, out: Path):
        self.verb = verb
        self.base = config_path.parent
        self.raw = raw
        self.threads = threads
        self.out = out
        train = dict(raw.get("train", {}))
        if seed is not None:
            train["master_seed"] = seed
        try:
            self.train_cfg = TrainConfig.from_dict(train)
        except ValueError as exc:
            raise ConfigError(f"invalid train settings: {exc}") from None
        self.svc = {**SVC_DEFAULTS, **raw.get("svc", {})}
        self.predict = raw.get("predict", "svc")

    def path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else self.base / q


def read_config(verb: str, config_path: str, seed, threads: int, out: str) -> RunContext:
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", str(path))
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", str(path)) from None
    try:
        jsonschema.validate(raw, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}", str(path)) from None
    task = raw["task"]
    allowed = ("train-unsup", "train-sup") if verb == "train" else (verb,)
    if task not in allowed:
        raise ConfigError(f"task {task!r} cannot run under the {verb!r} command", str(path))
    if verb in ("classify", "sweep") and raw.get("predict", "svc") == "svc" and "data" not in raw:
        raise ConfigError("SVC prediction needs the training set under 'data'", str(path))
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    return RunContext(verb, path, raw, seed, threads, Path(out))


def load_dataset(ctx: RunContext, key: str, need_labels: bool = False) -> LabeledDataset:
    entry = ctx.raw[key]
    files = [entry["images"]] + ([entry["labels"]] if entry.get("labels") else []) \
        if entry["format"] == "idx" else [entry["path"]]
    for f in files:
        if not ctx.path(f).is_file():
            raise ConfigError(f"{key} file not found: {ctx.path(f)}", str(ctx.path(f)))
    try:
        if entry["format"] == "idx":
            labels = ctx.path(entry["labels"]) if entry.get("labels") else None
            ds = load_idx(ctx.path(entry["images"]), labels)
        else:
            ds = load_csv_matrix(ctx.path(entry["path"]), entry.get("has_labels", False))
            if "image_shape" in entry:
                ds = LabeledDataset(ds.data, ds.labels, ds.class_count, tuple(entry["image_shape"]))
    except DataFormatError as exc:
        raise DataError(str(exc), str(files[0])) from None
    except OSError as exc:
        raise DataError(f"cannot read {key} data: {exc}", str(files[0])) from None
    if "limit" in entry:
        n = entry["limit"]
        labels = None if ds.labels is None else ds.labels[:n]
        ds = LabeledDataset(ds.data[:, :n], labels, ds.class_count, ds.image_shape)
    if ds.n_samples == 0:
        raise DataError(f"{key} data set is empty", str(files[0]))
    if need_labels and ds.labels is None:
        raise DataError(f"{key} data set has no labels", str(files[0]))
    return ds


def load_model_file(ctx: RunContext):
    p = ctx.path(ctx.raw["model"])
    if not p.is_file():
        raise ConfigError(f"model file not found: {p}", str(p))
    try:
        return load_model(p)
    except ModelFormatError as exc:
        raise DataError(f"{p}: {exc}", str(p)) from None


# ---------------------------------------------------------------- output ---

def _num(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class Outputs:
    """Collects output files and writes them once, at the end of a command."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, bytes] = {}

    def text(self, name: str, s: str):
        self.files[name] = s.encode("utf-8")

    def json(self, name: str, obj):
        self.text(name, json.dumps(obj, sort_keys=True, indent=2) + "\n")

    def raw(self, name: str, b: bytes):
        self.files[name] = b

    def check_writable(self):
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            probe = self.out / ".rvfldl-write-test"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory is not writable: {self.out} ({exc.strerror})", str(self.out)) from None

    def flush(self):
        for name, data in sorted(self.files.items()):
            p = self.out / name
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(data)


def _pgm(img: np.ndarray, dynamic_range: float) -> bytes:
    px = np.clip(np.rint(np.clip(img, 0, dynamic_range) * 255.0 / dynamic_range), 0, 255).astype(np.uint8)
    h, w = px.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes()


# -------------------------------------------------------------- commands ---

def _wrap_data_errors(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def cmd_train(ctx: RunContext, outs: Outputs, timings: dict):
    task = ctx.raw["task"]
    cfg = ctx.train_cfg
    ds = load_dataset(ctx, "data", need_labels=(task == "train-sup"))
    t0 = time.perf_counter()
    if task == "train-sup":
        model = _wrap_data_errors(train_supervised, ds.data, ds.labels, cfg, n_classes=ds.class_count,
                                  threads=ctx.threads)
    else:
        model = _wrap_data_errors(train_unsupervised, ds.data, cfg, threads=ctx.threads)
    timings["train"] = time.perf_counter() - t0
    timings["runs"] = [{"fold": r.fold, "run": r.run, "wall_time": r.wall_time} for r in model.provenance]

    outs.raw("model.rvfldl", dumps_model(model))
    lines = [json.dumps({"fold": r.fold, "run": r.run, "seed": r.seed, "objectives": r.objectives},
                        sort_keys=True) for r in model.provenance]
    outs.text("provenance.jsonl", "\n".join(lines) + "\n")
    keys = sorted(model.provenance[0].objectives)
    return {
        "task": task,
        "n_samples": ds.n_samples,
        "d": model.d,
        "K": cfg.K,
        "L": cfg.L,
        "c": model.n_classes,
        "runs": len(model.provenance),
        "mean_objectives": {k: float(np.mean([r.objectives[k] for r in model.provenance])) for k in keys},
        "config": cfg.to_dict(),
    }


def _svc_for(ctx, model, train_ds, svc_opts):
    try:
        return fit_svc(model, train_ds.data, train_ds.labels, **svc_opts)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def cmd_classify(ctx: RunContext, outs: Outputs, timings: dict):
    model = load_model_file(ctx)
    query = load_dataset(ctx, "query")
    if query.data.shape[0] != model.d:
        raise DataError(f"query has d={query.data.shape[0]}, model expects d={model.d}")
    t0 = time.perf_counter()
    svc = None
    if ctx.predict == "svc":
        train = load_dataset(ctx, "data", need_labels=True)
        svc = _svc_for(ctx, model, train, ctx.svc)
    elif model.classifier is None:
        raise DataError("argmax prediction needs a supervised model")
    pred, scores = _wrap_data_errors(predict, model, query.data, svc)
    timings["classify"] = time.perf_counter() - t0

    class_ids = [int(c) for c in (svc.class_ids if svc is not None else range(model.n_classes))]
    header = ["index", "predicted"] + [f"score_{c}" for c in class_ids]
    rows = [[j, int(pred[j])] + [_num(s) for s in scores[:, j]] for j in range(pred.size)]
    outs.text("predictions.csv", _csv_text(header, rows))
    report = {"n_queries": int(pred.size), "predict": ctx.predict, "class_ids": class_ids}
    if svc is not None:
        report["svc"] = {k: ctx.svc[k] for k in sorted(ctx.svc)}
    if query.labels is not None:
        report["accuracy"] = float(np.mean(pred == query.labels))
    return report


def cmd_reconstruct(ctx: RunContext, outs: Outputs, timings: dict):
    model = load_model_file(ctx)
    query = load_dataset(ctx, "query")
    if query.data.shape[0] != model.d:
        raise DataError(f"query has d={query.data.shape[0]}, model expects d={model.d}")
    shape = query.image_shape
    if shape is None:
        raise ConfigError("reconstruction needs an image shape (IDX data, or 'image_shape' for CSV)")
    opts = ctx.raw.get("reconstruct", {})
    windowed = opts.get("windowed", False)
    R = model.config.dynamic_range
    t0 = time.perf_counter()
    Yhat = _wrap_data_errors(reconstruct_raw, model, query.data)
    scores = _wrap_data_errors(ssim_per_image, query.data, Yhat, shape, R, windowed)
    timings["reconstruct"] = time.perf_counter() - t0

    outs.text("ssim.csv", _csv_text(["index", "ssim"], [[j, _num(s)] for j, s in enumerate(scores)]))
    y_norm = np.linalg.norm(query.data)
    rel = float(np.linalg.norm(query.data - Yhat) / y_norm) if y_norm > 0 else 0.0
    report = {
        "n_images": int(scores.size),
        "image_shape": [int(s) for s in shape],
        "windowed": bool(windowed),
        "mean_ssim": float(np.mean(scores)),
        "min_ssim": float(np.min(scores)),
        "relative_error": rel,
    }
    if opts.get("dump_pgm", False):
        for j in range(Yhat.shape[1]):
            outs.raw(f"pgm/recon_{j:05d}.pgm", _pgm(Yhat[:, j].reshape(shape), R))
        report["pgm_dir"] = "pgm"
    return report


def cmd_eval(ctx: RunContext, outs: Outputs, timings: dict):
    model = load_model_file(ctx)
    ds = load_dataset(ctx, "data")
    if ds.data.shape[0] != model.d:
        raise DataError(f"data has d={ds.data.shape[0]}, model expects d={model.d}")
    t0 = time.perf_counter()
    sp = _wrap_data_errors(sparsity_report, model, ds.data)
    timings["sparsity"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    rel = _wrap_data_errors(reconstruction_error, model, ds.data)
    timings["reconstruction_error"] = time.perf_counter() - t0
    ratio = sp.ratio
    return {
        "n_samples": ds.n_samples,
        "sparsity_without_enhancement": sp.without_enhancement,
        "sparsity_with_enhancement": sp.with_enhancement,
        "sparsity_ratio": ratio if np.isfinite(ratio) else None,
        "relative_error": rel,
        "timing": "metadata.json",
    }


def _dedupe(values, axis, warnings):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    if len(seen) < len(values):
        msg = f"sweep axis {axis}: removed {len(values) - len(seen)} duplicate value(s)"
        logger.warning(msg)
        warnings.append(msg)
    return seen, len(values) - len(seen)


def cmd_sweep(ctx: RunContext, outs: Outputs, timings: dict):
    grid = ctx.raw["sweep"]
    axes = ("mu1", "mu2", "mu3", "degree", "reg_C")
    if not any(a in grid for a in axes) or any(len(grid.get(a, [None])) == 0 for a in axes):
        raise ConfigError("sweep grid is empty")
    base = ctx.train_cfg
    defaults = {"mu1": base.mu1, "mu2": base.mu2, "mu3": base.mu3,
                "degree": ctx.svc["degree"], "reg_C": ctx.svc["reg_C"]}
    warnings, removed, values = [], 0, {}
    for a in axes:
        vals, n = _dedupe(grid.get(a, [defaults[a]]), a, warnings)
        values[a] = vals
        removed += n
    seeds, n = _dedupe(grid.get("seeds", [base.master_seed]), "seeds", warnings)
    removed += n
    train = load_dataset(ctx, "data", need_labels=True)
    query = load_dataset(ctx, "query", need_labels=True)
    if query.data.shape[0] != train.data.shape[0]:
        raise DataError(f"query has d={query.data.shape[0]}, training data has d={train.data.shape[0]}")

    t0 = time.perf_counter()
    acc = {}
    for mu1, mu2, mu3 in itertools.product(values["mu1"], values["mu2"], values["mu3"]):
        for seed in seeds:
            cfg = TrainConfig.from_dict({**base.to_dict(), "mu1": mu1, "mu2": mu2, "mu3": mu3,
                                         "master_seed": seed})
            model = _wrap_data_errors(train_supervised, train.data, train.labels, cfg,
                                      n_classes=train.class_count, threads=ctx.threads)
            for degree, reg_C in itertools.product(values["degree"], values["reg_C"]):
                svc = None
                if ctx.predict == "svc":
                    svc = _svc_for(ctx, model, train, {**ctx.svc, "degree": degree, "reg_C": reg_C})
                pred, _ = predict(model, query.data, svc)
                acc.setdefault((mu1, mu2, mu3, degree, reg_C), []).append(float(np.mean(pred == query.labels)))
    timings["sweep"] = time.perf_counter() - t0

    rows = []
    for point in itertools.product(*(values[a] for a in axes)):
        a = np.array(acc[point])
        rows.append(list(point) + [len(a), float(a.mean()), float(a.std())])
    header = list(axes) + ["n_seeds", "accuracy_mean", "accuracy_std"]
    outs.text("sweep.csv", _csv_text(header, [
        [_num(r[0]), _num(r[1]), _num(r[2]), int(r[3]), _num(r[4]), r[5], _num(r[6]), _num(r[7])] for r in rows
    ]))
    best = max(rows, key=lambda r: r[6])
    report = {
        "grid_points": len(rows),
        "seeds": [int(s) for s in seeds],
        "predict": ctx.predict,
        "duplicates_removed": removed,
        "best": dict(zip(header, best)),
    }
    if warnings:
        report["warnings"] = warnings
    return report


COMMANDS = {
    "train": cmd_train,
    "classify": cmd_classify,
    "reconstruct": cmd_reconstruct,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


# ------------------------------------------------------------------ main ---

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rvfldl", description="Horseshoe + random functional-link dictionary learning.")
    p.add_argument("--version", action="version", version=f"rvfldl {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb in VERBS:
        s = sub.add_parser(verb, help=f"run the {verb} command")
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit), overrides the config")
        s.add_argument("--threads", type=int, default=1, help="parallel (fold, run) training jobs")
        s.add_argument("--out", default=".", help="output directory")
    return p


def _emit_error(err: CliError):
    payload = {"error": err.kind, "exit_code": err.exit_code, "message": str(err)}
    if err.path is not None:
        payload["path"] = err.path
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def run(argv=None) -> int:
    """Run one command; returns the process exit code."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.seed is not None and not 0 <= args.seed < 1 << 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        ctx = read_config(args.verb, args.config, args.seed, args.threads, args.out)
        outs = Outputs(ctx.out)
        outs.check_writable()
        started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        t0 = time.perf_counter()
        timings: dict = {}
        report = {"command": args.verb, "format_version": 1, **COMMANDS[args.verb](ctx, outs, timings)}
        validate_report(report)
        outs.json("report.json", report)
        outs.json("metadata.json", {
            "command": args.verb,
            "started_utc": started,
            "wall_time_s": time.perf_counter() - t0,
            "timings": timings,
            "threads": ctx.threads,
            "rvfldl": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        })
        outs.flush()
        return EXIT_OK
    except CliError as err:
        _emit_error(err)
        return err.exit_code
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - last-resort contract: one JSON line, exit 1
        err = CliError(f"{type(exc).__name__}: {exc}")
        _emit_error(err)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
