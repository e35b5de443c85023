"""Unsupervised and supervised dictionary training with fold/run averaging.

The data are Horseshoe-coded once per training call against a random
dictionary, using the stream ``child_seed(master, 0xFFFF, 0xFFFE)``, which
supplies the initial dictionary, the K local shrinkages and the code samples
in that order.  Each ``(fold, run)`` job then draws its own enhancement map
from ``child_seed(master, fold, run)``.  A fold's model is fit on the samples
of all other folds (all samples when ``folds_T == 1``); dictionaries and
classifiers are averaged over runs and then over folds.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .data import normalize_columns, one_hot, scale_unit_interval
from .enhance import EnhancementMap, enhance, init_enhancement
from .horseshoe import CoefficientMatrix, hs_sparse_code, init_dictionary
from .rand import RandomStream, child_seed
from .solver import (
    RidgeParams,
    code_query,
    dual_ridge_codes,
    objective_joint,
    objective_unsupervised,
    solve_classifier,
    solve_dictionary,
    update_coefficients,
)

__all__ = [
    "CODING_STREAM_INDEX",
    "FOLD_STREAM_INDEX",
    "NORMALIZATIONS",
    "RunRecord",
    "TrainConfig",
    "TrainedModel",
    "assign_folds",
    "coding_seed",
    "sparse_codes",
    "prepare_data",
    "query_codes",
    "reconstruct",
    "restore_scale",
    "train_supervised",
    "train_unsupervised",
    "training_codes",
]

#: ``child_seed(master, FOLD_STREAM_INDEX, FOLD_STREAM_INDEX)`` shuffles folds.
FOLD_STREAM_INDEX = 0xFFFF
#: ``child_seed(master, FOLD_STREAM_INDEX, CODING_STREAM_INDEX)`` drives the sparse coding.
CODING_STREAM_INDEX = 0xFFFE
#: Per-sample preprocessing: unit l2 columns, division by the pixel range, or nothing.
NORMALIZATIONS = ("l2", "unit_interval", "none")


@dataclass(frozen=True)
class TrainConfig:
    K: int = 450
    L: int | None = None
    tau: float = 1.0
    sigma2: float = 1.0
    eta: float = 0.01
    mu1: float = 0.2
    mu2: float = 0.2
    mu3: float = 0.1
    runs_r: int = 5
    folds_T: int = 3
    master_seed: int = 0
    dict_init: str = "gaussian"
    normalize: str = "l2"
    dynamic_range: float = 255.0

    def __post_init__(self):
        # booleans are accepted for convenience: True -> "l2", False -> "none"
        if isinstance(self.normalize, bool):
            object.__setattr__(self, "normalize", "l2" if self.normalize else "none")
        if self.normalize not in NORMALIZATIONS:
            raise ValueError(f"normalize must be one of {NORMALIZATIONS}, got {self.normalize!r}")
        if not self.dynamic_range > 0:
            raise ValueError("dynamic_range must be positive")
        if self.L is None:
            object.__setattr__(self, "L", self.K)
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be at least 1")
        if self.runs_r < 1 or self.folds_T < 1:
            raise ValueError("runs_r and folds_T must be at least 1")
        if self.runs_r >= FOLD_STREAM_INDEX or self.folds_T >= FOLD_STREAM_INDEX:
            raise ValueError(f"runs_r and folds_T must be below {FOLD_STREAM_INDEX}")
        if self.dict_init not in ("gaussian", "data_subset"):
            raise ValueError(f"dict_init must be 'gaussian' or 'data_subset', got {self.dict_init!r}")
        RidgeParams(self.mu1, self.mu2, self.mu3, self.eta)
        if not (self.tau > 0 and self.sigma2 > 0):
            raise ValueError("tau and sigma2 must be positive")
        if not 0 <= int(self.master_seed) < 1 << 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def ridge(self) -> RidgeParams:
        return RidgeParams(self.mu1, self.mu2, self.mu3, self.eta)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown TrainConfig keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class RunRecord:
    fold: int
    run: int
    seed: int
    objectives: dict
    wall_time: float = 0.0
    dictionary: np.ndarray | None = field(default=None, repr=False)
    classifier: np.ndarray | None = field(default=None, repr=False)


@dataclass
class TrainedModel:
    dictionary: np.ndarray
    classifier: np.ndarray | None
    enhancement: EnhancementMap
    config: TrainConfig
    provenance: list

    @property
    def d(self) -> int:
        return self.dictionary.shape[0]

    @property
    def atoms(self) -> int:
        return self.dictionary.shape[1]

    @property
    def n_classes(self) -> int:
        return 0 if self.classifier is None else self.classifier.shape[0]


def assign_folds(N: int, folds_T: int, stream: RandomStream) -> np.ndarray:
    """Shuffle ``range(N)`` and deal the samples round-robin into ``folds_T`` folds."""
    if folds_T < 1:
        raise ValueError("folds_T must be at least 1")
    if folds_T > N:
        raise ValueError(f"cannot split {N} samples into {folds_T} folds")
    order = np.argsort(stream.next_u64(N), kind="stable")
    folds = np.empty(N, dtype=np.int64)
    folds[order] = np.arange(N) % folds_T
    return folds


def prepare_data(Y, cfg: TrainConfig, keep_zero: bool = False) -> np.ndarray:
    """Apply the configured per-sample preprocessing to raw d x N data.

    ``keep_zero`` lets all-zero columns through l2 normalisation unchanged
    (useful when coding queries; training data must not contain them).
    """
    Y = np.asarray(Y, dtype=np.float64)
    if cfg.normalize == "l2":
        return normalize_columns(Y, keep_zero=keep_zero)
    if cfg.normalize == "unit_interval":
        return scale_unit_interval(Y, cfg.dynamic_range)
    return Y


def restore_scale(Yhat, Y_raw, cfg: TrainConfig) -> np.ndarray:
    """Map prepared-space columns back to the units of the raw data ``Y_raw``."""
    Yhat = np.asarray(Yhat, dtype=np.float64)
    if cfg.normalize == "l2":
        Y_raw = np.asarray(Y_raw, dtype=np.float64)
        return Yhat * np.sqrt(np.sum(Y_raw * Y_raw, axis=0))
    if cfg.normalize == "unit_interval":
        return Yhat * cfg.dynamic_range
    return Yhat




def _training_sets(N, cfg, folds):
    if folds is None:
        folds = assign_folds(N, cfg.folds_T, RandomStream(
            child_seed(cfg.master_seed, FOLD_STREAM_INDEX, FOLD_STREAM_INDEX)))
    folds = np.asarray(folds, dtype=np.int64)
    if folds.shape != (N,):
        raise ValueError(f"fold assignment has length {folds.shape[0]}, expected {N}")
    if cfg.folds_T == 1:
        return [np.arange(N)]
    sets = []
    for t in range(cfg.folds_T):
        idx = np.flatnonzero(folds != t)
        if idx.size == 0 or not np.any(folds == t):
            raise ValueError(f"fold {t} is empty")
        sets.append(idx)
    return sets


def coding_seed(cfg: TrainConfig) -> int:
    return child_seed(cfg.master_seed, FOLD_STREAM_INDEX, CODING_STREAM_INDEX)


def _content_rank(Y: np.ndarray) -> np.ndarray:
    """Position of every column in a sort by content (first row most significant)."""
    canon = np.lexsort(Y[::-1])
    rank = np.empty_like(canon)
    rank[canon] = np.arange(canon.size)
    return rank


def sparse_codes(Y, cfg: TrainConfig) -> CoefficientMatrix:
    """Horseshoe codes of prepared data ``Y`` against the seeded random dictionary.

    Columns are sampled in content-sorted order and returned in input order,
    so permuting the input permutes the codes and nothing else.
    """
    Y = np.asarray(Y, dtype=np.float64)
    rank = _content_rank(Y)
    canon = np.argsort(rank)
    stream = RandomStream(coding_seed(cfg))
    D = init_dictionary(Y.shape[0], cfg.K, stream, cfg.dict_init, Y[:, canon])
    X = hs_sparse_code(Y[:, canon], D, cfg.tau, cfg.sigma2, cfg.eta, stream)
    return CoefficientMatrix(X.values[:, rank], X.effective_zero_threshold)


def _enhanced(Xtr, cfg, seed):
    emap = init_enhancement(cfg.K, cfg.L, RandomStream(seed))
    return emap, enhance(Xtr, emap)


def _unsup_job(Ytr, Xtr, cfg, fold, run):
    start = time.perf_counter()
    seed = child_seed(cfg.master_seed, fold, run)
    emap, X1 = _enhanced(Xtr, cfg, seed)
    D1 = solve_dictionary(Ytr, X1, cfg.mu1, cfg.eta)
    X1_upd = dual_ridge_codes(Ytr, D1, cfg.mu1, cfg.eta)
    objectives = {
        "unsupervised": objective_unsupervised(Ytr, D1, X1, cfg.mu1),
        "unsupervised_updated_codes": objective_unsupervised(Ytr, D1, X1_upd, cfg.mu1),
    }
    rec = RunRecord(fold, run, seed, objectives, time.perf_counter() - start, D1, None)
    return rec, emap


def _sup_job(Ytr, Htr, Xtr, cfg, fold, run):
    start = time.perf_counter()
    seed = child_seed(cfg.master_seed, fold, run)
    emap, X1 = _enhanced(Xtr, cfg, seed)
    params = cfg.ridge
    D1 = solve_dictionary(Ytr, X1, cfg.mu1, cfg.eta)
    W0 = solve_classifier(Htr, X1, cfg.mu2, cfg.eta)
    X1_upd = update_coefficients(Ytr, Htr, D1, W0, params)
    W = solve_classifier(Htr, X1_upd, cfg.mu2, cfg.eta)
    objectives = {
        "unsupervised": objective_unsupervised(Ytr, D1, X1, cfg.mu1),
        "joint": objective_joint(Ytr, Htr, D1, W, X1_upd, params),
        "joint_zero_classifier": objective_joint(Ytr, Htr, D1, np.zeros_like(W), X1_upd, params),
    }
    rec = RunRecord(fold, run, seed, objectives, time.perf_counter() - start, D1, W)
    return rec, emap


def _run_jobs(job, jobs, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: job(*a), jobs))
    else:
        results = [job(*a) for a in jobs]
    # reduction order is fixed by (fold, run), never by completion order
    return sorted(results, key=lambda r: (r[0].fold, r[0].run))


def _average(records, attr, cfg):
    per_fold = []
    for t in range(cfg.folds_T):
        mats = [getattr(r, attr) for r in records if r.fold == t]
        per_fold.append(np.mean(mats, axis=0))
    return np.mean(per_fold, axis=0)


def train_unsupervised(Y, cfg: TrainConfig, folds=None, threads: int = 1) -> TrainedModel:
    """Learn the averaged d x (K+L) dictionary of ``Y`` (d x N)."""
    Y = prepare_data(Y, cfg)
    if Y.ndim != 2 or Y.shape[1] == 0:
        raise ValueError("training data must be a non-empty d x N matrix")
    sets = _training_sets(Y.shape[1], cfg, folds)
    rank = _content_rank(Y)
    X = sparse_codes(Y, cfg).values
    jobs = []
    for t, idx in enumerate(sets):
        order = idx[np.argsort(rank[idx], kind="stable")]
        jobs += [(Y[:, order], X[:, order], cfg, t, l) for l in range(cfg.runs_r)]
    results = _run_jobs(_unsup_job, jobs, threads)
    records = [r for r, _ in results]
    return TrainedModel(
        dictionary=_average(records, "dictionary", cfg),
        classifier=None,
        enhancement=results[0][1],
        config=cfg,
        provenance=records,
    )


def train_supervised(Y, labels, cfg: TrainConfig, n_classes: int | None = None, folds=None,
                     threads: int = 1) -> TrainedModel:
    """Learn the averaged dictionary and c x (K+L) classifier."""
    Y = prepare_data(Y, cfg)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (Y.shape[1],):
        raise ValueError(f"{labels.shape[0]} labels for {Y.shape[1]} samples")
    c = int(labels.max()) + 1 if n_classes is None else int(n_classes)
    if c < 2:
        raise ValueError("supervised training needs at least two classes")
    H = one_hot(labels, c)
    sets = _training_sets(Y.shape[1], cfg, folds)
    for t, idx in enumerate(sets):
        present = np.zeros(c, dtype=bool)
        present[labels[idx]] = True
        if not present.all():
            missing = int(np.flatnonzero(~present)[0])
            raise ValueError(f"class {missing} is absent from the training set of fold {t}")
    rank = _content_rank(Y)
    X = sparse_codes(Y, cfg).values
    jobs = []
    for t, idx in enumerate(sets):
        order = idx[np.argsort(rank[idx], kind="stable")]
        jobs += [(Y[:, order], H[:, order], X[:, order], cfg, t, l) for l in range(cfg.runs_r)]
    results = _run_jobs(_sup_job, jobs, threads)
    records = [r for r, _ in results]
    return TrainedModel(
        dictionary=_average(records, "dictionary", cfg),
        classifier=_average(records, "classifier", cfg),
        enhancement=results[0][1],
        config=cfg,
        provenance=records,
    )


def training_codes(model: TrainedModel, Y, labels=None) -> np.ndarray:
    """Codes of (already prepared) training data, label-informed when labels are given."""
    params = model.config.ridge
    if labels is None or model.classifier is None:
        return code_query(Y, model.dictionary, model.classifier, params)
    H = one_hot(labels, model.n_classes)
    return update_coefficients(Y, H, model.dictionary, model.classifier, params)


def query_codes(model: TrainedModel, Yq) -> np.ndarray:
    """Label-free codes of (already prepared) queries, one column each."""
    return code_query(Yq, model.dictionary, model.classifier, model.config.ridge)


def reconstruct(model: TrainedModel, Yq) -> np.ndarray:
    """``D1 x`` with ``x`` the label-free code of each query column (mu3 = 0)."""
    params = RidgeParams(model.config.mu1, model.config.mu2, 0.0, model.config.eta)
    codes = code_query(Yq, model.dictionary, None, params)
    return model.dictionary @ codes
