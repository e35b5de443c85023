"""Dictionary learning with Horseshoe-prior sparse codes and random functional-link enhancement.

The library is organised as

* :mod:`rvfldl.rand` -- seeded SplitMix64 streams, normal and Half-Cauchy samplers;
* :mod:`rvfldl.horseshoe` -- Horseshoe posterior and coefficient sampling;
* :mod:`rvfldl.enhance` -- fixed random sigmoid enhancement of codes;
* :mod:`rvfldl.solver` -- closed-form ridge solves and objectives;
* :mod:`rvfldl.training` -- unsupervised/supervised training with fold/run averaging;
* :mod:`rvfldl.classify` -- polynomial-kernel SVC and the ``argmax(W x)`` read-out;
* :mod:`rvfldl.metrics` -- accuracy, relative error, SSIM;
* :mod:`rvfldl.data`, :mod:`rvfldl.model_io` -- dataset readers and model files;
* :mod:`rvfldl.cli` -- the ``rvfldl`` command.
"""

__version__ = "0.1.0"

from .classify import SVCModel, argmax_label, poly_kernel, svc_predict, svc_train  # noqa: E402
from .data import LabeledDataset, load_csv_matrix, load_idx, normalize_columns, one_hot  # noqa: E402
from .enhance import EnhancementMap, enhance, init_enhancement  # noqa: E402
from .horseshoe import HSParams, effective_sparsity, hs_posterior, hs_sparse_code  # noqa: E402
from .metrics import accuracy, relative_reconstruction_error, ssim  # noqa: E402
from .rand import RandomStream, child_seed, seeded_stream  # noqa: E402
from .solver import RidgeParams, code_query, solve_classifier, solve_dictionary, update_coefficients  # noqa: E402
from .training import TrainConfig, TrainedModel, train_supervised, train_unsupervised  # noqa: E402

__all__ = [
    "EnhancementMap",
    "HSParams",
    "LabeledDataset",
    "RandomStream",
    "RidgeParams",
    "SVCModel",
    "TrainConfig",
    "TrainedModel",
    "accuracy",
    "argmax_label",
    "child_seed",
    "code_query",
    "effective_sparsity",
    "enhance",
    "hs_posterior",
    "hs_sparse_code",
    "init_enhancement",
    "load_csv_matrix",
    "load_idx",
    "normalize_columns",
    "one_hot",
    "poly_kernel",
    "relative_reconstruction_error",
    "seeded_stream",
    "solve_classifier",
    "solve_dictionary",
    "ssim",
    "svc_predict",
    "svc_train",
    "train_supervised",
    "train_unsupervised",
    "update_coefficients",
]
