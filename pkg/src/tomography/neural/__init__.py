from .adam import AdamConfig, AdamState, adam_step
from .data import (Dataset, IdxFormatError, IdxMagicError, IdxShapeError, IdxTruncatedError,
                   load_idx, make_blobs, write_idx)
from .linearized import JacobianTooLarge, LinearizedModel, linearize
from .mlp import (MlpArchitecture, MlpObjective, evaluate, forward, init_params, logit_jacobian,
                  logits, loss_and_grad)
from .training import (TrainRecord, burn_in_offset, optimize_in_subspace, run_adam, train_full,
                       train_in_subspace)

__all__ = [
    "AdamConfig", "AdamState", "adam_step", "Dataset", "IdxFormatError", "IdxMagicError",
    "IdxShapeError", "IdxTruncatedError", "load_idx", "make_blobs", "write_idx",
    "JacobianTooLarge", "LinearizedModel", "linearize", "MlpArchitecture", "MlpObjective",
    "evaluate", "forward", "init_params", "logit_jacobian", "logits", "loss_and_grad",
    "TrainRecord", "burn_in_offset", "optimize_in_subspace", "run_adam", "train_full",
    "train_in_subspace",
]
