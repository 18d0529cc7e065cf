"""Tensor-train linear algebra and rank-truncated subspace eigensolvers."""

from .tt import (
    TensorTrain,
    TTMatrix,
    CanonicalForm,
    add,
    inner,
    max_feasible_ranks,
    mpo_apply_exact,
    mpo_identity,
    mpo_inner,
    mpo_inner2,
    mpo_to_dense,
    norm,
    orthogonalize,
    scale,
    tt_from_dense,
    tt_random,
    tt_to_dense,
    tt_zero,
)

__all__ = [
    "TensorTrain",
    "TTMatrix",
    "CanonicalForm",
    "add",
    "inner",
    "max_feasible_ranks",
    "mpo_apply_exact",
    "mpo_identity",
    "mpo_inner",
    "mpo_inner2",
    "mpo_to_dense",
    "norm",
    "orthogonalize",
    "scale",
    "tt_from_dense",
    "tt_random",
    "tt_to_dense",
    "tt_zero",
]

__version__ = "0.1.0"
