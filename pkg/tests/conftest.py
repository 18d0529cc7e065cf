import numpy as np
import pytest

from ttsubspace import TensorTrain, TTMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_tt(rng, mode_sizes, ranks):
    """Unnormalized random TT with the given interior ranks (clipped to feasible)."""
    from ttsubspace.tt import max_feasible_ranks

    feas = max_feasible_ranks(mode_sizes)
    r = [1] + [min(x, f) for x, f in zip(ranks, feas[1:-1])] + [1]
    cores = []
    for k, n in enumerate(mode_sizes):
        shape = (r[k], n, r[k + 1])
        cores.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return TensorTrain(cores)


def random_mpo(rng, mode_sizes, ranks, hermitian=False):
    """Random TT-matrix; optionally symmetrized densely (desk sizes only)."""
    r = [1] + list(ranks) + [1]
    cores = []
    for k, n in enumerate(mode_sizes):
        shape = (r[k], n, n, r[k + 1])
        cores.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    a = TTMatrix(cores)
    if hermitian:
        from ttsubspace import mpo_to_dense
        from ttsubspace.tt import tt_from_dense

        dense = mpo_to_dense(a)
        dense = 0.5 * (dense + dense.conj().T)
        return mpo_from_dense(dense, mode_sizes)
    return a


def mpo_from_dense(matrix, mode_sizes, tol=0.0, max_rank=None):
    """Lift a dense matrix into TT-matrix form (test oracle bridge)."""
    from ttsubspace.tt import tt_from_dense

    n = list(mode_sizes)
    d = len(n)
    t = np.asarray(matrix).reshape(n + n)
    perm = [val for pair in zip(range(d), range(d, 2 * d)) for val in pair]
    t = t.transpose(perm).reshape([a * a for a in n])
    v = tt_from_dense(t, tol=tol, max_rank=max_rank)
    cores = []
    for k, c in enumerate(v.cores):
        rl, _, rr = c.shape
        cores.append(c.reshape(rl, n[k], n[k], rr))
    return TTMatrix(cores)
