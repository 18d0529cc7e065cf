"""Core tensor-train arithmetic against dense oracles."""

import numpy as np
import pytest

from ttsubspace import (
    TensorTrain,
    add,
    inner,
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
from conftest import random_mpo, random_tt


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestRandom:
    def test_shape_contract(self):
        v = tt_random([2, 2], [1, 1, 1], seed=0)
        assert v.rank_vector == (1, 1, 1)
        assert v.mode_sizes == (2, 2)
        assert abs(norm(v) - 1.0) < 1e-12

    def test_determinism(self):
        v = tt_random([3, 4, 2], [1, 2, 2, 1], seed=7)
        w = tt_random([3, 4, 2], [1, 2, 2, 1], seed=7)
        for cv, cw in zip(v.cores, w.cores):
            assert np.array_equal(cv, cw)

    def test_rank_clipping(self):
        # interior bond cannot exceed min(prod left, prod right) = 2
        v = tt_random([2, 2], [1, 3, 1], seed=1)
        assert v.rank_vector == (1, 2, 1)
        # cross-check the bound by decomposing a dense random tensor losslessly
        x = np.random.default_rng(0).standard_normal((2, 2))
        w = tt_from_dense(x, tol=0.0)
        assert w.rank_vector[1] <= 2

    def test_invalid_chain(self):
        with pytest.raises(ValueError):
            tt_random([2, 2], [1, 2, 2], seed=0)
        with pytest.raises(ValueError):
            tt_random([2, 2], [2, 2, 1], seed=0)


class TestFromDense:
    def test_lossless_roundtrip(self, rng):
        x = rng.standard_normal((3, 4, 2, 3)) + 1j * rng.standard_normal((3, 4, 2, 3))
        v = tt_from_dense(x, tol=0.0)
        assert rel_err(tt_to_dense(v), x) < 1e-13

    def test_separable_is_rank_one(self, rng):
        a, b, c = rng.standard_normal(4), rng.standard_normal(3), rng.standard_normal(5)
        x = np.einsum("i,j,k->ijk", a, b, c)
        v = tt_from_dense(x, tol=1e-10)
        assert v.rank_vector == (1, 1, 1, 1)

    def test_relative_tolerance(self, rng):
        x = rng.standard_normal((4, 4, 4))
        v = tt_from_dense(x, tol=1e-8)
        assert rel_err(tt_to_dense(v), x) <= 1e-8

    def test_zero_tensor(self):
        v = tt_from_dense(np.zeros((2, 3, 2)))
        assert norm(v) == 0.0
        assert v.rank_vector == (1, 1, 1, 1)

    def test_max_rank_cap(self, rng):
        x = rng.standard_normal((4, 4, 4))
        v = tt_from_dense(x, tol=0.0, max_rank=2)
        assert max(v.rank_vector) <= 2


class TestToDense:
    def test_rank_one_of_ones(self):
        v = TensorTrain([np.ones((1, 2, 1)), np.ones((1, 2, 1))])
        assert np.allclose(tt_to_dense(v), np.ones((2, 2)))

    def test_identity_mpo(self):
        a = mpo_identity([2, 3])
        assert np.allclose(mpo_to_dense(a), np.eye(6))

    def test_guard(self):
        v = tt_zero([2] * 25)
        with pytest.raises(ValueError):
            tt_to_dense(v)


class TestInner:
    def test_separable(self, rng):
        a1, a2 = rng.standard_normal(3) + 1j * rng.standard_normal(3), rng.standard_normal(4)
        b1, b2 = rng.standard_normal(3), rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v = TensorTrain([a1.reshape(1, 3, 1), a2.reshape(1, 4, 1)])
        w = TensorTrain([b1.reshape(1, 3, 1), b2.reshape(1, 4, 1)])
        expect = np.vdot(a1, b1) * np.vdot(a2, b2)
        assert abs(inner(v, w) - expect) < 1e-12 * abs(expect)

    def test_self_inner_is_norm_squared(self, rng):
        v = random_tt(rng, [3, 3, 3], [2, 2])
        val = inner(v, v)
        assert abs(val.imag) < 1e-12 * abs(val)
        assert val.real >= 0
        assert abs(val.real - norm(v) ** 2) < 1e-10 * val.real

    def test_matches_dense(self, rng):
        v = random_tt(rng, [2, 3, 4], [2, 3])
        w = random_tt(rng, [2, 3, 4], [3, 2])
        dv, dw = tt_to_dense(v).ravel(), tt_to_dense(w).ravel()
        expect = np.vdot(dv, dw)
        assert abs(inner(v, w) - expect) < 1e-12 * abs(expect)

    def test_sesquilinearity(self, rng):
        v = random_tt(rng, [2, 3], [2])
        w = random_tt(rng, [2, 3], [2])
        alpha = 1.3 - 0.7j
        assert abs(inner(scale(v, alpha), w) - np.conj(alpha) * inner(v, w)) < 1e-12
        assert abs(inner(v, scale(w, alpha)) - alpha * inner(v, w)) < 1e-12

    def test_mode_mismatch(self, rng):
        with pytest.raises(ValueError):
            inner(random_tt(rng, [2, 2], [2]), random_tt(rng, [2, 3], [2]))


class TestNormScale:
    def test_scale_by_one(self, rng):
        v = random_tt(rng, [2, 3], [2])
        assert rel_err(tt_to_dense(scale(v, 1.0)), tt_to_dense(v)) == 0.0

    def test_norm_homogeneity(self, rng):
        v = random_tt(rng, [3, 2, 3], [2, 2])
        alpha = -2.5 + 0.5j
        assert abs(norm(scale(v, alpha)) - abs(alpha) * norm(v)) < 1e-12 * norm(v)

    def test_center_core_norm(self, rng):
        v = random_tt(rng, [3, 3, 3], [3, 3])
        w, form = orthogonalize(v, 1)
        dense_norm = np.linalg.norm(tt_to_dense(v))
        assert abs(np.linalg.norm(w.cores[1]) - dense_norm) < 1e-12 * dense_norm
        assert form.directions == ("L", "C", "R")


class TestAdd:
    def test_rank_bookkeeping(self, rng):
        v = random_tt(rng, [4, 4, 4], [2, 3])
        w = random_tt(rng, [4, 4, 4], [1, 2])
        assert add(v, w).rank_vector == (1, 3, 5, 1)

    def test_cancellation(self, rng):
        v = random_tt(rng, [2, 3, 2], [2, 2])
        z = add(v, scale(v, -1.0))
        assert np.linalg.norm(tt_to_dense(z)) < 1e-12 * norm(v)

    def test_matches_dense(self, rng):
        v = random_tt(rng, [2, 4, 3], [2, 2])
        w = random_tt(rng, [2, 4, 3], [3, 1])
        assert rel_err(tt_to_dense(add(v, w)), tt_to_dense(v) + tt_to_dense(w)) < 1e-13

    def test_single_mode(self, rng):
        v = random_tt(rng, [5], [])
        w = random_tt(rng, [5], [])
        assert rel_err(tt_to_dense(add(v, w)), tt_to_dense(v) + tt_to_dense(w)) < 1e-13


class TestMatvec:
    def test_identity(self, rng):
        v = random_tt(rng, [2, 3, 2], [2, 2])
        w = mpo_apply_exact(mpo_identity([2, 3, 2]), v)
        assert w.rank_vector == v.rank_vector
        assert rel_err(tt_to_dense(w), tt_to_dense(v)) < 1e-13

    def test_rank_product(self, rng):
        a = random_mpo(rng, [3, 3, 3], [2, 2])
        v = random_tt(rng, [3, 3, 3], [3, 3])
        assert mpo_apply_exact(a, v).rank_vector == (1, 6, 6, 1)

    def test_matches_dense(self, rng):
        a = random_mpo(rng, [2, 3, 2], [2, 3])
        v = random_tt(rng, [2, 3, 2], [2, 2])
        got = tt_to_dense(mpo_apply_exact(a, v)).ravel()
        expect = mpo_to_dense(a) @ tt_to_dense(v).ravel()
        assert rel_err(got, expect) < 1e-12

    def test_operator_sugar(self, rng):
        a = random_mpo(rng, [2, 2], [2])
        v = random_tt(rng, [2, 2], [2])
        assert rel_err(tt_to_dense(a @ v), tt_to_dense(mpo_apply_exact(a, v))) == 0.0

    def test_sandwich_contractions(self, rng):
        a = random_mpo(rng, [2, 3], [2])
        v = random_tt(rng, [2, 3], [2])
        w = random_tt(rng, [2, 3], [2])
        av = mpo_apply_exact(a, v)
        aw = mpo_apply_exact(a, w)
        assert abs(mpo_inner(v, a, w) - inner(v, aw)) < 1e-11 * abs(inner(v, aw))
        assert abs(mpo_inner2(v, a, w) - inner(av, aw)) < 1e-11 * abs(inner(av, aw))


class TestOrthogonalize:
    def test_left_canonical(self, rng):
        v = random_tt(rng, [3, 3, 3, 3], [3, 3, 3])
        w, form = orthogonalize(v, 3)
        assert form.center == 3
        for k in range(3):
            c = w.cores[k]
            mat = c.reshape(-1, c.shape[2])
            assert np.allclose(mat.conj().T @ mat, np.eye(c.shape[2]), atol=1e-12)
        assert rel_err(tt_to_dense(w), tt_to_dense(v)) < 1e-13

    def test_right_canonical(self, rng):
        v = random_tt(rng, [3, 2, 4], [2, 3])
        w, _ = orthogonalize(v, 0)
        for k in range(1, 3):
            c = w.cores[k]
            mat = c.reshape(c.shape[0], -1)
            assert np.allclose(mat @ mat.conj().T, np.eye(c.shape[0]), atol=1e-12)
        assert rel_err(tt_to_dense(w), tt_to_dense(v)) < 1e-13

    def test_idempotent_value(self, rng):
        v = random_tt(rng, [2, 3, 2], [2, 2])
        w, _ = orthogonalize(v, 1)
        u, _ = orthogonalize(w, 1)
        assert rel_err(tt_to_dense(u), tt_to_dense(v)) < 1e-13


class TestInvariantSweeps:
    def test_roundtrip_many(self, rng):
        for _ in range(10):
            shape = tuple(rng.integers(2, 5, size=rng.integers(2, 5)))
            x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            assert rel_err(tt_to_dense(tt_from_dense(x, 0.0)), x) < 1e-12

    def test_linearity(self, rng):
        for _ in range(5):
            v = random_tt(rng, [3, 2, 3], [2, 2])
            w = random_tt(rng, [3, 2, 3], [2, 3])
            a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            got = tt_to_dense(add(scale(v, a), scale(w, b)))
            expect = a * tt_to_dense(v) + b * tt_to_dense(w)
            assert rel_err(got, expect) < 1e-12

    def test_matvec_exactness_sweep(self, rng):
        for _ in range(8):
            d = int(rng.integers(2, 5))
            n = [int(rng.integers(2, 5)) for _ in range(d)]
            ra = [int(rng.integers(1, 4)) for _ in range(d - 1)]
            rv = [int(rng.integers(1, 4)) for _ in range(d - 1)]
            a = random_mpo(rng, n, ra)
            v = random_tt(rng, n, rv)
            got = tt_to_dense(mpo_apply_exact(a, v)).ravel()
            expect = mpo_to_dense(a) @ tt_to_dense(v).ravel()
            assert rel_err(got, expect) < 1e-12
