"""
Property Tests

随机生成的小规模实例（固定种子）上检验：

测试覆盖：
- Dobrushin 收缩 ∥μT − νT∥ ≤ (1 − δ(T))∥μ − ν∥
- 单步贝叶斯扩张上界 (2 − δ(Q))∥μ − ν∥
- 穷举期望滤波距离不超过包络，且每步至少按 α 收缩
- 滤波递推与穷举条件分布一致
- 正矩阵在 Hilbert 度量下不扩张
- 无信息观测与可逆确定性观测
- 支撑嵌套（μ ≪ ν、ν 不满支撑）的先验：扩张上界、逐步收缩、密度 dμ/dν 与反向违例下标

Author: FilterStab Development Team
Version: v1.0
Date: 2026-10-19
"""

import itertools

import numpy as np
import pytest

from src.core.enumeration import expected_filter_distance, joint_conditioning
from src.core.errors import AbsoluteContinuityError
from src.core.filter import DegenerateZero, bayes_update, run_filter
from src.core.kernels import apply_kernel, dobrushin_finite
from src.core.measures import (
    first_continuity_violation,
    hilbert_metric,
    is_absolutely_continuous,
    radon_nikodym,
    tv_distance,
)
from src.core.stability import contraction_coefficient, expected_bayes_expansion, stability_envelope
from src.models.distributions import FiniteDistribution
from src.models.likelihood import FiniteLikelihood
from src.models.operators import StochasticMatrix
from src.models.pomp_model import PompModel


pytestmark = pytest.mark.property


def random_matrix(rng, rows, cols, sparsity=0.0):
    """Dirichlet 行；sparsity > 0 时随机置零（每行至少保留一个正元素）"""
    entries = rng.dirichlet(np.ones(cols), size=rows)
    if sparsity:
        mask = rng.random((rows, cols)) < sparsity
        mask[np.arange(rows), rng.integers(cols, size=rows)] = False
        entries = np.where(mask, 0.0, entries)
        entries /= entries.sum(axis=1, keepdims=True)
    return StochasticMatrix(entries)


def random_model(rng, sparsity=0.0):
    n = int(rng.integers(2, 5))
    k = int(rng.integers(2, 4))
    return PompModel.finite_model("random", random_matrix(rng, n, n, sparsity), random_matrix(rng, n, k, sparsity))


def full_support(rng, n):
    return FiniteDistribution(rng.dirichlet(np.ones(n)))


def nested_supports(rng, n):
    """ν 随机置零一部分状态，μ 在这些状态上也为零，并可能再多零一些（μ ≪ ν）"""
    nu_zero = rng.random(n) < 0.4
    nu_zero[rng.integers(n)] = False
    mu_zero = nu_zero | (rng.random(n) < 0.3)
    mu_zero[rng.choice(np.flatnonzero(~nu_zero))] = False
    nu = np.where(nu_zero, 0.0, rng.dirichlet(np.ones(n)))
    mu = np.where(mu_zero, 0.0, rng.dirichlet(np.ones(n)))
    return FiniteDistribution(mu / mu.sum()), FiniteDistribution(nu / nu.sum())


class TestKernelProperties:
    """核的收缩性质"""

    @pytest.mark.acceptance
    def test_dobrushin_contraction(self):
        rng = np.random.default_rng(101)
        for _ in range(10_000):
            n = int(rng.integers(2, 7))
            K = random_matrix(rng, n, n, sparsity=0.3)
            p, q = full_support(rng, n), full_support(rng, n)
            lhs = tv_distance(apply_kernel(K, p), apply_kernel(K, q))
            assert lhs <= (1.0 - dobrushin_finite(K)) * tv_distance(p, q) + 1e-12

    def test_hilbert_non_expansive(self):
        rng = np.random.default_rng(102)
        for _ in range(300):
            n = int(rng.integers(2, 6))
            K = random_matrix(rng, n, n)
            p, q = full_support(rng, n), full_support(rng, n)
            lhs = hilbert_metric(apply_kernel(K, p), apply_kernel(K, q))
            assert lhs <= hilbert_metric(p, q) + 1e-9


class TestBayesProperties:
    """贝叶斯更新的性质"""

    @pytest.mark.acceptance
    def test_expansion_bound(self):
        rng = np.random.default_rng(201)
        for _ in range(10_000):
            n = int(rng.integers(2, 7))
            Q = random_matrix(rng, n, int(rng.integers(2, 5)), sparsity=0.3)
            mu, nu = full_support(rng, n), full_support(rng, n)
            bound = (2.0 - dobrushin_finite(Q)) * tv_distance(mu, nu)
            assert expected_bayes_expansion(mu, nu, Q) <= bound + 1e-10

    @pytest.mark.acceptance
    def test_expansion_bound_nested_supports(self):
        rng = np.random.default_rng(205)
        for _ in range(10_000):
            n = int(rng.integers(2, 7))
            Q = random_matrix(rng, n, int(rng.integers(2, 5)), sparsity=0.3)
            mu, nu = nested_supports(rng, n)
            bound = (2.0 - dobrushin_finite(Q)) * tv_distance(mu, nu)
            assert expected_bayes_expansion(mu, nu, Q) <= bound + 1e-10

    def test_uninformative_fixed_point(self):
        rng = np.random.default_rng(202)
        for _ in range(100):
            n, k = int(rng.integers(2, 6)), int(rng.integers(2, 5))
            row = rng.dirichlet(np.ones(k))
            L = FiniteLikelihood.from_matrix(StochasticMatrix.constant_rows(row, n))
            p = full_support(rng, n)
            y = int(rng.integers(k))
            np.testing.assert_allclose(bayes_update(p, y, L).probs, p.probs, atol=1e-14)

    def test_invertible_observation_forgets_prior(self):
        rng = np.random.default_rng(203)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            L = FiniteLikelihood.from_matrix(StochasticMatrix(np.eye(n)[rng.permutation(n)]))
            y = int(rng.integers(n))
            a = bayes_update(full_support(rng, n), y, L)
            b = bayes_update(full_support(rng, n), y, L)
            assert tv_distance(a, b) == 0.0

    def test_full_support_never_degenerate(self):
        rng = np.random.default_rng(204)
        for _ in range(100):
            model = random_model(rng)
            prior = full_support(rng, model.finite.states)
            observations = rng.integers(model.finite.symbols, size=10).tolist()
            assert not run_filter(prior, observations, model).is_degenerate


class TestFilterProperties:
    """滤波与穷举的一致性"""

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(301)
        for _ in range(40):
            model = random_model(rng, sparsity=0.3)
            prior = full_support(rng, model.finite.states)
            horizon = int(rng.integers(0, 4))
            for observations in itertools.product(range(model.finite.symbols), repeat=horizon + 1):
                traj = run_filter(prior, observations, model)
                exact = joint_conditioning(model, prior, observations)
                if exact is None:
                    assert traj.is_degenerate
                else:
                    assert tv_distance(traj.final, exact) < 1e-10

    @pytest.mark.slow
    def test_expected_distance_under_envelope(self):
        rng = np.random.default_rng(302)
        for _ in range(60):
            model = random_model(rng, sparsity=0.2)
            n = model.finite.states
            mu, nu = full_support(rng, n), full_support(rng, n)
            delta_T = dobrushin_finite(model.finite.T)
            delta_Q = dobrushin_finite(model.finite.Q)
            tv0 = tv_distance(mu, nu)
            expected = expected_filter_distance(model, mu, nu, 3)
            for step, value in enumerate(expected):
                assert value <= stability_envelope(step, delta_T, delta_Q, tv0) + 1e-10

    @pytest.mark.slow
    @pytest.mark.acceptance
    def test_one_step_contraction_in_expectation(self):
        rng = np.random.default_rng(303)
        for _ in range(200):
            n, k = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            model = PompModel.finite_model("random", random_matrix(rng, n, n, 0.2), random_matrix(rng, n, k, 0.2))
            alpha = contraction_coefficient(dobrushin_finite(model.finite.T), dobrushin_finite(model.finite.Q))
            expected = expected_filter_distance(model, full_support(rng, n), full_support(rng, n), int(rng.integers(1, 4)))
            for before, after in zip(expected, expected[1:]):
                assert after <= alpha * before + 1e-10

    @pytest.mark.slow
    @pytest.mark.acceptance
    def test_one_step_contraction_nested_supports(self):
        rng = np.random.default_rng(304)
        for _ in range(200):
            n, k = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            model = PompModel.finite_model("random", random_matrix(rng, n, n, 0.2), random_matrix(rng, n, k, 0.2))
            alpha = contraction_coefficient(dobrushin_finite(model.finite.T), dobrushin_finite(model.finite.Q))
            mu, nu = nested_supports(rng, n)
            expected = expected_filter_distance(model, mu, nu, int(rng.integers(1, 4)))
            for before, after in zip(expected, expected[1:]):
                assert after <= alpha * before + 1e-10

    def test_degenerate_marker_is_singleton(self):
        L = FiniteLikelihood.from_matrix(StochasticMatrix.identity(2))
        assert bayes_update(FiniteDistribution.point_mass(2, 0), 1, L) is DegenerateZero.ZERO


class TestAbsoluteContinuityProperties:
    """支撑嵌套的先验：μ ≪ ν 但 ν 不满支撑"""

    def test_density_reconstructs_prior(self):
        rng = np.random.default_rng(401)
        for _ in range(1000):
            mu, nu = nested_supports(rng, int(rng.integers(2, 7)))
            assert is_absolutely_continuous(mu, nu)
            np.testing.assert_allclose(radon_nikodym(mu, nu) * nu.probs, mu.probs, atol=1e-12)

    def test_reverse_direction_names_first_violation(self):
        rng = np.random.default_rng(402)
        for _ in range(1000):
            mu, nu = nested_supports(rng, int(rng.integers(2, 7)))
            extra = np.flatnonzero((mu.probs == 0.0) & (nu.probs > 0.0))
            if extra.size:
                assert first_continuity_violation(nu, mu) == int(extra[0])
                with pytest.raises(AbsoluteContinuityError) as exc_info:
                    radon_nikodym(nu, mu)
                assert exc_info.value.index == int(extra[0])
            else:
                assert first_continuity_violation(nu, mu) is None
