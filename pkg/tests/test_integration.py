"""Quadrature vs Monte Carlo vs direct summation for smeared payoffs."""

import math

import numpy as np
import pytest

from qtremble import (
    GridResolutionError,
    QuadratureGrid,
    StrategyDistribution,
    TrembleSpec,
    bessel_i,
    builtin_game,
    default_grid,
    discrete_mixture_payoff,
    expected_payoff,
    smeared_payoff,
    smeared_payoff_direct,
    smeared_payoff_mc,
    strategy,
    su2,
)

PD = builtin_game("PD")
EG = builtin_game("EG")
SH = builtin_game("SH")


def pure(name, dims=2):
    return StrategyDistribution.from_pure(strategy(name, dims))


def trembled(name, kappa, dims=2):
    return StrategyDistribution.from_tremble(TrembleSpec(strategy(name, dims), kappa))


def bessel_ratio(kappa):
    return bessel_i(1, kappa) / bessel_i(0, kappa)


class TestQuadratureGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            QuadratureGrid(4, 2)
        with pytest.raises(ValueError):
            QuadratureGrid(16, 4)

    def test_nodes_and_weights(self):
        grid = QuadratureGrid(16, 2)
        assert grid.weight == pytest.approx((2 * math.pi / 16) ** 2)
        angles = grid.node_angles()
        assert angles.shape == (256, 3)
        assert (angles[:, 2] == 0).all()
        assert angles[:, 0].min() == pytest.approx(-math.pi)
        # theta = 0 and alpha = pi both land exactly on nodes
        assert 0.0 in angles[:, 0]
        assert math.pi in angles[:, 1]

    def test_default_grid_scales_with_concentration(self):
        assert default_grid(2, 0.0).nodes_per_dim == 64
        assert default_grid(3, 0.0).nodes_per_dim == 48
        assert default_grid(2, 200.0).nodes_per_dim >= 104


class TestStrategyDistribution:
    def test_mixture_weight_validation(self):
        with pytest.raises(ValueError):
            StrategyDistribution.from_mixture([(0.6, pure("C")), (0.6, pure("D"))])
        with pytest.raises(ValueError):
            StrategyDistribution.from_mixture([(-0.2, pure("C")), (1.2, pure("D"))])
        with pytest.raises(ValueError):
            StrategyDistribution.from_mixture([])

    def test_no_nested_mixtures(self):
        mix = StrategyDistribution.from_mixture([(1.0, pure("C"))])
        with pytest.raises(ValueError):
            StrategyDistribution.from_mixture([(1.0, mix)])

    def test_kind_payload_consistency(self):
        with pytest.raises(ValueError):
            StrategyDistribution(kind="pure")
        with pytest.raises(ValueError):
            StrategyDistribution(kind="nonsense")


class TestSmearedPayoff:
    def test_pure_pure_reduces_to_expected_payoff(self):
        for game in (PD, EG, SH):
            for a in ("C", "D", "Q"):
                for b in ("C", "D", "Q"):
                    got = smeared_payoff(game, pure(a), pure(b))
                    want = expected_payoff(game, su2(strategy(a)), su2(strategy(b)))
                    assert got == pytest.approx(want, abs=1e-12)

    def test_delta_limit_recovers_pure_payoff(self):
        # Trembling Alice around Q against pure Q: payoff_A has the closed form
        # (1+R)(2+R)/2 with R = I1/I0, approaching 3 like 5/(4*kappa); payoff_B
        # converges quadratically and is already inside 1e-3 at kappa = 200.
        pay_200 = smeared_payoff(PD, trembled("Q", 200.0), pure("Q"))
        r = bessel_ratio(200.0)
        assert pay_200[0] == pytest.approx((1 + r) * (2 + r) / 2, abs=1e-9)
        assert pay_200[0] == pytest.approx(3.0, abs=1e-2)
        assert pay_200[1] == pytest.approx(3.0, abs=1e-3)
        pay_600 = smeared_payoff(PD, trembled("Q", 600.0), pure("Q"))
        assert abs(pay_600[0] - 3.0) < abs(pay_200[0] - 3.0)

    def test_concentration_moves_payoff_toward_equilibrium(self):
        loose = smeared_payoff(PD, trembled("Q", 1.0), trembled("Q", 1.0))
        tight = smeared_payoff(PD, trembled("Q", 25.0), trembled("Q", 25.0))
        assert abs(tight[0] - 3.0) < abs(loose[0] - 3.0)

    def test_uniform_theta_tremble_against_defection(self):
        # E[cos^2(theta/2)] = 1/2 under the uniform circle distribution, so
        # Bob's payoff is the even classical mixture (0 + 2)/2 = 1.
        uniform = StrategyDistribution.from_tremble(TrembleSpec(strategy("D", 1), 0.0))
        pay = smeared_payoff(EG, uniform, pure("D", 1))
        assert pay[1] == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("kappa", [0.5, 5.0, 25.0])
    @pytest.mark.parametrize("dims", [1, 2])
    def test_grid_doubling_converges(self, kappa, dims):
        dist = StrategyDistribution.from_tremble(TrembleSpec(strategy("D", dims), kappa))
        opp = pure("C", dims)
        coarse = smeared_payoff(SH, dist, opp, grid=64)
        fine = smeared_payoff(SH, dist, opp, grid=128)
        assert coarse[0] == pytest.approx(fine[0], abs=1e-8)
        assert coarse[1] == pytest.approx(fine[1], abs=1e-8)

    def test_grid_doubling_converges_three_dims(self):
        dist = StrategyDistribution.from_tremble(TrembleSpec(strategy("Q", 3), 25.0))
        coarse = smeared_payoff(PD, dist, pure("Q", 3), grid=48)
        fine = smeared_payoff(PD, dist, pure("Q", 3), grid=96)
        assert coarse[0] == pytest.approx(fine[0], abs=1e-8)
        assert coarse[1] == pytest.approx(fine[1], abs=1e-8)

    def test_self_check_flags_coarse_grid(self):
        hot = trembled("Q", 25.0)
        with pytest.raises(GridResolutionError):
            smeared_payoff(PD, hot, pure("Q"), grid=8, self_check=True)
        # adequate resolution passes the same check
        smeared_payoff(PD, hot, pure("Q"), grid=64, self_check=True)


class TestDirectSummation:
    @pytest.mark.parametrize("dims,nodes", [(1, 16), (2, 16), (3, 8)])
    def test_factorized_equals_direct(self, dims, nodes):
        games = {1: PD, 2: EG, 3: SH}
        game = games[dims]
        center_a = strategy("Q", dims) if dims >= 2 else strategy("D", 1)
        dist_a = StrategyDistribution.from_tremble(TrembleSpec(center_a, 1.0))
        dist_b = StrategyDistribution.from_tremble(TrembleSpec(strategy("C", dims), 2.0))
        fast = smeared_payoff(game, dist_a, dist_b, grid=nodes)
        slow = smeared_payoff_direct(game, dist_a, dist_b, grid=nodes)
        assert fast[0] == pytest.approx(slow[0], abs=1e-10)
        assert fast[1] == pytest.approx(slow[1], abs=1e-10)

    def test_direct_handles_pure_sides(self):
        fast = smeared_payoff(PD, pure("Q"), trembled("C", 1.0), grid=16)
        slow = smeared_payoff_direct(PD, pure("Q"), trembled("C", 1.0), grid=16)
        assert fast == pytest.approx(slow, abs=1e-12)


class TestMonteCarlo:
    def test_pure_vs_pure_is_exact_with_zero_variance(self):
        pay_a, pay_b, se_a, se_b = smeared_payoff_mc(PD, pure("Q"), pure("Q"), 1000, seed=0)
        assert (pay_a, pay_b) == pytest.approx((3.0, 3.0), abs=1e-12)
        # every draw is the same number; only mean-subtraction roundoff remains
        assert se_a <= 1e-15 and se_b <= 1e-15

    def test_agrees_with_quadrature_within_three_stderr(self):
        dist = StrategyDistribution.from_tremble(TrembleSpec(strategy("Q", 3), 1.0))
        quad = smeared_payoff(PD, dist, pure("Q", 3))
        pay_a, pay_b, se_a, se_b = smeared_payoff_mc(PD, dist, pure("Q", 3), 100_000, seed=7)
        assert abs(pay_a - quad[0]) <= 3 * se_a
        assert abs(pay_b - quad[1]) <= 3 * se_b

    def test_stderr_shrinks_like_root_n(self):
        dist = trembled("Q", 1.0)
        _, _, se_small, _ = smeared_payoff_mc(PD, dist, pure("Q"), 20_000, seed=3)
        _, _, se_big, _ = smeared_payoff_mc(PD, dist, pure("Q"), 40_000, seed=3)
        ratio = se_big / se_small
        assert 0.8 / math.sqrt(2) <= ratio <= 1.2 / math.sqrt(2)

    def test_mixture_sampling(self):
        mix = StrategyDistribution.from_mixture([(0.75, pure("C")), (0.25, pure("D"))])
        quad = discrete_mixture_payoff(EG, mix, pure("C"))
        pay_a, pay_b, se_a, se_b = smeared_payoff_mc(EG, mix, pure("C"), 50_000, seed=11)
        assert abs(pay_a - quad[0]) <= 4 * max(se_a, 1e-12)
        assert abs(pay_b - quad[1]) <= 4 * max(se_b, 1e-12)

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            smeared_payoff_mc(PD, pure("C"), pure("C"), 10)

    def test_reproducibility(self):
        dist = trembled("C", 2.0)
        first = smeared_payoff_mc(SH, dist, pure("C"), 5_000, seed=9)
        second = smeared_payoff_mc(SH, dist, pure("C"), 5_000, seed=9)
        assert first == second


class TestDiscreteMixture:
    def test_single_component_reduces_to_smeared(self):
        mix = StrategyDistribution.from_mixture([(1.0, trembled("Q", 2.0))])
        assert discrete_mixture_payoff(PD, mix, pure("Q")) == pytest.approx(
            smeared_payoff(PD, trembled("Q", 2.0), pure("Q")), abs=1e-12
        )

    def test_classical_tremble_payoffs(self):
        # (1-eps, eps) over C, D against pure C and pure D for the example game
        eps = 0.1
        mix = StrategyDistribution.from_mixture(
            [(1 - eps, pure("C", 1)), (eps, pure("D", 1))]
        )
        vs_c = discrete_mixture_payoff(EG, mix, pure("C", 1))
        assert vs_c[1] == pytest.approx(1.0 + eps, abs=1e-12)
        vs_d = discrete_mixture_payoff(EG, mix, pure("D", 1))
        assert vs_d[1] == pytest.approx(2.0 * eps, abs=1e-12)

    def test_affine_in_the_weights(self):
        comp = [pure("C"), trembled("D", 1.5)]
        lam = 0.35
        w1, w2 = (0.3, 0.7), (0.8, 0.2)
        blend = tuple(lam * a + (1 - lam) * b for a, b in zip(w1, w2))

        def payoff(weights):
            mix = StrategyDistribution.from_mixture(list(zip(weights, comp)))
            return np.array(discrete_mixture_payoff(SH, mix, trembled("C", 2.0)))

        direct = payoff(blend)
        interpolated = lam * payoff(w1) + (1 - lam) * payoff(w2)
        assert np.abs(direct - interpolated).max() <= 1e-10

    def test_smeared_payoff_delegates_mixtures(self):
        mix = StrategyDistribution.from_mixture([(0.5, pure("C")), (0.5, pure("D"))])
        assert smeared_payoff(EG, mix, pure("C")) == pytest.approx(
            discrete_mixture_payoff(EG, mix, pure("C")), abs=1e-14
        )
