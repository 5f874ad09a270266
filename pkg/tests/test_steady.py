import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhcool import (
    AttachedModeSpec,
    Bond,
    ChainSpec,
    DivergentRate,
    InvalidRegime,
    ModeParams,
    SingularSystem,
    attached_mode_estimate,
    build_hopping_matrix,
    build_rate_matrix,
    closed_form_two_mode,
    diagonalize,
    make_uniform_chain,
    plateau_limit,
    solve_steady_chain,
    solve_steady_rates,
    solve_with_attached,
    spectral_occupations,
)

LN2 = math.log(2.0)


def exact_rational_solve(rates, kappa, n_th):
    """Dense Gaussian elimination over exact rationals; the brute-force oracle."""
    n = len(kappa)
    g = [[Fraction(float(rates[i][j])) for j in range(n)] for i in range(n)]
    kap = [Fraction(float(k)) for k in kappa]
    nth = [Fraction(float(v)) for v in n_th]
    m = [[Fraction(0)] * n for _ in range(n)]
    b = [kap[i] * nth[i] for i in range(n)]
    for i in range(n):
        m[i][i] = sum(g[i][j] for j in range(n) if j != i) + kap[i]
        for j in range(n):
            if j != i:
                m[i][j] -= g[j][i]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n):
                m[r][c] -= f * m[col][c]
            b[r] -= f * b[col]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        x[r] = (b[r] - sum(m[r][c] * x[c] for c in range(r + 1, n))) / m[r][r]
    return np.array([float(v) for v in x])


class TestClosedFormTwoMode:
    def test_canonical_point(self):
        n1, n2 = closed_form_two_mode(1.0, LN2, 0.01, 0.01, 1.0)
        # exact value 25001/62501 for g12 = 500, g21 = 125
        assert n1 == pytest.approx(0.40000959984640244, rel=1e-12)
        assert n2 == pytest.approx(1.5999904001535976, rel=1e-12)
        assert n1 + n2 == pytest.approx(2.0, rel=1e-14)

    def test_hermitian_limit(self):
        n1, n2 = closed_form_two_mode(1.0, 0.0, 0.01, 0.01, 0.7)
        assert n1 == pytest.approx(0.7, rel=1e-14)
        assert n2 == pytest.approx(0.7, rel=1e-14)

    def test_strong_asymmetry_empties_first_mode(self):
        n1, _ = closed_form_two_mode(1.0, 20.0, 0.01, 0.01, 1.0)
        assert n1 < 1e-15

    def test_monotone_cooling_in_asymmetry(self):
        values = [
            closed_form_two_mode(1.0, a, 0.01, 0.01, 1.0)[0]
            for a in np.linspace(0.0, 2.0, 41)
        ]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))

    def test_asymmetric_kappas_against_rational_oracle(self):
        rates = build_rate_matrix(
            ChainSpec(
                modes=(ModeParams(0.02, 0.6), ModeParams(0.07, 0.6)),
                bonds=(Bond(1.0 * math.exp(0.4), 1.0 * math.exp(-0.4)),),
            )
        ).rates
        want = exact_rational_solve(rates, [0.02, 0.07], [0.6, 0.6])
        got = closed_form_two_mode(1.0, 0.4, 0.02, 0.07, 0.6)
        assert got == pytest.approx(tuple(want), rel=1e-13)

    def test_requires_positive_kappa(self):
        with pytest.raises(ValueError):
            closed_form_two_mode(1.0, 0.3, 0.0, 0.01, 1.0)


class TestSolveSteadyChain:
    def test_matches_closed_form_at_two_modes(self):
        ss = solve_steady_chain(make_uniform_chain(2, 1.0, LN2, 0.01, 1.0))
        n1, n2 = closed_form_two_mode(1.0, LN2, 0.01, 0.01, 1.0)
        assert ss.occupations == pytest.approx([n1, n2], rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 5, 13, 20])
    def test_hermitian_null(self, n):
        ss = solve_steady_chain(make_uniform_chain(n, 1.0, 0.0, 0.01, 0.8))
        assert ss.occupations == pytest.approx(np.full(n, 0.8), rel=1e-12)

    def test_small_kappa_geometric_profile(self):
        ss = solve_steady_chain(make_uniform_chain(3, 1.0, LN2, 1e-6, 1.0))
        assert ss.occupations == pytest.approx([1 / 7, 4 / 7, 16 / 7], rel=1e-6)

    def test_decoupled_chain_thermalizes(self):
        spec = ChainSpec(
            modes=(ModeParams(0.01, 1.0),) * 2, bonds=(Bond(0.0, 0.0),)
        )
        ss = solve_steady_chain(spec)
        assert ss.occupations == pytest.approx([1.0, 1.0], rel=1e-14)

    @pytest.mark.parametrize(
        "n,kappa,asym",
        [(2, 1e-6, LN2), (3, 1e-6, LN2), (5, 1e-6, LN2), (8, 1e-6, 0.4),
         (10, 0.01, LN2), (30, 0.01, LN2), (6, 0.5, 1.0)],
    )
    def test_componentwise_accuracy_against_rational_oracle(self, n, kappa, asym):
        # the subtraction-free elimination keeps every component accurate even
        # where the condition number reaches t^2/kappa^2 ~ 1e12
        spec = make_uniform_chain(n, 1.0, asym, kappa, 1.0)
        rates = build_rate_matrix(spec).rates
        want = exact_rational_solve(rates, spec.kappa_vector(), spec.n_th_vector())
        got = solve_steady_chain(spec).occupations
        assert got == pytest.approx(want, rel=1e-12)

    def test_occupations_never_negative(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            spec = make_uniform_chain(
                n, 1.0, float(rng.uniform(0, 1.5)), float(rng.uniform(1e-5, 0.5)), 1.0
            )
            assert np.all(solve_steady_chain(spec).occupations >= 0.0)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 30])
    @pytest.mark.parametrize("kappa", [0.01, 0.05])
    def test_residual_bound_canonical_regime(self, n, kappa):
        # the f64 evaluation floor eps * |row| * n keeps this bound out of
        # reach below kappa ~ 1e-3; there the componentwise value accuracy is
        # what matters (previous test)
        ss = solve_steady_chain(make_uniform_chain(n, 1.0, LN2, kappa, 1.0))
        assert ss.residual <= 1e-10 * kappa * 1.0

    def test_all_kappa_zero_uncoupled_raises(self):
        spec = ChainSpec(
            modes=(ModeParams(0.0, 1.0),) * 2, bonds=(Bond(0.0, 0.0),)
        )
        with pytest.raises(SingularSystem):
            solve_steady_chain(spec)

    def test_all_kappa_zero_coupled_raises_divergent(self):
        with pytest.raises(DivergentRate):
            solve_steady_chain(make_uniform_chain(3, 1.0, LN2, 0.0, 1.0))


class TestSolveSteadyRates:
    def test_conservation_for_random_nearest_neighbor_rates(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            n = int(rng.integers(2, 10))
            g = np.zeros((n, n))
            idx = np.arange(n - 1)
            g[idx, idx + 1] = rng.uniform(0.0, 10.0, n - 1)
            g[idx + 1, idx] = rng.uniform(0.0, 10.0, n - 1)
            ss = solve_steady_rates(g, np.full(n, 0.03), np.full(n, 0.8))
            assert ss.occupations.sum() == pytest.approx(n * 0.8, rel=1e-10)

    def test_weighted_conservation_for_nonuniform_baths(self):
        # kappa-weighted occupations balance kappa-weighted injections exactly
        rng = np.random.default_rng(3)
        n = 6
        g = np.zeros((n, n))
        idx = np.arange(n - 1)
        g[idx, idx + 1] = rng.uniform(0.0, 5.0, n - 1)
        g[idx + 1, idx] = rng.uniform(0.0, 5.0, n - 1)
        kappa = rng.uniform(0.001, 0.2, n)
        n_th = rng.uniform(0.0, 2.0, n)
        ss = solve_steady_rates(g, kappa, n_th)
        assert (kappa * ss.occupations).sum() == pytest.approx(
            (kappa * n_th).sum(), rel=1e-12
        )

    def test_matches_rational_oracle_on_random_rates(self):
        rng = np.random.default_rng(7)
        n = 7
        g = np.zeros((n, n))
        idx = np.arange(n - 1)
        g[idx, idx + 1] = rng.uniform(0.0, 8.0, n - 1)
        g[idx + 1, idx] = rng.uniform(0.0, 8.0, n - 1)
        kappa = rng.uniform(1e-6, 0.1, n)
        n_th = rng.uniform(0.0, 1.5, n)
        want = exact_rational_solve(g, kappa, n_th)
        got = solve_steady_rates(g, kappa, n_th).occupations
        assert got == pytest.approx(want, rel=1e-12)

    @given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_conservation_property(self, n, seed):
        rng = np.random.default_rng(seed)
        g = np.zeros((n, n))
        idx = np.arange(n - 1)
        g[idx, idx + 1] = rng.uniform(0.0, 10.0, n - 1)
        g[idx + 1, idx] = rng.uniform(0.0, 10.0, n - 1)
        ss = solve_steady_rates(g, np.full(n, 0.02), np.full(n, 1.0))
        assert ss.occupations.sum() == pytest.approx(float(n), rel=1e-10)

    def test_rejects_negative_rates(self):
        g = np.array([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            solve_steady_rates(g, np.array([0.1, 0.1]), np.array([1.0, 1.0]))

    def test_rejects_all_zero_kappa(self):
        g = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(SingularSystem):
            solve_steady_rates(g, np.zeros(2), np.ones(2))

    def test_isolated_bathless_mode_raises(self):
        g = np.zeros((3, 3))
        g[0, 1] = g[1, 0] = 1.0
        with pytest.raises(SingularSystem):
            solve_steady_rates(g, np.array([0.1, 0.1, 0.0]), np.ones(3))


class TestPlateau:
    def test_canonical_value(self):
        assert plateau_limit(1.0, LN2, 0.01, 1.0) == pytest.approx(
            1e-4 / 3.7501, rel=1e-12
        )

    def test_small_asymmetry_value(self):
        want = 1e-4 / (1e-4 + math.exp(0.2) - math.exp(-0.2))
        assert plateau_limit(1.0, 0.1, 0.01, 1.0) == pytest.approx(want, rel=1e-12)

    def test_large_kappa_approaches_bath(self):
        assert plateau_limit(1.0, LN2, 100.0, 1.0) == pytest.approx(
            1e4 / (1e4 + 3.75), rel=1e-12
        )

    def test_increasing_in_kappa(self):
        values = [plateau_limit(1.0, LN2, k, 1.0) for k in (1e-4, 1e-3, 1e-2, 1e-1)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_nonpositive_asymmetry(self):
        with pytest.raises(InvalidRegime):
            plateau_limit(1.0, 0.0, 0.01, 1.0)
        with pytest.raises(InvalidRegime):
            plateau_limit(1.0, -0.5, 0.01, 1.0)

    def test_chain_floor_sits_above_plateau_formula(self):
        # the closed form is a hard-wall approximation and bounds the exact
        # balance-equation floor from below; at exp(A) = 2 the exact limit is
        # (e^{2A}+1)/(e^{2A}-e^{-2A}) = 4/3 of the formula
        plateau = plateau_limit(1.0, LN2, 0.01, 1.0)
        n1 = solve_steady_chain(make_uniform_chain(30, 1.0, LN2, 0.01, 1.0)).occupations[0]
        assert n1 >= 0.95 * plateau
        assert n1 == pytest.approx(plateau * (4.0 + 1.0) / 3.75, rel=1e-3)

    def test_monotone_in_chain_length(self):
        values = [
            solve_steady_chain(make_uniform_chain(n, 1.0, LN2, 0.01, 1.0)).occupations[0]
            for n in range(2, 31)
        ]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))


class TestSpectralConsistency:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_small_kappa_limit_matches_spectral(self, n):
        bare = make_uniform_chain(n, 1.0, LN2, 0.0, 1.0)
        n_spectral = spectral_occupations(
            diagonalize(build_hopping_matrix(bare)), 1.0
        )[0]
        n_rate = solve_steady_chain(make_uniform_chain(n, 1.0, LN2, 1e-6, 1.0)).occupations[0]
        assert abs(n_spectral - n_rate) / n_rate <= 0.15

    def test_exact_agreement_at_two_modes(self):
        bare = make_uniform_chain(2, 1.0, LN2, 0.0, 1.0)
        n_spectral = spectral_occupations(
            diagonalize(build_hopping_matrix(bare)), 1.0
        )[0]
        n_rate = solve_steady_chain(make_uniform_chain(2, 1.0, LN2, 1e-6, 1.0)).occupations[0]
        assert abs(n_spectral - n_rate) / n_rate <= 1e-6


class TestAttachedMode:
    def test_decoupled_mode_thermalizes(self):
        spec = make_uniform_chain(5, 1.0, LN2, 0.01, 1.0)
        ss = solve_with_attached(spec, AttachedModeSpec(coupling=0.0, kappa=0.02))
        assert len(ss.occupations) == 6
        assert ss.occupations[0] == pytest.approx(1.0, rel=1e-12)

    def test_huge_kappa0_pins_to_own_bath(self):
        spec = make_uniform_chain(5, 1.0, LN2, 0.01, 1.0)
        ss = solve_with_attached(spec, AttachedModeSpec(coupling=1.0, kappa=1e6))
        assert ss.occupations[0] == pytest.approx(1.0, abs=1e-9)

    def test_canonical_point(self):
        spec = make_uniform_chain(15, 1.0, LN2, 0.01, 1.0)
        ss = solve_with_attached(spec, AttachedModeSpec(coupling=1.0, kappa=0.01))
        assert ss.occupations[0] == pytest.approx(1.1225576463537424e-4, rel=1e-6)

    def test_estimate_with_plateau_edge_value(self):
        # feeding the closed-form floor into the balance estimate reproduces
        # the back-of-envelope number (g0 n1 + kappa0) / (g0 + kappa0) ~ 7.7e-5
        att = AttachedModeSpec(coupling=1.0, kappa=0.01)
        n1 = plateau_limit(1.0, LN2, 0.01, 1.0)
        est = attached_mode_estimate(att, 0.01, n1, 1.0)
        want = (200.0 * n1 + 0.01) / 200.01
        assert est == pytest.approx(want, rel=1e-12)
        assert est == pytest.approx(7.7e-5, rel=0.01)

    def test_estimate_is_exact_balance_of_full_solve(self):
        # the estimate evaluated with the solved n_1 is the attached mode's
        # own balance row, so it reproduces the full solve exactly
        spec = make_uniform_chain(15, 1.0, LN2, 0.01, 1.0)
        att = AttachedModeSpec(coupling=0.7, kappa=0.003)
        ss = solve_with_attached(spec, att)
        est = attached_mode_estimate(att, 0.01, ss.occupations[1], 1.0)
        assert est == pytest.approx(ss.occupations[0], rel=1e-10)

    def test_cooling_whenever_chain_edge_is_cold(self):
        spec = make_uniform_chain(8, 1.0, LN2, 0.01, 1.0)
        for t0 in (0.05, 0.3, 1.0, 2.0):
            for k0 in (1e-4, 1e-2, 1e-1):
                ss = solve_with_attached(spec, AttachedModeSpec(coupling=t0, kappa=k0))
                assert ss.occupations[0] < 1.0

    def test_custom_bath_occupation(self):
        spec = make_uniform_chain(3, 1.0, LN2, 0.01, 1.0)
        ss = solve_with_attached(
            spec, AttachedModeSpec(coupling=0.0, kappa=0.02, n_th=0.25)
        )
        assert ss.occupations[0] == pytest.approx(0.25, rel=1e-12)

    def test_estimate_rejects_fully_decoupled(self):
        with pytest.raises(ValueError):
            attached_mode_estimate(AttachedModeSpec(0.0, 0.0), 0.0, 0.1, 1.0)
