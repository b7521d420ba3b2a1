import math

import numpy as np
import pytest

from critmet.errors import DivergenceError, DomainError, PhaseError, ResonanceError
from critmet.gs_qfim import (
    asymptotic_pair, asymptotic_prefactor, chi_derivatives, delta_chi, gs_qfim, gs_qfim_dd,
    gs_qfim_dm, leading_order_qfim, prefactor_T12, richardson_limit,
)
from critmet.metrology import fit_scaling, numerical_rank, scalar_bound, sloppiness
from critmet.models import G, OMEGA_A, OMEGA_C, XI, ModelParams, critical_coupling, mode_spectrum

BASE = ModelParams(omega_c=1.0, omega_a=0.7)
GC = critical_coupling(BASE)


def _sym(upper):
    M = np.array(upper, dtype=float)
    return np.triu(M) + np.triu(M, 1).T


# 50-digit reference values from tests/mp_oracle.py (pure-state trace formula on
# covariances built directly from the quadratic Hamiltonian)
MP_DM_LOW = _sym([[0.03672485124487858, -0.3198146780145348, 0.03891154908289768],
                  [0, 2.884123855356163, -0.3671572757952826],
                  [0, 0, 0.04931415153736979]])
MP_DM_NEAR = _sym([[2.6626070360292395, -13.599839589405125, 3.510988474642356],
                   [0, 71.18308274421112, -18.857683377845586],
                   [0, 0, 5.126961384619159]])
MP_DD = _sym([[0.9618404573972303, -5.053584226661223, 1.0099001880346392, -1.526953210231109],
              [0, 27.989966558210444, -5.826201002493792, 7.349349609437434],
              [0, 0, 1.2710833968476531, -1.5179826507985905],
              [0, 0, 0, 3.8473618295889214]])


class TestReferenceValues:
    def test_dm_moderate_coupling(self):
        Q = gs_qfim_dm(BASE.replace(g=0.2))
        np.testing.assert_allclose(Q.entries, MP_DM_LOW, rtol=1e-9, atol=1e-12)

    def test_dm_near_critical(self):
        Q = gs_qfim_dm(BASE.replace(g=0.9 * GC))
        np.testing.assert_allclose(Q.entries, MP_DM_NEAR, rtol=1e-9)

    def test_dimer(self):
        Q = gs_qfim_dd(BASE.replace(g=0.3, xi=0.1))
        np.testing.assert_allclose(Q.entries, MP_DD, rtol=1e-9, atol=1e-12)

    def test_decoupled_coupling_information(self):
        assert gs_qfim_dm(BASE, (G,)).entries[0, 0] == pytest.approx(4 / 1.7**2, rel=1e-12)


class TestChiDerivatives:
    def test_zero_coupling_has_no_cross_term(self):
        for mu in (OMEGA_C, G, OMEGA_A):
            d = chi_derivatives(BASE, "dm", 1, mu)
            assert d.chi_ab == 0.0 and d.c_plus == 0.0 and d.c_minus == 0.0

    @pytest.mark.parametrize("mu, field", [(OMEGA_C, "omega_c"), (G, "g"), (OMEGA_A, "omega_a")])
    def test_squeezing_responses_match_central_differences(self, mu, field):
        p = BASE.replace(g=0.2)
        h = 1e-6
        lo = mode_spectrum(p.replace(**{field: getattr(p, field) - h}))
        hi = mode_spectrum(p.replace(**{field: getattr(p, field) + h}))
        d = chi_derivatives(p, "dm", 1, mu)
        assert d.dr_A == pytest.approx((hi.r_A - lo.r_A) / (2 * h), rel=1e-6, abs=1e-9)
        assert d.dr_B == pytest.approx((hi.r_B - lo.r_B) / (2 * h), rel=1e-6, abs=1e-9)

    def test_hopping_response_antisymmetric_between_modes(self):
        p = BASE.replace(g=0.2)
        d1 = chi_derivatives(p, "dd", 1, XI)
        d2 = chi_derivatives(p, "dd", 2, XI)
        for name in ("delta_mu", "chi_ab", "chi_plus", "chi_minus", "dr_A", "dr_B"):
            assert getattr(d1, name) == pytest.approx(-getattr(d2, name), rel=1e-12)

    def test_hopping_not_a_single_cavity_parameter(self):
        with pytest.raises(DomainError):
            chi_derivatives(BASE, "dm", 1, XI)


class TestStructure:
    @pytest.mark.parametrize("x", [0.1, 0.5, 0.9, 0.999])
    def test_triple_is_sloppy(self, x):
        assert sloppiness(gs_qfim_dm(BASE.replace(g=x * GC))).is_sloppy

    def test_uncoupled_dimer_is_two_copies(self):
        p = BASE.replace(g=0.3)
        np.testing.assert_allclose(gs_qfim_dd(p, (1, 2, 3)).entries, 2 * gs_qfim_dm(p).entries, rtol=1e-13)

    def test_hopping_lifts_sloppiness(self):
        p = BASE.replace(xi=0.4)
        p = p.replace(g=0.9 * critical_coupling(p, "dd"))
        assert math.isfinite(scalar_bound(gs_qfim_dd(p, (1, 2, 3))).value)

    @pytest.mark.parametrize("g, xi", [(0.2, 0.1), (0.15, 0.4), (0.35, 0.02)])
    def test_dimer_quadruple_is_sloppy(self, g, xi):
        assert sloppiness(gs_qfim_dd(BASE.replace(g=g, xi=xi))).is_sloppy

    def test_dispatch_and_subset_order(self):
        p = BASE.replace(g=0.2)
        Q = gs_qfim(p, "dm", (3, 1))
        assert Q.subset == (3, 1)
        assert Q.entry(3, 1) == pytest.approx(MP_DM_LOW[0, 2], rel=1e-9)

    @pytest.mark.parametrize("subset", [(), (1, 1), (4,), (5,)])
    def test_invalid_subsets(self, subset):
        with pytest.raises(DomainError):
            gs_qfim_dm(BASE, subset)

    def test_outside_normal_phase(self):
        with pytest.raises(PhaseError):
            gs_qfim_dm(BASE.replace(g=GC))


class TestLeadingOrder:
    def test_single_cavity_rank_one(self):
        assert numerical_rank(leading_order_qfim(BASE.replace(g=0.9 * GC)).entries) == 1

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_dimer_pairs_with_hopping_rank_two(self, i):
        p = BASE.replace(g=GC - 1e-3, xi=1e-3)
        assert numerical_rank(leading_order_qfim(p, "dd", (i, 4)).entries) == 2

    def test_dominates_near_criticality(self):
        p = BASE.replace(g=0.99999 * GC)
        ratio = leading_order_qfim(p, "dm", (G,)).entries[0, 0] / gs_qfim_dm(p, (G,)).entries[0, 0]
        assert ratio == pytest.approx(1.0, abs=1e-2)


class TestAsymptotics:
    def test_leading_matrix(self):
        # rows and columns in (omega_c, g) order
        pair = asymptotic_pair(BASE)
        s = math.sqrt(0.7) / 32
        np.testing.assert_allclose(pair.A_matrix, [[0.7 / 128, -s], [-s, 1 / 8]], rtol=1e-6)
        assert numerical_rank(pair.A_matrix, 1e-6) == 1

    def test_correction_prefactor(self):
        assert asymptotic_prefactor(1.0, 0.7) == pytest.approx(0.49 * 1.49 / (8 * 0.7**1.75), rel=1e-14)

    def test_correction_matrix_matches_qfim_remainder(self):
        # on the kernel of A, eps^(1/2) Q tends to v^T B v
        pair = asymptotic_pair(BASE)
        v = np.array([4.0, math.sqrt(0.7)])  # A v = 0
        vals = []
        for eps in 1e-5 * GC * 0.5 ** np.arange(6):
            Q = gs_qfim_dm(BASE.replace(g=GC - eps), (1, 2)).entries
            vals.append(v @ Q @ v * math.sqrt(eps))
        assert vals[-1] == pytest.approx(v @ pair.B_matrix @ v, rel=2e-2)

    def test_prefactor_value(self):
        assert prefactor_T12(BASE) == pytest.approx(19.431226, abs=5e-6)

    def test_prefactor_matches_fit(self):
        eps = 1e-5 * GC * 0.5 ** np.arange(8)
        cs = [scalar_bound(gs_qfim_dm(BASE.replace(g=GC - e), (1, 2)), check=False).value for e in eps]
        fit = fit_scaling(list(zip(eps, cs)))
        assert fit.exponent == pytest.approx(0.5, abs=0.01)
        assert cs[-1] / math.sqrt(eps[-1]) == pytest.approx(prefactor_T12(BASE), rel=1e-2)

    def test_resonance_is_rejected(self):
        with pytest.raises(ResonanceError):
            prefactor_T12(ModelParams(1.0, 1.0))

    def test_sign_change_of_coupling_response_across_resonance(self):
        below = delta_chi(ModelParams(1.0, 0.95), (G,))[0]
        above = delta_chi(ModelParams(1.0, 1.05), (G,))[0]
        assert below * above < 0

    def test_cusp_continuous_with_kink(self):
        vals = {d: (prefactor_T12(ModelParams(1.0, 1 - d)), prefactor_T12(ModelParams(1.0, 1 + d)))
                for d in (1e-3, 1e-5)}
        lo, hi = vals[1e-5]
        assert lo == pytest.approx(hi, rel=1e-4)
        left = (vals[1e-5][0] - vals[1e-3][0]) / (1e-3 - 1e-5)
        right = (vals[1e-3][1] - vals[1e-5][1]) / (1e-3 - 1e-5)
        assert abs(left - right) > 10 * abs(left)

    def test_divergence_when_denominator_vanishes(self):
        with pytest.raises(DivergenceError):
            prefactor_T12(ModelParams(1.0, math.sqrt(3.0)))
        assert prefactor_T12(ModelParams(1.0, math.sqrt(3.0) - 1e-3)) > 1e4


class TestRichardson:
    def test_removes_known_powers(self):
        h = 0.1 * 0.5 ** np.arange(5)
        vals = [2.0 + 3 * x + 5 * x**1.5 - x**2 for x in h]
        lim, err = richardson_limit(vals, h, [1.0, 1.5, 2.0], rtol=1e-3)
        assert lim == pytest.approx(2.0, rel=1e-12)

    def test_requires_geometric_steps(self):
        with pytest.raises(DomainError):
            richardson_limit([1, 2, 3], [1.0, 0.5, 0.1], [1.0])
