"""Tests for F evaluation, root refinement, spectra, and wavefunctions."""

import numpy as np
import pytest

from rabipoly.errors import MethodUnstable, NoRootInBracket, PoleAtInteger
from rabipoly.model import (
    EnergyValue,
    ModelParams,
    Parity,
    RabiCoeffs,
    SchweberCoeffs,
    rabi_monic_family,
)
from rabipoly.ops import poly_zeros
from rabipoly.solver import (
    F_cf,
    F_many,
    SolverOptions,
    detect_baseline_crossings,
    find_root,
    merge_spectra,
    pole_brackets,
    schweber_spectrum,
    solve_spectrum,
    wavefunction,
)

REF_ZETAS = [-0.217805, 0.0629563, 0.86095, 1.1636, 1.85076]


@pytest.fixture(scope="module")
def params():
    return ModelParams(0.7, 0.4)


@pytest.fixture(scope="module")
def merged(params):
    opts = SolverOptions(n_trunc=300)
    return merge_spectra([
        solve_spectrum(params, Parity.PLUS, 6, opts),
        solve_spectrum(params, Parity.MINUS, 6, opts),
    ])


class TestF:
    def test_boundary_value(self, params):
        # F(x) - a_0 -> 0 as the series empties; at the first root the
        # ratio phi_1/phi_0 equals -a_0(x) exactly by the boundary rule
        coeffs = RabiCoeffs(params, Parity.PLUS)
        x = -3.0
        val, _ = F_cf(coeffs, x)
        assert np.isfinite(val)

    def test_series_equals_convergent(self, params):
        from rabipoly.ops import convergent
        coeffs = RabiCoeffs(params, Parity.MINUS)
        rec0 = rabi_monic_family(params, Parity.MINUS, 0)
        rec1 = rabi_monic_family(params, Parity.MINUS, 1)
        for x in (-1.7, 0.33, 2.9, 6.1):
            got, _ = F_cf(coeffs, x)
            want = convergent(rec0, rec1, coeffs.a0(x), x, 1000)
            assert got == pytest.approx(want, abs=1e-8)

    def test_vectorized_matches_scalar(self, params):
        coeffs = RabiCoeffs(params, Parity.PLUS)
        xs = np.asarray([-2.0, -0.3, 1.9, 4.2])
        vals, _ = F_many(coeffs, xs)
        for x, v in zip(xs, vals):
            assert F_cf(coeffs, float(x))[0] == pytest.approx(v, rel=1e-12)

    def test_zeta_route_rejects_integer_pole(self, params):
        coeffs = SchweberCoeffs(params)
        with pytest.raises(PoleAtInteger):
            F_cf(coeffs, 1.0)

    def test_decreasing_between_poles(self, params):
        # the parity-route F falls monotonically across each pole gap
        coeffs = RabiCoeffs(params, Parity.PLUS)
        rec0 = rabi_monic_family(params, Parity.PLUS, 0)
        lo, hi = poly_zeros(rec0, 200, 1, 2)
        grid = np.linspace(lo + 1e-3, hi - 1e-3, 40)
        vals, _ = F_many(coeffs, grid)
        assert np.all(np.diff(vals) < 0)


class TestRootFinding:
    def test_pole_brackets_shape(self, params):
        rec0 = rabi_monic_family(params, Parity.PLUS, 0)
        brs = pole_brackets(rec0, 200, 4, -10.0)
        assert len(brs) == 5
        assert brs[0][0] == -10.0
        for lo, hi in brs:
            assert lo < hi

    def test_find_root_refines(self, params):
        coeffs = RabiCoeffs(params, Parity.PLUS)
        rec0 = rabi_monic_family(params, Parity.PLUS, 0)
        (lo0, hi0), (lo1, hi1) = pole_brackets(rec0, 300, 1, -10.0)
        root = find_root(lambda xs: F_many(coeffs, xs)[0], (lo1, hi1))
        assert lo1 < root < hi1
        assert abs(F_cf(coeffs, root)[0]) < 1e-6

    def test_find_root_raises_without_sign_change(self, params):
        coeffs = RabiCoeffs(params, Parity.PLUS)
        with pytest.raises(NoRootInBracket):
            # an interval inside one gap but past the root: no crossing
            find_root(lambda xs: F_many(coeffs, xs)[0], (1.0, 1.5))


class TestSpectrum:
    def test_reference_values(self, merged):
        zetas = merged.zetas()
        for want in REF_ZETAS:
            assert np.min(np.abs(zetas - want)) < 5e-4

    def test_ascending_and_indexed(self, merged):
        eps = merged.epsilons()
        assert np.all(np.diff(eps) >= 0)
        assert [lv.index for lv in merged.levels] == list(range(len(merged.levels)))

    def test_levels_stable(self, merged):
        assert all(lv.stable for lv in merged.levels)

    def test_first_root_ratio_identity(self, params):
        # at an eigenvalue the series boundary fixes phi_1/phi_0 = -a_0
        opts = SolverOptions(n_trunc=300)
        sp = solve_spectrum(params, Parity.PLUS, 1, opts)
        x = sp.levels[0].value.x(params)
        coeffs = RabiCoeffs(params, Parity.PLUS)
        wf = wavefunction(params, Parity.PLUS, sp.levels[0].value, 50)
        assert wf.phi[1] / wf.phi[0] == pytest.approx(-coeffs.a0(x), abs=1e-6)

    def test_pole_sequence_decreases_with_truncation(self, params):
        # the k-th pole approximation falls monotonically toward its limit
        rec0 = rabi_monic_family(params, Parity.PLUS, 0)
        # orders low enough that the decrement still exceeds the zero
        # finder's bisection width
        approx = [float(poly_zeros(rec0, n, 10, 10)[0]) for n in (11, 13, 16, 20)]
        assert all(a > b for a, b in zip(approx, approx[1:]))

    def test_deep_levels_collapse_onto_poles(self, params):
        # high levels sit within the certificate distance of a pole
        opts = SolverOptions(n_trunc=300)
        sp = solve_spectrum(params, Parity.PLUS, 40, opts)
        rec0 = rabi_monic_family(params, Parity.PLUS, 0)
        poles = poly_zeros(rec0, max(300, 4 * 40), 1, 45)
        x35 = sp.levels[35].value.x(params)
        assert np.min(np.abs(poles - x35)) < 1e-8


class TestSchweberRoute:
    def test_matches_parity_route(self, params, merged):
        opts = SolverOptions(n_trunc=300)
        sp = schweber_spectrum(params, -0.5, 2.2, 256, opts)
        zs = sp.zetas()
        for want in merged.zetas():
            if -0.5 < want < 2.2:
                assert np.min(np.abs(zs - want)) < 1e-6

    def test_rejects_bad_range(self, params):
        with pytest.raises(ValueError):
            schweber_spectrum(params, 2.0, 1.0)


class TestWavefunction:
    def test_dho_closed_form(self):
        # ground level of the delta = 0 model: phi_n = (-1)^n / n!
        p = ModelParams(1.0, 0.0)
        wf = wavefunction(p, Parity.PLUS, EnergyValue(-1.0), 12)
        import math
        for n in range(13):
            assert wf.phi[n] == pytest.approx((-1.0) ** n / math.factorial(n),
                                              rel=1e-10, abs=1e-12)

    def test_backward_tail_decay(self, params):
        # far tail must follow phi_{n+1}/phi_n ~ -kappa/n
        opts = SolverOptions(n_trunc=300)
        sp = solve_spectrum(params, Parity.MINUS, 1, opts)
        wf = wavefunction(params, Parity.MINUS, sp.levels[0].value, 400)
        for n in range(200, 400):
            r = (wf.phi_scaled[n + 1] / wf.phi_scaled[n]).value()
            assert abs(r * n / params.kappa + 1.0) < 0.05

    def test_forward_method_unstable(self, params):
        opts = SolverOptions(n_trunc=300)
        sp = solve_spectrum(params, Parity.PLUS, 1, opts)
        with pytest.raises(MethodUnstable):
            wavefunction(params, Parity.PLUS, sp.levels[0].value, 400,
                         method="forward")


class TestBaselineCrossings:
    def test_delta_zero_every_kappa_degenerate(self):
        # with delta = 0 both chains sit on the baseline identically, so
        # every grid point qualifies
        ks = np.linspace(0.4, 0.8, 5)
        hits = detect_baseline_crossings(ks, 0.0, 1)
        assert len(hits) >= 1

    def test_rejects_bad_level(self):
        with pytest.raises(ValueError):
            detect_baseline_crossings(np.asarray([0.4, 0.6]), 0.4, 0)
