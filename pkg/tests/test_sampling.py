import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import adxlab as ax
from adxlab import BandSet, InputError

LN2 = math.log(2.0)


def flat_dsi_closed_form(f_s, rate, W=0.5):
    if f_s < 2 * W:
        return (1.0 - f_s / (2 * W)) + (f_s / (2 * W)) * 2.0 ** (-2.0 * rate / f_s)
    return 2.0 ** (-rate / W)


def brute_aliasing_free(int_intervals, int_rate):
    """Independent oracle in exact integer lattice units: enumerate every
    shifted copy of the set and intersect half-open integer intervals."""
    lo = min(a for a, _ in int_intervals)
    hi = max(b for _, b in int_intervals)
    k_max = (hi - lo) // int_rate + 2
    for k in range(1, k_max + 1):
        for a, b in int_intervals:
            for c, d in int_intervals:
                if max(a + k * int_rate, c) < min(b + k * int_rate, d):
                    return False
    return True


class TestAliasedSpectrum:
    def test_flat_allpass_two_aliases(self, flat):
        assert ax.aliased_spectrum(flat, ax.allpass(), 0.5, 0.1) == pytest.approx(1.0)

    def test_lpf_above_nyquist_is_identity(self, flat):
        for f in (0.0, 0.2, 0.45):
            assert ax.aliased_spectrum(flat, ax.lpf(0.75), 1.5, f) == \
                pytest.approx(flat.at(f))

    def test_zero_db_noise_halves_the_spectrum(self, flat):
        got = ax.aliased_spectrum(flat, ax.allpass(), 1.0, 0.2, noise_psd=flat)
        assert got == pytest.approx(0.5)

    def test_out_of_baseband_rejected(self, flat):
        with pytest.raises(InputError):
            ax.aliased_spectrum(flat, ax.allpass(), 0.5, 0.3)

    def test_noise_never_increases_information(self, bimodal):
        f = np.linspace(-0.17, 0.17, 41)
        from adxlab.sampling import _stilde
        clean, _ = _stilde(bimodal, ax.allpass(), 0.35, None)
        noisy, _ = _stilde(bimodal, ax.allpass(), 0.35, ax.flat_psd(0.5))
        assert np.all(noisy(f) <= clean(f) + 1e-15)


class TestMmseSi:
    def test_flat_lpf_half(self, flat):
        assert ax.mmse_si(flat, ax.lpf(0.25), 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_allpass_above_nyquist_zero(self, flat, tri, bimodal):
        for psd in (flat, tri, bimodal):
            # zero exactly from the Nyquist rate onward for bandlimited kinds
            assert ax.mmse_si(psd, ax.allpass(), psd.f_nyq) <= 1e-9
            assert ax.mmse_si(psd, ax.allpass(), 2.5 * psd.f_nyq) <= 1e-12

    def test_flat_allpass_folding(self, flat):
        assert ax.mmse_si(flat, ax.allpass(), 0.5) == pytest.approx(0.5, abs=1e-12)


class TestDsi:
    @pytest.mark.parametrize("f_s", [0.25, 0.5, 0.75, 1.0, 1.5])
    @pytest.mark.parametrize("rate", [0.5, 1.0, 2.0])
    def test_flat_closed_form(self, flat, f_s, rate):
        point = ax.d_si(flat, ax.lpf(f_s / 2), f_s, rate)
        assert point.total == pytest.approx(flat_dsi_closed_form(f_s, rate),
                                            rel=1e-6)

    def test_equals_drf_above_nyquist(self, tri):
        ref = ax.shannon_drf(tri, 1.5).distortion
        point = ax.d_si(tri, ax.lpf(0.6), 1.2, 1.5)
        assert point.total == pytest.approx(ref, rel=1e-8)
        assert point.mmse_part <= 1e-12

    def test_zero_rate_gives_total_variance(self, flat):
        point = ax.d_si(flat, ax.lpf(0.25), 0.5, 0.0)
        assert point.total == pytest.approx(1.0, abs=1e-12)

    def test_decomposition_recomputed_independently(self, bimodal):
        from adxlab.sampling import _baseband_step, _stilde
        from adxlab.waterfill import waterfill_spectrum
        f_s, rate = 0.3, 1.3
        point = ax.d_si(bimodal, ax.allpass(), f_s, rate)
        mmse = ax.mmse_si(bimodal, ax.allpass(), f_s)
        fn, breaks = _stilde(bimodal, ax.allpass(), f_s, None)
        _, _, lossy = waterfill_spectrum(
            fn, BandSet.interval(-f_s / 2, f_s / 2), breaks,
            _baseband_step(bimodal, f_s), rate)
        assert point.total == pytest.approx(mmse + lossy, abs=1e-12)

    def test_noise_increases_distortion(self, flat):
        clean = ax.d_si(flat, ax.allpass(), 0.8, 1.0)
        noisy = ax.d_si(flat, ax.allpass(), 0.8, 1.0, noise_psd=ax.flat_psd(0.5))
        assert noisy.total > clean.total

    def test_allpass_not_monotone_on_bimodal(self, bimodal):
        # an aliasing-prone fixed filter can get worse as f_s grows
        rates = np.linspace(0.2, 0.8, 13)
        totals = [ax.d_si(bimodal, ax.allpass(), fs, 1.0).total for fs in rates]
        assert any(a < b - 1e-9 for a, b in zip(totals, totals[1:]))


class TestAliasingFree:
    def test_lpf_always_free(self):
        assert ax.is_aliasing_free(BandSet.interval(-0.25, 0.25), 0.5)

    def test_overwide_set_folds(self):
        assert not ax.is_aliasing_free(BandSet.interval(-0.3, 0.3), 0.5)

    def test_spec_band_pair_at_half(self):
        bs = BandSet(((0.3, 0.4), (-0.4, -0.3)))
        assert ax.is_aliasing_free(bs, 0.5)

    def test_mirror_pair_folds_at_twice_center(self):
        bs = BandSet(((0.3, 0.4), (-0.4, -0.3)))
        assert not ax.is_aliasing_free(bs, 0.35)   # 0.7 = 2 * 0.35

    @given(st.lists(st.tuples(st.integers(-40, 38), st.integers(1, 12)),
                    min_size=1, max_size=3),
           st.integers(4, 48))
    @settings(max_examples=60, deadline=None)
    def test_matches_integer_lattice_oracle(self, cells, rate_cells):
        # everything lives on a 1/16 lattice so the oracle is exact
        int_intervals = []
        for a, w in sorted(cells):
            # merge overlaps the same way BandSet does, in integer arithmetic
            if int_intervals and a <= int_intervals[-1][1]:
                int_intervals[-1][1] = max(int_intervals[-1][1], a + w)
            else:
                int_intervals.append([a, a + w])
        got = ax.is_aliasing_free(
            BandSet(tuple((a / 16, b / 16) for a, b in int_intervals)),
            rate_cells / 16)
        assert got == brute_aliasing_free(int_intervals, rate_cells)


class TestOptimalSupport:
    def test_flat_tie_break_symmetric(self, flat):
        got = ax.optimal_support(flat, 0.6)
        assert np.allclose(got.intervals, ((-0.3, 0.3),), atol=1e-9)

    def test_ou_analytic_inversion(self, ou):
        got = ax.optimal_support(ou, 2.0 / np.pi)
        assert np.allclose(got.intervals[0], (-1 / np.pi, 1 / np.pi), atol=1e-6)

    def test_full_support_when_rate_exceeds_occupancy(self, bimodal):
        got = ax.optimal_support(bimodal, 0.5)
        assert got.difference(bimodal.support).measure < 1e-12
        assert bimodal.support.difference(got).measure < 1e-12

    def test_energy_maximal_among_random_sets(self, tri):
        rng = np.random.default_rng(5)
        f_s = 0.4
        best = ax.integrate_band(tri, ax.optimal_support(tri, f_s))
        for _ in range(20):
            lo = rng.uniform(-0.5, 0.5 - f_s / 2)
            cand = BandSet(((lo, lo + f_s / 2), (-lo - f_s / 2, -lo))) \
                if lo + f_s / 2 <= -lo else BandSet.interval(lo, lo + f_s)
            cand = cand.clip(-0.5, 0.5)
            if abs(cand.measure - f_s) > 1e-9:
                continue
            assert ax.integrate_band(tri, cand) <= best + 1e-9


class TestLowerBound:
    def test_flat_attained_by_lpf(self, flat):
        bound = ax.adx_lower_bound(flat, 0.5, 1.0)
        attained = ax.d_si(flat, ax.lpf(0.25), 0.5, 1.0)
        assert bound.total == pytest.approx(0.53125, rel=1e-8)
        assert attained.total == pytest.approx(bound.total, rel=1e-8)

    def test_equals_drf_above_nyquist(self, bimodal):
        ref = ax.shannon_drf(bimodal, 1.0).distortion
        bound = ax.adx_lower_bound(bimodal, 1.0, 1.0)
        assert bound.total == pytest.approx(ref, rel=1e-9)

    def test_high_rate_limit_is_pure_mmse(self, ou):
        bound = ax.adx_lower_bound(ou, 2.0, 60.0)
        assert bound.total == pytest.approx(ax.mmse_lower_bound(ou, 2.0), abs=1e-9)

    @pytest.mark.parametrize("rate", [1.0, 2.0])
    def test_monotone_in_fs(self, tri, rate):
        fs_grid = np.linspace(0.1, 1.1, 9)
        totals = [ax.adx_lower_bound(tri, fs, rate).total for fs in fs_grid]
        assert all(a >= b - 1e-9 for a, b in zip(totals, totals[1:]))

    def test_monotone_in_rate(self, tri):
        totals = [ax.adx_lower_bound(tri, 0.6, r).total for r in (0.5, 1.0, 2.0)]
        assert totals[0] > totals[1] > totals[2]

    def test_sandwich(self, tri):
        rate = 1.0
        drf = ax.shannon_drf(tri, rate).distortion
        for fs in (0.3, 0.6, 0.9):
            total = ax.adx_lower_bound(tri, fs, rate).total
            assert total >= max(ax.mmse_lower_bound(tri, fs), drf) - 1e-9

    @given(st.lists(st.floats(0.05, 2.0), min_size=2, max_size=4),
           st.floats(0.15, 1.2), st.floats(0.1, 2.0),
           st.one_of(st.none(), st.tuples(st.floats(0.0, 0.6), st.floats(0.05, 0.5))))
    @settings(max_examples=20, deadline=None)
    def test_dominates_any_si_filter(self, dens, f_s, rate, band):
        pts = [(0.25 * i, d) for i, d in enumerate(dens)] + [(0.25 * len(dens), 0.0)]
        psd = ax.piecewise_psd(pts, grid_step=1e-3)
        if band is None:
            filt = ax.lpf(f_s / 2)
        else:
            lo, width = band
            filt = ax.FilterSpec(support=BandSet(((lo, lo + width),
                                                  (-lo - width, -lo))))
        point = ax.d_si(psd, filt, f_s, rate)
        bound = ax.adx_lower_bound(psd, f_s, rate)
        assert point.total >= bound.total - 1e-7


class TestCriticalRate:
    def test_flat_is_nyquist_for_positive_rate(self, flat):
        for rate in (0.25, 1.0, 4.0):
            assert ax.critical_rate(flat, rate) == pytest.approx(1.0, abs=1e-9)

    def test_zero_rate(self, flat, ou):
        assert ax.critical_rate(flat, 0.0) == 0.0
        assert ax.critical_rate(ou, 0.0) == 0.0

    @pytest.mark.parametrize("rate", [0.5, 2.0])
    def test_ou_matches_closed_form(self, ou, rate):
        got = ax.critical_rate(ou, rate)
        expected = ax.ou_critical_rate_closed_form(1.0, rate)
        assert got == pytest.approx(expected, rel=1e-3)

    def test_bound_meets_drf_at_critical_rate(self, ou):
        rate = 1.0
        f_r = ax.critical_rate(ou, rate)
        drf = ax.shannon_drf(ou, rate).distortion
        at = ax.adx_lower_bound(ou, f_r * 1.001, rate).total
        assert at == pytest.approx(drf, rel=1e-6)


class TestOuClosedForm:
    def test_zero_rate(self):
        assert ax.ou_critical_rate_closed_form(1.0, 0.0) == 0.0

    def test_frozen_values(self):
        # frozen from an independent quadrature water-filling run
        frozen = {0.25: 0.706281, 0.5: 0.979737, 1.0: 1.425806,
                  2.0: 2.207554, 4.0: 3.663041, 8.0: 6.482861}
        for rate, expected in frozen.items():
            assert ax.ou_critical_rate_closed_form(1.0, rate) == \
                pytest.approx(expected, abs=2e-6)

    def test_bits_per_sample_asymptotics(self):
        # f_R = R ln2 + f0 * arctan-term, so f_R/(R ln2) -> 1 like f0/(R ln2)
        for f0 in (0.5, 1.0):
            r10 = ax.ou_critical_rate_closed_form(f0, 10.0) / (10.0 * LN2)
            r100 = ax.ou_critical_rate_closed_form(f0, 100.0) / (100.0 * LN2)
            r1000 = ax.ou_critical_rate_closed_form(f0, 1000.0) / (1000.0 * LN2)
            assert r10 > r100 > r1000 > 1.0
            assert abs(r1000 - 1.0) < 1.5e-3 * (f0 / LN2) * 1.1

    def test_scaling_in_f0(self):
        # the relation is scale-invariant: f_R(c f0, R as measured in c-units)
        a = ax.ou_critical_rate_closed_form(2.0, 3.0)
        b = ax.ou_critical_rate_closed_form(1.0, 1.5)
        assert a == pytest.approx(2.0 * b, rel=1e-12)


class TestBranches:
    def test_unimodal_single_branch(self, tri):
        cfg = ax.allocate_branches(tri, 0.5, 3)
        assert cfg.rate_divisor == 1
        assert len(cfg.branches) == 1
        sup = cfg.branches[0].support
        assert sup.measure == pytest.approx(0.5, abs=1e-9)
        assert sup.is_symmetric()
        point = ax.verify_achievability(tri, cfg, 1.0)
        bound = ax.adx_lower_bound(tri, 0.5, 1.0)
        assert point.total == pytest.approx(bound.total, abs=1e-9)

    def test_bimodal_lobes_aliasing_fixture(self, bimodal):
        # lobes are 2 * f_s apart at f_s = 0.35, so one branch cannot work
        cfg = ax.allocate_branches(bimodal, 0.35, 5)
        assert cfg.rate_divisor == 2
        assert len(cfg.branches) == 2
        for br in cfg.branches:
            assert ax.is_aliasing_free(br.support, cfg.per_branch_rate)
        union = cfg.union_support
        target = ax.optimal_support(bimodal, 0.35)
        assert union.difference(target).measure < 1e-9
        assert target.difference(union).measure < 1e-9

    def test_bimodal_single_branch_ok_at_fifth(self, bimodal):
        # at f_s = 0.2 the mirrored lobes fold onto disjoint baseband halves
        cfg = ax.allocate_branches(bimodal, 0.2, 5)
        assert cfg.rate_divisor == 1

    def test_l_max_insufficient(self, bimodal):
        with pytest.raises(ax.AllocationError) as err:
            ax.allocate_branches(bimodal, 0.35, 1)
        assert err.value.residual_measure > 0.05

    def test_zero_rate_rejected(self, bimodal):
        with pytest.raises(InputError):
            ax.allocate_branches(bimodal, 0.0, 2)

    def test_achievability_matches_bound(self, bimodal):
        cfg = ax.allocate_branches(bimodal, 0.35, 5)
        point = ax.verify_achievability(bimodal, cfg, 1.0)
        bound = ax.adx_lower_bound(bimodal, 0.35, 1.0)
        assert point.total == pytest.approx(bound.total, abs=1e-9)

    def test_partial_config_is_strictly_worse(self, bimodal):
        one_lobe = ax.SamplerConfig(
            branches=(ax.FilterSpec(support=BandSet.interval(0.3, 0.4)),),
            f_s=0.35, rate_divisor=2)
        point = ax.verify_achievability(bimodal, one_lobe, 1.0)
        bound = ax.adx_lower_bound(bimodal, 0.35, 1.0)
        assert point.total > bound.total + 0.4

    def test_non_aliasing_free_config_rejected(self, bimodal):
        bad = ax.SamplerConfig(
            branches=(ax.FilterSpec(support=bimodal.support),),
            f_s=0.35, rate_divisor=1)
        with pytest.raises(InputError):
            ax.verify_achievability(bimodal, bad, 1.0)

    def test_best_single_branch_keeps_half_energy(self, bimodal):
        best = ax.best_single_branch_support(bimodal, 0.35)
        assert ax.is_aliasing_free(best, 0.35)
        assert ax.integrate_band(bimodal, best) == pytest.approx(0.5, rel=1e-6)
