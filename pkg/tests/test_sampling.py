import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nswk import (
    EmptySpectrum,
    Ensemble,
    NswkError,
    SamplingPlan,
    ZeroSignal,
    dft_grid,
    estimate_psd,
    fractional_bandwidth,
    make_plan,
    out_of_band_fraction,
    reconstruction_mse,
    sinc_reconstruct,
    subsample,
    theoretical_psd_ns1,
)
from nswk.model import Spectrum
from nswk.synthesis import paper_variance_profile, synthesize

from oracles import fractional_bandwidth_direct


class TestFractionalBandwidth:
    def test_delta(self):
        v = np.zeros(16)
        v[8] = 3.0
        assert fractional_bandwidth(Spectrum(dft_grid(16), v), 0.9) == 0.0

    def test_flat(self):
        om = dft_grid(100)
        B = fractional_bandwidth(Spectrum(om, np.ones(100)), 0.9)
        assert B == pytest.approx(fractional_bandwidth_direct(om.tolist(), [1.0] * 100, 0.9))
        # 90 bins needed: 0 plus +-1..44 gives 89, +-45 gives 91
        assert B == pytest.approx(2 * math.pi * 45 / 100)
        assert abs(B - 0.9 * math.pi) < 2 * math.pi / 100

    def test_ar2_theoretical(self, ar2_filter):
        om = dft_grid(500)
        s = theoretical_psd_ns1(ar2_filter, paper_variance_profile(500), om)
        B = fractional_bandwidth(s, 0.9)
        assert B == pytest.approx(fractional_bandwidth_direct(om.tolist(), s.values.tolist(), 0.9))
        assert out_of_band_fraction(s, B) <= 0.1
        # the next grid level inward would leave more than 10% outside
        assert out_of_band_fraction(s, B - 2 * math.pi / 500) > 0.1

    def test_empty(self):
        with pytest.raises(EmptySpectrum):
            fractional_bandwidth(Spectrum(dft_grid(4), np.zeros(4)), 0.9)

    @pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
    def test_bad_fraction(self, fraction):
        with pytest.raises(NswkError):
            fractional_bandwidth(Spectrum(dft_grid(4), np.ones(4)), fraction)

    def test_full_fraction(self):
        assert fractional_bandwidth(Spectrum(dft_grid(8), np.ones(8)), 1.0) == pytest.approx(math.pi)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0, 100), min_size=3, max_size=40).filter(lambda v: sum(v) > 0))
    def test_matches_cumulative_oracle(self, half):
        # symmetric spectrum from a half profile
        n = 2 * len(half)
        om = dft_grid(n)
        c = n // 2
        vals = np.zeros(n)
        vals[c] = half[0]
        for d in range(1, len(half)):
            vals[c + d] = vals[c - d] = half[d]
        vals[0] = half[-1]
        s = Spectrum(om, vals)
        for f in (0.5, 0.7, 0.9, 0.99):
            assert fractional_bandwidth(s, f) == pytest.approx(fractional_bandwidth_direct(om.tolist(), vals.tolist(), f))


class TestMakePlan:
    def test_examples(self):
        assert make_plan(0.4 * math.pi).decimation_M == 2
        assert make_plan(0.99 * math.pi).decimation_M == 1
        assert make_plan(0.0, K=64).decimation_M == 16

    def test_boundary_is_strict(self):
        assert make_plan(math.pi / 2).decimation_M == 1
        assert make_plan(math.pi / 3).decimation_M == 2
        assert make_plan(math.pi / 3 - 1e-9).decimation_M == 3

    def test_zero_needs_cap(self):
        with pytest.raises(NswkError):
            make_plan(0.0)

    def test_cap(self):
        assert make_plan(0.01, K=40).decimation_M == 10

    @given(st.floats(1e-6, math.pi - 1e-9))
    def test_nyquist_margin(self, B):
        M = make_plan(B).decimation_M
        assert math.pi / M > B
        assert not math.pi / (M + 1) > B

    def test_invalid_plan(self):
        with pytest.raises(NswkError):
            SamplingPlan(0.6 * math.pi, 2)
        with pytest.raises(NswkError):
            SamplingPlan(0.1, 0)

    def test_monotone_in_fraction(self, ar2_filter):
        x = synthesize(ar2_filter, paper_variance_profile(256), 300, seed=4)
        s = estimate_psd(x)
        Bs = [fractional_bandwidth(s, f) for f in (0.5, 0.7, 0.9, 0.99)]
        Ms = [make_plan(B, K=256).decimation_M for B in Bs]
        assert Bs == sorted(Bs)
        assert Ms == sorted(Ms, reverse=True)


class TestSubsample:
    def test_identity(self, rng):
        x = Ensemble(rng.standard_normal((2, 9)))
        assert np.array_equal(subsample(x, SamplingPlan(0.1, 1)).data, x.data)

    def test_indices(self):
        x = Ensemble(np.arange(10.0))
        s = subsample(x, SamplingPlan(0.1, 2))
        assert s.data[0].tolist() == [0, 2, 4, 6, 8]
        assert s.meta == {"M": 2, "K": 10}

    def test_lengths(self):
        assert subsample(Ensemble(np.zeros((3, 500))), SamplingPlan(0.4 * math.pi, 2)).K == 250
        assert subsample(Ensemble(np.zeros((1, 11))), SamplingPlan(0.1, 3)).K == 4


class TestSincReconstruct:
    def test_identity(self, rng):
        x = Ensemble(rng.standard_normal((3, 17)))
        plan = SamplingPlan(0.5, 1)
        assert np.array_equal(sinc_reconstruct(subsample(x, plan), plan).data, x.data)

    @pytest.mark.parametrize("M,K", [(2, 50), (3, 31), (5, 64)])
    def test_pass_through(self, rng, M, K):
        x = Ensemble(rng.standard_normal((4, K)))
        plan = SamplingPlan(0.1, M)
        xh = sinc_reconstruct(subsample(x, plan), plan, K)
        np.testing.assert_allclose(xh.data[:, ::M], x.data[:, ::M], atol=1e-12, rtol=0)

    @pytest.mark.parametrize("K,bound", [(512, 1e-2), (2048, 3e-3)])
    def test_bandlimited_cosine(self, K, bound):
        k = np.arange(K)
        x = Ensemble(np.cos(0.2 * math.pi * k) + 0.5 * np.sin(0.37 * math.pi * k + 0.3))
        plan = make_plan(0.45 * math.pi)
        assert plan.decimation_M == 2
        xh = sinc_reconstruct(subsample(x, plan), plan, K)
        interior = slice(K // 4, 3 * K // 4)
        assert np.max(np.abs(xh.data[0, interior] - x.data[0, interior])) <= bound

    def test_inconsistent(self):
        with pytest.raises(NswkError):
            sinc_reconstruct(Ensemble(np.zeros((1, 3))), SamplingPlan(0.1, 2), 10)

    def test_aliasing_doubles_out_of_band(self, ar2_filter):
        # raw decimation folds the discarded band back in: error ~ 2x its energy
        K, P = 1000, 400
        x = synthesize(ar2_filter, paper_variance_profile(K), P, seed=13)
        plan = SamplingPlan(0.2 * math.pi, 4)
        mse = reconstruction_mse(x, sinc_reconstruct(subsample(x, plan), plan, K)).pooled
        above = 100 * out_of_band_fraction(estimate_psd(x), math.pi / 4)
        assert mse == pytest.approx(2 * above, rel=0.1)


class TestMse:
    def test_identical(self, rng):
        x = Ensemble(rng.standard_normal((3, 5)))
        rep = reconstruction_mse(x, x)
        assert rep.pooled == 0.0
        assert np.all(rep.per_realization == 0.0)

    def test_zero_reconstruction(self, rng):
        x = Ensemble(rng.standard_normal((3, 5)))
        rep = reconstruction_mse(x, Ensemble(np.zeros((3, 5))))
        assert rep.pooled == pytest.approx(100.0)
        np.testing.assert_allclose(rep.per_realization, 100.0)

    def test_zero_signal(self):
        with pytest.raises(ZeroSignal):
            reconstruction_mse(Ensemble(np.zeros((2, 3))), Ensemble(np.ones((2, 3))))

    def test_permutation_symmetric(self, rng):
        x = rng.standard_normal((5, 8))
        y = x + 0.1 * rng.standard_normal((5, 8))
        perm = rng.permutation(5)
        a = reconstruction_mse(Ensemble(x), Ensemble(y)).pooled
        b = reconstruction_mse(Ensemble(x[perm]), Ensemble(y[perm])).pooled
        assert a == pytest.approx(b, rel=1e-14)
