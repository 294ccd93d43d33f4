import numpy as np
import pytest

from nswk import Ensemble, NswkError, VarianceProfile, make_filter
from nswk.synthesis import (
    TemporalModel,
    apply_filter,
    constant_profile,
    generate_noise,
    paper_variance_profile,
    realization_rng,
    synthesize,
)

from oracles import recursion_direct


class TestThirdsProfile:
    def test_k3(self):
        p = paper_variance_profile(3)
        assert p.values.tolist() == [1.0, 0.1, 0.1]
        assert p.mean_variance == pytest.approx(0.4, rel=1e-12)

    def test_k500(self):
        p = paper_variance_profile(500)
        assert np.count_nonzero(p.values == 1.0) == 166
        assert np.count_nonzero(p.values == 0.1) == 334
        assert p.mean_variance == pytest.approx(0.3988, rel=1e-12)

    def test_too_short(self):
        with pytest.raises(NswkError):
            paper_variance_profile(2)


class TestTemporalModel:
    def test_parse(self):
        assert TemporalModel.parse("iid").kind == "iid"
        m = TemporalModel.parse("ar1:0.9")
        assert (m.kind, m.rho) == ("ar1", 0.9)
        assert TemporalModel.parse(str(m)) == m

    @pytest.mark.parametrize("text", ["ar1:1.0", "ar1:-1.5", "ar2:0.1", "white"])
    def test_rejects(self, text):
        with pytest.raises(NswkError):
            TemporalModel.parse(text)


class TestGenerateNoise:
    def test_zero_profile(self):
        w = generate_noise(VarianceProfile(np.zeros(5)), 7, seed=3)
        assert w.data.shape == (7, 5)
        assert np.all(w.data == 0.0)

    def test_unit_variance(self):
        P = 100_000
        w = generate_noise(constant_profile(4, 1.0), P, seed=11)
        var = w.data.var(axis=0)
        assert np.all(np.abs(var - 1.0) <= 3 * np.sqrt(2 / P))

    def test_ar1_coupling(self):
        P = 100_000
        w = generate_noise(constant_profile(2, 1.0), P, TemporalModel("ar1", 0.9), seed=5)
        col = w.data[:, 0]
        r1 = np.corrcoef(col[:-1], col[1:])[0, 1]
        assert abs(r1 - 0.9) <= 3 / np.sqrt(P)
        assert abs(col.var() - 1.0) < 0.05

    def test_ar1_marginal_matches_profile(self):
        prof = paper_variance_profile(6)
        w = generate_noise(prof, 50_000, TemporalModel("ar1", 0.5), seed=2)
        np.testing.assert_allclose(w.data.var(axis=0), prof.values, rtol=0.05)

    def test_rows_depend_only_on_seed_and_index(self):
        prof = constant_profile(8)
        a = generate_noise(prof, 10, seed=99)
        b = generate_noise(prof, 600, seed=99)
        np.testing.assert_array_equal(a.data, b.data[:10])
        row = realization_rng(99, 4).standard_normal(8)
        np.testing.assert_array_equal(a.data[4], row)

    def test_threads_bit_identical(self):
        prof = paper_variance_profile(30)
        a = generate_noise(prof, 1000, seed=1, threads=1)
        b = generate_noise(prof, 1000, seed=1, threads=8)
        assert a.data.tobytes() == b.data.tobytes()

    def test_realizations_uncorrelated(self):
        K = 4096
        w = generate_noise(constant_profile(K), 6, seed=21)
        c = np.corrcoef(w.data)
        off = c[~np.eye(6, dtype=bool)]
        assert np.all(np.abs(off) <= 4 / np.sqrt(K))


class TestApplyFilter:
    def test_unit_impulse(self, ar2_filter):
        x = np.zeros((1, 5))
        x[0, 0] = 1.0
        y = apply_filter(Ensemble(x), ar2_filter)
        np.testing.assert_allclose(y.data[0, :3], [1.0, 0.8, 0.74], atol=1e-15)

    def test_identity(self, rng):
        x = Ensemble(rng.standard_normal((3, 20)))
        assert np.array_equal(apply_filter(x, make_filter()).data, x.data)

    def test_matches_fir_convolution(self, ar2_filter, rng):
        x = rng.standard_normal(32)
        y = apply_filter(Ensemble(x), ar2_filter).data[0]
        conv = np.convolve(x, ar2_filter.impulse_response)[:32]
        np.testing.assert_allclose(y, conv, atol=1e-9, rtol=0)

    def test_matches_scalar_recursion(self, rng):
        f = make_filter([0.5, -0.2], [1.0, 0.3])
        x = rng.standard_normal(25)
        y = apply_filter(Ensemble(x), f).data[0]
        np.testing.assert_allclose(y, recursion_direct(x, [0.5, -0.2], [1.0, 0.3]), atol=1e-12)

    def test_commutes_with_permutation(self, ar2_filter, rng):
        x = rng.standard_normal((6, 40))
        perm = rng.permutation(6)
        a = apply_filter(Ensemble(x), ar2_filter).data[perm]
        b = apply_filter(Ensemble(x[perm]), ar2_filter).data
        np.testing.assert_array_equal(a, b)


def test_marginal_variance_law(ar2_filter):
    prof = paper_variance_profile(60)
    P = 20_000
    x = synthesize(ar2_filter, prof, P, seed=8)
    h2 = ar2_filter.impulse_response ** 2
    s2 = prof.values
    expected = np.array([sum(h2[i] * s2[k - i] for i in range(min(k + 1, h2.size))) for k in range(60)])
    # var of a Gaussian sample variance is 2 sigma^4 / P
    stderr = expected * np.sqrt(2 / P)
    assert np.all(np.abs(x.data.var(axis=0) - expected) <= 3 * stderr)


def test_warmup_drops_prefix(ar2_filter):
    prof = paper_variance_profile(30)
    full = synthesize(ar2_filter, prof, 5, seed=1)
    cut = synthesize(ar2_filter, prof, 5, seed=1, warmup=10)
    np.testing.assert_array_equal(cut.data, full.data[:, 10:])
