import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim import Family, KernelSpec, ParameterError, cov, cov_matrix, fgn_autocov

ALL_SPECS = [
    KernelSpec(Family.FBM, H=0.3),
    KernelSpec(Family.FBM, H=0.7, sigma2=2.5),
    KernelSpec(Family.SFBM, H=0.6),
    KernelSpec(Family.BFBM, H=0.8, K=0.5),
    KernelSpec(Family.BFBM, H=0.25, K=1.0),
    KernelSpec(Family.TFBM, H=0.8, K=0.8),
    KernelSpec(Family.TFBM, H=0.4, K=0.3, sigma2=0.7),
]

h_strategy = st.floats(min_value=0.05, max_value=0.95)
time_strategy = st.floats(min_value=0.0, max_value=10.0)


class TestSpecValidation:
    def test_h_domain(self):
        with pytest.raises(ParameterError):
            KernelSpec(Family.FBM, H=0.0)
        with pytest.raises(ParameterError):
            KernelSpec(Family.FBM, H=1.0)

    def test_sigma2_domain(self):
        with pytest.raises(ParameterError):
            KernelSpec(Family.FBM, H=0.5, sigma2=0.0)

    def test_bfbm_k_closed_at_one(self):
        KernelSpec(Family.BFBM, H=0.5, K=1.0)
        with pytest.raises(ParameterError):
            KernelSpec(Family.BFBM, H=0.5, K=1.1)

    def test_tfbm_k_open_at_one(self):
        with pytest.raises(ParameterError):
            KernelSpec(Family.TFBM, H=0.5, K=1.0)

    def test_index(self):
        assert KernelSpec(Family.FBM, H=0.3).self_similarity_index() == 0.3
        assert KernelSpec(Family.SFBM, H=0.3).self_similarity_index() == 0.3
        assert KernelSpec(Family.BFBM, H=0.8, K=0.5).self_similarity_index() == 0.4
        assert KernelSpec(Family.TFBM, H=0.8, K=0.5).self_similarity_index() == pytest.approx(0.4)


class TestCovValues:
    def test_fbm_unit_time(self):
        for H in (0.2, 0.5, 0.8):
            assert cov(KernelSpec(Family.FBM, H=H), 1.0, 1.0) == pytest.approx(1.0)

    def test_sfbm_brownian_case_is_min(self):
        spec = KernelSpec(Family.SFBM, H=0.5)
        for s, t in [(0.25, 0.75), (0.1, 0.1), (2.0, 0.5)]:
            assert cov(spec, s, t) == pytest.approx(min(s, t))

    def test_sfbm_variance_at_one(self):
        for H in (0.2, 0.6, 0.8):
            spec = KernelSpec(Family.SFBM, H=H)
            assert cov(spec, 1.0, 1.0) == pytest.approx(2.0 - 2.0 ** (2 * H - 1))

    def test_bfbm_k_one_matches_fbm(self):
        for H in (0.2, 0.5, 0.8):
            bf = KernelSpec(Family.BFBM, H=H, K=1.0)
            fb = KernelSpec(Family.FBM, H=H)
            for s in (0.0, 0.3, 1.0, 2.7):
                for t in (0.1, 1.0, 5.0):
                    assert cov(bf, s, t) == pytest.approx(cov(fb, s, t), abs=1e-14)

    def test_tfbm_variance_at_one(self):
        for K in (0.3, 0.8):
            spec = KernelSpec(Family.TFBM, H=0.6, K=K)
            assert cov(spec, 1.0, 1.0) == pytest.approx(2.0 - 2.0 ** K)

    def test_zero_time_gives_zero(self):
        for spec in ALL_SPECS:
            assert cov(spec, 0.0, 0.7) == 0.0
            assert cov(spec, 0.0, 0.0) == 0.0

    def test_negative_time_rejected(self):
        with pytest.raises(ParameterError):
            cov(ALL_SPECS[0], -1.0, 1.0)


class TestCovProperties:
    @settings(max_examples=60, deadline=None)
    @given(s=time_strategy, t=time_strategy)
    def test_symmetry_bit_identical(self, s, t):
        for spec in ALL_SPECS[:4]:
            assert cov(spec, s, t) == cov(spec, t, s)

    def test_sigma2_scaling_exact(self):
        for spec in ALL_SPECS:
            scaled = KernelSpec(spec.family, H=spec.H, K=spec.K, sigma2=4.0 * spec.sigma2)
            for s, t in [(0.2, 0.9), (1.0, 1.0), (0.0, 3.0)]:
                assert cov(scaled, s, t) == 4.0 * cov(spec, s, t)

    def test_kernel_self_similarity(self):
        for spec in ALL_SPECS:
            expo = 2.0 * spec.self_similarity_index()
            for lam in (0.5, 2.0, 10.0):
                for s, t in [(0.3, 0.8), (1.0, 2.0), (0.25, 0.25)]:
                    expected = lam ** expo * cov(spec, s, t)
                    assert cov(spec, lam * s, lam * t) == pytest.approx(
                        expected, rel=1e-12
                    )


class TestFgnAutocov:
    def test_brownian_increments_uncorrelated(self):
        assert fgn_autocov(0.5, 1.0, 1, 8) == pytest.approx(0.0, abs=1e-15)

    def test_unit_variance_at_lag_zero(self):
        for H in (0.2, 0.7):
            assert fgn_autocov(H, 1.0, 0, 1) == pytest.approx(1.0)

    def test_matches_cov_second_difference(self):
        # brute-force oracle: Cov(V(k+1)-V(k), V(1)-V(0)) from the kernel
        for H in (0.3, 0.7):
            spec = KernelSpec(Family.FBM, H=H)
            for n in (1, 8):
                for k in (0, 1, 2, 5):
                    t = lambda j: j / n
                    oracle = (
                        cov(spec, t(k + 1), t(1))
                        - cov(spec, t(k), t(1))
                        - cov(spec, t(k + 1), t(0))
                        + cov(spec, t(k), t(0))
                    )
                    assert fgn_autocov(H, 1.0, k, n) == pytest.approx(
                        oracle, rel=1e-10, abs=1e-15
                    )

    def test_vectorised_lags(self):
        lags = np.arange(6)
        vals = fgn_autocov(0.7, 2.0, lags, 16)
        assert vals.shape == (6,)
        assert vals[0] == pytest.approx(fgn_autocov(0.7, 2.0, 0, 16))


class TestCovMatrix:
    def test_fbm_n2_hand_values(self):
        for H in (0.2, 0.5, 0.8):
            m = cov_matrix(KernelSpec(Family.FBM, H=H), 2)
            assert m[0, 0] == pytest.approx(0.5 ** (2 * H))
            assert m[1, 1] == pytest.approx(1.0)
            assert m[0, 1] == pytest.approx(0.5)

    def test_sfbm_brownian_is_min_grid(self):
        m = cov_matrix(KernelSpec(Family.SFBM, H=0.5), 4)
        i, j = np.meshgrid(np.arange(1, 5), np.arange(1, 5), indexing="ij")
        assert np.allclose(m, np.minimum(i, j) / 4.0)

    def test_exact_transpose(self):
        for spec in ALL_SPECS:
            m = cov_matrix(spec, 17)
            assert np.array_equal(m, m.T)

    def test_positive_semidefinite_up_to_roundoff(self):
        for spec in ALL_SPECS:
            m = cov_matrix(spec, 64)
            eigs = np.linalg.eigvalsh(m)
            assert eigs.min() >= -1e-8 * eigs.max()
            assert np.all(np.diag(m) > 0.0)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ParameterError):
            cov_matrix(ALL_SPECS[0], 1)
