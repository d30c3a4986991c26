import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sfdenoise import NoiseSpec, corrupt, estimate_sigma, sigma_for_psnr
from sfdenoise.noise import Distribution, sample_noise

# Mean sigma-hat of the highpass/median estimator on 512x512 pure noise at
# sigma=20. Computed once by an independent implementation (numpy's own
# normal/laplace samplers, hand-written 3x3 mask, 40 seeds). The mask colors
# the noise by sqrt(72/81), hence the gap from 20.
PURE_NOISE_ORACLE = {"gaussian": 18.8575, "laplacian": 20.7227}


def test_noise_spec_validation():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            NoiseSpec("gaussian", bad)
    with pytest.raises(ValueError):
        NoiseSpec("poisson", 1.0)
    assert NoiseSpec("laplacian", 2.0).distribution is Distribution.LAPLACIAN


@pytest.mark.parametrize("dist", ["gaussian", "laplacian"])
def test_corrupt_is_deterministic(rng, dist):
    img = rng.uniform(0, 255, (32, 40))
    spec = NoiseSpec(dist, 15.0, seed=7)
    a, b = corrupt(img, spec), corrupt(img, spec)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, corrupt(img, NoiseSpec(dist, 15.0, seed=8)))


def test_corrupt_is_unclamped():
    y = corrupt(np.zeros((64, 64)), NoiseSpec("gaussian", 20.0))
    assert y.min() < 0


def test_gaussian_moments():
    w = corrupt(np.zeros((512, 512)), NoiseSpec("gaussian", 20.0, seed=3))
    assert -0.3 <= w.mean() <= 0.3
    assert 19.8 <= w.std() <= 20.2
    assert abs(stats.kurtosis(w.ravel())) < 0.1


def test_laplacian_moments():
    w = corrupt(np.zeros((512, 512)), NoiseSpec("laplacian", 20.0, seed=3))
    assert -0.3 <= w.mean() <= 0.3
    assert 19.8 <= w.std() <= 20.2
    assert 2.7 <= stats.kurtosis(w.ravel()) <= 3.3


@pytest.mark.parametrize("dist, law", [("gaussian", stats.norm(scale=5.0)),
                                       ("laplacian", stats.laplace(scale=5.0 / np.sqrt(2)))])
def test_samples_follow_the_stated_law(dist, law):
    w = sample_noise(NoiseSpec(dist, 5.0, seed=11), (200, 200)).ravel()
    assert stats.kstest(w, law.cdf).pvalue > 1e-3


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**63 - 1), st.floats(0.1, 100))
def test_laplacian_samples_finite_and_symmetric(seed, sigma):
    w = sample_noise(NoiseSpec("laplacian", sigma, seed), (64, 64))
    assert np.all(np.isfinite(w))
    assert abs(np.median(w)) < sigma


def test_sigma_for_psnr_examples():
    assert sigma_for_psnr(22.11) == pytest.approx(20.0, abs=0.01)
    assert sigma_for_psnr(28.13) == pytest.approx(10.001, abs=0.001)
    assert sigma_for_psnr(0.0) == 255.0
    with pytest.raises(ValueError):
        sigma_for_psnr(float("inf"))


def test_estimate_requires_3x3():
    with pytest.raises(ValueError):
        estimate_sigma(np.zeros((2, 10)))
    assert estimate_sigma(np.zeros((3, 3))) == 0.0


def test_estimate_invariant_to_constant_offset(rng):
    img = rng.uniform(0, 255, (40, 33))
    assert estimate_sigma(img + 1000.0) == pytest.approx(estimate_sigma(img), rel=1e-9)


def test_estimate_uses_divisor(rng):
    img = rng.normal(size=(30, 30))
    ratio = estimate_sigma(img, "laplacian") / estimate_sigma(img, "gaussian")
    assert ratio == pytest.approx(0.6745 / 0.4901, rel=1e-12)


def test_even_median_averages_middle_pair(rng):
    from scipy import ndimage

    from sfdenoise.noise import HIGHPASS

    img = rng.uniform(0, 255, (4, 4))
    s = np.sort(np.abs(ndimage.convolve(img, HIGHPASS, mode="mirror")).ravel())
    assert estimate_sigma(img) == pytest.approx(0.5 * (s[7] + s[8]) / 0.6745, rel=1e-12)


@pytest.mark.parametrize("dist", ["gaussian", "laplacian"])
def test_pure_noise_matches_oracle(dist):
    est = [estimate_sigma(corrupt(np.full((512, 512), 128.0), NoiseSpec(dist, 20.0, seed)), dist)
           for seed in range(20)]
    assert np.mean(est) == pytest.approx(PURE_NOISE_ORACLE[dist], rel=0.03)


def test_estimate_scales_linearly_on_pure_noise():
    base = NoiseSpec("gaussian", 10.0, seed=5)
    w = sample_noise(base, (256, 256))
    assert estimate_sigma(3.0 * w) == pytest.approx(3.0 * estimate_sigma(w), rel=1e-12)
    # independent draws: agreement only up to sampling error
    lo = np.mean([estimate_sigma(sample_noise(NoiseSpec("gaussian", 10.0, s), (256, 256))) for s in range(5)])
    hi = np.mean([estimate_sigma(sample_noise(NoiseSpec("gaussian", 30.0, s + 50), (256, 256))) for s in range(5)])
    assert hi / lo == pytest.approx(3.0, rel=0.02)


@pytest.mark.parametrize("dist, sigma, expected", [
    ("gaussian", 5.0, 6.18), ("gaussian", 50.0, 47.71),
    ("laplacian", 5.0, 7.72), ("laplacian", 50.0, 52.91),
])
def test_lenna_estimates(lenna, dist, sigma, expected):
    # sigma=20 rows live in the acceptance suite
    est = np.mean([estimate_sigma(corrupt(lenna, NoiseSpec(dist, sigma, seed)), dist) for seed in range(20)])
    assert est == pytest.approx(expected, rel=0.03)
