import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from pgmseg.colormodel import (
    EPS_COV,
    GaussianModel,
    GmmModel,
    fit_gaussian,
    fit_gaussian_stack,
    fit_gmm,
    kl_gaussian,
    kl_gaussian_batch,
    kl_gaussian_to_gmm,
    kl_gaussians_to_gmm,
    stack_gaussians,
    sym_kl_gaussian,
    sym_kl_gaussian_batch,
    unstack_gaussians,
)
from pgmseg.colormodel.gmm import _m_step


def _gaussian(mu, scale=1.0):
    return GaussianModel(np.asarray(mu, dtype=np.float64), scale * np.eye(3))


def _single_component(gaussian: GaussianModel) -> GmmModel:
    return GmmModel(np.ones(1), gaussian.mu[None], gaussian.sigma[None])


def _random_spd(rng, dim=3):
    a = rng.normal(size=(dim, dim))
    return a @ a.T + 0.1 * np.eye(dim)


@pytest.fixture(name="two_clusters", scope="module")
def fixture_two_clusters():
    rng = np.random.default_rng(42)
    return np.concatenate(
        [
            rng.normal(loc=(0, 0, 0), size=(500, 3)),
            rng.normal(loc=(50, 0, 0), size=(500, 3)),
        ]
    )


def test_fit_gaussian_identical_pixels():
    pixels = np.tile([50.0, 10.0, -20.0], (10, 1))
    gaussian = fit_gaussian(pixels)
    assert_allclose(gaussian.mu, [50, 10, -20])
    assert_allclose(gaussian.sigma, EPS_COV * np.eye(3), atol=1e-15)


def test_fit_gaussian_two_pixels():
    gaussian = fit_gaussian(np.array([[0.0, 0, 0], [2, 0, 0]]))
    assert_allclose(gaussian.mu, [1, 0, 0])
    assert gaussian.sigma[0, 0] == pytest.approx(1 + 1e-4, abs=1e-12)
    assert gaussian.sigma[1, 1] == pytest.approx(1e-4, abs=1e-12)
    assert gaussian.sigma[0, 1] == 0
    assert gaussian.sigma[1, 2] == 0


def test_fit_gaussian_large_sample():
    rng = np.random.default_rng(0)
    mean = np.array([10.0, -5.0, 3.0])
    variance = np.array([4.0, 1.0, 9.0])
    n = 20000
    pixels = rng.normal(loc=mean, scale=np.sqrt(variance), size=(n, 3))
    gaussian = fit_gaussian(pixels)
    assert np.all(np.abs(gaussian.mu - mean) < 4 * np.sqrt(variance / n))
    assert_allclose(np.diag(gaussian.sigma), variance, rtol=0.05)
    assert np.all(np.linalg.eigvalsh(gaussian.sigma) > 0)


def test_fit_gaussian_empty():
    with pytest.raises(ValueError, match="empty"):
        fit_gaussian(np.empty((0, 3)))


def test_fit_gaussian_stack():
    rng = np.random.default_rng(1)
    pixels = rng.normal(size=(60, 3)) * 10
    labels = rng.integers(0, 4, size=60)
    labels[:4] = np.arange(4)
    mu, sigma = fit_gaussian_stack(pixels, labels, 4)
    assert mu.shape == (4, 3)
    assert sigma.shape == (4, 3, 3)
    for index in range(4):
        gaussian = fit_gaussian(pixels[labels == index])
        assert_allclose(mu[index], gaussian.mu, rtol=1e-12, atol=1e-12)
        assert_allclose(sigma[index], gaussian.sigma, rtol=1e-10, atol=1e-12)


def test_fit_gaussian_stack_empty_label():
    with pytest.raises(ValueError, match="empty label"):
        fit_gaussian_stack(np.zeros((3, 3)), np.array([0, 0, 2]), 3)


def test_stack_gaussians():
    gaussians = [_gaussian((1, 2, 3)), _gaussian((4, 5, 6), 2.0)]
    mu, sigma = stack_gaussians(gaussians)
    assert mu.shape == (2, 3)
    restored = unstack_gaussians(mu, sigma)
    assert_allclose(restored[1].sigma, 2 * np.eye(3))
    with pytest.raises(ValueError):
        stack_gaussians([])


def test_gaussian_model_invalid():
    with pytest.raises(ValueError, match="shapes"):
        GaussianModel(np.zeros(3), np.eye(2))


def test_gmm_model_invalid():
    with pytest.raises(ValueError, match="positive"):
        GmmModel(np.array([1.0, 0.0]), np.zeros((2, 3)), np.tile(np.eye(3), (2, 1, 1)))
    with pytest.raises(ValueError, match="sum to 1"):
        GmmModel(np.array([0.5, 0.6]), np.zeros((2, 3)), np.tile(np.eye(3), (2, 1, 1)))
    with pytest.raises(ValueError, match="differ"):
        GmmModel(np.array([0.5, 0.5]), np.zeros((3, 3)), np.tile(np.eye(3), (2, 1, 1)))


def test_fit_gmm_single_component():
    rng = np.random.default_rng(3)
    samples = rng.normal(size=(100, 3))
    gmm = fit_gmm(samples, 1, seed=0)
    gaussian = fit_gaussian(samples)
    assert gmm.k == 1
    assert_allclose(gmm.weights, [1.0])
    assert_allclose(gmm.means[0], gaussian.mu)
    assert_allclose(gmm.covariances[0], gaussian.sigma)


def test_fit_gmm_two_clusters(two_clusters):
    gmm = fit_gmm(two_clusters, 2, seed=0)
    order = np.argsort(gmm.means[:, 0])
    assert_allclose(gmm.means[order, 0], [0, 50], atol=1.0)
    assert_allclose(gmm.weights[order], [0.5, 0.5], atol=0.1)
    assert sum(gmm.weights) == pytest.approx(1, abs=1e-12)


def test_fit_gmm_log_likelihood_monotone():
    rng = np.random.default_rng(7)
    samples = np.concatenate(
        [rng.normal(loc=loc, scale=scale, size=(80, 3)) for loc, scale in ((0, 1), (5, 2), (9, 1))]
    )
    gmm = fit_gmm(samples, 3, seed=11)
    history = np.asarray(gmm.log_likelihood_history)
    assert len(history) >= 2
    assert np.all(np.diff(history) >= -1e-9)
    assert history[-1] == pytest.approx(np.mean(gmm.score_samples(samples)), rel=1e-9)


def test_fit_gmm_deterministic(two_clusters):
    gmm_1 = fit_gmm(two_clusters, 3, seed=5)
    gmm_2 = fit_gmm(two_clusters, 3, seed=5)
    assert_allclose(gmm_1.means, gmm_2.means)
    assert_allclose(gmm_1.weights, gmm_2.weights)


def test_fit_gmm_covariance_floor():
    samples = np.tile([1.0, 2.0, 3.0], (30, 1))
    samples[:15, 0] = 5
    gmm = fit_gmm(samples, 2, seed=0)
    for covariance in gmm.covariances:
        assert np.all(np.linalg.eigvalsh(covariance) >= EPS_COV * (1 - 1e-9))


def test_gmm_score_samples_matches_scipy():
    rng = np.random.default_rng(8)
    weights = np.array([0.2, 0.5, 0.3])
    means = rng.normal(size=(3, 3)) * 5
    covariances = np.stack([_random_spd(rng) for _ in range(3)])
    gmm = GmmModel(weights, means, covariances)
    samples = rng.normal(size=(50, 3)) * 4
    expected = logsumexp(
        [
            np.log(w) + multivariate_normal(mean, cov).logpdf(samples)
            for w, mean, cov in zip(weights, means, covariances)
        ],
        axis=0,
    )
    assert_allclose(gmm.score_samples(samples), expected, rtol=1e-10)


def test_gmm_m_step_matches_weighted_covariance():
    rng = np.random.default_rng(9)
    samples = rng.normal(size=(200, 3))
    resp = rng.dirichlet(np.ones(2), size=200)
    weights, means, covariances = _m_step(samples, resp, 1e-12)
    assert_allclose(weights, resp.sum(axis=0) / 200)
    for k in range(2):
        assert_allclose(means[k], np.average(samples, axis=0, weights=resp[:, k]))
        expected = np.cov(samples.T, aweights=resp[:, k], bias=True)
        assert_allclose(covariances[k], expected, atol=1e-12)


def test_fit_gmm_too_few_samples():
    with pytest.raises(ValueError, match="requires >= 9 samples"):
        fit_gmm(np.zeros((8, 3)), 3, seed=0)
    with pytest.raises(ValueError, match=">= 1"):
        fit_gmm(np.zeros((8, 3)), 0, seed=0)


def test_kl_identical():
    rng = np.random.default_rng(0)
    gaussian = GaussianModel(rng.normal(size=3), _random_spd(rng))
    assert kl_gaussian(gaussian, gaussian) == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize(
    ("g_i", "g_j", "expected"),
    [
        (_gaussian((0, 0, 0)), _gaussian((1, 0, 0)), 0.5),
        (_gaussian((0, 0, 0)), _gaussian((0, 0, 0), 4.0), 0.954441),
        (_gaussian((0, 0, 0), 4.0), _gaussian((0, 0, 0)), 2.420559),
    ],
)
def test_kl_examples(g_i, g_j, expected):
    assert kl_gaussian(g_i, g_j) == pytest.approx(expected, abs=1e-6)


def test_sym_kl():
    g_i = _gaussian((0, 0, 0))
    g_j = _gaussian((0, 0, 0), 4.0)
    assert sym_kl_gaussian(g_i, g_j) == pytest.approx(0.954441, abs=1e-6)
    assert sym_kl_gaussian(g_i, g_j) == sym_kl_gaussian(g_j, g_i)


def test_kl_random_pairs():
    rng = np.random.default_rng(2)
    mu_i, mu_j = rng.normal(size=(50, 3)) * 5, rng.normal(size=(50, 3)) * 5
    sigma_i = np.stack([_random_spd(rng) for _ in range(50)])
    sigma_j = np.stack([_random_spd(rng) for _ in range(50)])
    divergence = kl_gaussian_batch(mu_i, sigma_i, mu_j, sigma_j)
    reverse = kl_gaussian_batch(mu_j, sigma_j, mu_i, sigma_i)
    symmetric = sym_kl_gaussian_batch(mu_i, sigma_i, mu_j, sigma_j)
    assert np.all(divergence >= 0)
    assert np.all(symmetric <= divergence)
    assert np.all(symmetric <= reverse)
    assert_allclose(symmetric, sym_kl_gaussian_batch(mu_j, sigma_j, mu_i, sigma_i))
    for index in (0, 17, 49):
        scalar = kl_gaussian(
            GaussianModel(mu_i[index], sigma_i[index]), GaussianModel(mu_j[index], sigma_j[index])
        )
        assert divergence[index] == pytest.approx(scalar, rel=1e-12)


def test_kl_not_positive_definite():
    singular = GaussianModel(np.zeros(3), np.zeros((3, 3)))
    with pytest.raises(ValueError, match="positive definite"):
        kl_gaussian(_gaussian((0, 0, 0)), singular)
    with pytest.raises(ValueError, match="positive definite"):
        kl_gaussian(singular, _gaussian((0, 0, 0)))


def test_kl_to_gmm_single_component():
    gaussian = _gaussian((10, 20, 30), 2.0)
    assert kl_gaussian_to_gmm(gaussian, _single_component(gaussian)) == pytest.approx(0, abs=1e-10)


def test_kl_to_gmm_weighted_components():
    gaussian = _gaussian((0, 0, 0))
    # second component at divergence 100
    far = _gaussian((np.sqrt(200), 0, 0))
    gmm = GmmModel(
        np.array([0.5, 0.5]), np.stack([gaussian.mu, far.mu]), np.stack([gaussian.sigma, far.sigma])
    )
    assert kl_gaussian_to_gmm(gaussian, gmm) == pytest.approx(0.693147, abs=1e-6)

    # first component at divergence 0.1 with weight 0.9
    near = _gaussian((np.sqrt(0.2), 0, 0))
    gmm = GmmModel(
        np.array([0.9, 0.1]), np.stack([near.mu, gaussian.mu]), np.stack([near.sigma, gaussian.sigma])
    )
    assert kl_gaussian_to_gmm(gaussian, gmm) == pytest.approx(0.205361, abs=1e-6)


def test_kl_gaussians_to_gmm_batch(two_clusters):
    gmm = fit_gmm(two_clusters, 2, seed=0)
    rng = np.random.default_rng(9)
    mu = rng.normal(size=(5, 3)) * 20
    sigma = np.stack([_random_spd(rng) for _ in range(5)])
    divergence = kl_gaussians_to_gmm(mu, sigma, gmm)
    assert divergence.shape == (5,)
    for index in range(5):
        expected = kl_gaussian_to_gmm(GaussianModel(mu[index], sigma[index]), gmm)
        assert divergence[index] == pytest.approx(expected, rel=1e-12)
    assert np.all(divergence >= -np.log(gmm.weights).min() - 1e-12)
