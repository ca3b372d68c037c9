import numpy as np
import pytest
from scipy import sparse

from pgmseg.colormodel import fit_gmm, kl_gaussian_batch
from pgmseg.evaluation import make_synthetic
from pgmseg.inference import pgm, spectral
from pgmseg.probability import Bandwidths, PairwiseEdges, UnaryTable, pairwise_probabilities
from pgmseg.superpixel import watershed_labels


@pytest.fixture
def assignment_matrix():
    rng = np.random.default_rng(42)
    matrix = sparse.random(2000, 2000, density=0.005, random_state=rng, format="csr")
    matrix = sparse.csr_matrix(matrix + matrix.T + sparse.eye(2000))
    matrix.sort_indices()
    return matrix


@pytest.fixture
def random_pixels():
    rng = np.random.default_rng(42)
    return rng.normal(size=(20000, 3)) * 10


@pytest.mark.benchmark(group="power_iteration")
@pytest.mark.parametrize("implementation", ["numba", "numpy"])
def test_benchmark_power_iteration(benchmark, assignment_matrix, implementation):
    shift = 0.5 * float(np.max(abs(assignment_matrix).sum(axis=1)))
    if implementation == "numba":
        benchmark(
            spectral._power_iteration_numba,
            assignment_matrix.indptr,
            assignment_matrix.indices,
            assignment_matrix.data,
            shift,
            1e-10,
            1000,
        )
    else:
        benchmark(spectral._power_iteration_numpy, assignment_matrix, shift, 1e-10, 1000)


@pytest.mark.benchmark(group="colormodel")
def test_benchmark_kl_batch(benchmark):
    rng = np.random.default_rng(42)
    mu = rng.normal(size=(5000, 3))
    a = rng.normal(size=(5000, 3, 3))
    sigma = a @ a.transpose(0, 2, 1) + np.eye(3)
    benchmark(kl_gaussian_batch, mu, sigma, mu[::-1], sigma[::-1])


@pytest.mark.benchmark(group="colormodel")
def test_benchmark_fit_gmm(benchmark, random_pixels):
    benchmark(fit_gmm, random_pixels, 3, 0)


@pytest.mark.benchmark(group="superpixel")
def test_benchmark_watershed(benchmark):
    image = make_synthetic(np.random.default_rng(42), shape=(240, 320)).image
    benchmark(watershed_labels, image, 0)


@pytest.fixture
def chain_problem():
    rng = np.random.default_rng(42)
    n = 1000
    edges = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
    distances = rng.exponential(size=n - 1)
    pair = pairwise_probabilities(n, PairwiseEdges(edges, distances), Bandwidths.initial(1.0, 1.0))
    unary = UnaryTable.from_foreground(rng.uniform(0.05, 0.95, size=n))
    return pair, unary


@pytest.mark.benchmark(group="icm")
@pytest.mark.parametrize("implementation", ["numba", "numpy"])
def test_benchmark_icm(benchmark, chain_problem, implementation):
    pair, unary = chain_problem
    index = (unary.foreground <= unary.background).astype(np.int64)
    with np.errstate(divide="ignore"):
        log_unary, log_blocks = np.log(unary.probabilities), np.log(pair.blocks)
    pointers, edge_ids, sides = pgm._incidence(pair.n, pair.edges)
    kernel = pgm._icm_numba if implementation == "numba" else pgm._icm_numpy
    benchmark(
        kernel, index, pair.edges, log_unary, log_blocks, pointers, edge_ids, sides, 100
    )


@pytest.mark.benchmark(group="inference")
def test_benchmark_pgm_marginals(benchmark, chain_problem):
    pair, unary = chain_problem
    benchmark(pgm.pgm_marginals, pair, unary, 2.0)
