import numpy as np
import pytest

from fiocalc.grids import GridFunction, GridSpec, gaussian_window, hermite_grid_function
from fiocalc.metaplectic import (
    egorov_residual,
    fbi_covariance_residual,
    gaussian_image,
    homomorphism_residual,
    mu_chirp,
    mu_factors,
    mu_fourier,
    mu_general,
    mu_linear,
    unitarity_defect,
)
from fiocalc.symplectic import (
    SymplecticMatrix,
    chirp_matrix,
    random_symplectic,
    scaling_matrix,
    standard_j,
)
from fiocalc.weyl import symbol_callable
from fiocalc.symbols import harmonic_oscillator_symbol


def bounded_random(rng, cap=2.0):
    while True:
        chi = random_symplectic(1, rng, n_factors=3, max_chirp=0.6)
        if np.linalg.norm(chi.entries, 2) <= cap:
            return chi


def test_fourier_fixes_the_gaussian():
    g = GridSpec(1, 256, 12.0)
    psi0 = hermite_grid_function(g, [0])
    assert (mu_fourier(g).apply(psi0) - psi0).norm() < 1e-8


def test_chirp_is_exact_pointwise():
    g = GridSpec(1, 128, 10.0)
    u = hermite_grid_function(g, [1])
    out = mu_chirp(np.array([[0.9]]), g).apply(u)
    x = g.points()
    ref = np.exp(0.45j * x ** 2) * u.values
    assert np.abs(out.values - ref).max() < 1e-12


def test_linear_factor_matches_dilation_on_interior():
    g = GridSpec(1, 256, 12.0)
    u = hermite_grid_function(g, [0])
    out = mu_linear(np.array([[2.0]]), g).apply(u)
    x = g.points()
    interior = np.abs(x) < 6.0
    ref = 2.0 ** -0.5 * np.pi ** -0.25 * np.exp(-0.5 * (x / 2.0) ** 2)
    assert np.abs(out.values - ref)[interior].max() < 1e-8


def test_contraction_does_not_wrap_around_the_box():
    # evaluating f(A^{-1} x) beyond the box must read ~0, not the far side
    g = GridSpec(1, 128, 10.0)
    x = g.points()
    u = GridFunction(g, np.exp(-2.0 * (x - 5.0) ** 2).astype(complex))
    out = mu_linear(np.array([[0.5]]), g).apply(u)
    # the image is a bump near x = 2.5; the region near the opposite edge
    # corresponds to source points outside the box
    far = x < -8.0
    assert np.abs(out.values[far]).max() < 1e-8


def test_unitarity_for_bounded_random_matrices():
    g = GridSpec(1, 256, 12.0)
    f = hermite_grid_function(g, [2])
    rng = np.random.default_rng(21)
    for _ in range(5):
        chi = bounded_random(rng)
        assert unitarity_defect(mu_general(chi, g), f) < 1e-6


def test_homomorphism_up_to_phase():
    g = GridSpec(1, 256, 12.0)
    f = hermite_grid_function(g, [0])
    rng = np.random.default_rng(22)
    for _ in range(5):
        c1, c2 = bounded_random(rng), bounded_random(rng)
        assert homomorphism_residual(c1, c2, g, f) < 1e-4


def test_near_singular_upper_block_avoids_aliased_kernel():
    # B ~ 0.1: the explicit quadratic kernel would alias; the factorization
    # must route through a shifted free factor instead
    entries = np.array([[-0.5126, 0.097], [0.0, 0.0]])
    # complete to det = 1 (symplectic in one degree of freedom)
    entries[1, 1] = (1.0 + entries[0, 1] * entries[1, 0]) / entries[0, 0]
    chi = SymplecticMatrix(1, entries)
    factors = mu_factors(chi)
    assert len(factors) > 1
    g = GridSpec(1, 256, 12.0)
    f = hermite_grid_function(g, [0])
    assert unitarity_defect(mu_general(chi, g), f) < 1e-6


def test_lower_triangular_matrices_factor_without_quadrature():
    sc = scaling_matrix(np.array([[1.3]]))
    ch = chirp_matrix(np.array([[0.8]]))
    names = [type(f).__name__ for f in mu_factors(sc @ ch)]
    assert "FreeKernelFactor" not in names and "FourierFactor" not in names


def test_factorization_descriptor_and_defect():
    fact = mu_general(standard_j(1), GridSpec(1, 64, 8.0)).factorization
    data = fact.to_dict()
    assert "factors" in data and "phase" in data
    assert fact.matrix_defect() < 1e-12


def test_gaussian_image_matches_operator():
    g = GridSpec(1, 128, 10.0)
    chi = chirp_matrix(np.array([[0.7]]))
    psi0 = gaussian_window(g)
    out = mu_general(chi, g).apply(psi0)
    ref = gaussian_image(chi, g)
    z = out.inner(ref)
    c = z / abs(z)
    assert (out - c * ref).norm() < 1e-8


def test_inverse_apply_round_trip():
    g = GridSpec(1, 128, 10.0)
    op = mu_general(standard_j(1), g)
    u = hermite_grid_function(g, [3])
    assert (op.inverse_apply(op.apply(u)) - u).norm() < 1e-8


def test_quantization_covariance():
    g = GridSpec(1, 128, 10.0)
    a = symbol_callable(harmonic_oscillator_symbol(2))
    for chi in (standard_j(1), chirp_matrix(np.array([[0.7]])),
                scaling_matrix(np.array([[1.3]]))):
        assert egorov_residual(chi, a, g) < 1e-3


def test_phase_space_shift_covariance_of_transform():
    g = GridSpec(1, 128, 10.0)
    u = hermite_grid_function(g, [0])
    gc = lambda t: np.pi ** -0.25 * np.exp(-0.5 * np.asarray(t) ** 2)
    assert fbi_covariance_residual(standard_j(1), u, gc, g) < 1e-4
