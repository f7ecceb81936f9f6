import numpy as np
import pytest

from fiocalc.grids import (
    GridFunction,
    GridSpec,
    gaussian_window,
    hermite_grid_function,
    hermite_values,
    identity_operator,
    operator_distance,
)
from fiocalc.weyl import (
    SizeGuardError,
    symbol_from_kernel,
    weyl_kernel,
    weyl_pairing_residual,
    wigner,
)


def test_grid_duality_relation():
    g = GridSpec(1, 64, 7.0)
    assert np.isclose(g.h * g.dual_h * g.n, 2 * np.pi)
    assert len(g.points()) == 64
    assert np.isclose(g.points()[0], -7.0)


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        GridSpec(1, 100, 8.0)


def test_hermite_functions_are_orthonormal_on_grid():
    g = GridSpec(1, 128, 10.0)
    x = g.points()
    h0 = GridFunction(g, hermite_values(0, x).astype(complex))
    h1 = GridFunction(g, hermite_values(1, x).astype(complex))
    assert np.isclose(h0.norm(), 1.0, atol=1e-12)
    assert abs(h0.inner(h1)) < 1e-12


def test_identity_operator_acts_as_identity():
    g = GridSpec(1, 64, 8.0)
    u = gaussian_window(g)
    assert (identity_operator(g).apply(u) - u).norm() < 1e-12


def test_weyl_identity_and_multiplication_are_exact():
    g = GridSpec(1, 256, 12.0)
    ident = weyl_kernel(lambda z: np.ones(z.shape[:-1]), g)
    assert np.abs(ident.entries - identity_operator(g).entries).max() < 1e-10
    mult = weyl_kernel(lambda z: z[..., 0], g)
    assert np.abs(mult.entries - np.diag(g.points()) / g.h).max() < 1e-10


def test_harmonic_oscillator_spectrum():
    g = GridSpec(1, 256, 12.0)
    H = weyl_kernel(lambda z: z[..., 0] ** 2 + z[..., 1] ** 2, g).weighted()
    ev = np.linalg.eigvalsh(H)[:10]
    assert np.abs(ev - np.arange(1, 20, 2)).max() < 1e-6


def test_harmonic_oscillator_eigenvectors_are_hermite():
    g = GridSpec(1, 256, 12.0)
    H = weyl_kernel(lambda z: z[..., 0] ** 2 + z[..., 1] ** 2, g)
    for k in (0, 3):
        u = hermite_grid_function(g, [k])
        r = (H.apply(u) - (2 * k + 1) * u).norm()
        assert r < 1e-6


def test_symbol_recovery_round_trip():
    g = GridSpec(1, 128, 10.0)
    a = lambda z: np.exp(-0.3 * np.sum(z ** 2, axis=-1))
    s = symbol_from_kernel(weyl_kernel(a, g))
    X, XI = np.meshgrid(s.x, s.xi, indexing="ij")
    ref = np.exp(-0.3 * (X ** 2 + XI ** 2))
    mask = s.interior_mask(0.5)
    assert np.abs(s.values - ref)[mask].max() < 1e-6


def test_weyl_pairing_matches_wigner_integral():
    g = GridSpec(1, 128, 10.0)
    a = lambda z: np.exp(-0.2 * np.sum(z ** 2, axis=-1))
    f = hermite_grid_function(g, [0])
    h = hermite_grid_function(g, [2])
    assert weyl_pairing_residual(a, f, h) < 1e-8


def test_wigner_transform_of_gaussian_is_gaussian():
    g = GridSpec(1, 128, 10.0)
    f = hermite_grid_function(g, [0])
    W = wigner(f, f)
    X, XI = np.meshgrid(W.x, W.xi, indexing="ij")
    ref = np.pi ** -1 * np.exp(-(X ** 2 + XI ** 2)) * np.pi ** 0.5
    peak = np.abs(W.values).max()
    ratio = np.abs(W.values).max() / np.abs(ref).max()
    # shape comparison after peak normalization
    mask = W.interior_mask(0.4)
    assert np.abs(W.values / peak - ref / np.abs(ref).max())[mask].max() < 1e-6
    assert ratio > 0


def test_size_guard_refuses_oversized_kernels():
    g = GridSpec(1, 2 ** 14, 10.0)
    with pytest.raises(SizeGuardError):
        weyl_kernel(lambda z: np.ones(z.shape[:-1]), g)


def test_operator_distance_is_relative():
    g = GridSpec(1, 64, 8.0)
    I = identity_operator(g)
    assert operator_distance(I, I) == 0.0
