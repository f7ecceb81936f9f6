import numpy as np
import pytest

from fiocalc.fio import (
    FioSpec,
    QuadratureError,
    fio_adjoint,
    fio_compose,
    fio_factorize,
    fio_kernel,
    fio_operator,
    kernel_characterization_check,
    wf_kernel_check,
    wf_propagation_check,
)
from fiocalc.grids import GridFunction, GridSpec, gaussian_window
from fiocalc.phases import phase_from_free_matrix, pseudodifferential_phase
from fiocalc.symbols import (
    constant_symbol,
    custom_symbol,
    gaussian_symbol,
    harmonic_oscillator_symbol,
    polynomial_symbol,
)
from fiocalc.symplectic import SymplecticMatrix, chirp_matrix, standard_j
from fiocalc.weyl import symbol_callable

GC = lambda t: np.pi ** -0.25 * np.exp(-0.5 * np.asarray(t) ** 2)


def test_factored_fourier_kernel_is_oscillatory_plane_wave():
    g = GridSpec(1, 128, 10.0)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=standard_j(1))
    K, _ = fio_kernel(spec, g)
    x = g.points()
    ref = (2 * np.pi) ** -0.5 * np.exp(-1j * np.outer(x, x)).reshape(-1)
    z = np.vdot(ref, K.values)
    c = z / abs(z)
    assert np.abs(K.values - c * ref).max() < 1e-10


def test_oscillatory_and_factored_forms_agree_up_to_normalization():
    g = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    osc = FioSpec("oscillatory", 0.0, 1.0, phase=phase_from_free_matrix(J),
                  amplitude=custom_symbol(2, 0.0, 1.0,
                                          lambda z: np.ones(np.asarray(z).shape[:-1])))
    fac = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=J)
    Ko, _ = fio_kernel(osc, g)
    Kf, _ = fio_kernel(fac, g)
    z = np.vdot(Ko.values, Kf.values)
    c = z / abs(z) * (2 * np.pi) ** -0.5
    assert np.abs(Kf.values - c * Ko.values).max() < 1e-12


def test_fiber_quadrature_converges_for_decaying_amplitude():
    g = GridSpec(1, 64, 8.0)
    phi = pseudodifferential_phase(1)
    amp = custom_symbol(3, 0.0, 1.0,
                        lambda z: np.exp(-0.5 * np.sum(np.asarray(z) ** 2, axis=-1)))
    spec = FioSpec("oscillatory", 0.0, 1.0, phase=phi, amplitude=amp)
    K, quad = fio_kernel(spec, g)
    assert quad is not None and quad.convergence < 1e-6
    # the kernel of a quantization concentrates near the diagonal
    mat = np.abs(K.values.reshape(g.n, g.n))
    assert mat.diagonal().max() > 10 * mat[0, -1]


def test_fiber_quadrature_refuses_slow_convergence():
    g = GridSpec(1, 64, 8.0)
    phi = pseudodifferential_phase(1)
    amp = custom_symbol(3, 0.0, 1.0,
                        lambda z: np.exp(-0.05 * np.sum(np.asarray(z) ** 2, axis=-1)))
    spec = FioSpec("oscillatory", 0.0, 1.0, phase=phi, amplitude=amp)
    with pytest.raises(QuadratureError):
        fio_kernel(spec, g)


def test_symbol_recovery_from_kernel():
    g = GridSpec(1, 256, 12.0)
    chi = chirp_matrix(np.array([[0.8]]))
    sym = gaussian_symbol(2)
    spec = FioSpec("factored", 0.0, 1.0, b=sym, chi=chi)
    K, _ = fio_kernel(spec, g)
    rep = fio_factorize(K, chi, g, m=0.0)
    assert rep.status == "pass"
    call = symbol_callable(sym)
    mask = rep.symbol.interior_mask(0.5)
    X, XI = np.meshgrid(rep.symbol.x, rep.symbol.xi, indexing="ij")
    true = np.asarray(call(np.stack([X, XI], axis=-1)), dtype=complex)
    assert np.abs(rep.symbol.values - true)[mask].max() < 1e-3


def test_factorize_against_wrong_matrix_reports_failure():
    g = GridSpec(1, 256, 12.0)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=standard_j(1))
    K, _ = fio_kernel(spec, g)
    rep = fio_factorize(K, chirp_matrix(np.array([[0.8]])), g, m=0.0)
    assert rep.status == "not-in-class"


def test_composition_multiplies_matrices_and_orders():
    g = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    ch = chirp_matrix(np.array([[0.8]]))
    s1 = FioSpec("factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2), chi=J)
    s2 = FioSpec("factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2), chi=ch)
    rep = fio_compose(s1, s2, g)
    assert rep.status == "pass" and rep.residual < 1e-3
    assert rep.spec.order == 4.0
    assert np.allclose(rep.spec.chi.entries, (J @ ch).entries)


def test_product_rule_for_coordinate_symbols():
    g = GridSpec(1, 128, 10.0)
    eye = SymplecticMatrix(1, np.eye(2))
    sx = FioSpec("factored", 1.0, 1.0, b=polynomial_symbol(2, [(1.0, (1, 0))]), chi=eye)
    sxi = FioSpec("factored", 1.0, 1.0, b=polynomial_symbol(2, [(1.0, (0, 1))]), chi=eye)
    rep = fio_compose(sx, sxi, g)
    xs = np.linspace(-4.0, 4.0, 17)
    Z = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    ref = Z[..., 0] * Z[..., 1] + 0.5j
    assert np.abs(rep.spec.b(Z) - ref).max() < 1e-10


def test_adjoint_kernel_is_conjugate_transpose():
    g = GridSpec(1, 64, 8.0)
    J = standard_j(1)
    amp = custom_symbol(2, 0.0, 1.0,
                        lambda z: np.exp(-0.25 * np.sum(np.asarray(z) ** 2, axis=-1)))
    spec = FioSpec("oscillatory", 0.0, 1.0, phase=phase_from_free_matrix(J),
                   amplitude=amp)
    K1, _ = fio_kernel(spec, g)
    K2, _ = fio_kernel(fio_adjoint(spec), g)
    A = K1.values.reshape(g.n, g.n)
    B = K2.values.reshape(g.n, g.n)
    assert np.max(np.abs(B - A.conj().T)) / np.max(np.abs(A)) < 1e-8


def test_adjoint_inverts_the_matrix():
    spec = FioSpec("oscillatory", 0.0, 1.0,
                   phase=phase_from_free_matrix(standard_j(1)),
                   amplitude=custom_symbol(2, 0.0, 1.0,
                                           lambda z: np.ones(np.asarray(z).shape[:-1])))
    adj = fio_adjoint(spec)
    assert np.allclose(adj.chi.entries, np.linalg.inv(spec.chi.entries))


def test_kernel_characterization_pass_and_fail():
    g = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=J)
    K, _ = fio_kernel(spec, g)
    good = kernel_characterization_check(K, J, 0.0, 1.0, GC)
    assert good.status == "pass"
    eye = SymplecticMatrix(1, np.eye(2))
    bad = kernel_characterization_check(K, eye, 0.0, 1.0, GC)
    assert bad.status == "fail"


def test_kernel_cone_containment():
    g = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=J)
    K, _ = fio_kernel(spec, g)
    assert wf_kernel_check(K, J, GC)["status"] == "pass"
    eye = SymplecticMatrix(1, np.eye(2))
    assert wf_kernel_check(K, eye, GC)["status"] == "fail"


def test_propagation_maps_point_mass_sectors():
    g = GridSpec(1, 128, 10.0)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=standard_j(1))
    vals = np.zeros(g.n, dtype=complex)
    vals[g.n // 2] = 1.0 / g.h
    delta = GridFunction(g, vals)
    rep = wf_propagation_check(spec, delta, gaussian_window(g), g)
    assert rep["status"] == "pass"


def test_operator_of_constant_symbol_is_scaled_metaplectic():
    g = GridSpec(1, 128, 10.0)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2, 2.0), chi=standard_j(1))
    op = fio_operator(spec, g)
    u = gaussian_window(g)
    out = op.apply(u)
    assert np.isclose(out.norm(), 2.0 * u.norm(), rtol=1e-10)
