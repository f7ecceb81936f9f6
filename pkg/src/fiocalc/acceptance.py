"""Release-gating property checks.

Each check exercises one slice of the library on fixed desk-scale grids and
returns a CheckResult with a pass/fail status and the measured quantities.
The `suite` CLI subcommand runs all of them and writes one JSON artifact per
check; the test suite calls them directly.  Checks are deterministic for a
fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fio import (
    FioSpec,
    fio_adjoint,
    fio_compose,
    fio_factorize,
    fio_kernel,
    kernel_characterization_check,
    wf_kernel_check,
    wf_propagation_check,
)
from .gabor import wavefront_estimate
from .grids import GridFunction, GridSpec, gaussian_window, hermite_values, identity_operator
from .lagdist import LagrangianDistSpec, kernel_equals_lagrangian_check, lagrangian_synthesize
from .metaplectic import (
    egorov_residual,
    fbi_covariance_residual,
    homomorphism_residual,
    mu_general,
    unitarity_defect,
)
from .phases import (
    helffer_conditions,
    lagrangian_of_phase,
    phase_from_free_matrix,
    random_nondegenerate_phase,
    reduce_phase,
)
from .symbols import (
    constant_symbol,
    gaussian_symbol,
    harmonic_oscillator_symbol,
    polynomial_symbol,
)
from .symplectic import (
    SymplecticMatrix,
    chirp_matrix,
    chi_delta,
    is_free,
    principal_angles,
    random_symplectic,
    scaling_matrix,
    standard_j,
    standard_j_matrix,
    symplectic_inverse,
    tensor_symplectic,
    twisted_graph_lagrangian,
)
from .weyl import symbol_callable, weyl_kernel


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" or "fail"
    details: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "details": self.details}


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _gauss_window_callable():
    return lambda t: np.pi ** -0.25 * np.exp(-0.5 * np.asarray(t) ** 2)


def _delta(grid: GridSpec) -> GridFunction:
    vals = np.zeros(grid.n, dtype=complex)
    vals[grid.n // 2] = 1.0 / grid.h
    return GridFunction(grid, vals)


def _hermite_sum(grid: GridSpec) -> GridFunction:
    x = grid.points()
    return GridFunction(grid, hermite_values(0, x) + hermite_values(2, x))


def _bounded_symplectic(rng, d: int = 1, cap: float = 2.0) -> SymplecticMatrix:
    """Random symplectic draw rejected until its spectral norm fits the grid
    box; unbounded stretches would push every test state into truncation."""
    while True:
        chi = random_symplectic(d, rng, n_factors=3, max_chirp=0.6)
        if np.linalg.norm(chi.entries, 2) <= cap:
            return chi


# -- 1: symplectic algebra --------------------------------------------------


def check_symplectic_algebra(seed: int = 0, quick: bool = False) -> CheckResult:
    draws = 25 if quick else 100
    tol = 1e-12
    worst_form = 0.0
    worst_inv = 0.0
    for d in (1, 2, 3):
        rng = np.random.default_rng(seed + 100 + d)
        Jm = standard_j_matrix(d)
        for _ in range(draws):
            chi = random_symplectic(d, rng)
            worst_form = max(worst_form, float(
                np.abs(chi.entries.T @ Jm @ chi.entries - Jm).max()))
            worst_inv = max(worst_inv, float(
                np.abs(symplectic_inverse(chi).entries
                       - np.linalg.inv(chi.entries)).max()))
    ok = worst_form <= tol and worst_inv <= tol
    return CheckResult("symplectic_algebra", _status(ok), {
        "draws_per_dim": draws, "tolerance": tol,
        "worst_form_defect": worst_form, "worst_inverse_error": worst_inv,
    })


# -- 2: phase reduction ------------------------------------------------------


def check_phase_reduction(seed: int = 0, quick: bool = False) -> CheckResult:
    draws = 25 if quick else 100
    tol = 1e-9
    rng = np.random.default_rng(seed + 11)
    worst_q = 0.0
    worst_angle = 0.0
    injective = True
    for _ in range(draws):
        d = int(rng.integers(1, 3))
        N = int(rng.integers(0, 4))
        phi = random_nondegenerate_phase(d, N, rng)
        rec = reduce_phase(phi)
        if rec.reduced.Q.size:
            worst_q = max(worst_q, float(np.abs(rec.reduced.Q).max()))
        if rec.n and scipy.linalg.svdvals(rec.reduced.L)[-1] <= 1e-10:
            injective = False
        ang = principal_angles(lagrangian_of_phase(phi).basis,
                               lagrangian_of_phase(rec.reduced).basis)
        worst_angle = max(worst_angle, float(ang.max()))
    ok = worst_q == 0.0 and injective and worst_angle < tol
    return CheckResult("phase_reduction", _status(ok), {
        "draws": draws, "tolerance": tol, "worst_residual_Q": worst_q,
        "L_always_injective": injective, "worst_principal_angle": worst_angle,
    })


# -- 3: graph-phase estimate matrices ----------------------------------------


def check_graph_phase_estimates(seed: int = 0, quick: bool = False) -> CheckResult:
    draws = 25 if quick else 100
    rng = np.random.default_rng(seed + 13)
    worst_sigma = np.inf
    all_ok = True
    for _ in range(draws):
        d = int(rng.integers(1, 3))
        while True:
            chi = random_symplectic(d, rng)
            if is_free(chi) and scipy.linalg.svdvals(chi.B)[-1] > 0.05:
                break
        rep = helffer_conditions(phase_from_free_matrix(chi), rng, samples=50)
        worst_sigma = min(worst_sigma, rep.left_sigma_min, rep.right_sigma_min)
        all_ok = all_ok and rep.estimates_hold
    ok = all_ok and worst_sigma > 1e-8
    return CheckResult("graph_phase_estimates", _status(ok), {
        "draws": draws, "sigma_min_floor": 1e-8, "worst_sigma_min": worst_sigma,
    })


# -- 4: metaplectic identities ------------------------------------------------


def check_metaplectic_identities(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 256, 12.0)
    x = grid.points()
    psi0 = GridFunction(grid, hermite_values(0, x).astype(complex))
    fixed_err = float((mu_general(standard_j(1), grid).apply(psi0) - psi0).norm())
    pairs = 5 if quick else 20
    rng = np.random.default_rng(seed + 7)
    f = _hermite_sum(grid)
    worst_h = 0.0
    worst_u = 0.0
    for _ in range(pairs):
        c1 = _bounded_symplectic(rng)
        c2 = _bounded_symplectic(rng)
        worst_h = max(worst_h, homomorphism_residual(c1, c2, grid, f))
        worst_u = max(worst_u, unitarity_defect(mu_general(c1, grid), f))
    ok = fixed_err <= 1e-8 and worst_h < 1e-4 and worst_u <= 1e-6
    return CheckResult("metaplectic_identities", _status(ok), {
        "grid": grid.to_dict(), "pairs": pairs,
        "fourier_gaussian_error": fixed_err, "fourier_gaussian_tol": 1e-8,
        "worst_homomorphism_residual": worst_h, "homomorphism_tol": 1e-4,
        "worst_unitarity_defect": worst_u, "unitarity_tol": 1e-6,
    })


# -- 5: symplectic covariance --------------------------------------------------


def check_symplectic_covariance(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    mats = {
        "fourier": standard_j(1),
        "chirp": chirp_matrix(np.array([[0.7]])),
        "scaling": scaling_matrix(np.array([[1.3]])),
        "composite": scaling_matrix(np.array([[1.3]])) @ chirp_matrix(np.array([[0.7]])),
    }
    symbols = {"harmonic_oscillator": symbol_callable(harmonic_oscillator_symbol(2)),
               "gaussian": symbol_callable(gaussian_symbol(2))}
    if quick:
        symbols = {"harmonic_oscillator": symbols["harmonic_oscillator"]}
    tol = 1e-3
    residuals = {}
    for cn, chi in mats.items():
        for sn, a in symbols.items():
            residuals[f"{sn}|{cn}"] = float(egorov_residual(chi, a, grid))
    worst = max(residuals.values())
    return CheckResult("symplectic_covariance", _status(worst < tol), {
        "grid": grid.to_dict(), "tolerance": tol, "residuals": residuals,
        "worst": worst,
    })


# -- 6: Weyl calculus ------------------------------------------------------------


def check_weyl_calculus(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 256, 12.0)
    ident = weyl_kernel(lambda z: np.ones(z.shape[:-1]), grid)
    ident_err = float(np.abs(ident.entries - identity_operator(grid).entries).max())
    mult = weyl_kernel(lambda z: z[..., 0], grid)
    mult_err = float(np.abs(mult.entries - np.diag(grid.points()) / grid.h).max())
    H = weyl_kernel(lambda z: z[..., 0] ** 2 + z[..., 1] ** 2, grid).weighted()
    ev = np.linalg.eigvalsh(H)[:10]
    ev_err = float(np.abs(ev - np.arange(1, 20, 2)).max())
    # product identity through the finite Moyal sum (polynomial factors)
    g2 = GridSpec(1, 128, 10.0)
    eye = SymplecticMatrix(1, np.eye(2))
    sx = FioSpec("factored", 1.0, 1.0, b=polynomial_symbol(2, [(1.0, (1, 0))]), chi=eye)
    sxi = FioSpec("factored", 1.0, 1.0, b=polynomial_symbol(2, [(1.0, (0, 1))]), chi=eye)
    rep = fio_compose(sx, sxi, g2)
    xs = np.linspace(-5.0, 5.0, 21)
    Z = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    moyal_err = float(np.abs(rep.spec.b(Z) - (Z[..., 0] * Z[..., 1] + 0.5j)).max())
    ok = ident_err <= 1e-10 and mult_err <= 1e-10 and ev_err <= 1e-6 \
        and moyal_err <= 1e-6
    return CheckResult("weyl_calculus", _status(ok), {
        "grid": grid.to_dict(), "identity_error": ident_err,
        "multiplication_error": mult_err, "eigenvalue_error": ev_err,
        "product_identity_error": moyal_err,
        "tolerances": {"exact": 1e-10, "eigenvalues": 1e-6, "product": 1e-6},
    })


# -- 7: FBI covariance -------------------------------------------------------------


def check_fbi_covariance(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    x = grid.points()
    signals = {
        "gaussian": GridFunction(grid, hermite_values(0, x).astype(complex)),
        "hermite3": GridFunction(grid, hermite_values(3, x).astype(complex)),
        "shifted_packet": GridFunction(
            grid, np.exp(-0.5 * (x - 1.0) ** 2 + 2.0j * x)),
    }
    mats = {
        "fourier": standard_j(1),
        "chirp": chirp_matrix(np.array([[0.6]])),
        "scaling": scaling_matrix(np.array([[0.8]])),
        "composite": standard_j(1) @ chirp_matrix(np.array([[0.5]])),
    }
    if quick:
        signals = {"gaussian": signals["gaussian"]}
    tol = 1e-4
    gc = _gauss_window_callable()
    residuals = {}
    for sn, u in signals.items():
        for cn, chi in mats.items():
            residuals[f"{sn}|{cn}"] = float(fbi_covariance_residual(chi, u, gc, grid))
    worst = max(residuals.values())
    return CheckResult("fbi_covariance", _status(worst < tol), {
        "grid": grid.to_dict(), "tolerance": tol, "residuals": residuals,
        "worst": worst,
    })


# -- 8: factorization ---------------------------------------------------------------


def _factorization_pairs():
    J = standard_j(1)
    ch = chirp_matrix(np.array([[0.8]]))
    sc = scaling_matrix(np.array([[1.2]]))
    comp = standard_j(1) @ chirp_matrix(np.array([[0.5]]))
    return [
        ("constant|fourier", constant_symbol(2), J, 0.0),
        ("harmonic_oscillator|fourier", harmonic_oscillator_symbol(2), J, 2.0),
        ("gaussian|chirp", gaussian_symbol(2), ch, 0.0),
        ("harmonic_oscillator|chirp", harmonic_oscillator_symbol(2), ch, 2.0),
        ("shifted_gaussian|scaling", gaussian_symbol(2, center=[1.0, 0.5]), sc, 0.0),
        ("affine|composite", polynomial_symbol(
            2, [(1.0, (1, 0)), (0.5, (0, 1)), (2.0, (0, 0))]), comp, 1.0),
    ]


def check_factorization(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 256, 12.0)
    tol = 1e-3
    pairs = _factorization_pairs()
    if quick:
        pairs = pairs[:2]
    errors = {}
    statuses = {}
    for name, sym, chi, m in pairs:
        spec = FioSpec("factored", m, 1.0, b=sym, chi=chi)
        K, _ = fio_kernel(spec, grid)
        rep = fio_factorize(K, chi, grid, m=m)
        call = symbol_callable(sym)
        mask = rep.symbol.interior_mask(0.5)
        X, XI = np.meshgrid(rep.symbol.x, rep.symbol.xi, indexing="ij")
        true = np.asarray(call(np.stack([X, XI], axis=-1)), dtype=complex)
        scale = float(np.abs(true[mask]).max())
        errors[name] = float(np.abs(rep.symbol.values - true)[mask].max() / scale)
        statuses[name] = rep.status
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=standard_j(1))
    K, _ = fio_kernel(spec, grid)
    neg = fio_factorize(K, chirp_matrix(np.array([[0.8]])), grid, m=0.0)
    ok = max(errors.values()) < tol \
        and all(s == "pass" for s in statuses.values()) \
        and neg.status == "not-in-class"
    return CheckResult("factorization", _status(ok), {
        "grid": grid.to_dict(), "tolerance": tol, "recovery_errors": errors,
        "statuses": statuses, "negative_control_status": neg.status,
    })


# -- 9: composition and adjoint ---------------------------------------------------------


def check_composition_adjoint(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    ch = chirp_matrix(np.array([[0.8]]))
    s_ho_j = FioSpec("factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2), chi=J)
    s_ho_ch = FioSpec("factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2), chi=ch)
    s_ga_ch = FioSpec("factored", 0.0, 1.0, b=gaussian_symbol(2), chi=ch)
    s_co_j = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=J)
    cases = [("ho_fourier*ho_chirp", s_ho_j, s_ho_ch),
             ("ho_fourier*gauss_chirp", s_ho_j, s_ga_ch),
             ("fourier*fourier", s_co_j, s_co_j)]
    if quick:
        cases = cases[:2]
    tol = 1e-3
    residuals = {}
    for name, a, b in cases:
        rep = fio_compose(a, b, grid)
        residuals[name] = float(rep.residual)
    # adjoint of an oscillatory spec: kernel equals the conjugate transpose
    kgrid = GridSpec(1, 64, 8.0)
    phi = phase_from_free_matrix(J)
    from .symbols import custom_symbol

    amp = custom_symbol(2, 0.0, 1.0,
                        lambda z: np.exp(-0.25 * np.sum(np.asarray(z) ** 2, axis=-1)))
    spec = FioSpec("oscillatory", 0.0, 1.0, phase=phi, amplitude=amp)
    K1, _ = fio_kernel(spec, kgrid)
    K2, _ = fio_kernel(fio_adjoint(spec), kgrid)
    A = K1.values.reshape(kgrid.n, kgrid.n)
    B = K2.values.reshape(kgrid.n, kgrid.n)
    adj_err = float(np.max(np.abs(B - A.conj().T)) / np.max(np.abs(A)))
    ok = max(residuals.values()) < tol and adj_err <= 1e-8
    return CheckResult("composition_adjoint", _status(ok), {
        "grid": grid.to_dict(), "composition_tol": tol,
        "composition_residuals": residuals,
        "adjoint_error": adj_err, "adjoint_tol": 1e-8,
    })


# -- 10: kernel characterization ----------------------------------------------------------


def check_kernel_characterization(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    J = standard_j(1)
    gc = _gauss_window_callable()
    cases = [("mu_fourier", constant_symbol(2), 0.0),
             ("ho_mu_fourier", harmonic_oscillator_symbol(2), 2.0)]
    if quick:
        cases = cases[:1]
    reports = {}
    ok = True
    for name, sym, m in cases:
        spec = FioSpec("factored", m, 1.0, b=sym, chi=J)
        K, _ = fio_kernel(spec, grid)
        rep = kernel_characterization_check(K, J, m, 1.0, gc)
        reports[name] = rep.to_dict()
        ok = ok and rep.status == "pass"
    return CheckResult("kernel_characterization", _status(ok), {
        "grid": grid.to_dict(), "reports": reports,
    })


# -- 11: wave front sets ------------------------------------------------------------------


def check_wavefront_sets(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    delta = _delta(grid)
    gw = gaussian_window(grid)
    rep = wavefront_estimate(delta, gw, N_max=4.0)
    expected = [14, 15, 16, 17, 46, 47, 48, 49]
    sectors_ok = rep.nondecaying == expected
    gc = _gauss_window_callable()
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=standard_j(1))
    K, _ = fio_kernel(spec, grid)
    cone = wf_kernel_check(K, standard_j(1), gc)
    cone_neg = wf_kernel_check(K, SymplecticMatrix(1, np.eye(2)), gc)
    prop = wf_propagation_check(spec, delta, gw, grid)
    ok = sectors_ok and cone["status"] == "pass" \
        and cone_neg["status"] == "fail" and prop["status"] == "pass"
    return CheckResult("wavefront_sets", _status(ok), {
        "grid": grid.to_dict(),
        "delta_sectors": rep.nondecaying, "expected_sectors": expected,
        "kernel_cone": cone, "kernel_cone_negative_status": cone_neg["status"],
        "propagation": prop,
    })


# -- 12: kernel versus Lagrangian equivalence -----------------------------------------------


def _synthesized_graph_kernel(grid2: GridSpec) -> GridFunction:
    lam = twisted_graph_lagrangian(standard_j(1))
    chi_syn = tensor_symplectic(standard_j(1)) @ chi_delta(1)
    dist = LagrangianDistSpec(lam, constant_symbol(2), chi_syn=chi_syn)
    return lagrangian_synthesize(dist, grid2)


def check_lagrangian_equivalence(seed: int = 0, quick: bool = False) -> CheckResult:
    grid = GridSpec(1, 128, 10.0)
    grid2 = GridSpec(2, 128, 10.0)
    J = standard_j(1)
    ch = chirp_matrix(np.array([[0.8]]))
    eye = SymplecticMatrix(1, np.eye(2))
    gc = _gauss_window_callable()

    def kernel_of(sym, m, chi):
        spec = FioSpec("factored", m, 1.0, b=sym, chi=chi)
        K, _ = fio_kernel(spec, grid)
        return K

    K_muJ = kernel_of(constant_symbol(2), 0.0, J)
    positives = [("mu_fourier|fourier", K_muJ, J, 0.0)]
    negatives = [("mu_fourier|identity", K_muJ, eye, 0.0)]
    if not quick:
        positives += [
            ("ho_mu_fourier|fourier", kernel_of(harmonic_oscillator_symbol(2), 2.0, J), J, 2.0),
            ("mu_chirp|chirp", kernel_of(constant_symbol(2), 0.0, ch), ch, 0.0),
            ("synthesized|fourier", GridFunction(grid2, _synthesized_graph_kernel(grid2).values), J, 0.0),
        ]
        negatives += [("mu_fourier|chirp", K_muJ, ch, 0.0)]
    results = {}
    ok = True
    for name, K, chi, m in positives:
        rep = kernel_equals_lagrangian_check(K, chi, m, gc)
        results[name] = {"agree": rep["agree"], "status": rep["status"]}
        ok = ok and rep["agree"] and rep["status"] == "pass"
    for name, K, chi, m in negatives:
        rep = kernel_equals_lagrangian_check(K, chi, m, gc)
        results[name] = {"agree": rep["agree"], "status": rep["status"]}
        ok = ok and rep["agree"] and rep["status"] == "fail"
    return CheckResult("lagrangian_equivalence", _status(ok), {
        "grid": grid.to_dict(), "results": results,
    })


ALL_CHECKS = (
    check_symplectic_algebra,
    check_phase_reduction,
    check_graph_phase_estimates,
    check_metaplectic_identities,
    check_symplectic_covariance,
    check_weyl_calculus,
    check_fbi_covariance,
    check_factorization,
    check_composition_adjoint,
    check_kernel_characterization,
    check_wavefront_sets,
    check_lagrangian_equivalence,
)


def run_suite(seed: int = 0, quick: bool = False, progress=None) -> list:
    results = []
    for check in ALL_CHECKS:
        t0 = time.time()
        res = check(seed=seed, quick=quick)
        if progress is not None:
            progress(res, time.time() - t0)
        results.append(res)
    return results
