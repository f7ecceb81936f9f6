"""Weyl quantization on the grid: kernel assembly, symbol recovery, Wigner
distributions, localization operators, and quantization conversion.

The kernel of a^w is K(x, y) = (2 pi)^{-d} int e^{i <x - y, xi>} a((x+y)/2, xi) d xi,
discretized with the symbol sampled on the dual grid.  Symbol recovery
integrates K(x + y/2, x - y/2) e^{-i y xi} over |y| < R; odd multiples of the
grid step need kernel values at half-grid midpoints, obtained by 8-point
polynomial interpolation along lines parallel to the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, GridSpec, OperatorMatrix
from .symbols import ShubinSymbol, shubin_decay_test

MEMORY_CAP_ENTRIES = 2**26


class SizeGuardError(MemoryError):
    def __init__(self, entries, cap):
        super().__init__(
            f"operator would need {entries} complex entries "
            f"({16 * entries / 2**30:.2f} GiB), cap is {cap}"
        )
        self.entries = entries
        self.cap = cap


def _check_d1(spec: GridSpec):
    if spec.d != 1:
        raise ValueError("dense Weyl operators are implemented for d = 1 only")


def weyl_kernel(a, spec: GridSpec, cap: int = MEMORY_CAP_ENTRIES) -> OperatorMatrix:
    """Operator matrix of a^w(x, D) for a symbol callable on R^2.

    The symbol is evaluated at midpoints (x_k + x_l)/2, which form a grid of
    2n - 1 points, so assembly is O(n^2) evaluations plus one matrix product.
    """
    _check_d1(spec)
    if spec.size() ** 2 > cap:
        raise SizeGuardError(spec.size() ** 2, cap)
    n, h, R = spec.n, spec.h, spec.R
    xi = spec.dual_points()
    mids = -R + 0.5 * h * np.arange(2 * n - 1)
    pts = np.stack(np.meshgrid(mids, xi, indexing="ij"), axis=-1)
    A = np.asarray(a(pts), dtype=complex)  # (2n-1, n)
    tvals = np.arange(-(n - 1), n)
    E = np.exp(1j * h * np.outer(tvals, xi))  # (2n-1, n)
    B = (spec.dual_h / (2 * np.pi)) * (A @ E.T)
    k = np.arange(n)
    K = B[k[:, None] + k[None, :], k[:, None] - k[None, :] + n - 1]
    return OperatorMatrix(spec, K)


_HALF_NODES = np.arange(-3, 5, dtype=float)
_HALF_WEIGHTS = np.array([
    np.prod([(0.5 - xj) / (xi - xj) for xj in _HALF_NODES if xj != xi])
    for xi in _HALF_NODES
])


def _diagonal_midpoints(K: np.ndarray, k: np.ndarray, t: int) -> np.ndarray:
    """K(x_k + t h/2, x_k - t h/2) for odd t, interpolated from on-grid
    entries along the line of constant difference t; out-of-range samples
    count as zero (kernel decay or interior-only use)."""
    n = K.shape[0]
    q = (t - 1) // 2
    out = np.zeros(len(k), dtype=complex)
    for node, w in zip(_HALF_NODES.astype(int), _HALF_WEIGHTS):
        p = k + q + node
        valid = (p >= 0) & (p < n) & (p - t >= 0) & (p - t < n)
        vals = np.zeros(len(k), dtype=complex)
        vals[valid] = K[p[valid], p[valid] - t]
        out += w * vals
    return out


@dataclass(frozen=True)
class SampledSymbol:
    """Symbol samples a(x_k, xi_m) on the phase-space grid."""

    spec: GridSpec
    x: np.ndarray
    xi: np.ndarray
    values: np.ndarray  # shape (n_x, n_xi)

    def interior_mask(self, frac: float = 0.5) -> np.ndarray:
        X, XI = np.meshgrid(self.x, self.xi, indexing="ij")
        bound = frac * self.spec.R
        return (np.abs(X) <= bound) & (np.abs(XI) <= bound)

    def max_interior_error(self, reference, frac: float = 0.5) -> float:
        X, XI = np.meshgrid(self.x, self.xi, indexing="ij")
        ref = np.asarray(reference(np.stack([X, XI], axis=-1)), dtype=complex)
        mask = self.interior_mask(frac)
        return float(np.max(np.abs(self.values - ref)[mask]))

    def decay_report(self, m: float, rho: float, **kw):
        return shubin_decay_test(self.values, [self.x, self.xi], m, rho, **kw)

    def as_callable(self):
        from scipy.interpolate import RectBivariateSpline

        re = RectBivariateSpline(self.x, self.xi, self.values.real, kx=5, ky=5)
        im = RectBivariateSpline(self.x, self.xi, self.values.imag, kx=5, ky=5)

        def func(z):
            z = np.asarray(z, dtype=float)
            shape = z.shape[:-1]
            flat = z.reshape(-1, 2)
            out = re(flat[:, 0], flat[:, 1], grid=False) \
                + 1j * im(flat[:, 0], flat[:, 1], grid=False)
            return out.reshape(shape)

        return func


def symbol_from_kernel(K: OperatorMatrix) -> SampledSymbol:
    """Recover the Weyl symbol on the phase-space grid from a kernel matrix."""
    spec = K.spec
    _check_d1(spec)
    n, h = spec.n, spec.h
    xi = spec.dual_points()
    kidx = np.arange(n)
    # symmetric difference window with half weight at both Nyquist endpoints,
    # so the discrete orthogonality sum over t is exact for every dual mode
    tvals = np.arange(-n // 2, n // 2 + 1)
    wts = np.ones(len(tvals))
    wts[0] = wts[-1] = 0.5
    S = np.zeros((n, len(tvals)), dtype=complex)
    Kmat = K.entries
    for col, t in enumerate(tvals):
        if t % 2 == 0:
            q = t // 2
            p = kidx + q
            valid = (p >= 0) & (p < n) & (p - t >= 0) & (p - t < n)
            vals = np.zeros(n, dtype=complex)
            vals[valid] = Kmat[p[valid], p[valid] - t]
            S[:, col] = vals
        else:
            S[:, col] = _diagonal_midpoints(Kmat, kidx, t)
    E = np.exp(-1j * h * np.outer(tvals, xi))
    values = h * ((S * wts) @ E)
    return SampledSymbol(spec, spec.points(), xi, values)


def _half_grid_values(f: GridFunction) -> np.ndarray:
    """Samples of a grid function on the doubled grid of spacing h/2 (even
    indices on-grid, odd indices interpolated at 8th order)."""
    n = f.spec.n
    v = f.values
    out = np.zeros(2 * n, dtype=complex)
    out[::2] = v
    j = np.arange(n - 1)
    acc = np.zeros(n - 1, dtype=complex)
    for node, w in zip(_HALF_NODES.astype(int), _HALF_WEIGHTS):
        p = j + node
        valid = (p >= 0) & (p < n)
        vals = np.zeros(n - 1, dtype=complex)
        vals[valid] = v[p[valid]]
        acc += w * vals
    out[1::2][: n - 1] = acc
    return out


def wigner(g: GridFunction, f: GridFunction) -> SampledSymbol:
    """Cross-Wigner distribution
    W(g, f)(x, xi) = (2 pi)^{-d/2} int g(x + y/2) conj(f(x - y/2)) e^{-i y xi} dy."""
    if g.spec != f.spec:
        raise ValueError("grid specs differ")
    spec = g.spec
    _check_d1(spec)
    n, h = spec.n, spec.h
    xi = spec.dual_points()
    gh = _half_grid_values(g)
    fh = _half_grid_values(f)
    tvals = np.arange(-n // 2, n // 2)
    k = np.arange(n)
    ip = 2 * k[:, None] + tvals[None, :]
    im = 2 * k[:, None] - tvals[None, :]
    valid = (ip >= 0) & (ip < 2 * n) & (im >= 0) & (im < 2 * n)
    P = np.zeros((n, len(tvals)), dtype=complex)
    P[valid] = gh[ip[valid]] * np.conj(fh[im[valid]])
    E = np.exp(-1j * h * np.outer(tvals, xi))
    values = (2 * np.pi) ** (-0.5) * h * (P @ E)
    return SampledSymbol(spec, spec.points(), xi, values)


def weyl_pairing_residual(a, f: GridFunction, g: GridFunction) -> float:
    """|(a^w f, g) - (2 pi)^{-d/2} (a, W(g, f))| for a symbol callable a."""
    spec = f.spec
    K = weyl_kernel(a, spec)
    lhs = K.apply(f).inner(g)
    W = wigner(g, f)
    X, XI = np.meshgrid(W.x, W.xi, indexing="ij")
    avals = np.asarray(a(np.stack([X, XI], axis=-1)), dtype=complex)
    weight = spec.h * spec.dual_h
    rhs = (2 * np.pi) ** (-0.5) * np.sum(avals * np.conj(W.values)) * weight
    return float(abs(lhs - rhs))


def localization_operator(a, spec: GridSpec, n_nodes: int = 30) -> OperatorMatrix:
    """Anti-Wick operator with phase-space weight a, realized as b^w with
    b = pi^{-d} e^{-|.|^2} * a (Gauss-Hermite quadrature of the convolution)."""
    _check_d1(spec)
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)

    def b(z):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for ui, wi in zip(nodes, weights):
            for uj, wj in zip(nodes, weights):
                shifted = z - np.array([ui, uj])
                out = out + wi * wj * np.asarray(a(shifted), dtype=complex)
        return out / np.pi

    return weyl_kernel(b, spec)


def kn_kernel(a, spec: GridSpec, cap: int = MEMORY_CAP_ENTRIES) -> OperatorMatrix:
    """Kernel of the Kohn-Nirenberg quantization a(x, D): symbol evaluated at
    the left variable instead of the midpoint."""
    _check_d1(spec)
    if spec.size() ** 2 > cap:
        raise SizeGuardError(spec.size() ** 2, cap)
    x = spec.points()
    xi = spec.dual_points()
    pts = np.stack(np.meshgrid(x, xi, indexing="ij"), axis=-1)
    A = np.asarray(a(pts), dtype=complex)  # (n, n_xi)
    E = np.exp(1j * np.outer(x, xi))  # e^{i x xi}
    # K[k, l] = (1/2pi) sum_m a(x_k, xi_m) e^{i (x_k - x_l) xi_m} h_xi
    K = (spec.dual_h / (2 * np.pi)) * ((A * E) @ E.conj().T)
    return OperatorMatrix(spec, K)


def kn_to_weyl(a, spec: GridSpec) -> SampledSymbol:
    """Quantization change: Weyl symbol of the operator with Kohn-Nirenberg
    symbol a."""
    return symbol_from_kernel(kn_kernel(a, spec))


def weyl_product(a, b, spec: GridSpec) -> SampledSymbol:
    """Weyl product a # b extracted from the composed kernel matrices."""
    Ka = weyl_kernel(a, spec)
    Kb = weyl_kernel(b, spec)
    return symbol_from_kernel(Ka.compose(Kb))


def symbol_callable(sym) -> callable:
    if isinstance(sym, ShubinSymbol):
        return sym
    if isinstance(sym, SampledSymbol):
        return sym.as_callable()
    return sym
