"""FBI-type transforms, twisted variants, wavefront estimation, and decay
profiling against Lagrangian subspaces.

T_g u(x, xi) = (2 pi)^{-d/2} (u, T_x M_xi g); the magnitude equals that of the
short-time Fourier transform, and all twisted variants multiply by unimodular
factors only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, GridSpec
from .symplectic import LagrangianSubspace, SymplecticMatrix


@dataclass(frozen=True)
class PhaseSpaceField:
    """Complex samples over the product of an x-grid and a dual grid."""

    spec: GridSpec
    x: np.ndarray
    xi: np.ndarray
    values: np.ndarray  # (len(x), len(xi))

    def weight(self) -> float:
        hx = self.x[1] - self.x[0]
        hxi = self.xi[1] - self.xi[0]
        return float(hx * hxi)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values) * self.weight() ** 0.5)

    def __sub__(self, other):
        return PhaseSpaceField(self.spec, self.x, self.xi, self.values - other.values)


def _window_shift_matrix(u: GridFunction, g: GridFunction) -> np.ndarray:
    """W[l, j] = u(x_l) conj(g(x_l - x_j)) with periodic wrap, so the domain
    boundary does not act as an artificial discontinuity."""
    n = u.spec.n
    l = np.arange(n)
    idx = (l[:, None] - l[None, :] + n // 2) % n
    return u.values[:, None] * np.conj(g.values[idx])


def gabor_transform(u: GridFunction, g: GridFunction, stride: int = 1) -> PhaseSpaceField:
    """T_g u on the phase-space grid (d = 1)."""
    if u.spec != g.spec:
        raise ValueError("grid specs differ")
    spec = u.spec
    if spec.d != 1:
        raise ValueError("grid transform implemented for d = 1; use the point "
                         "evaluator for kernels")
    if stride < 1 or spec.n % stride:
        raise ValueError(f"stride {stride} must divide n={spec.n}")
    x = spec.points()[::stride]
    xi = spec.dual_points(stride)
    W = _window_shift_matrix(u, g)[:, ::stride]
    A = np.exp(-1j * np.outer(xi, spec.points()))
    vals = (2 * np.pi) ** (-0.5) * spec.h * (A @ W).T
    # (u, T_x M_xi g) carries the phase e^{i <x, xi>} relative to the STFT
    vals = vals * np.exp(1j * np.outer(x, xi))
    return PhaseSpaceField(spec, x, xi, vals)


def gabor_transform_points(u: GridFunction, g_callable, points: np.ndarray,
                           chunk: int = 2048) -> np.ndarray:
    """T_g u at arbitrary phase-space points; the window is a callable so no
    interpolation enters."""
    spec = u.spec
    if spec.d != 1:
        raise ValueError("point transform implemented for d = 1")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    xl = spec.points()
    out = np.empty(len(points), dtype=complex)
    for s in range(0, len(points), chunk):
        px = points[s : s + chunk, 0]
        pxi = points[s : s + chunk, 1]
        win = np.conj(g_callable(xl[None, :] - px[:, None]))
        phase = np.exp(-1j * pxi[:, None] * xl[None, :])
        out[s : s + chunk] = (2 * np.pi) ** (-0.5) * spec.h * \
            np.exp(1j * px * pxi) * ((win * phase) @ u.values)
    return out


class OrthogonalWindowError(ValueError):
    pass


def gabor_inverse(U: PhaseSpaceField, g: GridFunction, h: GridFunction) -> GridFunction:
    """(h, g)^{-1} T_h^* U by phase-space quadrature (stride-1 fields)."""
    spec = U.spec
    if len(U.x) != spec.n:
        raise ValueError("inversion needs a stride-1 field")
    hg = h.inner(g)
    if abs(hg) < 1e-10:
        raise OrthogonalWindowError("windows are orthogonal: (h, g) ~ 0")
    n = spec.n
    y = spec.points()
    # T_h^* U(y) = (2 pi)^{-1/2} sum U(x, xi) e^{i (y - x) xi} h(y - x) dx dxi
    E = np.exp(1j * np.outer(y, U.xi))  # (n_y, n_xi)
    l = np.arange(n)
    idx = (l[:, None] - l[None, :] + n // 2) % n
    hmat = h.values[idx]  # hmat[y_k, x_j] = h(y_k - x_j), periodic wrap
    weight = U.weight()
    Uvals = U.values * np.exp(-1j * np.outer(U.x, U.xi))
    vals = (2 * np.pi) ** (-0.5) * weight * np.einsum(
        "kj,jm,km->k", hmat, Uvals, E
    )
    return GridFunction(spec, vals / hg)


def qs_norm(u: GridFunction, s: float, g: GridFunction) -> float:
    """Shubin-Sobolev norm: weighted l2 norm of <(x, xi)>^s T_g u."""
    field = gabor_transform(u, g)
    X, XI = np.meshgrid(field.x, field.xi, indexing="ij")
    w = (1.0 + X**2 + XI**2) ** (s / 2)
    return float(np.linalg.norm(w * field.values) * field.weight() ** 0.5)


# -- wavefront estimation -------------------------------------------------

N_SECTORS = 64  # angular bins of pi/32


@dataclass(frozen=True)
class SectorReport:
    slopes: np.ndarray  # per-sector fitted decay exponent of |T_g u|
    angles: np.ndarray
    nondecaying: list  # sector indices with slope > -N_max
    threshold: float
    status: str
    extrapolated: bool = True  # cone behavior beyond 0.8 R is extrapolated


def sector_decay_slopes(field: PhaseSpaceField, r_min: float = 2.0,
                        n_shells: int = 6) -> tuple:
    """Per-sector log-log decay exponents of the shell maxima of |field|.

    Each sector uses its own radial range: the largest radius at which its
    central direction still lies inside the phase-space box, so sectors along
    a long axis of an anisotropic box keep their full resolving power.  The
    fit uses the outer shells (inner radius at 40 percent of the sector
    range) where the asymptotic behavior dominates.
    """
    X, XI = np.meshgrid(field.x, field.xi, indexing="ij")
    r = np.hypot(X, XI)
    theta = np.mod(np.arctan2(XI, X), 2 * np.pi)
    sector = np.minimum((theta / (2 * np.pi) * N_SECTORS).astype(int), N_SECTORS - 1)
    Rx = np.abs(field.x).max()
    Rxi = np.abs(field.xi).max()
    mag = np.abs(field.values)
    peak = mag.max() or 1.0
    slopes = np.full(N_SECTORS, -np.inf)
    angles = (np.arange(N_SECTORS) + 0.5) * 2 * np.pi / N_SECTORS
    for sct in range(N_SECTORS):
        c, s = np.cos(angles[sct]), np.sin(angles[sct])
        reach = 0.8 * min(Rx / max(abs(c), 1e-12), Rxi / max(abs(s), 1e-12))
        lo = max(r_min, 0.4 * reach)
        if reach <= lo * 1.2:
            continue
        edges = np.geomspace(lo, reach, n_shells + 1)
        in_sector = sector == sct
        idx = np.digitize(r[in_sector], edges) - 1
        ok = (idx >= 0) & (idx < n_shells)
        maxima = np.zeros(n_shells)
        np.maximum.at(maxima, idx[ok], mag[in_sector][ok])
        mask = maxima > 1e-14 * peak
        if mask.sum() < 4:
            continue  # all-tiny sector: treat as rapidly decaying
        radii = np.log(np.hypot(1.0, np.sqrt(edges[:-1] * edges[1:])))
        slopes[sct] = np.polyfit(radii[mask], np.log(maxima[mask]), 1)[0]
    return slopes, angles


def wavefront_estimate(u: GridFunction, g: GridFunction, N_max: float = 6.0,
                       r_min: float = 2.0) -> SectorReport:
    """Sectors where T_g u is not rapidly decaying (decay exponent < N_max)."""
    field = gabor_transform(u, g)
    if np.abs(field.values).max() < 1e-250:
        return SectorReport(np.full(N_SECTORS, -np.inf), np.zeros(N_SECTORS),
                            [], -N_max, "inconclusive")
    slopes, angles = sector_decay_slopes(field, r_min=r_min)
    bad = [int(i) for i in np.nonzero(slopes > -N_max)[0]]
    return SectorReport(slopes, angles, bad, -N_max, "pass")


def schwartz_decay_check(u: GridFunction, g: GridFunction,
                         N_max: float = 6.0) -> dict:
    rep = wavefront_estimate(u, g, N_max=N_max)
    return {
        "status": rep.status,
        "rapidly_decaying": rep.status == "pass" and not rep.nondecaying,
        "worst_slope": float(rep.slopes.max()),
        "nondecaying_sectors": rep.nondecaying,
    }


# -- twisted transforms ---------------------------------------------------


def _proj_complement(Y: np.ndarray, d: int) -> np.ndarray:
    if Y is None or Y.size == 0:
        return np.eye(d)
    Y = np.asarray(Y, dtype=float).reshape(d, -1)
    return np.eye(d) - Y @ Y.T


def twisted_y(u: GridFunction, g: GridFunction, Y) -> PhaseSpaceField:
    """T_g u multiplied by e^{-i <pi_{Y-perp} x, xi>} (conormal twist)."""
    field = gabor_transform(u, g)
    d = u.spec.d
    P = _proj_complement(Y, d)
    X, XI = np.meshgrid(field.x, field.xi, indexing="ij")
    phase = np.exp(-1j * (P[0, 0] * X * XI))
    return PhaseSpaceField(field.spec, field.x, field.xi, field.values * phase)


def twisted_lambda(u: GridFunction, g: GridFunction, Y, F) -> PhaseSpaceField:
    """Twist adapted to the Lagrangian {(X, FX + Z): X in Y, Z in Y-perp}:
    factor e^{-i(<pi_{Y-perp} x, xi> + <x, Fx>/2)}."""
    field = gabor_transform(u, g)
    d = u.spec.d
    P = _proj_complement(Y, d)
    F = np.asarray(F, dtype=float).reshape(d, d)
    X, XI = np.meshgrid(field.x, field.xi, indexing="ij")
    phase = np.exp(-1j * (P[0, 0] * X * XI + 0.5 * F[0, 0] * X**2))
    return PhaseSpaceField(field.spec, field.x, field.xi, field.values * phase)


@dataclass(frozen=True)
class Field4D:
    """Phase-space field of a kernel on R^2: axes (z1, z2, zeta1, zeta2)."""

    axes: tuple  # four 1D coordinate arrays
    values: np.ndarray  # 4D complex

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def steps(self) -> list:
        return [float(a[1] - a[0]) for a in self.axes]


def kernel_fbi_field(K: GridFunction, g_callable, stride: int = 2) -> Field4D:
    """T_{g tensor g} K on a decimated 4D grid; K lives on a d = 2 grid."""
    spec = K.spec
    if spec.d != 2:
        raise ValueError("kernel field needs a d = 2 grid function")
    z = spec.points()[::stride]
    zeta = spec.dual_points(stride)
    xl = spec.points()
    win = np.conj(g_callable(xl[None, :] - z[:, None]))  # (nz, n)
    mod = np.exp(-1j * np.outer(zeta, xl))  # (nzeta, n)
    # M[(j, m), l] = h (2 pi)^{-1/2} e^{i z_j zeta_m} conj(g(x_l - z_j))
    #                e^{-i zeta_m x_l}  (the T_x M_xi phase convention)
    row_phase = np.exp(1j * np.outer(z, zeta))
    M = (2 * np.pi) ** (-0.5) * spec.h * (win[:, None, :] * mod[None, :, :])
    M = M * row_phase[:, :, None]
    M = M.reshape(len(z) * len(zeta), spec.n)
    Kmat = K.reshaped()
    field = M @ Kmat @ M.T  # rows (z1, zeta1), cols (z2, zeta2)
    field = field.reshape(len(z), len(zeta), len(z), len(zeta))
    field = np.transpose(field, (0, 2, 1, 3))  # (z1, z2, zeta1, zeta2)
    return Field4D((z, z, zeta, zeta), field)


def chi_twist_field(field: Field4D, chi: SymplecticMatrix) -> Field4D:
    """Multiply by e^{-i/2 (<z, zeta> + sigma(chi(z2, -zeta2), (z1, zeta1)))}."""
    z1, z2, c1, c2 = np.meshgrid(*field.axes, indexing="ij")
    A, B, C, D = chi.A[0, 0], chi.B[0, 0], chi.C[0, 0], chi.D[0, 0]
    # chi applied to (z2, -zeta2)
    wx = A * z2 - B * c2
    wxi = C * z2 - D * c2
    # sigma((x, xi), (x', xi')) = <x', xi> - <x, xi'>
    sig = z1 * wxi - wx * c1
    phase = np.exp(-0.5j * (z1 * c1 + z2 * c2 + sig))
    return Field4D(field.axes, field.values * phase)


@dataclass(frozen=True)
class DecayProfile:
    off_slope: float
    along_slopes: dict  # derivative order k -> slope
    off_shells: list
    status: str


def _axis_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = (-np.roll(values, -2, axis) + 8 * np.roll(values, -1, axis)
           - 8 * np.roll(values, 1, axis) + np.roll(values, 2, axis)) / (12 * h)
    sl = [slice(None)] * values.ndim
    for edge in (slice(0, 2), slice(-2, None)):
        sl[axis] = edge
        out[tuple(sl)] = np.nan
    sl[axis] = slice(None)
    return out


def directional_derivative(field: Field4D, direction: np.ndarray) -> Field4D:
    direction = np.asarray(direction, dtype=float)
    steps = field.steps()
    out = np.zeros_like(field.values)
    for axis, c in enumerate(direction):
        if abs(c) > 1e-14:
            out = out + c * _axis_derivative(field.values, axis, steps[axis])
    return Field4D(field.axes, out)


def _fit(radii, maxima, min_shells=4):
    mask = maxima > 0
    if mask.sum() < min_shells:
        return None
    return float(np.polyfit(np.log(np.hypot(1.0, radii[mask])),
                            np.log(maxima[mask]), 1)[0])


def decay_profile(field: Field4D, lam: LagrangianSubspace,
                  vlam: LagrangianSubspace, k_max: int = 1,
                  off_range=(2.0, 8.0), n_shells: int = 6,
                  along_cap: float = 1.5, off_cap: float = 3.0,
                  interior_frac: float = 0.7,
                  rel_floor: float = 2e-2) -> DecayProfile:
    """Off-subspace decay and along-subspace growth of a 4D field.

    Off: shell maxima of |field| binned by distance to lam, restricted to
    points near the origin of lam (distance to vlam below off_cap).
    Along: per derivative order k, shell maxima of |L^k field| along
    directions in lam, restricted to a strip around lam, binned by the
    distance to the transversal vlam.  Points beyond interior_frac of any
    axis extent are excluded: near the position boundary the field sees
    truncation of the sampled kernel, and near the frequency boundary it
    sees quadrature aliasing, neither of which reflects the kernel itself.
    """
    pts = field.points()
    dist_l = np.linalg.norm(pts - pts @ lam.basis @ lam.basis.T, axis=1)
    dist_v = np.linalg.norm(pts - pts @ vlam.basis @ vlam.basis.T, axis=1)
    caps = [interior_frac * np.abs(ax).max() for ax in field.axes]
    interior = np.all(np.abs(pts) <= np.array(caps), axis=1)
    mag0 = np.abs(field.values).reshape(-1)
    peak = mag0.max() or 1.0

    lo, hi = off_range
    edges = np.geomspace(lo, hi, n_shells + 1)
    radii = np.sqrt(edges[:-1] * edges[1:])
    sel = (dist_v <= off_cap) & interior
    idx = np.digitize(dist_l[sel], edges) - 1
    okk = (idx >= 0) & (idx < n_shells)
    maxima = np.zeros(n_shells)
    np.maximum.at(maxima, idx[okk], mag0[sel][okk])
    off_slope = _fit(radii, maxima)
    off_shells = [(float(r), float(v)) for r, v in zip(radii, maxima)]

    r_along = float(np.max(dist_v[interior]))
    edges_a = np.geomspace(2.0, 0.8 * r_along, n_shells + 1)
    radii_a = np.sqrt(edges_a[:-1] * edges_a[1:])
    strip = (dist_l <= along_cap) & interior
    along = {}
    current = field
    for k in range(k_max + 1):
        if k == 0:
            mags = [np.abs(field.values).reshape(-1)]
        else:
            mags = []
            for j in range(lam.basis.shape[1]):
                dfield = field
                for _ in range(k):
                    dfield = directional_derivative(dfield, lam.basis[:, j])
                mags.append(np.abs(dfield.values).reshape(-1))
        worst = None
        for mag in mags:
            good = strip & np.isfinite(mag)
            if mag[good].max(initial=0.0) <= rel_floor * peak:
                # derivative sits at the discretization noise floor: the
                # finite differences cannot resolve anything this small,
                # so it decays faster than measurable
                if worst is None:
                    worst = -np.inf
                continue
            idx = np.digitize(dist_v[good], edges_a) - 1
            okk = (idx >= 0) & (idx < n_shells)
            mx = np.zeros(n_shells)
            np.maximum.at(mx, idx[okk], mag[good][okk])
            slope = _fit(radii_a, mx)
            if slope is None:
                worst = None
                break
            worst = slope if worst is None else max(worst, slope)
        along[k] = worst

    status = "pass"
    if off_slope is None or any(v is None for v in along.values()):
        status = "inconclusive"
    return DecayProfile(off_slope if off_slope is not None else np.nan,
                        along, off_shells, status)
