"""Shubin symbol classes on phase space and isotropic decay diagnostics.

A symbol of order m and regularity rho satisfies
|d^alpha a(z)| <~ <z>^{m - rho |alpha|} in all phase-space variables jointly.
The built-in kinds satisfy their claimed orders analytically; the decay test
checks sampled data empirically by shell-maximum regression.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ShubinSymbol:
    """Symbol with an everywhere-defined evaluator on R^dim.

    kind is one of constant, polynomial, gaussian_modulated,
    harmonic_oscillator, custom; params hold the kind data.
    """

    dim: int
    order: float
    rho: float
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if self.kind not in {"constant", "polynomial", "gaussian_modulated",
                             "harmonic_oscillator", "custom"}:
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at points; z has shape (..., dim)."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            raise ValueError(f"points have dimension {z.shape[-1]}, symbol has {self.dim}")
        if self.kind == "constant":
            c = self.params.get("c", 1.0)
            return np.full(z.shape[:-1], c, dtype=complex)
        if self.kind == "harmonic_oscillator":
            return np.asarray(np.sum(z**2, axis=-1), dtype=complex)
        if self.kind == "polynomial":
            return _eval_poly(self.params["terms"], z)
        if self.kind == "gaussian_modulated":
            center = np.asarray(self.params.get("center", np.zeros(self.dim)), dtype=float)
            width = float(self.params.get("width", 1.0))
            poly = self.params.get("terms", [(1.0, (0,) * self.dim)])
            shifted = z - center
            gauss = np.exp(-np.sum(shifted**2, axis=-1) / width**2)
            return _eval_poly(poly, z) * gauss
        return np.asarray(self.params["func"](z), dtype=complex)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom symbols are not serializable")
        params = {}
        for key, val in self.params.items():
            if isinstance(val, np.ndarray):
                params[key] = val.tolist()
            elif key == "terms":
                params[key] = [[complex(c).real, complex(c).imag, list(e)] for c, e in val]
            else:
                params[key] = val
        return {"dim": self.dim, "order": self.order, "rho": self.rho,
                "kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data: dict) -> "ShubinSymbol":
        params = dict(data.get("params", {}))
        if "terms" in params:
            params["terms"] = [(complex(t[0], t[1]), tuple(t[2])) for t in params["terms"]]
        return cls(int(data["dim"]), float(data["order"]), float(data["rho"]),
                   data["kind"], params)


def _eval_poly(terms, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape[:-1], dtype=complex)
    for coeff, exponents in terms:
        mono = np.ones(z.shape[:-1])
        for axis, e in enumerate(exponents):
            if e:
                mono = mono * z[..., axis] ** e
        out = out + coeff * mono
    return out


def constant_symbol(dim: int, c=1.0) -> ShubinSymbol:
    return ShubinSymbol(dim, 0.0, 1.0, "constant", {"c": c})


def polynomial_symbol(dim: int, terms) -> ShubinSymbol:
    """terms: list of (coefficient, exponent tuple); order = max total degree."""
    order = max(sum(e) for _, e in terms) if terms else 0
    return ShubinSymbol(dim, float(order), 1.0, "polynomial", {"terms": list(terms)})


def harmonic_oscillator_symbol(dim: int = 2) -> ShubinSymbol:
    return ShubinSymbol(dim, 2.0, 1.0, "harmonic_oscillator")


def gaussian_symbol(dim: int, center=None, width: float = 1.0, terms=None) -> ShubinSymbol:
    params = {"center": np.zeros(dim) if center is None else np.asarray(center, float),
              "width": width}
    if terms is not None:
        params["terms"] = list(terms)
    return ShubinSymbol(dim, 0.0, 1.0, "gaussian_modulated", params)


def custom_symbol(dim: int, order: float, rho: float, func) -> ShubinSymbol:
    return ShubinSymbol(dim, order, rho, "custom", {"func": func})


# -- decay diagnostics ---------------------------------------------------


def _derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order central first difference; two border layers become invalid
    and are set to nan."""
    f = values
    out = (-np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis)
           - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)) / (12 * h)
    sl = [slice(None)] * f.ndim
    for edge in (slice(0, 2), slice(-2, None)):
        sl[axis] = edge
        out[tuple(sl)] = np.nan
    sl[axis] = slice(None)
    return out


def multi_derivative(values: np.ndarray, alpha, steps) -> np.ndarray:
    out = np.asarray(values, dtype=complex).copy()
    for axis, k in enumerate(alpha):
        for _ in range(k):
            out = _derivative(out, axis, steps[axis])
    return out


@dataclass(frozen=True)
class DecayReport:
    status: str  # pass, fail, inconclusive
    slopes: dict  # multi-index -> fitted log-log slope
    bounds: dict  # multi-index -> allowed slope m - rho |alpha| + margin
    shells: list  # (radius, count) per shell

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "slopes": {"".join(map(str, a)): s for a, s in self.slopes.items()},
            "bounds": {"".join(map(str, a)): b for a, b in self.bounds.items()},
            "shells": self.shells,
        }


def shell_slope(radii: np.ndarray, maxima: np.ndarray):
    """Log-log regression slope of shell maxima against <r> = (1 + r^2)^{1/2}."""
    mask = maxima > 0
    if mask.sum() < 4:
        return None
    logr = np.log(np.hypot(1.0, radii[mask]))
    logm = np.log(maxima[mask])
    slope = np.polyfit(logr, logm, 1)[0]
    return float(slope)


def shubin_decay_test(values: np.ndarray, axes, m: float, rho: float,
                      max_order: int = 2, margin: float = 0.3,
                      r_min: float = 2.0, r_max: float = None,
                      n_shells: int = 8, noise: float = 0.0) -> DecayReport:
    """Empirical Shubin-decay check of sampled data.

    values: complex array over the product grid of the 1D coordinate arrays
    in axes.  For each derivative multi-order |alpha| <= max_order (central
    differences) the shell maxima over |z| in [r_min, r_max] are regressed
    log-log; pass iff every slope <= m - rho |alpha| + margin.

    noise is the absolute uncertainty of the samples (zero for exactly
    evaluated symbols).  A finite difference of order alpha amplifies it by
    (2/h)^|alpha|; derivative data below that resolution limit is treated as
    vanishing rather than fitted, since its flat noise profile carries no
    information about the symbol.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    dim = len(axes)
    values = np.asarray(values, dtype=complex).reshape([len(a) for a in axes])
    steps = [a[1] - a[0] for a in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    radius = np.sqrt(sum(c**2 for c in mesh))
    if r_max is None:
        r_max = max(0.5 * min(a.max() for a in axes), 2.0 * r_min)
    edges = np.geomspace(max(r_min, 1e-6), r_max, n_shells + 1)
    shell_idx = np.digitize(radius, edges) - 1
    valid_shell = (shell_idx >= 0) & (shell_idx < n_shells)

    slopes = {}
    bounds = {}
    shells_out = []
    status = "pass"
    scale = float(np.abs(values).max()) or 1.0
    for total in range(max_order + 1):
        for alpha in itertools.product(range(total + 1), repeat=dim):
            if sum(alpha) != total:
                continue
            deriv = multi_derivative(values, alpha, steps)
            mag = np.abs(deriv)
            ok = valid_shell & np.isfinite(mag)
            maxima = np.zeros(n_shells)
            np.maximum.at(maxima, shell_idx[ok], mag[ok])
            radii = np.sqrt(edges[:-1] * edges[1:])
            nonempty = np.array([np.any(ok & (shell_idx == j)) for j in range(n_shells)])
            thresh = max(1e-12 * scale,
                         noise * np.prod([(2.0 / s) ** a for s, a in zip(steps, alpha)]))
            if maxima.max(initial=0.0) <= thresh:
                # derivative vanishes to within resolution: decays faster
                # than any power as far as the data can tell
                slope = -np.inf
            else:
                slope = shell_slope(radii[nonempty], maxima[nonempty])
            if sum(alpha) == 0:
                shells_out = [(float(r), float(v)) for r, v in
                              zip(radii[nonempty], maxima[nonempty])]
            if slope is None:
                return DecayReport("inconclusive", slopes, bounds, shells_out)
            bound = m - rho * sum(alpha) + margin
            slopes[alpha] = slope
            bounds[alpha] = bound
            if slope > bound:
                status = "fail"
    return DecayReport(status, slopes, bounds, shells_out)
