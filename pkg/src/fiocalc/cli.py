"""Command-line front end.

Loads JSON specs and CSV grid data, dispatches to the library modules, and
writes CSV/PGM/JSON artifacts plus a short human-readable summary.  Every
artifact embeds the run configuration, and the output directory gets a
manifest.json listing every file with its SHA-256.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import acceptance
from .fio import (
    fio_adjoint,
    fio_compose,
    fio_factorize,
    fio_kernel,
    kernel_characterization_check,
)
from .gabor import Field4D, gabor_transform, kernel_fbi_field, wavefront_estimate
from .grids import GridFunction, GridSpec, gaussian_window
from .lagdist import lagrangian_membership_test, lagrangian_param
from .metaplectic import mu_general
from .phases import (
    check_nondegeneracy,
    helffer_conditions,
    lagrangian_of_phase,
    phase_from_dict,
    phase_to_dict,
    reduce_phase,
)
from .serialize import (
    append_config_comment,
    field_to_csv,
    field_to_pgm,
    fio_spec_from_dict,
    grid_function_from_csv,
    grid_function_to_csv,
    read_json,
    symplectic_from_list,
    write_json,
    write_manifest,
)
from .symbols import ShubinSymbol
from .symplectic import lagrangian_with_param
from .weyl import symbol_callable, weyl_kernel

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3

_STATUS_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL,
                "inconclusive": EXIT_INCONCLUSIVE}


def _window_callable():
    return lambda t: np.pi ** -0.25 * np.exp(-0.5 * np.asarray(t) ** 2)


def _load_chi(path: str):
    data = read_json(path)
    if isinstance(data, dict):
        data = data["chi"]
    return symplectic_from_list(data)


def _config(args) -> dict:
    cfg = {"command": args.command, "inputs": list(getattr(args, "inputs", []))}
    for key in ("grid_n", "grid_R", "stride", "tol", "seed", "phase_fix",
                "order", "rho", "quick"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    return cfg


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _emit_json(args, name: str, payload: dict) -> None:
    payload = dict(payload)
    payload["config"] = _config(args)
    write_json(payload, os.path.join(_outdir(args), name))


def _emit_grid_csv(args, name: str, f: GridFunction) -> None:
    path = os.path.join(_outdir(args), name)
    grid_function_to_csv(f, path)
    append_config_comment(path, _config(args))


def _emit_field_csv(args, name: str, field) -> None:
    path = os.path.join(_outdir(args), name)
    field_to_csv(field, path)
    append_config_comment(path, _config(args))


def _emit_pgm(args, name: str, values: np.ndarray) -> None:
    path = os.path.join(_outdir(args), name)
    field_to_pgm(values, path,
                 comment="config " + json.dumps(_config(args), sort_keys=True))


def _grid(args, d: int = 1) -> GridSpec:
    return GridSpec(d, args.grid_n, args.grid_R)


# -- subcommand handlers -----------------------------------------------------


def cmd_reduce_phase(args) -> int:
    phi = phase_from_dict(read_json(args.inputs[0]))
    rec = reduce_phase(phi)
    _emit_json(args, "reduction.json", {
        "original": phase_to_dict(phi), "record": rec.to_dict(),
    })
    print(f"reduced fiber dimension {phi.N} -> {rec.n}")
    return EXIT_PASS


def cmd_check_phase(args) -> int:
    phi = phase_from_dict(read_json(args.inputs[0]))
    nondeg = check_nondegeneracy(phi)
    report = {"nondegenerate": nondeg}
    status = "pass" if nondeg else "fail"
    if nondeg:
        try:
            hel = helffer_conditions(phi, np.random.default_rng(args.seed))
            report["estimates"] = {
                "left_sigma_min": hel.left_sigma_min,
                "right_sigma_min": hel.right_sigma_min,
                "estimates_hold": hel.estimates_hold,
                "empirical_constant": hel.empirical_constant,
            }
            if not hel.estimates_hold:
                status = "fail"
        except ValueError as exc:
            report["estimates"] = {"skipped": str(exc)}
    report["status"] = status
    _emit_json(args, "check_phase.json", report)
    print(f"phase check: {status}")
    return _STATUS_EXIT[status]


def cmd_lagrangian_of(args) -> int:
    phi = phase_from_dict(read_json(args.inputs[0]))
    lam = lagrangian_of_phase(phi)
    Y, F = lagrangian_param(lam)
    _emit_json(args, "lagrangian.json", {
        "n": lam.n, "basis": lam.basis.tolist(),
        "Y": Y.tolist(), "F": F.tolist(),
    })
    print(f"Lagrangian subspace in dimension {lam.n}")
    return EXIT_PASS


def cmd_mu_apply(args) -> int:
    chi = _load_chi(args.inputs[0])
    u = grid_function_from_csv(args.inputs[1])
    op = mu_general(chi, u.spec, phase_fix=args.phase_fix)
    _emit_grid_csv(args, "mu_output.csv", op.apply(u))
    _emit_json(args, "factorization.json", op.factorization.to_dict())
    print(f"applied metaplectic operator ({len(op.factorization.factors)} factors)")
    return EXIT_PASS


def cmd_weyl_quantize(args) -> int:
    sym = ShubinSymbol.from_dict(read_json(args.inputs[0]))
    grid = _grid(args)
    K = weyl_kernel(symbol_callable(sym), grid)
    kernel = GridFunction(GridSpec(2, grid.n, grid.R), K.entries.reshape(-1))
    _emit_grid_csv(args, "kernel.csv", kernel)
    _emit_pgm(args, "kernel.pgm", K.entries)
    _emit_json(args, "weyl_quantize.json", {
        "symbol": sym.to_dict(), "grid": grid.to_dict(),
        "kernel_peak": float(np.abs(K.entries).max()),
    })
    print("wrote Weyl kernel")
    return EXIT_PASS


def cmd_fio_kernel(args) -> int:
    spec = fio_spec_from_dict(read_json(args.inputs[0]))
    grid = _grid(args)
    K, quad = fio_kernel(spec, grid)
    _emit_grid_csv(args, "kernel.csv", K)
    _emit_pgm(args, "kernel.pgm", K.values.reshape(grid.n, grid.n))
    info = {"grid": grid.to_dict(), "form": spec.form}
    if quad is not None:
        info["quadrature"] = {"half_width": quad.T,
                              "nodes_per_axis": quad.nodes_per_axis,
                              "convergence": quad.convergence,
                              "doublings": quad.doublings}
    _emit_json(args, "fio_kernel.json", info)
    print("wrote operator kernel")
    return EXIT_PASS


def cmd_factorize(args) -> int:
    K = grid_function_from_csv(args.inputs[0])
    chi = _load_chi(args.inputs[1])
    grid = GridSpec(1, K.spec.n, K.spec.R)
    rep = fio_factorize(K, chi, grid, m=args.order, rho=args.rho)
    _emit_json(args, "factorize.json", rep.to_dict())
    _emit_field_csv(args, "symbol.csv",
                    Field4D((rep.symbol.x, rep.symbol.xi), rep.symbol.values))
    print(f"factorization: {rep.status} (residual {rep.residual:.3e})")
    return EXIT_PASS if rep.status == "pass" else EXIT_FAIL


def cmd_compose(args) -> int:
    s1 = fio_spec_from_dict(read_json(args.inputs[0]))
    s2 = fio_spec_from_dict(read_json(args.inputs[1]))
    rep = fio_compose(s1, s2, _grid(args))
    _emit_json(args, "compose.json", {
        "chi": rep.spec.chi.entries.tolist(), "order": rep.spec.order,
        "rho": rep.spec.rho, "residual": rep.residual, "status": rep.status,
    })
    print(f"composition: {rep.status} (residual {rep.residual:.3e})")
    return EXIT_PASS if rep.status == "pass" else EXIT_INCONCLUSIVE


def cmd_adjoint(args) -> int:
    spec = fio_spec_from_dict(read_json(args.inputs[0]))
    adj = fio_adjoint(spec)
    grid = _grid(args)
    K, _ = fio_kernel(adj, grid)
    _emit_grid_csv(args, "adjoint_kernel.csv", K)
    _emit_json(args, "adjoint.json", {
        "phase": phase_to_dict(adj.phase),
        "chi": adj.chi.entries.tolist(),
        "order": adj.order, "rho": adj.rho,
        "amplitude": "conjugate of the input amplitude with x and y swapped",
    })
    print("wrote adjoint kernel")
    return EXIT_PASS


def _kernel_heatmap(field: Field4D) -> np.ndarray:
    """2D map for a 4D kernel field: slice the second position axis at the
    sample nearest zero, then maximize over the second frequency axis.  The
    result is indexed (first frequency, first position) with the frequency
    axis increasing upward."""
    z2 = field.axes[1]
    j = int(np.argmin(np.abs(z2)))
    sub = np.abs(field.values[:, j, :, :]).max(axis=2)  # (z1, zeta1)
    return sub.T[::-1]


def cmd_fbi_map(args) -> int:
    u = grid_function_from_csv(args.inputs[0])
    if u.spec.d == 1:
        field = gabor_transform(u, gaussian_window(u.spec), stride=args.stride)
        _emit_field_csv(args, "fbi_map.csv", Field4D((field.x, field.xi), field.values))
        _emit_pgm(args, "fbi_map.pgm", np.abs(field.values).T[::-1])
        _emit_json(args, "fbi_map.json", {
            "kind": "function", "grid": u.spec.to_dict(), "stride": args.stride,
        })
    elif u.spec.d == 2:
        field = kernel_fbi_field(u, _window_callable(), stride=args.stride)
        heat = _kernel_heatmap(field)
        _emit_pgm(args, "fbi_map.pgm", heat)
        _emit_json(args, "fbi_map.json", {
            "kind": "kernel", "grid": u.spec.to_dict(), "stride": args.stride,
            "heatmap": "rows: first frequency axis (descending), "
                       "columns: first position axis; second position fixed "
                       "at 0, maximized over second frequency",
            "axis_position": [float(a) for a in field.axes[0]],
            "axis_frequency": [float(a) for a in field.axes[2]],
        })
    else:
        raise ValueError("fbi-map expects a function (d=1) or kernel (d=2)")
    print("wrote phase-space map")
    return EXIT_PASS


def cmd_char_check(args) -> int:
    K = grid_function_from_csv(args.inputs[0])
    chi = _load_chi(args.inputs[1])
    rep = kernel_characterization_check(K, chi, args.order, args.rho,
                                        _window_callable(), stride=args.stride)
    _emit_json(args, "char_check.json", rep.to_dict())
    print(f"kernel characterization: {rep.status}")
    return _STATUS_EXIT[rep.status]


def cmd_wf(args) -> int:
    u = grid_function_from_csv(args.inputs[0])
    rep = wavefront_estimate(u, gaussian_window(u.spec), N_max=4.0)
    _emit_json(args, "wf.json", {
        "status": rep.status,
        "nondecaying_sectors": rep.nondecaying,
        "sector_angles": rep.angles.tolist(),
        "slopes": [None if not np.isfinite(s) else float(s) for s in rep.slopes],
    })
    print(f"nondecaying sectors: {rep.nondecaying}")
    return EXIT_PASS if rep.status == "pass" else EXIT_INCONCLUSIVE


def cmd_lag_test(args) -> int:
    u = grid_function_from_csv(args.inputs[0])
    data = read_json(args.inputs[1])
    lam = lagrangian_with_param(np.asarray(data["Y"], dtype=float),
                                np.asarray(data["F"], dtype=float),
                                int(data["n"]))
    rep = lagrangian_membership_test(u, lam, args.order, _window_callable(),
                                     rho=args.rho)
    _emit_json(args, "lag_test.json", rep.to_dict())
    print(f"membership: {rep.status}")
    return _STATUS_EXIT[rep.status]


def cmd_suite(args) -> int:
    out = _outdir(args)

    def progress(res, dt):
        print(f"  {res.name}: {res.status} ({dt:.1f}s)", flush=True)

    results = acceptance.run_suite(seed=args.seed, quick=args.quick,
                                   progress=progress)
    for res in results:
        payload = res.to_dict()
        payload["config"] = _config(args)
        write_json(payload, os.path.join(out, f"check_{res.name}.json"))
    summary = {
        "status": "pass" if all(r.status == "pass" for r in results) else "fail",
        "checks": {r.name: r.status for r in results},
        "config": _config(args),
    }
    write_json(summary, os.path.join(out, "summary.json"))
    print(f"suite: {summary['status']}")
    return EXIT_PASS if summary["status"] == "pass" else EXIT_FAIL


_COMMANDS = {
    "reduce-phase": (cmd_reduce_phase, 1),
    "check-phase": (cmd_check_phase, 1),
    "lagrangian-of": (cmd_lagrangian_of, 1),
    "mu-apply": (cmd_mu_apply, 2),
    "weyl-quantize": (cmd_weyl_quantize, 1),
    "fio-kernel": (cmd_fio_kernel, 1),
    "factorize": (cmd_factorize, 2),
    "compose": (cmd_compose, 2),
    "adjoint": (cmd_adjoint, 1),
    "fbi-map": (cmd_fbi_map, 1),
    "char-check": (cmd_char_check, 2),
    "wf": (cmd_wf, 1),
    "lag-test": (cmd_lag_test, 2),
    "suite": (cmd_suite, 0),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiocalc",
        description="Fourier integral operator toolkit: phase reduction, "
                    "metaplectic operators, Weyl quantization, phase-space "
                    "kernel checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_func, nargs) in _COMMANDS.items():
        p = sub.add_parser(name)
        if nargs:
            p.add_argument("inputs", nargs=nargs, metavar="INPUT")
        else:
            p.set_defaults(inputs=[])
        p.add_argument("--grid-n", type=int, default=128, dest="grid_n")
        p.add_argument("--grid-R", type=float, default=10.0, dest="grid_R")
        p.add_argument("--stride", type=int, default=2)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="fiocalc-out")
        p.add_argument("--phase-fix", choices=["gaussian", "none"],
                       default="gaussian", dest="phase_fix")
        p.add_argument("--order", type=float, default=0.0)
        p.add_argument("--rho", type=float, default=1.0)
        if name == "suite":
            p.add_argument("--quick", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, _ = _COMMANDS[args.command]
    try:
        code = func(args)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    write_manifest(args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
