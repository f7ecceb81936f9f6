import numpy as np

from fiocalc import cli
from fiocalc.grids import GridFunction, GridSpec, hermite_grid_function
from fiocalc.phases import phase_to_dict, pseudodifferential_phase
from fiocalc.serialize import (
    fio_spec_to_dict,
    grid_function_from_csv,
    grid_function_to_csv,
    pgm_levels,
    read_json,
    symplectic_to_list,
    write_json,
)
from fiocalc.fio import FioSpec
from fiocalc.symbols import constant_symbol, harmonic_oscillator_symbol
from fiocalc.symplectic import chirp_matrix, standard_j


def write_psi0(path, n=128, R=10.0):
    grid = GridSpec(1, n, R)
    grid_function_to_csv(hermite_grid_function(grid, [0]), str(path))
    return grid


def write_chi(path, chi):
    write_json({"chi": symplectic_to_list(chi)}, str(path))


def fourier_kernel_csv(path, n=128, R=10.0):
    grid = GridSpec(1, n, R)
    x = grid.points()
    vals = (2 * np.pi) ** -0.5 * np.exp(-1j * np.outer(x, x)).reshape(-1)
    grid_function_to_csv(GridFunction(GridSpec(2, n, R), vals), str(path))
    return grid


def test_reduce_phase_writes_report(tmp_path):
    phase = tmp_path / "phase.json"
    write_json(phase_to_dict(pseudodifferential_phase(1)), str(phase))
    out = tmp_path / "out"
    assert cli.main(["reduce-phase", str(phase), "--out", str(out)]) == 0
    rec = read_json(str(out / "reduction.json"))
    # the quadratic fiber block of this phase is zero, nothing to eliminate
    assert rec["record"]["n"] == 1
    manifest = read_json(str(out / "manifest.json"))
    assert "reduction.json" in manifest["files"]


def test_missing_input_is_an_input_error(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["reduce-phase", str(tmp_path / "nope.json"),
                     "--out", str(out)]) == 3


def test_malformed_json_is_an_input_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["reduce-phase", str(bad),
                     "--out", str(tmp_path / "out")]) == 3


def test_mu_apply_fixes_the_ground_state(tmp_path):
    psi = tmp_path / "psi0.csv"
    write_psi0(psi)
    chi = tmp_path / "chi.json"
    write_chi(chi, standard_j(1))
    out = tmp_path / "out"
    assert cli.main(["mu-apply", str(chi), str(psi), "--out", str(out)]) == 0
    result = grid_function_from_csv(str(out / "mu_output.csv"))
    original = grid_function_from_csv(str(psi))
    assert np.abs(result.values - original.values).max() < 1e-8


def test_char_check_exit_codes(tmp_path):
    kernel = tmp_path / "kernel.csv"
    fourier_kernel_csv(kernel)
    good = tmp_path / "good.json"
    write_chi(good, standard_j(1))
    bad = tmp_path / "bad.json"
    write_chi(bad, chirp_matrix(np.array([[0.8]])))
    assert cli.main(["char-check", str(kernel), str(good),
                     "--out", str(tmp_path / "o1")]) == 0
    assert cli.main(["char-check", str(kernel), str(bad),
                     "--out", str(tmp_path / "o2")]) == 1


def test_lag_test_point_mass_on_cotangent_fiber(tmp_path):
    grid = GridSpec(1, 128, 10.0)
    vals = np.zeros(grid.n, dtype=complex)
    vals[grid.n // 2] = 1.0 / grid.h
    delta = tmp_path / "delta.csv"
    grid_function_to_csv(GridFunction(grid, vals), str(delta))
    lam = tmp_path / "lam.json"
    write_json({"n": 1, "Y": [[]], "F": [[0.0]]}, str(lam))
    assert cli.main(["lag-test", str(delta), str(lam),
                     "--out", str(tmp_path / "out")]) == 0


def test_factorize_exit_codes(tmp_path):
    # a non-smoothing symbol is needed here: a smoothing operator would
    # factorize through every matrix, so it cannot serve as a negative case
    chi = standard_j(1)
    spec = FioSpec("factored", 0.0, 1.0, b=constant_symbol(2), chi=chi)
    spec_path = tmp_path / "spec.json"
    write_json(fio_spec_to_dict(spec), str(spec_path))
    kout = tmp_path / "kernel-out"
    assert cli.main(["fio-kernel", str(spec_path), "--grid-n", "256",
                     "--grid-R", "12", "--out", str(kout)]) == 0
    kernel = kout / "kernel.csv"
    good = tmp_path / "good.json"
    write_chi(good, chi)
    wrong = tmp_path / "wrong.json"
    write_chi(wrong, chirp_matrix(np.array([[0.8]])))
    assert cli.main(["factorize", str(kernel), str(good),
                     "--out", str(tmp_path / "f1")]) == 0
    assert cli.main(["factorize", str(kernel), str(wrong),
                     "--out", str(tmp_path / "f2")]) == 1


def test_compose_reports_product(tmp_path):
    s1 = tmp_path / "s1.json"
    write_json(fio_spec_to_dict(FioSpec(
        "factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2),
        chi=standard_j(1))), str(s1))
    s2 = tmp_path / "s2.json"
    write_json(fio_spec_to_dict(FioSpec(
        "factored", 2.0, 1.0, b=harmonic_oscillator_symbol(2),
        chi=chirp_matrix(np.array([[0.8]])))), str(s2))
    out = tmp_path / "out"
    assert cli.main(["compose", str(s1), str(s2), "--out", str(out)]) == 0
    rep = read_json(str(out / "compose.json"))
    assert rep["order"] == 4.0 and rep["status"] == "pass"


def test_wf_reports_frequency_axis_for_point_mass(tmp_path):
    grid = GridSpec(1, 128, 10.0)
    vals = np.zeros(grid.n, dtype=complex)
    vals[grid.n // 2] = 1.0 / grid.h
    delta = tmp_path / "delta.csv"
    grid_function_to_csv(GridFunction(grid, vals), str(delta))
    out = tmp_path / "out"
    cli.main(["wf", str(delta), "--out", str(out)])
    rep = read_json(str(out / "wf.json"))
    assert rep["nondecaying_sectors"] == [14, 15, 16, 17, 46, 47, 48, 49]


def test_fbi_map_of_kernel_draws_the_canonical_relation(tmp_path):
    kernel = tmp_path / "kernel.csv"
    grid = fourier_kernel_csv(kernel)
    out = tmp_path / "out"
    assert cli.main(["fbi-map", str(kernel), "--stride", "4",
                     "--out", str(out)]) == 0
    levels = pgm_levels(str(out / "fbi_map.pgm"))
    meta = read_json(str(out / "fbi_map.json"))
    freq = np.asarray(meta["axis_frequency"])
    pos = np.asarray(meta["axis_position"])
    # the relation of the Fourier transform puts the bright line on zeta1 = 0
    target_row = len(freq) - 1 - int(np.argmin(np.abs(freq)))
    interior = np.abs(pos) <= 0.7 * grid.R
    rows = levels.argmax(axis=0)[interior]
    assert np.abs(rows - target_row).max() <= 2


def test_every_artifact_embeds_the_configuration(tmp_path):
    psi = tmp_path / "psi0.csv"
    write_psi0(psi)
    chi = tmp_path / "chi.json"
    write_chi(chi, standard_j(1))
    out = tmp_path / "out"
    cli.main(["mu-apply", str(chi), str(psi), "--seed", "7",
              "--out", str(out)])
    text = (out / "mu_output.csv").read_text()
    assert "# config" in text and '"seed": 7' in text
    rec = read_json(str(out / "factorization.json"))
    assert rec["config"]["seed"] == 7
