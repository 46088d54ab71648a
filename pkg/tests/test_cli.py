import csv
import io

import numpy as np
import pytest

from pckit import __version__
from pckit.cli import RESULT_COLUMNS, main
from pckit.errors import MalformedInput, RegionTooSmall
from pckit.farfield import (FieldPattern, Polarization, Wavenumber, write_manifest,
                            write_pattern_file)
from pckit.grid import SphericalGrid
from pckit.oracle import SyntheticSpec, synthetic_phase
from pckit.geometry import Displacement

from conftest import PAPER_FREQUENCY

FOUR_MODES = [["5", "-3", "2"], ["0", "0", "0"], ["12", "4", "-6"], ["-20", "15", "8"]]


def read_table(path):
    lines = [l for l in open(path, encoding="utf-8") if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))


def generate(out_dir, modes=FOUR_MODES, *extra):
    argv = ["generate", "--out-dir", str(out_dir)]
    for m in modes:
        argv += ["--displacement-mm", *m]
    assert main(argv + list(extra)) == 0
    return sorted(str(p) for p in out_dir.glob("*.manifest"))


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fx")
    generate(out)
    return out


def manifests(d):
    return sorted(str(p) for p in d.glob("*.manifest"))


def test_solve_four_modes(fixture_dir, tmp_path):
    out = tmp_path / "res.csv"
    resid = tmp_path / "resid.csv"
    code = main(["solve", *manifests(fixture_dir), "--center-phi", "20", "--center-theta", "60",
                 "--out", str(out), "--residual-out", str(resid)])
    assert code == 0
    rows = read_table(out)
    assert len(rows) == 4
    assert list(rows[0].keys()) == list(RESULT_COLUMNS)
    assert all(r["converged"] == "true" and r["clipped"] == "false" for r in rows)
    wavelength = float(next(l for l in open(out) if l.startswith("# wavelength_m=")).split("=")[1])
    for row, truth in zip(rows, FOUR_MODES):
        got = np.array([float(row[c]) for c in ("x_pc_m", "y_pc_m", "z_pc_m")])
        assert np.all(np.abs(got - np.array(truth, dtype=float) * 1e-3) < 1e-4 * wavelength)
        assert float(row["x_pc_lambda"]) == pytest.approx(float(row["x_pc_m"]) / wavelength)
    residuals = read_table(resid)
    assert len(residuals) == 4 * int(rows[0]["n_p"])
    values = np.array([float(r["psi_eq_deg"]) for r in residuals if r["mode"] == "1"])
    assert np.ptp(values) < 1e-5


def test_reproducibility_header(fixture_dir, tmp_path):
    out = tmp_path / "res.csv"
    main(["solve", *manifests(fixture_dir), "--center-phi", "20", "--center-theta", "60",
          "--out", str(out)])
    head = open(out).read().splitlines()
    assert head[0] == f"# pckit {__version__}"
    assert "# command=solve" in head
    assert "# diameter=20.0" in head


def test_solve_byte_identical(fixture_dir, tmp_path):
    out = tmp_path / "res.csv"
    argv = ["solve", *manifests(fixture_dir), "--center-phi", "20", "--center-theta", "60",
            "--out", str(out)]
    main(argv)
    first = out.read_bytes()
    main(argv)
    assert out.read_bytes() == first


def test_generate_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    extra = ("--noise-sigma", "1.5", "--seed", "11", "--taper", "cosine_theta")
    generate(a, FOUR_MODES[:2], *extra)
    generate(b, FOUR_MODES[:2], *extra)
    for name in ("mode1.csv", "mode2.csv"):
        # the config echo names the output directory; the data must match exactly
        strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("#")]
        assert strip(a / name) == strip(b / name)
    generate(a, FOUR_MODES[:2], *extra)
    first = (a / "mode1.csv").read_bytes()
    generate(a, FOUR_MODES[:2], *extra)
    assert (a / "mode1.csv").read_bytes() == first


def test_generated_origin_solves_to_origin(tmp_path):
    ms = generate(tmp_path, [["0", "0", "0"]], "--constant-phase", "95")
    out = tmp_path / "res.csv"
    assert main(["solve", *ms, "--center-phi", "20", "--center-theta", "60", "--out", str(out)]) == 0
    row = read_table(out)[0]
    assert abs(float(row["x_pc_m"])) < 1e-8 and abs(float(row["z_pc_m"])) < 1e-8


def test_missing_input(tmp_path, capsys):
    code = main(["solve", str(tmp_path / "absent.manifest"), "--center-phi", "20",
                 "--center-theta", "60"])
    assert code == MalformedInput.exit_code
    err = capsys.readouterr().err.strip().split("\t")
    assert err[:3] == ["error", str(MalformedInput.exit_code), "MalformedInput"]


def test_region_too_small_exit(fixture_dir, capsys):
    code = main(["solve", *manifests(fixture_dir), "--center-phi", "20", "--center-theta", "60",
                 "--diameter", "0.5"])
    assert code == RegionTooSmall.exit_code
    assert "RegionTooSmall" in capsys.readouterr().err


def test_bad_center_exit(fixture_dir):
    assert main(["solve", *manifests(fixture_dir), "--center-phi", "20",
                 "--center-theta", "95"]) == MalformedInput.exit_code


def test_sweep_counts_and_clipping(fixture_dir, tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", *manifests(fixture_dir)[:2], "--plane-phi", "0", "--theta-start", "0",
                 "--theta-stop", "90", "--theta-step", "5", "--out", str(out)])
    assert code == 0
    rows = read_table(out)
    for mode in ("1", "2"):
        mine = [r for r in rows if r["mode"] == mode]
        assert len(mine) == 19
        assert [float(r["theta0_deg"]) for r in mine] == list(range(0, 91, 5))
        clipped = {float(r["theta0_deg"]) for r in mine if r["clipped"] == "true"}
        assert clipped == {85.0, 90.0}
    mode1 = np.array([[float(r[c]) for c in ("x_pc_lambda", "y_pc_lambda", "z_pc_lambda")]
                      for r in rows if r["mode"] == "1"])
    assert np.all(mode1.std(axis=0) < 1e-3)


def test_sweep_explicit_thetas_and_failures(fixture_dir, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", manifests(fixture_dir)[0], "--thetas", "30", "60",
                 "--diameter", "0.5", "--out", str(out)]) == 0
    rows = read_table(out)
    assert len(rows) == 2
    assert all(r["converged"] == "false" and r["x_pc_m"] == "nan" for r in rows)
    assert "RegionTooSmall" in open(out).read()


def test_linear_components_combined(tmp_path):
    grid = SphericalGrid(2.0)
    wavelength = 299792458.0 / PAPER_FREQUENCY
    k = Wavenumber.from_wavelength(wavelength)
    d = Displacement(0.004, -0.006, 0.003)
    phase = np.radians(synthetic_phase(SyntheticSpec(d), grid, k))
    rhcp = np.exp(1j * phase)
    # E_theta = RHCP / sqrt2, E_phi = j RHCP / sqrt2 gives (E_theta - j E_phi) / sqrt2 = RHCP
    et = FieldPattern(grid, 1, Polarization.THETA, rhcp / np.sqrt(2))
    ep = FieldPattern(grid, 1, Polarization.PHI, 1j * rhcp / np.sqrt(2))
    for name, pat in (("et", et), ("ep", ep)):
        write_pattern_file(pat, tmp_path / f"{name}.csv")
        write_manifest(tmp_path / f"{name}.manifest", PAPER_FREQUENCY, 1, pat.polarization,
                       f"{name}.csv")
    out = tmp_path / "res.csv"
    assert main(["solve", str(tmp_path / "et.manifest"), str(tmp_path / "ep.manifest"),
                 "--center-phi", "20", "--center-theta", "60", "--out", str(out)]) == 0
    row = read_table(out)[0]
    assert float(row["y_pc_m"]) == pytest.approx(-0.006, abs=1e-4 * wavelength)


def test_optimizer_overrides(fixture_dir, tmp_path):
    out = tmp_path / "res.csv"
    assert main(["solve", manifests(fixture_dir)[0], "--center-phi", "20", "--center-theta", "60",
                 "--max-iter", "5", "--out", str(out)]) == 0
    assert read_table(out)[0]["converged"] == "false"
    assert "without converging" in out.read_text()


def test_search_radius_flag(fixture_dir):
    code = main(["solve", manifests(fixture_dir)[3], "--center-phi", "20", "--center-theta", "60",
                 "--search-radius-lambda", "0.1"])
    assert code == 14


def test_stdout_output(fixture_dir, capsys):
    assert main(["solve", manifests(fixture_dir)[1], "--center-phi", "20",
                 "--center-theta", "60"]) == 0
    assert "mode,phi0_deg" in capsys.readouterr().out
