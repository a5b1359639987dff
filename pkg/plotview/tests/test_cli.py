"""End-to-end CLI tests against genuine simulator output files."""

import numpy as np
import pytest

from plotview import cli
from plotview.readers import read_density_snapshot

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def rendered(path):
    return path.is_file() and path.read_bytes()[:8] == PNG_MAGIC


def test_density_kinds_from_run(run_dir, tmp_path):
    snap = run_dir / "density_t0.csv"
    for kind in ("density-polar", "density-cartesian"):
        out = tmp_path / f"{kind}.png"
        assert cli.main([kind, str(snap), "-o", str(out)]) == 0
        assert rendered(out)


def test_initial_density_has_three_lobes(run_dir):
    # the angular mass profile of the t=0 snapshot is dominated by the
    # three-fold harmonic, the pattern the polar heatmap shows as lobes
    rho, meta = read_density_snapshot(run_dir / "density_t0.csv")
    r = np.linspace(meta["r_min"], meta["r_max"], meta["m_r"],
                    endpoint=False) + 0.5 * (meta["r_max"] - meta["r_min"]) / meta["m_r"]
    angular_mass = (rho * r[:, None]).sum(axis=0)
    spectrum = np.abs(np.fft.rfft(angular_mass - angular_mass.mean()))
    assert np.argmax(spectrum[1:]) + 1 == 3
    others = np.delete(spectrum[1:], 2)
    assert spectrum[3] > 3.0 * others.max()


def test_energy_and_control_map_from_run(run_dir, tmp_path):
    diag = run_dir / "diagnostics.csv"
    out_e = tmp_path / "energy.png"
    assert cli.main(["energy", str(diag), str(diag), "-o", str(out_e)]) == 0
    assert rendered(out_e)
    out_c = tmp_path / "control.png"
    assert cli.main(["control-map", str(diag), "-o", str(out_c)]) == 0
    assert rendered(out_c)


def test_convergence_from_study(convergence_csv, tmp_path):
    out = tmp_path / "conv.png"
    assert cli.main(["convergence", str(convergence_csv), "-o", str(out)]) == 0
    assert rendered(out)


def test_snapshot_time_matches_request(run_dir):
    _, meta = read_density_snapshot(run_dir / "density_t2.5.csv")
    assert meta["t"] == 2.5


def test_inputs_are_left_untouched(run_dir, tmp_path):
    snap = run_dir / "density_t0.csv"
    before = snap.read_bytes()
    cli.main(["density-polar", str(snap), "-o", str(tmp_path / "x.png")])
    assert snap.read_bytes() == before


def test_missing_input_exits_one(tmp_path, capsys):
    code = cli.main(["energy", str(tmp_path / "nope.csv"), "-o",
                     str(tmp_path / "x.png")])
    assert code == 1
    assert "not found" in capsys.readouterr().err


def test_wrong_input_count_exits_one(run_dir, tmp_path, capsys):
    snap = str(run_dir / "density_t0.csv")
    code = cli.main(["density-polar", snap, snap, "-o",
                     str(tmp_path / "x.png")])
    assert code == 1
    assert "exactly one" in capsys.readouterr().err


def test_schema_mismatch_exits_two(tmp_path, capsys):
    bad = tmp_path / "diagnostics.csv"
    bad.write_text("t,E_b\n0.0,1.0\n")
    code = cli.main(["control-map", str(bad), "-o", str(tmp_path / "x.png")])
    assert code == 2
    assert "schema mismatch" in capsys.readouterr().err


def test_bad_flags_exit_one(capsys):
    assert cli.main(["energy"]) == 1        # no inputs, no -o
    assert cli.main(["sparkline", "a.csv", "-o", "x.png"]) == 1


def test_kind_is_checked_before_files(capsys):
    code = cli.main(["density-polar", "also-missing.csv", "-o", "x.png"])
    assert code == 1


def test_series_label_prefers_run_directory(tmp_path):
    p = tmp_path / "strategy-one" / "diagnostics.csv"
    assert cli.series_label(p) == "strategy-one"
    assert cli.series_label(tmp_path / "other.csv") == "other"
