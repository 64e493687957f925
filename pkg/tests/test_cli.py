import subprocess
import sys

import numpy as np
import pytest

from pmefront.cli import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_INSTABILITY, EXIT_OK, main
from pmefront.output import read_csv, read_field


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_CONFIG, EXIT_INSTABILITY, EXIT_ACCEPTANCE, 2}) == 5


def test_profile_and_constants(tmp_path):
    out = tmp_path / "o"
    assert main(["profile", "--out", str(out), "-q"]) == EXIT_OK
    assert (out / "profile.csv").exists() and (out / "profile.txt").exists()
    assert main(["constants", "--out", str(out)]) == EXIT_OK
    _, rows = read_csv(out / "constants.csv")
    assert rows[0][0] == "A" and rows[0][1] == pytest.approx(np.sqrt(2) / 12, abs=1e-12)


def test_simulate_pde_radial(tmp_path):
    cfg = write(tmp_path, "[reaction]\nm = 2\n[grid]\ngeometry = radial\nextents = 0:1\n"
                          "[solver]\nepsilon = 0.08\nt_end = 0.02\nsnapshots = 0.01\nradius = 0.6\n")
    out = tmp_path / "pde"
    assert main(["simulate-pde", "--config", cfg, "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out / "interface.csv")
    assert header == ["time", "position"]
    assert [r[0] for r in rows] == [0.0, 0.01, 0.02]
    radii = [r[1] for r in rows]
    assert radii[0] > radii[1] > radii[2]
    field, grid = read_field(out / "field_002.txt")
    assert field.time == 0.02 and grid.geometry == "radial"


def test_simulate_pde_walls_on_rectangle(tmp_path):
    cfg = write(tmp_path, "[flux]\nkind = walls\nsigma_left = 0.05\nsigma_right = 0.05\n"
                          "[grid]\ngeometry = rectangle\nextents = 0:1, -0.5:0.5\nh_factor = 0.5\n"
                          "[solver]\nepsilon = 0.1\nt_end = 0.005\nradius = 0.3\n")
    assert main(["simulate-pde", "--config", cfg, "--out", str(tmp_path / "r")]) == EXIT_OK
    header, rows = read_csv(tmp_path / "r" / "interface.csv")
    assert header == ["time", "polyline", "x", "y"] and rows


def test_simulate_front_radial_and_graph(tmp_path):
    cfg = write(tmp_path, "[front]\nR0 = 1\nt_end = 0.3\n")
    assert main(["simulate-front", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "front.csv")
    assert rows[-1] == [0.3, np.sqrt(1 - 2 * 0.3)] or rows[-1][1] == pytest.approx(np.sqrt(0.4), rel=1e-15)
    cfg = write(tmp_path, "[front]\nkind = graph\nq2 = 1\nt_end = 0.1\nnodes = 17\n", "g.cfg")
    assert main(["simulate-front", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "front.csv")
    assert header == ["t", "x", "w"]
    assert rows[-1][2] == pytest.approx(0.1, rel=1e-12)


def test_config_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, "[reaction]\nbogus = 3\n")
    assert main(["validate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err
    cfg = write(tmp_path, "[solver]\nt_end = 0.1\n", "b.cfg")
    assert main(["simulate-pde", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "epsilon" in capsys.readouterr().err
    cfg = write(tmp_path, "[reaction]\na = 0.9\n", "c.cfg")
    assert main(["profile", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_numeric_error_exit(tmp_path):
    cfg = write(tmp_path, "[front]\nR0 = 1\nt_end = 0.7\n")
    assert main(["simulate-front", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INSTABILITY


def test_acceptance_failure_exit(tmp_path):
    cfg = write(tmp_path, "[reaction]\na = 0.9\n")
    assert main(["validate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_ACCEPTANCE
    _, rows = read_csv(tmp_path / "validate.csv")
    assert ["balance", "False"] == rows[2][:2]


def test_converge_small(tmp_path):
    cfg = write(tmp_path, "[experiment]\nscenario = radial_shrink\nepsilons = 0.16, 0.12, 0.08\n"
                          "radius = 0.8\ndomain = 2.0\n")
    assert main(["converge", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "convergence.csv")
    assert len(rows) == 6 and all(r[-1] == "pass" for r in rows)


def test_seed_check_flag(tmp_path, capsys):
    assert main(["validate", "--seed-check", "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "PASS finite_propagation_m2" in text
    _, rows = read_csv(tmp_path / "seed_check.csv")
    assert all(r[1] == "True" for r in rows)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pmefront", "validate", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS balance" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "pmefront", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
