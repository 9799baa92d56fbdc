import csv
import json
import numpy as np
import pytest

from ringbethe.bae import SearchWindow, scan_roots
from ringbethe.core import SystemParams
from ringbethe.cli import EXIT_CONTRACT, EXIT_NO_ROOTS, EXIT_NUMERICAL, EXIT_OK, main

REF = ["--xi", "4", "--xi-b", "2.828427"]


def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--output", str(out)])
    return code, out


def test_spectrum_records(tmp_path):
    code, out = run(tmp_path, "s.json", "spectrum", *REF, "--k-max", "30")
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    first = data["roots"][0]
    assert set(first) == {"index", "k1", "k2", "energy", "residual_1", "residual_2", "norm"}
    assert first["k1"] == pytest.approx(2.00, abs=0.01)
    assert first["k2"] == pytest.approx(7.27, abs=0.01)
    energies = [r["energy"] for r in data["roots"]]
    assert energies == sorted(energies)
    assert data["params"]["a"] == -0.5


def test_spectrum_csv(tmp_path):
    code, out = run(tmp_path, "s.csv", "spectrum", *REF, "--k-max", "20", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["energy"]) == pytest.approx(28.428081, rel=1e-6)


def test_contours_bracket_roots(tmp_path):
    code, out = run(tmp_path, "c.json", "spectrum", *REF, "--k-max", "20",
                    "--emit-contours", "--contour-n", "100")
    data = json.loads(out.read_text())
    k = np.array(data["contours"]["k"])
    r1 = np.array(data["contours"]["residual_1"])
    r2 = np.array(data["contours"]["residual_2"])
    root = data["roots"][0]
    i = np.searchsorted(k, root["k1"]) - 1
    j = np.searchsorted(k, root["k2"]) - 1
    for f in (r1, r2):
        cell = f[i:i + 2, j:j + 2]
        assert cell.min() <= 0 <= cell.max()


def test_no_roots_exit_code(tmp_path, caplog):
    with pytest.warns(UserWarning):
        code, _ = run(tmp_path, "e.json", "spectrum", *REF, "--k-max", "1", "--grid-n", "16")
    assert code == EXIT_NO_ROOTS
    assert "--k-max" in caplog.text


def test_wavefunction_grid(tmp_path):
    n = 41
    code, out = run(tmp_path, "w.csv", "wavefunction", *REF, "--k-max", "20", "--n", str(n))
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2,psi"
    vals = np.loadtxt(lines[1:], delimiter=",")
    assert len(vals) == n * n
    psi = vals[:, 2].reshape(n, n)
    x = vals[:n, 1]
    # grid is -L/2 + i L / n, so the mirror of index i is (n - i) mod n only for even n;
    # check the node and the inversion on points that map onto the grid
    on_grid = [i for i in range(n) if np.any(np.isclose(x, -x[i]))]
    for i in on_grid:
        mi = int(np.argmin(np.abs(x + x[i])))
        assert abs(psi[i, mi]) < 1e-10 * np.abs(psi).max()
        for j in on_grid:
            mj = int(np.argmin(np.abs(x + x[j])))
            assert psi[mi, mj] == pytest.approx(-psi[i, j], abs=1e-12)


def test_wavefunction_bad_index(tmp_path):
    code, _ = run(tmp_path, "w.csv", "wavefunction", *REF, "--k-max", "10", "--root-index", "99")
    assert code == EXIT_NO_ROOTS


def test_verify_ground_passes(tmp_path):
    code, out = run(tmp_path, "v.json", "verify", *REF)
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["failures"] == []


def test_verify_perturbed_fails(tmp_path):
    code, out = run(tmp_path, "v.json", "verify", *REF, "--perturb-k2", "1e-3")
    assert code == EXIT_CONTRACT
    assert "periodicity" in json.loads(out.read_text())["failures"]


def test_verify_tolerance_flag(tmp_path):
    loose, _ = run(tmp_path, "a.json", "verify", *REF, "--perturb-k2", "1e-6", "--tol", "1e-3")
    tight, _ = run(tmp_path, "b.json", "verify", *REF, "--perturb-k2", "1e-6", "--tol", "1e-9")
    assert (loose, tight) == (EXIT_OK, EXIT_CONTRACT)


def test_expansion_table(tmp_path):
    code, out = run(tmp_path, "x.json", "expansion", "--xi-b", "2.828427", "--branch", "1")
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    row = data["rows"][-1]
    assert set(row) >= {"xi", "E_exact", "E_expansion", "order0", "order1", "order2", "difference"}
    assert row["difference"] == pytest.approx(row["E_exact"] - row["E_expansion"])
    assert data["fit"]["c1"] == pytest.approx(data["closed_form"]["c1"], rel=1e-3)


def test_oracle_with_match(tmp_path):
    run(tmp_path, "s.json", "spectrum", *REF, "--k-max", "20")
    code, out = run(tmp_path, "o.json", "oracle", *REF, "--grid-n", "128", "--levels", "6",
                    "--match", str(tmp_path / "s.json"))
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["match"]["complete"]
    assert len(data["energies"]) == 6


def test_attractive_requires_flag(tmp_path):
    bad = ["--xi", "4", "--xi-b", "-4"]
    code, _ = run(tmp_path, "o.json", "oracle", *bad, "--grid-n", "32", "--levels", "2")
    assert code == EXIT_NUMERICAL
    code, _ = run(tmp_path, "o.json", "oracle", *bad, "--grid-n", "32", "--levels", "2",
                  "--allow-attractive")
    assert code == EXIT_OK


def test_invalid_oracle_grid(tmp_path):
    code, _ = run(tmp_path, "o.json", "oracle", *REF, "--grid-n", "34")
    assert code == EXIT_NUMERICAL


@pytest.mark.parametrize("args", [
    ["spectrum", *REF, "--k-max", "20"],
    ["wavefunction", *REF, "--k-max", "20", "--n", "16"],
    ["verify", *REF, "--seed", "5"],
    ["oracle", *REF, "--grid-n", "64", "--levels", "3"],
])
def test_byte_identical_reruns(tmp_path, args):
    _, a = run(tmp_path, "a.out", *args)
    _, b = run(tmp_path, "b.out", *args)
    assert a.read_bytes() == b.read_bytes()


def test_full_precision_serialization(tmp_path):
    _, out = run(tmp_path, "s.json", "spectrum", *REF, "--k-max", "20")
    data = json.loads(out.read_text())
    # round trip through text is exact
    assert data["params"]["xi_b"] == 2.828427
    roots = scan_roots(SystemParams(4.0, 2.828427), SearchWindow(k_max=20.0))
    assert [r["energy"] for r in data["roots"]] == [r.energy for r in roots]
    assert [r["k2"] for r in data["roots"]] == [r.k2 for r in roots]
