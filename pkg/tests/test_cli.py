import csv
import io
import json
import math
import subprocess
import sys

import pytest

from entanglement_ensembles import closedform as cf
from entanglement_ensembles.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exact_page_values(capsys):
    code, out, _ = run(capsys, "exact", "--ensemble", "page", "--dA", "2", "--dB", "2")
    assert code == 0
    r = rows(out)[0]
    assert float(r["mean"]) == pytest.approx(1 / 3, abs=1e-15)
    # trigamma form of the Haar variance at d_A = d_B = 2
    assert float(r["variance"]) == pytest.approx(0.0321242977, abs=1e-10)


def test_exact_page_from_modes_matches_dims(capsys):
    _, a, _ = run(capsys, "exact", "--ensemble", "page", "--V", "6", "--VA", "2")
    _, b, _ = run(capsys, "exact", "--ensemble", "page", "--dA", "4", "--dB", "16")
    assert a == b


@pytest.mark.parametrize(
    "argv,fn",
    [
        (["--ensemble", "fixed-n", "--V", "8", "--VA", "3", "--N", "4"], lambda: cf.fixedN_average(8, 3, 4)),
        (["--ensemble", "gaussian", "--V", "8", "--VA", "3"], lambda: cf.gaussian_average(8, 3)),
        (["--ensemble", "weighted", "--V", "8", "--VA", "3", "--w", "0.5"], lambda: cf.weighted_average(8, 3, 0.5)),
        (
            ["--ensemble", "weighted", "--V", "8", "--VA", "3", "--nbar", "0.5"],
            lambda: cf.weighted_average(8, 3, 0.0),
        ),
    ],
)
def test_exact_other_ensembles(capsys, argv, fn):
    code, out, _ = run(capsys, "exact", *argv)
    assert code == 0
    assert float(rows(out)[0]["mean"]) == pytest.approx(fn(), rel=1e-14)


def test_exact_missing_parameter_is_usage_error(capsys):
    code, _, err = run(capsys, "exact", "--ensemble", "fixed-n", "--V", "8", "--VA", "3")
    assert code == 2
    assert "--N" in err


def test_argparse_errors_exit_2(capsys):
    assert main(["exact", "--ensemble", "nope"]) == 2
    assert main([]) == 2


def test_curve_is_mirror_symmetric_and_reproducible(capsys, tmp_path):
    code, out, _ = run(capsys, "curve", "--ensemble", "page", "--V", "8")
    assert code == 0
    table = rows(out)
    assert len(table) == 7
    vals = [float(r["value"]) for r in table]
    assert vals == pytest.approx(vals[::-1], abs=1e-14)
    p = tmp_path / "c.csv"
    run(capsys, "curve", "--ensemble", "page", "--V", "8", "-o", str(p))
    assert p.read_text() == out


def test_sample_json_is_deterministic(capsys):
    argv = ["sample", "--ensemble", "page", "--V", "4", "--VA", "2", "--n", "200", "--seed", "5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--workers", "3")
    ja, jb = json.loads(a), json.loads(b)
    assert ja == jb
    assert ja["closed_form"] == pytest.approx(cf.page_average(4, 4), abs=1e-15)
    assert abs(ja["z_score"]) < 4
    assert ja["n_samples"] == 200 and ja["seed"] == 5


def test_sample_requires_seed(capsys):
    code, _, _ = run(capsys, "sample", "--ensemble", "page", "--V", "4", "--VA", "2")
    assert code == 2


def test_spectrum_writes_histogram_and_report(capsys, tmp_path):
    h = tmp_path / "h.csv"
    rep = tmp_path / "r.json"
    code, _, _ = run(
        capsys, "spectrum", "--experiment", "gue-spacing", "--seed", "1", "--d", "100",
        "--draws", "10", "-o", str(h), "--report", str(rep),
    )
    assert code == 0
    assert h.read_text().startswith("bin_left,bin_right,density")
    report = json.loads(rep.read_text())
    assert report["experiment"] == "gue-spacing"


def test_hamiltonian_row(capsys):
    code, out, _ = run(capsys, "hamiltonian", "--model", "free-fermion", "--V", "4", "--VA", "2", "--mode", "all_states")
    assert code == 0
    r = rows(out)[0]
    assert r["model"] == "free-fermion" and int(r["n_states"]) == 16


def test_validate_quick_reports_each_criterion(capsys, tmp_path):
    p = tmp_path / "v.json"
    code, _, err = run(capsys, "validate", "--suite", "quick", "-o", str(p))
    lines = [l for l in err.splitlines() if l.startswith("criterion")]
    assert len(lines) == 13
    report = json.loads(p.read_text())
    assert code == (0 if all(c["status"] != "fail" for c in report["criteria"]) else 1)
    assert code == 0


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "entanglement_ensembles", "exact", "--ensemble", "page", "--dA", "2", "--dB", "3"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert float(rows(res.stdout)[0]["mean"]) == pytest.approx(cf.page_average(2, 3), abs=1e-15)
