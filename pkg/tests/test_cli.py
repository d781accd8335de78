import json
import math

import pytest

from fraclattice.cli import FIGURES, main, read_grid_file
from fraclattice.kernels2d import kernel2d_kminus_center
from fraclattice.reference import gaussian_frlap_at_zero


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def data_rows(text):
    return [line.split(",") for line in text.splitlines() if not line.startswith("#")]


def test_kernel_half_order(capsys):
    code, out, _ = run(["kernel", "--s", "0.5", "--n", "10", "--dim", "1"], capsys)
    rows = data_rows(out)
    assert code == 0 and rows[0] == ["m", "kernel", "main_term", "difference"]
    assert math.isclose(float(rows[2][1]), 4 / (3 * math.pi), rel_tol=1e-15)


def test_kernel_2d_center(capsys):
    code, out, _ = run(["kernel", "--s", "-0.25", "--dim", "2", "--radius", "5"], capsys)
    row = data_rows(out)[1]
    assert code == 0 and row[:2] == ["0", "0"]
    assert math.isclose(float(row[2]), kernel2d_kminus_center(0.25), rel_tol=1e-15)


def test_kernel_bad_order(capsys):
    code, _, err = run(["kernel", "--s", "1.5"], capsys)
    assert code == 2 and "(0, 1)" in err


def test_usage_errors(capsys):
    assert run(["bogus"], capsys)[0] == 1
    assert run(["apply", "--s", "0.3"], capsys)[0] == 1
    assert run(["apply", "--pair", "gaussian", "--range", "5"], capsys)[0] == 1


def test_apply_gaussian_figure_one(capsys):
    code, out, _ = run(["apply", "--pair", "gaussian", "--s", "0.25", "--h", "0.1", "--n", "1000",
                        "--range", "-20:20", "--no-timestamp"], capsys)
    rows = data_rows(out)
    header, body = rows[0], rows[1:]
    assert code == 0 and header == ["j", "x", "value", "exact", "error"]
    center = next(r for r in body if r[0] == "0")
    ref = gaussian_frlap_at_zero(0.25)
    assert abs(float(center[4])) <= 0.02 * ref
    assert len(body) == 41


def test_solve_domain_error(capsys):
    code, _, err = run(["solve", "--pair", "ball-1s", "--s", "0.6"], capsys)
    assert code == 2 and "1/2" in err


def test_determinism_and_timestamp(tmp_path, capsys):
    args = ["solve", "--pair", "ball-1s", "--s", "0.25", "--h", "0.1", "--n", "20",
            "--range", "-20:20"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--no-timestamp", "-o", str(a)]) == 0
    assert main(args + ["--no-timestamp", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(args + ["-o", str(c)])
    extra = [l for l in c.read_text().splitlines() if l not in a.read_text().splitlines()]
    assert len(extra) == 1 and extra[0].startswith("# generated=")


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FRACLATTICE_OUTPUT_DIR", str(tmp_path))
    assert main(["pairs"]) == 0
    assert "ball-1s" in (tmp_path / "pairs.txt").read_text()


def test_json_output(capsys):
    code, out, _ = run(["apply", "--pair", "algebraic", "--s", "0.4", "--n", "50", "--range",
                        "-3:3", "--format", "json", "--no-timestamp"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["values"]) == 7 and "generated" not in doc
    assert doc["config"]["pair"] == "algebraic"


def test_offset_riesz(capsys):
    code, out, _ = run(["apply", "--pair", "riesz2d", "--alpha", "0.5", "--s", "0.3", "--h", "0.1",
                        "--offset", "half", "--range", "-2:2", "--n", "20", "--no-timestamp"],
                       capsys)
    rows = data_rows(out)
    assert code == 0 and rows[0][:5] == ["j1", "j2", "x", "y", "value"]
    assert float(rows[1][2]) == pytest.approx(-0.15)


def test_heat_command(capsys):
    code, out, _ = run(["heat", "--pair", "ball-1s", "--s", "0.25", "--t", "0.01", "--range",
                        "-2:2", "--no-timestamp"], capsys)
    assert code == 0 and len(data_rows(out)) == 6


def test_input_file(tmp_path, capsys):
    f = tmp_path / "grid.csv"
    f.write_text("# tail=zero\nj,value\n-1,0.5\n0,1\n1,0.5\n")
    sampler = read_grid_file(str(f))
    assert sampler.support_radius == 1 and sampler.value(0) == 1.0 and sampler.value(5) == 0.0
    code, out, _ = run(["apply", "--input", str(f), "--s", "0.5", "--n", "10", "--tail", "zero",
                        "--range", "0:0", "--no-timestamp"], capsys)
    assert code == 0 and float(data_rows(out)[1][2]) > 0
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run(["apply", "--input", str(bad), "--s", "0.5"], capsys)[0] == 1


def test_converge_pass_degenerate_and_2d(capsys):
    code, out, err = run(["converge", "--pair", "ball-1s", "--s", "0.25"], capsys)
    assert code == 0 and "PASS" in err and data_rows(out)[0] == ["h", "error"]
    code, _, err = run(["converge", "--pair", "constant", "--s", "0.25", "--h-list",
                        "0.2,0.1,0.05"], capsys)
    assert code == 3 and "degenerate" in err
    code, _, err = run(["converge", "--pair", "ball-1s", "--dim", "2", "--s", "0.25",
                        "--h-list", "0.4,0.2,0.1", "--x-extent", "0.8", "--tail-extent", "1.6",
                        "--target", "0.5"], capsys)
    assert code == 0 and "descriptive" in err


def test_converge_fail_exit(capsys):
    code, _, err = run(["converge", "--pair", "ball-1s", "--s", "0.25", "--target", "3.0"], capsys)
    assert code == 3 and "FAIL" in err


def test_every_figure_has_preset():
    assert sorted(FIGURES) == list(range(1, 14))


def test_figure_preset_runs(capsys):
    code, out, _ = run(["figure", "5", "--no-timestamp"], capsys)
    assert code == 0 and "# figure=5" in out and "# n=20" in out
