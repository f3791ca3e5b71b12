import csv
import io
import math

import pytest

from lattice_cpwl.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_constants_cartesian(capsys):
    code, out, _ = run(capsys, "constants", "--theta1", "0", "--theta2", "1.5707963267948966")
    assert code == 0
    (r,) = rows(out)
    assert list(r) == ["theta1", "theta2", "alpha", "beta", "gamma", "C"]
    assert float(r["C"]) == pytest.approx(math.sqrt(3), abs=1e-15)


def test_constants_hexagonal_and_degrees(capsys):
    _, out, _ = run(capsys, "constants", "--preset", "hexagonal")
    assert float(rows(out)[0]["C"]) == pytest.approx(1.224744871391589, abs=1e-15)
    _, out2, _ = run(capsys, "constants", "--theta1", "0", "--theta2", "120", "--degrees")
    assert float(rows(out2)[0]["C"]) == pytest.approx(math.sqrt(1.5), abs=1e-15)


def test_constants_errors(capsys):
    code, _, err = run(capsys, "constants", "--theta1", "0", "--theta2", "3.141592653589793")
    assert code == 2 and "degenerate lattice" in err
    code, _, err = run(capsys, "constants", "--theta1", "0")
    assert code == 2
    assert run(capsys, "constants", "--preset", "bogus")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2


def test_sweep_small(capsys):
    code, out, err = run(capsys, "sweep", "--resolution", "2")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "theta1,delta,M" and len(lines) == 5
    assert "min=" in err


def test_sweep_summary_500(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--output", str(target))
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert float(fields["min"]) == pytest.approx(1.22474, abs=1e-5)
    d = float(fields["delta"])
    assert min(abs(d - 2.0944), abs(d - 4.1888)) < 1e-3
    assert len(target.read_text().strip().split("\n")) == 1 + 500 * 500


def test_sweep_plot_mode_blanks(capsys):
    _, raw, _ = run(capsys, "sweep", "--resolution", "40")
    _, plot, _ = run(capsys, "sweep", "--resolution", "40", "--plot")
    raw_rows, plot_rows = rows(raw), rows(plot)
    assert any(r["M"] == "" for r in plot_rows)
    for a, b in zip(raw_rows, plot_rows):
        assert (b["M"] == "") == (float(a["M"]) >= 10)


def test_plot_script(capsys, tmp_path):
    data, script = tmp_path / "s.csv", tmp_path / "plot.py"
    assert run(capsys, "sweep", "--resolution", "4", "--output", str(data), "--plot-script", str(script))[0] == 0
    text = script.read_text()
    assert str(data) in text and "matplotlib" in text
    compile(text, str(script), "exec")
    # a script needs a file to point at
    assert run(capsys, "sweep", "--resolution", "4", "--plot-script", str(script))[0] == 2


def test_rate_gaussian(capsys):
    outs = {}
    for kind in ("cartesian", "hexagonal"):
        code, out, err = run(capsys, "rate", "--function", "gaussian", "--preset", kind, "--T", "1/8,1/16,1/32,1/64")
        assert code == 0 and "slope" in err
        outs[kind] = rows(out)
    assert 1.9 <= float(outs["cartesian"][-1]["slope"]) <= 2.1
    for c, h in zip(outs["cartesian"], outs["hexagonal"]):
        assert float(h["eps_measured"]) < float(c["eps_measured"])


def test_rate_affine_exact(capsys):
    code, out, err = run(capsys, "rate", "--function", "affine", "--preset", "hexagonal", "--T", "1/4,1/8,1/12,1/16")
    assert code == 0 and "exact" in err
    assert all(float(r["eps_measured"]) <= 1e-8 and r["slope"] == "exact" for r in rows(out))


def test_rate_params_and_errors(capsys):
    code, out, _ = run(
        capsys, "rate", "--function", "gaussian", "--param", "sigma=0.3", "--preset", "cartesian", "--T", "1/4,1/6,1/8,1/10"
    )
    assert code == 0 and len(rows(out)) == 4
    assert run(capsys, "rate", "--function", "nope", "--preset", "cartesian")[0] == 2
    assert run(capsys, "rate", "--preset", "cartesian", "--T", "1/8,1/16")[0] == 2
    assert run(capsys, "rate", "--theta1", "1", "--theta2", "1", "--T", "1/4,1/6,1/8,1/10")[0] == 2
    assert run(capsys, "rate", "--function", "gaussian", "--param", "bogus=1", "--preset", "cartesian")[0] == 2


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from lattice_cpwl import cli
    from lattice_cpwl.errors import SolverDiverged

    def boom(*a, **k):
        raise SolverDiverged("no convergence")

    monkeypatch.setattr(cli, "rate_study", boom)
    code, _, err = run(capsys, "rate", "--preset", "cartesian", "--T", "1/4,1/6,1/8,1/10")
    assert code == 3 and "numerical failure" in err


def test_disk(capsys):
    code, out, _ = run(capsys, "disk", "--c", "1", "--omega-max", "1", "--T", "1")
    assert code == 0
    closed, quad = rows(out)
    assert closed["quantity"] == "eps_asym_closed_form" and quad["quantity"] == "eps_asym_quadrature"
    assert float(closed["cartesian"]) == pytest.approx(6.4379e-3, abs=1e-7)
    assert float(closed["hexagonal"]) == pytest.approx(5.2565e-3, abs=1e-7)
    assert float(closed["ratio"]) == pytest.approx(0.81650, abs=1e-5)
    assert float(closed["crosscheck_rel_err"]) <= 1e-6
    _, out2, _ = run(capsys, "disk", "--c", "2", "--omega-max", "1", "--T", "1")
    doubled = rows(out2)[0]
    for k in ("cartesian", "hexagonal"):
        assert float(doubled[k]) == pytest.approx(2 * float(closed[k]), rel=1e-15)
    assert run(capsys, "disk", "--omega-max", "0")[0] == 2


def test_relu(capsys, tmp_path):
    target = tmp_path / "net.txt"
    code, out, _ = run(capsys, "relu", "--T", "1/4", "--output", str(target))
    assert code == 0
    assert out.startswith("36 neurons")
    assert float(out.split("=")[1].split()[0]) <= 1e-10
    assert target.read_text().startswith("# lattice_cpwl relu-network")
    _, _, err = run(capsys, "relu", "--T", "1/3", "--points", "1000")
    assert err.startswith("16 neurons")
    code, _, err = run(capsys, "relu", "--T", "0.3")
    assert code == 2 and "1/T" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--resolution", "30"],
        ["rate", "--preset", "hexagonal", "--T", "1/4,1/6,1/8,1/10"],
        ["relu", "--T", "1/5", "--seed", "3", "--points", "2000"],
        ["disk", "--c", "1.5", "--omega-max", "2", "--T", "0.1"],
    ],
    ids=lambda a: a[0],
)
def test_byte_identical_output(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, again, _ = run(capsys, *argv)
    _, one_thread, _ = run(capsys, "--threads", "1", *argv)
    _, two_threads, _ = run(capsys, "--threads", "2", *argv)
    assert first == again == one_thread == two_threads
