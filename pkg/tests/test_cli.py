import subprocess
import sys

import pytest

from causal_entropy.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and len(out.splitlines()) == 9


def test_variables_count(capsys):
    code, out, _ = run(capsys, "variables", "instrumental", "--theory", "gpt")
    assert code == 0 and len(out.splitlines()) == 35
    code, out, _ = run(capsys, "variables", "ic_postselected", "--marginal")
    assert len(out.splitlines()) == 23


def test_analyze_instrumental_deterministic(capsys, tmp_path):
    a = tmp_path / "a.tsv"
    b = tmp_path / "b.tsv"
    assert run(capsys, "--deterministic", "analyze", "instrumental", "--out", str(a))[0] == 0
    assert run(capsys, "--deterministic", "--threads", "2", "analyze", "instrumental",
               "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].split("\t") == ["H(X)", "H(Y)", "H(Z)", "H(X,Y)", "H(X,Z)", "H(Y,Z)",
                                    "H(X,Y,Z)", "rel"]
    # I(X:YZ) <= H(Z) as a row: -H(X) + H(Z) - H(Y,Z) + H(X,Y,Z) >= 0
    assert "-1\t0\t1\t0\t0\t-1\t1\t>=" in lines


def test_analyze_timing_header_without_deterministic(capsys):
    code, out, _ = run(capsys, "analyze", "instrumental")
    assert code == 0 and out.startswith("# elapsed ")


def test_analyze_symmetry_summary(capsys, tmp_path):
    g = tmp_path / "g.perm"
    g.write_text("(X Z)\n")
    code, out, _ = run(capsys, "--deterministic", "analyze", "instrumental", "--theory",
                       "classical", "--symmetry", str(g))
    assert code == 0 and "# orbits: relation, size, representative" in out


def test_analyze_budget_exceeded(capsys):
    code, out, err = run(capsys, "analyze", "fig2", "--budget", "3", "--redundancy", "syntactic")
    assert code == 2 and "warning" in err and "rel" in out


def test_analyze_restricted_preset(capsys):
    code, out, _ = run(capsys, "--deterministic", "analyze", "ic_postselected", "--theory",
                       "boxworld", "--keep", "restricted7")
    assert code == 0
    assert out.splitlines()[0].split("\t")[:5] == ["H(X1)", "H(X2)", "H(Y1)", "H(Y2)", "H(Z)"]


def test_certify_and_verify(capsys, tmp_path):
    cert = tmp_path / "cert.txt"
    code, out, _ = run(capsys, "certify", "bilocal_postselected", "prbox-bilocal",
                       "--theory", "quantum", "--out", str(cert))
    assert code == 1 and "verdict: Incompatible" in out
    assert run(capsys, "verify-certificate", str(cert))[0] == 0
    forged = tmp_path / "forged.txt"
    text = cert.read_text().replace("row\t", "row\t3", 1)
    forged.write_text(text)
    assert run(capsys, "verify-certificate", str(forged))[0] == 1
    junk = tmp_path / "junk.txt"
    junk.write_text("nothing to see\n")
    assert run(capsys, "verify-certificate", str(junk))[0] == 2


def test_certify_compatible_exit_zero(capsys, tmp_path):
    code, out, _ = run(capsys, "--deterministic", "certify", "bilocal_postselected",
                       "prbox-bilocal", "--theory", "boxworld", "--out", str(tmp_path / "c"))
    assert code == 0 and "Inconclusive-Compatible" in out
    assert not (tmp_path / "c").exists()


def test_certify_distribution_file(capsys, tmp_path):
    f = tmp_path / "d.dist"
    f.write_text("vars X:2 Y:2 Z:2\n0 0 0 1/2\n1 1 0 1/2\n")
    code, out, _ = run(capsys, "certify", "instrumental", str(f), "--theory", "gpt",
                       "--out", str(tmp_path / "cert"))
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["analyze", "no_such_structure"],
    ["analyze", "instrumental", "--budget", "lots"],
    ["analyze", "instrumental", "--theory", "classical", "--families", "Purification"],
    ["analyze", "instrumental", "--keep", "H(Q)"],
    ["certify", "instrumental", "missing.dist"],
    ["orbits", "missing.tsv", "missing.perm"],
    ["frobnicate"],
])
def test_input_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_threads_env_invalid(capsys, monkeypatch):
    monkeypatch.setenv("CAUSAL_ENTROPY_THREADS", "many")
    assert run(capsys, "analyze", "instrumental")[0] == 2


def test_postselect(capsys):
    code, out, _ = run(capsys, "postselect", "ic", "R")
    assert code == 0 and "node Y_R1 observed" in out and "alt Y_R2 Y R=2" in out


def test_orbits_command(capsys, tmp_path):
    m = tmp_path / "m.tsv"
    m.write_text("H(a)\tH(b)\tH(a,b)\trel\n1\t0\t0\t>=\n0\t1\t0\t>=\n")
    g = tmp_path / "g.perm"
    g.write_text("(a b)\n")
    code, out, _ = run(capsys, "orbits", str(m), str(g))
    assert code == 0 and "# >=\t2\t" in out


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "causal_entropy.cli", "catalog"],
                         capture_output=True, text=True, check=True)
    assert "instrumental" in out.stdout
