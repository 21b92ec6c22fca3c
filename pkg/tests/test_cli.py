import json
import subprocess
import sys

import pytest
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)
from hypothesis import given, settings
from hypothesis import strategies as st

from chebfam import cli
from chebfam import poly as P
from chebfam.errors import ValidationError

X = sympy.Symbol("x")
TRANSFORMS = standard_transformations + (implicit_multiplication_application, convert_xor)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- polynomial parsing ------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=7))
def test_parse_round_trip(coeffs):
    f = P.trim(coeffs)
    assert tuple(cli.parse_poly(P.to_str(f))) == f


@pytest.mark.parametrize(
    "text",
    ["x^3-x-1", "3x^2 + 2x - 7", "(x+1)^3 - 2", "x(x-1)(x+2)", "-x^4 + 5", "2*(x^2 - 3x) + 1", "  x  "],
)
def test_parse_oracle(text):
    expr = parse_expr(text, local_dict={"x": X}, transformations=TRANSFORMS)
    expected = sympy.Poly(expr, X)
    assert cli.parse_poly(text) == [int(c) for c in reversed(expected.all_coeffs())]


@pytest.mark.parametrize("text", ["", "x^", "x +", "(x+1", "y", "x^100", "2 $ x"])
def test_parse_errors(text):
    with pytest.raises(ValidationError):
        cli.parse_poly(text)


@pytest.mark.parametrize("text,value", [("1e6", 10**6), ("1000", 1000), ("2.5e3", 2500)])
def test_int_arg(text, value):
    assert cli._int_arg(text) == value


# --- subcommands -----------------------------------------------------------------


def test_group(capsys):
    code, out, _ = run(capsys, "group", "--preset", "S4")
    assert code == 0
    assert out.splitlines()[0] == "class,size,order,cycle_type,ind"
    assert out.rstrip().endswith("a=1")


def test_ramtable_csv_matches_fixture(capsys, fixture_text):
    code, out, _ = run(capsys, "ramtable", "--preset", "a4", "--format", "csv")
    assert code == 0 and out == fixture_text("table_a4.csv")


def test_fields_enumerate(capsys):
    code, out, _ = run(capsys, "fields", "enumerate", "--degree", "3", "--X", "300", "--height", "6")
    assert code == 0
    discs = [json.loads(line)["disc"] for line in out.splitlines()]
    assert discs[:3] == [-23, -31, -59]


def test_fields_cyclic(capsys):
    code, out, _ = run(capsys, "fields", "cyclic", "--p", "3", "--X", "1e4")
    assert code == 0
    assert "conductor,omega,constructed" in out


def test_census_without_data(capsys):
    code, _, err = run(capsys, "fields", "census", "--degree", "3")
    assert code == 1 and "error" in err


def test_census_from_db(tmp_path, capsys):
    db = tmp_path / "cyc.ndjson"
    code, out, _ = run(capsys, "fields", "cyclic", "--p", "3", "--X", "1e6")
    db.write_text("".join(line + "\n" for line in out.splitlines() if line.startswith("{")))
    code, out, _ = run(capsys, "fields", "census", "--db", str(db), "--degree", "3")
    assert code == 0
    exponent = float(out.splitlines()[-1].split()[1].split("=")[1])
    assert abs(exponent - 0.5) < 0.1


def test_cheb_report(capsys):
    code, out, _ = run(capsys, "cheb", "report", "--poly", "x^3-x-1", "--xmax", "1e4", "--points", "3")
    assert code == 0
    assert out.rstrip().endswith("group=S3 balanced=1")
    assert len(out.splitlines()) == 1 + 3 * 3 + 1


def test_cheb_pattern_and_count(capsys):
    code, out, _ = run(capsys, "cheb", "pattern", "--poly", "x^3-x-1", "--p", "59")
    assert code == 0 and out.splitlines()[1] == "59,1 1 1"
    code, out, _ = run(capsys, "cheb", "count", "--poly", "x^3-x-1", "--x", "100", "--cycle-type", "1 1 1")
    split = sum(
        1
        for p in sympy.primerange(2, 101)
        if p != 23 and len(sympy.Poly(X**3 - X - 1, X, modulus=p).factor_list()[1]) == 3
    )
    assert code == 0 and out.splitlines()[1] == f"100,1 1 1,{split}"


def test_cheb_ramified_prime(capsys):
    code, _, err = run(capsys, "cheb", "pattern", "--poly", "x^3-x-1", "--p", "23")
    assert code == 1 and "error" in err


def test_cheb_cap(capsys):
    code, _, _ = run(capsys, "cheb", "report", "--poly", "x^3-x-1", "--xmax", "1e9")
    assert code == 2


def test_torsion_classgroup(capsys):
    code, out, _ = run(capsys, "torsion", "classgroup", "--D", "-84")
    assert code == 0
    assert out.splitlines()[1:5] == ["0,1,0,21", "1,2,2,11", "2,3,0,7", "3,5,4,5"]
    assert out.rstrip().endswith("h=4 invariants=2 2 group_ok=1")


def test_torsion_rejects_non_fundamental(capsys):
    code, _, _ = run(capsys, "torsion", "classgroup", "--D", "-12")
    assert code == 1


def test_torsion_stats_and_correspondence(capsys):
    code, out, _ = run(capsys, "torsion", "stats", "--X", "200", "--ell", "3")
    assert code == 0
    code, out, _ = run(capsys, "torsion", "correspondence", "--X", "300")
    assert code == 0 and "all_match=1" in out


def test_constants_report(capsys):
    code, out, _ = run(capsys, "constants", "report", "--preset", "s3", "--audit", "10")
    assert code == 0
    rows = dict(line.split(",", 1) for line in out.splitlines()[1:])
    assert rows["delta"] == "1/324" and rows["audit.status"] == "pass"


def test_constants_bound(capsys):
    code, out, _ = run(capsys, "constants", "bound", "--kind", "silverman", "--arg", "D=5", "--arg", "n=2")
    assert code == 0
    assert float(out.splitlines()[1].split(",")[-1]) == pytest.approx(1.0573712634405641)
    code, _, _ = run(capsys, "constants", "bound", "--kind", "silverman", "--arg", "D")
    assert code == 1


def test_heights(tmp_path, capsys):
    code, out, _ = run(capsys, "heights", "weil", "--poly", "x^2-x-1")
    assert code == 0 and out.splitlines()[1].startswith("x^2 - x - 1,1.2720196495")
    db = tmp_path / "q.ndjson"
    run(capsys, "fields", "enumerate", "--degree", "3", "--X", "100", "--height", "4")
    code, out, _ = run(capsys, "fields", "enumerate", "--degree", "3", "--X", "100", "--height", "4")
    db.write_text(out)
    code, out, _ = run(capsys, "heights", "smallgen", "--db", str(db), "--height", "3")
    assert code == 0
    assert out.splitlines()[0] == "disc,alpha_coeffs,H,bound,ok"
    assert all(line.endswith(",1") for line in out.splitlines()[1:])


def test_heights_reducible(capsys):
    code, _, _ = run(capsys, "heights", "weil", "--poly", "x^2-1")
    assert code == 1


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--preset", "c3", "--samples", "20")
    assert code == 0 and ",pass,20," in out


@pytest.mark.parametrize(
    "argv",
    [["nope"], ["ramtable"], ["ramtable", "--preset", "q8"], ["cheb", "report", "--poly", "x"], ["torsion", "stats", "--X", "abc"]],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 64 and err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == cli.__version__


# --- artifacts and determinism ------------------------------------------------------


def test_out_dir_writes_manifest(tmp_path, capsys):
    code, out, _ = run(capsys, "ramtable", "--preset", "s4", "--format", "csv", "--out-dir", str(tmp_path))
    assert code == 0 and out == ""
    manifest = json.loads((tmp_path / "ramtable_s4.manifest.json").read_text())
    assert manifest["command"] == "ramtable"
    assert manifest["artifacts"] == ["ramtable_s4.csv"]
    assert manifest["flags"]["preset"] == "s4"
    assert (tmp_path / "ramtable_s4.csv").exists()


def test_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    code, _, _ = run(capsys, "group", "--preset", "A5")
    assert code == 0 and (tmp_path / "group_a5.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["fields", "cyclic", "--p", "3", "--X", "1e5"],
        ["audit", "--samples", "30", "--seed", "3"],
        ["constants", "report", "--preset", "a4", "--audit", "5"],
    ],
)
def test_reruns_are_byte_identical(tmp_path, capsys, argv):
    for d in ("a", "b"):
        assert cli.main(argv + ["--out-dir", str(tmp_path / d)]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in (tmp_path / "a").iterdir() if not p.name.endswith(".manifest.json"))
    assert names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_threads_do_not_change_output(tmp_path, capsys):
    assert cli.main(["audit", "--samples", "10", "--out-dir", str(tmp_path / "one")]) == 0
    assert cli.main(["audit", "--samples", "10", "--threads", "2", "--out-dir", str(tmp_path / "two")]) == 0
    capsys.readouterr()
    one = (tmp_path / "one" / "envelope_audit.csv").read_bytes()
    assert one == (tmp_path / "two" / "envelope_audit.csv").read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chebfam", "ramtable", "--preset", "d4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("D4")
