import csv
import io
import json

import pytest

from twistchar.characters import FlavorWeights, free_character
from twistchar.cli import EXIT_INPUT, main
from twistchar.series import TruncatedSeries


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def test_char_free_json_round_trip():
    code, out = run("char", "free", "--q-max", "2", "--z-max", "2", "--u-max", "1", "--format", "json", "--verify")
    assert code == 0
    s = TruncatedSeries.loads(out)
    assert s == free_character(FlavorWeights.uniform(1), s.spec)


def test_char_free_text():
    code, out = run("char", "free", "--q-max", "1", "--z-max", "1", "--u-max", "1")
    assert code == 0
    assert out.splitlines()[0] == "1\t1"


def test_char_potential_verify():
    code, _ = run("char", "potential", "--degree", "2", "--q-max", "2", "--z-max", "4", "--verify")
    assert code == 0


def test_char_gamma_shift_identity():
    code, out = run("char", "gamma", "--verify", "--format", "json")
    assert code == 0
    assert float(json.loads(out)["shift_identity_max_rel_error"]) < 1e-10


def test_jacobi_csv():
    code, out = run("jacobi", "--potential", "x^3/3", "--max-weight", "1", "--z-max", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    h1 = [r for r in rows if r["degree"] == "1"]
    assert {(r["A"], r["B"], r["C"], r["cohomology_dim"]) for r in h1} == {("0", "1", "3", "1"), ("1", "0", "3", "1")}


def test_jacobi_threads_identical():
    base = ("jacobi", "--potential", "x1^3/3 + x1*x2^2", "--max-weight", "1", "--z-max", "4", "--format", "json")
    assert run(*base)[1] == run(*base, "--threads", "2")[1]


def test_operators_enumerate():
    code, out = run("operators", "enumerate", "--weight", "1,0", "--z-min", "2", "--z-max", "2")
    assert (code, out.strip()) == (0, "g[1,0;1]*g[0,0;1]")


def test_current_bracket():
    code, out = run("current", "bracket", "--X", "E", "--Y", "F", "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["central"] == 0 and rec["closes_on_current"] is True


def test_current_cohomology_runs():
    code, _ = run("current", "cohomology", "--max-weight", "1")
    assert code == 0


def test_reduce_commands():
    assert run("reduce", "t2", "--q-max", "3", "--z-max", "3", "--u-max", "2", "--verify")[0] == 0
    assert run("reduce", "p1", "--bundle-degree", "1", "--q-max", "3", "--z-max", "3", "--u-max", "2",
               "--verify")[0] == 0
    code, out = run("reduce", "plane", "--jets", "2", "--eps-plus", "1", "--eps-minus", "0", "--format", "json")
    assert code == 0 and json.loads(out)["total"] == 5


def test_partition3d():
    code, out = run("partition3d", "--n-cutoff", "0", "--mode-cutoff", "0", "--format", "json")
    assert code == 0 and "partial_product" in json.loads(out)


@pytest.mark.parametrize("argv", [
    ("reduce", "surface", "--genus", "1", "--degree", "0"),
    ("reduce", "surface", "--genus", "1", "--degree", "0", "--h0", "1"),
    ("jacobi", "--potential", "y^3"),
    ("char", "free", "--threads", "0"),
    ("bogus",),
    ("operators", "enumerate", "--weight", "oops"),
])
def test_input_errors(argv):
    assert run(*argv)[0] == EXIT_INPUT


def test_cache_gives_identical_output(tmp_path):
    argv = ("char", "su2", "--q-max", "2", "--z-max", "2", "--u-max", "1", "--cache-dir", str(tmp_path))
    first = run(*argv)
    assert any(tmp_path.iterdir())
    second = run(*argv)
    assert first == second
    assert run(*argv[:-2])[1] == first[1]
