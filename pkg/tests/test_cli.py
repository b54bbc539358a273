import subprocess
import sys

import pytest

from fdcop.cli import main
from fdcop.model import parse_problem

from conftest import DATA

FIG1 = str(DATA / "figure1.fdcop")


def test_solve_golden_trace(capsys):
    rc = main(["solve", "--problem", FIG1, "--k", "2", "--points", "0:1,2;1:3,4;2:7,8;3:5,9",
               "--order", "0,1,2,3", "--trace"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "1 -> 0 cost_map [3:13, 3:10]" in out
    assert "2 -> 1 cost_map [7:86, 7:86]" in out
    assert "messages: 40 " in out
    assert "x0=-0.571570" in out


@pytest.mark.parametrize("algo", ["ccocoa", "cocoa", "hcms"])
def test_solve_algorithms(capsys, algo):
    assert main(["solve", "--problem", FIG1, "--algo", algo, "--maxsum-iters", "10"]) == 0
    assert f"algo: {algo}" in capsys.readouterr().out


def test_usage_errors(capsys, tmp_path):
    assert main(["solve", "--problem", FIG1, "--k", "0"]) == 1
    assert main(["solve", "--problem", FIG1, "--points", "0:x"]) == 1
    assert main(["bench", "--algos", "bogus", "--instances", "1"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_run_failures(tmp_path):
    assert main(["solve", "--problem", str(tmp_path / "missing.fdcop")]) == 2
    bad = tmp_path / "bad.fdcop"
    bad.write_text("fdcop 1\nagents 2\nwhat\n")
    assert main(["solve", "--problem", str(bad)]) == 2
    assert main(["verify", "--problem", FIG1, "grid", "--points", "41", "--cap", "10"]) == 2


def test_gen_round_trip(tmp_path, capsys):
    out = tmp_path / "p.fdcop"
    assert main(["gen", "--topology", "scalefree", "--agents", "9", "--seed", "2", "--out", str(out)]) == 0
    p = parse_problem(out.read_text())
    assert p.n == 9
    assert main(["gen", "--topology", "scalefree", "--agents", "9", "--seed", "2"]) == 0
    assert capsys.readouterr().out == out.read_text()


def test_bench_csv(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["bench", "--topology", "tree", "--agents", "5", "--instances", "2",
               "--algos", "ccocoa,hcms@10", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("topology,n,k,algo,seed,cost")
    assert len(lines) == 1 + 2 * 2 + 2


def test_verify(capsys):
    assert main(["verify", "--problem", FIG1, "quadmin"]) == 0
    assert "cost: 0.0" in capsys.readouterr().out
    assert main(["verify", "--problem", FIG1, "grid", "--points", "21"]) == 0
    assert "cost: 0.0" in capsys.readouterr().out
    assert main(["verify", "--problem", FIG1, "gradcheck"]) == 0
    worst = float(capsys.readouterr().out.strip().splitlines()[-1].split()[-1])
    assert worst < 1e-6


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fdcop", "verify", "--problem", FIG1, "quadmin"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "inside_domains: True" in r.stdout
