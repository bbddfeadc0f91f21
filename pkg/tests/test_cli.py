import csv
import io

import pytest

from pucc.cli import main
from pucc.core import contest_instance
from pucc.io import RESULT_COLUMNS, load_instance, load_solution, verify_solution, write_instance


@pytest.fixture
def contest(tmp_path):
    def make(n):
        path = tmp_path / f"contest{n}.txt"
        path.write_text(write_instance(contest_instance(n)))
        return path

    return make


def test_gen_contest(capsys):
    assert main(["gen-contest", "5"]) == 0
    out = capsys.readouterr().out
    assert load_instance(out).radii.tolist() == [1, 2, 3, 4, 5]
    assert [line for line in out.splitlines() if not line.startswith("#")] == ["5", "1.0", "2.0", "3.0", "4.0", "5.0"]


def test_gen_contest_rejects_small_n(capsys):
    assert main(["gen-contest", "1"]) == 2
    assert "n >= 2" in capsys.readouterr().err


def test_solve_contest5(contest, tmp_path, capsys):
    inst_path = contest(5)
    out = tmp_path / "c5.sol"
    code = main(
        ["solve", str(inst_path), "--time-limit", "60", "--seed", "1", "--out", str(out), "--target", "9.00139874"]
    )
    assert code == 0
    printed = capsys.readouterr().out
    R = float(printed.split("best R = ")[1].split()[0])
    assert R <= 9.00139774 + 1e-6
    inst = load_instance(inst_path.read_text())
    sol = load_solution(out.read_text(), inst)
    assert verify_solution(inst, sol).feasible
    assert (tmp_path / "c5.sol.history.csv").exists()


def test_solve_is_reproducible(contest, tmp_path):
    inst_path = contest(6)
    files = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        args = ["solve", str(inst_path), "--time-limit", "2", "--seed", "7"]
        args += ["--out", str(d / "s.txt"), "--trace", str(d / "t.csv"), "--history", str(d / "h.csv")]
        args += ["--svg", str(d / "p.svg")]
        assert main(args) == 0
        files.append([(d / f).read_bytes() for f in ("s.txt", "t.csv", "h.csv", "p.svg")])
    assert files[0] == files[1]


def test_solve_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.txt"), "--time-limit", "1"]) == 2
    assert "nope.txt" in capsys.readouterr().err


def test_solve_malformed_instance(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n1\n-1\n2\n")
    assert main(["solve", str(bad), "--time-limit", "1"]) == 2
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("flag", [["--time-limit", "0"], ["--time-limit", "-3"], ["--strategy", "sa"]])
def test_bad_flags_exit_2(contest, flag):
    with pytest.raises(SystemExit) as err:
        main(["solve", str(contest(5))] + flag)
    assert err.value.code == 2


def test_decide_feasible_with_trace(contest, tmp_path):
    trace = tmp_path / "trace.csv"
    out = tmp_path / "d.sol"
    args = ["decide", str(contest(11)), "--radius", "24.96063429", "--time-limit", "120", "--seed", "0"]
    assert main(args + ["--trace", str(trace), "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(trace.read_text())))
    assert rows[0] == ["restart", "round", "iteration", "event", "energy", "best_energy"]
    assert len(rows) > 1
    inst = contest_instance(11)
    assert verify_solution(inst, load_solution(out.read_text(), inst)).feasible


def test_decide_infeasible_exit_1(contest):
    args = ["decide", str(contest(5)), "--radius", "8.9", "--time-limit", "0.2", "--seed", "0"]
    assert main(args) == 1


def test_decide_radius_too_small_exit_2(contest, capsys):
    assert main(["decide", str(contest(5)), "--radius", "1", "--time-limit", "1"]) == 2
    assert "largest disk" in capsys.readouterr().err


def test_decide_its_hits_at_least_as_often_as_sd(contest):
    path = str(contest(11))
    hits = {}
    for strategy in ("its", "sd"):
        hits[strategy] = sum(
            main(["decide", path, "--radius", "24.96063429", "--time-limit", "3", "--seed", str(s), "--strategy", strategy])
            == 0
            for s in range(3)
        )
    assert hits["its"] >= hits["sd"]
    assert hits["its"] >= 2


def test_verify_and_tamper(contest, tmp_path, capsys):
    path = contest(2)
    good = tmp_path / "good.sol"
    good.write_text("3\n-2 0\n1 0\n")
    assert main(["verify", str(path), str(good)]) == 0
    bad = tmp_path / "bad.sol"
    bad.write_text("3\n-1.9 0\n1 0\n")
    assert main(["verify", str(path), str(bad)]) == 1
    assert "INFEASIBLE" in capsys.readouterr().out
    assert main(["verify", str(path), str(bad), "--tol", "0.2"]) == 0


def test_verify_wrong_line_count(contest, tmp_path):
    sol = tmp_path / "short.sol"
    sol.write_text("3\n-2 0\n")
    assert main(["verify", str(contest(2)), str(sol)]) == 2


def test_render(contest, tmp_path):
    sol = tmp_path / "s.sol"
    sol.write_text("3\n-2 0\n1 0\n")
    out = tmp_path / "s.svg"
    assert main(["render", str(contest(2)), str(sol), "--out", str(out)]) == 0
    svg = out.read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 3


def _bench(tmp_path, extra=()):
    d = tmp_path / "bench"
    d.mkdir(exist_ok=True)
    for n in (3, 4, 5):
        (d / f"contest{n}.txt").write_text(write_instance(contest_instance(n)))
    out = tmp_path / "results.csv"
    args = ["bench", str(d), "--seeds", "0,1", "--time-limit", "0.5", "--out", str(out)] + list(extra)
    assert main(args) == 0
    return list(csv.DictReader(io.StringIO(out.read_text())))


def test_bench_rows_and_determinism(tmp_path):
    rows = _bench(tmp_path)
    assert len(rows) == 6
    assert list(rows[0]) == RESULT_COLUMNS
    assert {r["instance"] for r in rows} == {"contest3", "contest4", "contest5"}
    assert all(r["hit"] == "" and r["feasible"] == "1" for r in rows)
    assert rows == _bench(tmp_path)


def test_bench_targets_enable_hits(tmp_path):
    targets = tmp_path / "targets.txt"
    # contest3 optimum is 5: disks 2 and 3 span a diameter and disk 1 fits in
    # the gap beside them; a radius below every lower bound can never be hit
    targets.write_text("contest3 5.0\ncontest4 1.0\n")
    rows = _bench(tmp_path, ["--targets", str(targets)])
    hits = {r["instance"]: r["hit"] for r in rows}
    assert hits["contest3"] == "1"
    assert hits["contest4"] == "0"
    assert hits["contest5"] == ""


def test_bench_parallel_matches_serial(tmp_path):
    assert _bench(tmp_path, ["--jobs", "2"]) == _bench(tmp_path)


def test_bench_empty_directory(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["bench", str(empty), "--time-limit", "1"]) == 2
