import numpy as np

from cuberoot.cli import main
from cuberoot.core import substream
from cuberoot.grenander import gren_dgp
from cuberoot.maxscore import ms_dgp


def test_simulate_writes_file(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["simulate", "--example", "grenander", "--dgp", "1", "--n", "200", "--S", "50",
                 "--B", "100", "--method", "reshaped_plugin", "--tuning", "rot", "--seed", "7",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,tuning,coverage,avg_length,avg_tuning,failures"
    assert len(lines) == 2 and lines[1].startswith("reshaped_plugin,rot,")


def test_missing_example_is_usage_error(capsys):
    assert main(["simulate", "--n", "10"]) == 1
    assert "usage" in capsys.readouterr().err


def test_runtime_failure_exit_code(tmp_path, capsys):
    assert main(["simulate", "--example", "maxscore", "--n", "10", "--m", "50", "--S", "1"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["estimate", "--example", "grenander", str(tmp_path / "missing.txt")]) == 2


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 3


def test_markdown_to_stdout(capsys):
    assert main(["simulate", "--example", "maxscore", "--n", "20", "--S", "2", "--B", "3",
                 "--method", "standard", "--format", "markdown"]) == 0
    assert capsys.readouterr().out.startswith("| method |")


def test_estimate_grenander(tmp_path, capsys):
    f = tmp_path / "x.txt"
    np.savetxt(f, gren_dgp(1, 100, substream(1, "cli")))
    assert main(["estimate", "--example", "grenander", "--B", "50", str(f)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("estimate ") and out[1].startswith("ci_0.95 [")


def test_estimate_maxscore_csv(tmp_path, capsys):
    f = tmp_path / "d.csv"
    np.savetxt(f, ms_dgp(1, 80, substream(1, "cli")).rows, delimiter=",")
    assert main(["estimate", "--example", "maxscore", "--B", "30", "--method", "m_out_of_n", str(f)]) == 0
    assert "method=m_out_of_n tuning=m=19" in capsys.readouterr().out
