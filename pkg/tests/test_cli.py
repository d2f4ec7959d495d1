import csv
import re

import numpy as np
import pytest

from mclab import cli

DESK_CONFIG = """
cells = 100
t_end = 0.1
output_times = 0.05, 0.1
error_dt = 0.025
n_ref = 21
closures = pn:1, diffcorr:1:truncated, rpn:1, ssp3
"""


def read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_run_writes_csvs(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(DESK_CONFIG)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    snaps = read(tmp_path / "out" / "snapshots.csv")
    errs = read(tmp_path / "out" / "errors.csv")
    assert snaps[0] == ["closure", "t", "x", "u0"]
    assert errs[0] == ["closure", "t", "l1_abs", "l1_signed"]
    labels = {r[0] for r in snaps[1:]}
    assert labels == {"reference", "pn:1", "diffcorr:1:truncated", "rpn:1", "ssp3"}
    # reference + 4 closures, 3 snapshot times, 100 cells
    assert len(snaps) - 1 == 5 * 3 * 100
    assert {r[1] for r in errs[1:]} == {"0", "0.025", "0.05", "0.075", "0.1"}
    # rpn:1 and ssp3 are the same system
    rpn = [r[2:] for r in errs[1:] if r[0] == "rpn:1"]
    ssp = [r[2:] for r in errs[1:] if r[0] == "ssp3"]
    assert rpn == ssp
    text = (tmp_path / "out" / "errors.csv").read_bytes()
    assert text.endswith(b"\n") and b"\r" not in text


def test_csv_values_have_12_significant_digits(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(DESK_CONFIG)
    cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)])
    for row in read(tmp_path / "snapshots.csv")[1:50]:
        mantissa = re.sub(r"e.*$", "", row[3]).replace("-", "").replace(".", "").lstrip("0")
        assert len(mantissa) <= 12


def test_run_t_end_zero(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("cells = 50\nt_end = 0\nclosures = pn:1")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    snaps = read(tmp_path / "snapshots.csv")
    assert {r[1] for r in snaps[1:]} == {"0"}
    errs = read(tmp_path / "errors.csv")
    assert [r[1] for r in errs[1:]] == ["0"]


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kappa = -1\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "kappa must be ≥ 0" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["run"])
    assert exc.value.code == 1


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise cli.SolverError("non-finite values")

    monkeypatch.setattr(cli, "run", boom)
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(DESK_CONFIG)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def decimal_block(text, name):
    block = text.split(f"{name} (decimal):\n", 1)[1].split("\n\n", 1)[0]
    rows = [line.split() for line in block.strip().splitlines() if line.strip()]
    rows = [r for r in rows if all(re.fullmatch(r"-?\d+\.\d{4}", c) for c in r)]
    return np.array(rows, dtype=float)


def test_matrices_pn1(capsys):
    assert cli.main(["matrices", "--closure", "pn:1"]) == 0
    out = capsys.readouterr().out
    assert np.allclose(decimal_block(out, "A"), [[0, 1], [1 / 3, 0]], atol=5e-5)
    assert not decimal_block(out, "D").any()
    assert "1/3" in out


def test_matrices_rpn2_reports_definiteness():
    text = cli.cmd_matrices("rpn:2")
    assert "39/77" in text
    assert "min Re(eig)" in text and "symmetric part" in text


def test_matrices_bad_closure():
    assert cli.main(["matrices", "--closure", "pn:1:modified"]) == 1


def test_paper_suite_files(tmp_path):
    paths = cli.cmd_paper_suite(tmp_path, cells=50)
    assert sorted(p.name for p in paths) == sorted(cli.PAPER_FIGURES)
    assert len(paths) == 8
    for p in paths:
        header = read(p)[0]
        assert header in (list(cli.SNAPSHOT_HEADER), list(cli.ERROR_HEADER))


def test_paper_suite_thread_independent(tmp_path, monkeypatch):
    cli.cmd_paper_suite(tmp_path / "a", cells=40)
    monkeypatch.setenv("MCLAB_THREADS", "4")
    cli.cmd_paper_suite(tmp_path / "b", cells=40)
    for name in cli.PAPER_FIGURES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_certify(tmp_path):
    assert cli.main(["certify", "--out", str(tmp_path), "--cells", "100"]) == 0
    rows = read(tmp_path / "certificate.csv")
    assert rows[0] == ["n", "next_n", "l1_distance"]
    assert [r[0] for r in rows[1:]] == ["11", "21", "31", "41"]
