import csv

import pytest

from csimatch.cli import EXIT_INFEASIBLE, build_parser, main, parse_snr_grid, resolve


def test_parse_snr_grid():
    assert parse_snr_grid("-10:30:10") == (-10.0, 0.0, 10.0, 20.0, 30.0)
    assert parse_snr_grid("0,5, 7.5") == (0.0, 5.0, 7.5)
    assert parse_snr_grid("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    with pytest.raises(ValueError):
        parse_snr_grid("0:10:0")


def test_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\npairs = 4\ndeployments = 7\npaper = yes\nsnr-db = 0,10\n")
    s = resolve(build_parser().parse_args(["--config", str(cfg), "--deployments", "3"]))
    assert s["pairs"] == "4"  # file beats preset
    assert s["deployments"] == 3  # flag beats file
    assert s["tx-ant"] == 5  # preset beats desk default
    assert s["snr-db"] == "0,10"


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("antennas = 4\n")
    with pytest.raises(SystemExit):
        main(["--config", str(cfg)])


def test_writes_csv(tmp_path):
    out = tmp_path / "res.csv"
    code = main(
        ["--pairs", "3", "--tx-ant", "2", "--rx-ant", "2", "--deployments", "2",
         "--snr-db=-10,20", "--schemes", "minimal,stable_matching", "--out", str(out)]
    )
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["scheme"] for r in rows] == ["minimal", "minimal", "stable_matching", "stable_matching"]
    assert rows[0]["deployments"] == "2"


def test_stdout_output(capsys):
    assert main(["--pairs", "2", "--tx-ant", "2", "--rx-ant", "2", "--deployments", "1",
                 "--snr-db", "0", "--schemes", "minimal"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("scheme,snr_db,mean_sum_rate")


def test_infeasible_exit_code(capsys):
    code = main(["--coherence", "50", "--deployments", "1", "--snr-db", "0", "--schemes", "full"])
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err
