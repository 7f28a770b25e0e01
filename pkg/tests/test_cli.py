import csv
import io
import json

import pytest

from hdqkd.cli import (
    CSV_COLUMNS,
    ConfigError,
    csv_row,
    main,
    parse_config,
    read_config_file,
    write_csv,
)
from hdqkd.entropy import SolveStatus, register_backend
from hdqkd.entropy.solvers import RawSolve


def write(tmp_path, text, name="scenario.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults_from_flags(tmp_path):
    cfg = parse_config(write(tmp_path, ""), {"protocol": "p1", "d": 4})
    assert cfg.quadrature_m == 10 and cfg.eta_d == 0.9 and cfg.dark_rate_hz == 100.0
    noise = cfg.noise()
    assert noise.T == 5.4e-9
    assert abs(noise.lambda_p * noise.T - 0.1) < 1e-15
    assert abs(noise.p_loss_B - 0.997) < 1e-3


def test_file_values_and_overrides(tmp_path):
    path = write(tmp_path, "# scenario\nprotocol = p2\nd = 6\nm = 3   # nodes\nsolar_rate_hz = 1e4\n")
    cfg = parse_config(path)
    assert (cfg.protocol, cfg.d, cfg.quadrature_m, cfg.solar_rate_hz) == ("p2", 6, 3, 1e4)
    cfg = parse_config(path, {"d": 4, "quadrature_m": None})
    assert cfg.d == 4 and cfg.quadrature_m == 3


def test_loss_exclusivity(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "protocol = p1\nd = 2\nloss_db = 10\nloss_prob = 0.9\n"))
    cfg = parse_config(write(tmp_path, "protocol = p1\nd = 2\nloss_prob = 0.9\n"))
    assert abs(cfg.loss_db_value - 10) < 1e-12


@pytest.mark.parametrize("text,fragment", [
    ("protocol = p1\nd = 3\n", "even"),
    ("protocol = p1\nd = 2\neta_d = 1.5\n", "eta_d"),
    ("protocol = p1\nd = 2\ndark_rate_hz = -1\n", "dark_rate_hz"),
    ("protocol = p1\nd = 2\ncolour = blue\n", r"cfg:3: .*colour"),
    ("protocol = p1\nd = two\n", r"cfg:2: "),
    ("protocol = p1\nprotocol = p2\nd = 2\n", r"cfg:2: .*twice"),
    ("protocol p1\n", r"cfg:1: .*key = value"),
    ("d = 2\n", "protocol"),
])
def test_config_errors(tmp_path, text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(write(tmp_path, text))


def test_read_config_file_comments(tmp_path):
    vals = read_config_file(write(tmp_path, "\n# only comments\n  d = 4  # trailing\n"))
    assert vals == {"d": 4}


def test_quadrature_command(capsys):
    assert main(["quadrature", "--m", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = [line.split() for line in out[1:]]
    assert rows[0][3:] == ["1/3", "3/4"]
    assert rows[1][3:] == ["1", "1/4"]


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    assert main(["rate", "--protocol", "p1"]) == 1
    assert main(["rate", "--config", str(tmp_path / "missing.cfg"), "--protocol", "p1", "--d", "2"]) == 1
    assert main(["rate", "--protocol", "p1", "--d", "2", "--loss-db", "-3"]) == 1


def test_rate_command(tmp_path, capsys):
    out = tmp_path / "rate.csv"
    code = main(["rate", "--protocol", "p1", "--d", "2", "--m", "3", "--solar-rate-hz", "1e4",
                 "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "s_ae_lb_bits" in text and "optimal" in text
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["solar_rate_hz"] == "10000"


def test_sweep_csv(tmp_path):
    path = write(tmp_path, "protocol = p1\nd = 2\nm = 2\nsweep_axis = solar_rate\n"
                           "sweep_start = 1e2\nsweep_stop = 1e6\nsweep_points = 3\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(path), "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    reader = csv.reader(io.StringIO(raw.decode()))
    header, *rows = list(reader)
    assert tuple(header) == CSV_COLUMNS
    assert len(rows) == 3
    assert [r[header.index("solar_rate_hz")] for r in rows] == ["100", "10000", "1000000"]
    assert all(r[header.index("loss_db")] == "25.2" and r[header.index("d")] == "2" for r in rows)
    again = tmp_path / "again.csv"
    assert main(["sweep", "--config", str(path), "--out", str(again)]) == 0
    assert again.read_bytes() == raw


def test_bbm92_rows_report_rescaled_frame(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["rate", "--protocol", "bbm92", "--d", "8", "--m", "2", "--out", str(out)]) == 0
    (row,) = csv.DictReader(out.open())
    assert row["protocol"] == "bbm92" and row["d"] == "2"
    assert float(row["frame_length_s"]) == pytest.approx(5.4e-9 / 4)


def test_p2_flag_in_csv():
    from hdqkd.keyrate import compute_rate
    from hdqkd.model import ProtocolConfig
    from hdqkd.noise import NoiseParams

    res = compute_rate(ProtocolConfig("p2", 2), NoiseParams(), m=2)
    buf = io.StringIO()
    write_csv([res], buf)
    assert csv_row(res)["upper_bound_only"] == "true"
    assert buf.getvalue().count("\n") == 2


def test_solver_failure_exit_code(tmp_path, capsys):
    def broken(form, opts):
        return RawSolve(SolveStatus.NUMERICAL_FAILURE, "gave up", None, float("nan"), float("nan"))

    register_backend("broken", broken)
    path = write(tmp_path, "protocol = p1\nd = 2\nm = 2\nsolver = broken\n")
    assert main(["rate", "--config", str(path)]) == 2
    assert "gave up" in capsys.readouterr().err


def test_export_command(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert main(["export-sdp", "--protocol", "p1", "--d", "2", "--m", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["format"] == "hdqkd-entropy-sdp"
    assert len(doc["psd_blocks"]) == 8


def test_validate_command(tmp_path, capsys):
    path = write(tmp_path, "m = 4\nmc_frames = 400000\n")
    assert main(["validate", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out
