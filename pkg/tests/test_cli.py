import numpy as np
import pytest

from coqam.cli import main
from coqam.orthogonality import check_wcp_coqam
from coqam.pulses import format_pulse, read_pulse


def test_design_reference_pulse(tmp_path):
    out = tmp_path / "g.txt"
    assert main(["design-pulse", "--K", "128", "--M", "9", "--gen", "gaussian", "--beta", "0.1", "--orthogonalize", "--out", str(out)]) == 0
    p, params = read_pulse(out)
    assert check_wcp_coqam(p, params).passed


def test_design_rect(tmp_path):
    out = tmp_path / "r.txt"
    assert main(["design-pulse", "--K", "4", "--M", "2", "--gen", "rect", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# pulse K=4 M=2 gen=rect param=none"
    assert len(lines) == 9


def test_design_round_trip_bit_exact(tmp_path):
    out = tmp_path / "rc.txt"
    main(["design-pulse", "--K", "8", "--M", "4", "--gen", "rc", "--rolloff", "0.3", "--orthogonalize", "--out", str(out)])
    p, params = read_pulse(out)
    assert format_pulse(p, params) == out.read_text()


def test_design_usage_errors(tmp_path):
    assert main(["design-pulse", "--K", "7", "--M", "2", "--gen", "rect", "--out", str(tmp_path / "x")]) == 2
    assert main(["design-pulse", "--K", "8", "--M", "2", "--gen", "rc", "--rolloff", "2", "--out", str(tmp_path / "x")]) == 2


def test_check_exit_codes(tmp_path, capsys):
    good, bad = tmp_path / "good.txt", tmp_path / "bad.txt"
    main(["design-pulse", "--K", "16", "--M", "4", "--gen", "rc", "--rolloff", "0.3", "--orthogonalize", "--out", str(good)])
    main(["design-pulse", "--K", "16", "--M", "4", "--gen", "rc", "--rolloff", "0.3", "--out", str(bad)])
    capsys.readouterr()
    assert main(["check", "--pulse", str(good)]) == 0
    csv_out = tmp_path / "res.csv"
    assert main(["check", "--pulse", str(bad), "--family", "wcp-coqam", "--out", str(csv_out)]) == 1
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "condition,m,v,residual"
    assert "pass=False" in lines[-1]


def test_check_missing_file(tmp_path):
    assert main(["check", "--pulse", str(tmp_path / "nope.txt")]) == 2


def test_check_lattice_mismatch(tmp_path):
    f = tmp_path / "p.txt"
    main(["design-pulse", "--K", "4", "--M", "2", "--gen", "rect", "--out", str(f)])
    assert main(["check", "--pulse", str(f), "--K", "8"]) == 2


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--system", "wcp-coqam", "--K", "16", "--M", "4", "--gen", "gaussian", "--beta", "0.4",
            "--orthogonalize", "--snr-start", "0", "--snr-stop", "4", "--snr-step", "2",
            "--target-frame-errors", "10", "--seed", "5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    body = [ln for ln in a.read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "es_n0_db,frames,symbols,symbol_errors,frame_errors,ser,fer"
    assert [float(r.split(",")[0]) for r in body[1:]] == [0.0, 2.0, 4.0]


def test_simulate_from_pulse_file(tmp_path, capsys):
    f = tmp_path / "p.txt"
    main(["design-pulse", "--K", "16", "--M", "4", "--gen", "rc", "--orthogonalize", "--out", str(f)])
    capsys.readouterr()
    assert main(["simulate", "--pulse", str(f), "--snr-start", "2", "--snr-stop", "2", "--target-frame-errors", "5"]) == 0
    assert "dzt-rc" in capsys.readouterr().out


def test_simulate_ofdm(capsys):
    assert main(["simulate", "--system", "ofdm", "--K", "8", "--M", "2", "--snr-start", "0", "--snr-stop", "0",
                 "--target-frame-errors", "5"]) == 0
    assert "# system: ofdm" in capsys.readouterr().out


def test_simulate_empty_grid():
    assert main(["simulate", "--K", "8", "--M", "2", "--snr-start", "5", "--snr-stop", "0"]) == 2
    assert main(["simulate", "--K", "8", "--M", "2", "--snr-step", "0"]) == 2


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["check"])
    assert exc.value.code == 2


def test_verify_cmd_default(capsys):
    assert main(["verify-paper", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert out.count("holds") == 3


def test_verify_cmd_corrupted_phase(capsys):
    assert main(["verify-paper", "--K", "8", "--M", "4", "--trials", "3", "--corrupt-phase"]) == 1
    assert "appendix-A" in capsys.readouterr().out


def test_verify_cmd_k6():
    assert main(["verify-paper", "--K", "6", "--M", "3", "--trials", "5"]) == 0
