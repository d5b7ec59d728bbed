import json
import os

from streamperiod.cli import main
from streamperiod.oracle import brute_force_k_periods


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return str(path)


def test_find_all_two_pass(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"abcabcadcabc")
    assert main(["find", path, "--k", "2", "--passes", "2", "--mode", "all"]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["3", "6", "9", "10", "11"]


def test_find_one_pass_restricts_to_half(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"abcabcadcabc")
    assert main(["find", path, "--k", "2", "--passes", "1"]) == 0
    assert capsys.readouterr().out.split() == ["3", "6"]


def test_find_min_mode(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"aaaaaabbccd")
    assert main(["find", path, "--k", "3", "--mode", "min"]) == 0
    assert capsys.readouterr().out.split() == ["1"]


def test_find_max_mode(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"aaaaba")
    assert main(["find", path, "--k", "1", "--mode", "max"]) == 0
    assert capsys.readouterr().out.split() == ["5"]


def test_backends_agree_via_cli(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"abababababab")
    outputs = []
    for backend in ("exact", "sketch"):
        assert main(["find", path, "--k", "1", "--backend", backend]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_oracle_check_passes(tmp_path, capsys):
    path = write(tmp_path, "s.bin", b"abcabcadcabc")
    assert main(["find", path, "--k", "2", "--oracle-check"]) == 0


def test_stats_output(tmp_path, capsys):
    path = write(tmp_path, "s.bin", bytes(97 + (i % 3) for i in range(256)))
    stats_path = str(tmp_path / "stats.json")
    assert main(["find", path, "--k", "1", "--stats", stats_path]) == 0
    payload = json.loads(open(stats_path).read())
    assert payload["peakStateBytes"] > 0
    assert payload["backend"] == "sketch"
    assert set(payload["perPass"]) == {"pass1", "pass2"}


def test_exact_backend_stats_are_linear(tmp_path, capsys):
    data = bytes(97 + (i % 5) for i in range(2048))
    path = write(tmp_path, "s.bin", data)
    stats_path = str(tmp_path / "stats.json")
    assert main(["find", path, "--k", "1", "--backend", "exact", "--stats", stats_path]) == 0
    payload = json.loads(open(stats_path).read())
    assert payload["peakStateBytes"] >= len(data)


def test_stdin_requires_length_and_one_pass(tmp_path, capsys):
    assert main(["find", "-", "--k", "1"]) == 2
    assert main(["find", "-", "--k", "1", "--length", "8", "--passes", "2"]) == 2


def test_missing_file_is_io_error(tmp_path, capsys):
    assert main(["find", str(tmp_path / "absent.bin"), "--k", "1"]) == 1


def test_gen_planted_roundtrip(tmp_path, capsys):
    out = str(tmp_path / "gen.bin")
    assert main(
        ["gen", "--out", out, "planted", "--block", "abc", "--n", "12", "--mismatches", "5,8"]
    ) == 0
    data = open(out, "rb").read()
    assert len(data) == 12
    assert 3 in brute_force_k_periods(data, 2)


def test_gen_runs_prefix(tmp_path, capsys):
    out = str(tmp_path / "runs.bin")
    assert main(["gen", "--out", out, "runs", "--n", "12"]) == 0
    assert open(out, "rb").read() == b"101100111000"


def test_gen_hard_instance(tmp_path, capsys):
    out = str(tmp_path / "hard.bin")
    assert main(["gen", "--out", out, "hard", "--n", "64", "--k", "4", "--seed", "2"]) == 0
    data = open(out, "rb").read()
    assert len(data) == 64
    assert brute_force_k_periods(data, 4)[0] == 16


def test_report_writes_csv_and_figures(tmp_path, capsys):
    out_dir = str(tmp_path / "rep")
    rc = main(
        [
            "report",
            "--out-dir",
            out_dir,
            "--sizes",
            "1024,2048",
            "--bound-samples",
            "20",
            "--seed",
            "3",
        ]
    )
    assert rc == 0
    names = sorted(os.listdir(out_dir))
    assert names == [
        "bound_checks.csv",
        "bound_checks.png",
        "space_scaling.csv",
        "space_scaling.png",
    ]
    body = open(os.path.join(out_dir, "space_scaling.csv")).read()
    assert "sketch" in body and "exact" in body
    bounds = open(os.path.join(out_dir, "bound_checks.csv")).read().strip().splitlines()
    assert len(bounds) == 1 + 3 * 20
    assert all(line.endswith(",1") for line in bounds[1:])  # all bounds hold
