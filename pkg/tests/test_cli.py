import json

import pytest

from cpforge.cli import main
from cpforge.config import Config, DEFAULT_PORT, PORT_ENV_VAR
from cpforge.errors import ParseError


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A small end-to-end artifact chain shared by the CLI tests."""
    d = tmp_path_factory.mktemp("cli")
    assert run("sample", "--count", "600", "--seed", "7", "--out", str(d / "data.jsonl")) == 0
    assert (
        run(
            "cluster",
            "--in", str(d / "data.jsonl"),
            "--out", str(d / "clusters.json"),
            "--seed", "7",
        )
        == 0
    )
    assert (
        run(
            "annotate", "--oracle",
            "--in", str(d / "data.jsonl"),
            "--clusters", str(d / "clusters.json"),
            "--budget", "80",
            "--seed", "7",
            "--out", str(d / "labeled.jsonl"),
            "--curve", str(d / "curve.csv"),
        )
        == 0
    )
    assert (
        run("train", "--in", str(d / "labeled.jsonl"), "--out", str(d / "model.txt"))
        == 0
    )
    assert (
        run(
            "gen-cps",
            "--model", str(d / "model.txt"),
            "--count", "300",
            "--seed", "11",
            "--out", str(d / "cps.jsonl"),
        )
        == 0
    )
    assert (
        run(
            "gen-level",
            "--cps", str(d / "cps.jsonl"),
            "--length", "8",
            "--seed", "3",
            "--out", str(d / "level.txt"),
        )
        == 0
    )
    assert (
        run(
            "adapt",
            "--cps", str(d / "cps.jsonl"),
            "--player", "0.5",
            "--episodes", "150",
            "--seed", "5",
            "--tail", "50",
            "--out", str(d / "trace.csv"),
            "--summary", str(d / "summary.json"),
        )
        == 0
    )
    return d


def test_sample_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("sample", "--count", "100", "--seed", "7", "--out", str(a)) == 0
    assert run("sample", "--count", "100", "--seed", "7", "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_artifacts_validate_clean(workdir):
    for name in ("data.jsonl", "labeled.jsonl", "model.txt", "level.txt"):
        assert run("validate", str(workdir / name)) == 0
    assert (
        run("validate", str(workdir / "cps.jsonl"), "--model", str(workdir / "model.txt"))
        == 0
    )


def test_missing_cps_file_is_domain_error(tmp_path, capsys):
    rc = run(
        "gen-level",
        "--cps", str(tmp_path / "nope.jsonl"),
        "--length", "3",
        "--out", str(tmp_path / "x.txt"),
    )
    assert rc == 1
    assert "nope.jsonl" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run("sample", "--count")  # missing value
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run("no-such-command")
    assert exc.value.code == 2


def test_band_flag_parsing(workdir, tmp_path):
    out = tmp_path / "banded.txt"
    rc = run(
        "gen-level",
        "--cps", str(workdir / "cps.jsonl"),
        "--length", "4",
        "--seed", "9",
        "--difficulty", "0.0:0.5",
        "--out", str(out),
    )
    assert rc == 0
    from cpforge.levels import read_level

    level = read_level(out)
    assert all(d <= 0.5 for d in level.difficulties)
    with pytest.raises(SystemExit):
        run(
            "gen-level",
            "--cps", str(workdir / "cps.jsonl"),
            "--length", "4",
            "--difficulty", "banana",
            "--out", str(out),
        )


def test_validate_flags_tampered_level(workdir, tmp_path, capsys):
    source = (workdir / "level.txt").read_text().split("\n")
    # widen a gap in the first segment to 6 columns: rows 1..14 are the grid
    header, rest = source[0], source[1:]
    grid_rows = []
    first_seg = rest[1:15]
    for row in first_seg:
        grid_rows.append(row[:5] + "------" + row[11:])
    tampered = [header, rest[0], *grid_rows, *rest[15:]]
    path = tmp_path / "tampered.txt"
    path.write_text("\n".join(tampered))
    rc = run("validate", str(path))
    captured = capsys.readouterr()
    assert rc == 1
    assert "R1_MAX_GAP" in captured.err
    assert "segment 0" in captured.err


def test_summary_file_written(workdir):
    summary = json.loads((workdir / "summary.json").read_text())
    assert summary["episodes"] == 150
    assert summary["tail"] == 50
    assert 0.0 <= summary["tail_mean_difficulty"] <= 1.0


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"seed": 3, "bogus": 1}')
    with pytest.raises(ParseError):
        Config.load(path)
    path.write_text('{"seed": 3, "theta": 0.6}')
    cfg = Config.load(path)
    assert cfg.seed == 3 and cfg.theta == 0.6


def test_config_port_resolution(monkeypatch):
    assert Config().resolved_port() == DEFAULT_PORT
    monkeypatch.setenv(PORT_ENV_VAR, "9001")
    assert Config().resolved_port() == 9001
    assert Config(port=7000).resolved_port() == 7000
    monkeypatch.setenv(PORT_ENV_VAR, "not-a-port")
    with pytest.raises(ParseError):
        Config().resolved_port()
