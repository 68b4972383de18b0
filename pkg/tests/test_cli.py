import numpy as np
import pandas as pd
import pytest

from sst_shaper.cli import main, parse_path_spec, read_bits
from sst_shaper.errors import ConfigError
from sst_shaper.imaging import load_pgm


@pytest.fixture
def cover_file(tmp_path):
    path = tmp_path / "cover.pgm"
    assert main(["cover", "--model", "smooth", "--width", "40", "--height", "30", "--seed", "5",
                 "--out", str(path)]) == 0
    return path


@pytest.fixture
def message_file(tmp_path, message):
    path = tmp_path / "message.bits"
    path.write_text("".join(map(str, message(300).tolist())) + "\n")
    return path


@pytest.mark.parametrize("path_spec", ["seq", "keyed:0x1F"])
def test_embed_extract_round_trip(tmp_path, cover_file, message_file, path_spec):
    stego = tmp_path / "stego.pgm"
    report = tmp_path / "report.csv"
    recovered = tmp_path / "recovered.bits"
    assert main(["embed", "--cover", str(cover_file), "--message", str(message_file), "--k", "4",
                 "--seed", "99", "--path", path_spec, "--out", str(stego), "--report", str(report)]) == 0
    assert main(["extract", "--stego", str(stego), "--n", "300", "--k", "4", "--seed", "99",
                 "--path", path_spec, "--out", str(recovered)]) == 0
    assert recovered.read_text() == message_file.read_text()
    assert load_pgm(stego).shape == (30, 40)

    candidates = pd.read_csv(report)
    assert candidates["h"].tolist() == list(range(16))
    assert candidates["chosen"].sum() == 1


def test_read_bits_rejects_other_characters(tmp_path):
    path = tmp_path / "bad.bits"
    path.write_text("0101x\n")
    with pytest.raises(ConfigError):
        read_bits(path)


def test_parse_path_spec():
    assert parse_path_spec("seq", 3, 10).tolist() == [0, 1, 2]
    assert sorted(parse_path_spec("keyed:7", 10, 10).tolist()) == list(range(10))
    for spec in ("spiral", "keyed:", "keyed:abc"):
        with pytest.raises(ConfigError):
            parse_path_spec(spec, 3, 10)


def test_config_errors_exit_2(tmp_path, cover_file, message_file):
    out = tmp_path / "stego.pgm"
    assert main(["embed", "--cover", str(cover_file), "--message", str(message_file), "--k", "30",
                 "--out", str(out)]) == 2
    assert main(["embed", "--cover", str(cover_file), "--message", str(message_file), "--path", "spiral",
                 "--out", str(out)]) == 2
    assert not out.exists()


def test_io_errors_exit_3(tmp_path, message_file):
    missing = tmp_path / "missing.pgm"
    assert main(["embed", "--cover", str(missing), "--message", str(message_file),
                 "--out", str(tmp_path / "s.pgm")]) == 3
    broken = tmp_path / "broken.pgm"
    broken.write_bytes(b"P5\n4 4\n255\n\x00")
    assert main(["extract", "--stego", str(broken), "--n", "1", "--k", "0",
                 "--out", str(tmp_path / "m.bits")]) == 3


def test_simulate_writes_runs_and_summary(tmp_path):
    config = tmp_path / "camp.toml"
    config.write_text('models = ["uniform", "bimodal"]\nwidth = 24\nheight = 24\n'
                      "ns = [80]\nks = [0, 2]\nrepetitions = 2\n")
    runs = tmp_path / "runs.csv"
    summary = tmp_path / "summary.csv"
    assert main(["simulate", "--config", str(config), "--out", str(runs), "--summary", str(summary),
                 "--no-timing"]) == 0
    frame = pd.read_csv(runs)
    assert len(frame) == 8
    assert "search_ms" not in frame.columns
    groups = pd.read_csv(summary)
    assert groups.columns[:7].tolist() == ["group_by", "group", "metric", "runs", "mean_gain", "ci95",
                                           "success_rate"]
    assert groups["group_by"].tolist() == ["k", "k", "model", "model", "n"]
    metrics = pd.read_csv(tmp_path / "summary_metrics.csv")
    assert metrics["k"].tolist() == [0, 2]
    assert "gain_cooc_l1" in metrics.columns
    index = pd.read_csv(tmp_path / "summary_index.csv")
    assert index["k"].tolist() == [2]
    assert "largest_bucket_share" in index.columns

    again = tmp_path / "again.csv"
    assert main(["simulate", "--config", str(config), "--out", str(again), "--no-timing"]) == 0
    assert again.read_bytes() == runs.read_bytes()


def test_simulate_needs_an_output(tmp_path):
    config = tmp_path / "camp.toml"
    config.write_text("ns = [10]\nks = [0]\nrepetitions = 1\nwidth = 8\nheight = 8\n")
    assert main(["simulate", "--config", str(config)]) == 2


def test_stc_sim(tmp_path):
    config = tmp_path / "camp.toml"
    out = tmp_path / "stc.csv"
    summary = tmp_path / "stc_summary.csv"
    config.write_text(f'models = ["smooth"]\nwidth = 24\nheight = 24\nns = [60]\nks = [0, 2]\n'
                      f'repetitions = 2\noutput = "{out.as_posix()}"\n')
    assert main(["stc-sim", "--config", str(config), "--summary", str(summary)]) == 0
    frame = pd.read_csv(out)
    assert frame["k"].tolist() == [0, 0, 2, 2]
    assert (frame["cost"] >= 0).all()
    assert pd.read_csv(summary)["configurations"].tolist() == [1, 4]


def test_timing(tmp_path):
    out = tmp_path / "timing.csv"
    assert main(["timing", "--kmax", "2", "--reps", "1", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert frame["k"].tolist() == [0]
    assert main(["timing", "--kmax", "-1", "--out", str(out)]) == 2


def test_cover_command_is_deterministic(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    for path in (a, b):
        assert main(["cover", "--model", "bimodal", "--seed", "0x10", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert np.asarray(load_pgm(a)).shape == (100, 100)


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--version"])
    assert exit_info.value.code == 0
    assert capsys.readouterr().out.startswith("sst-shaper ")
