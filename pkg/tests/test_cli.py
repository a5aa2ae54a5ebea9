import csv
import json

import numpy as np
import pytest

from infogeo.cli import main, parse_betas


def read_json(path):
    return json.loads(path.read_text())


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# infogeo ")
    return list(csv.reader(lines[1:]))


def test_parse_betas():
    assert parse_betas("0.1,1,10") == [0.1, 1.0, 10.0]
    betas = parse_betas("0.001..100")
    assert len(betas) == 12 and betas[0] == pytest.approx(0.001) and betas[-1] == pytest.approx(100)
    assert np.allclose(np.diff(np.log(betas)), np.log(10) * 5 / 11)
    assert parse_betas("1..4:3") == pytest.approx([1, 2, 4])


def test_solve_file(tmp_path, capsys):
    assert main(["solve", "--grid", "5x5", "--nbhd", "manhattan", "--goal", "12", "--beta", "100",
                 "--out", str(tmp_path)]) == 0
    data = read_json(tmp_path / "solve.json")
    assert data["result"]["I_D"][24] == pytest.approx(5.42, abs=0.1)
    assert data["meta"]["config"]["goal"] == 12 and "version" in data["meta"] and data["meta"]["seed"] == 0
    assert "jobs" not in data["meta"]["config"] and "out" not in data["meta"]["config"]


def test_solve_trivial_world(tmp_path, capsys):
    assert main(["solve", "--grid", "1x1", "--goal", "0", "--beta", "1", "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "solve.json")["result"]["F"] == [0.0]


def test_unconverged_solve_is_written_and_flagged(tmp_path, capsys):
    assert main(["solve", "--grid", "5x5", "--beta", "0.5", "--max-iters", "3", "--out", str(tmp_path)]) == 2
    assert read_json(tmp_path / "solve.json")["result"]["converged"] is False


def test_pairwise_outputs(tmp_path, capsys):
    assert main(["pairwise", "--grid", "5x5", "--beta", "0.1", "--jobs", "1", "--out", str(tmp_path)]) == 0
    asym = np.array(read_json(tmp_path / "asymmetry.json")["values"])
    mag = np.abs(asym)
    corners = [0, 4, 20, 24]
    assert mag[np.ix_(corners, [12])].max() > np.median(mag)
    raw = np.array(read_json(tmp_path / "pairwise_raw.json")["values"])
    sym = np.array(read_json(tmp_path / "pairwise_sym.json")["values"])
    assert np.allclose(sym, (raw + raw.T) / 2)


def test_pairwise_deterministic_limit_csv(tmp_path, capsys):
    assert main(["pairwise", "--grid", "4x4", "--beta", "1e7", "--format", "csv", "--out", str(tmp_path)]) == 0
    raw = np.array([row[1:] for row in read_csv(tmp_path / "pairwise_raw.csv")[1:]], dtype=float)
    sym = np.array([row[1:] for row in read_csv(tmp_path / "pairwise_sym.csv")[1:]], dtype=float)
    assert np.max(np.abs(raw - sym)) <= 1e-6


def test_tradeoff_columns_monotone(tmp_path, capsys):
    assert main(["tradeoff", "--grid", "5x5", "--goal", "12", "--betas", "0.001..100", "--format", "csv",
                 "--out", str(tmp_path)]) == 0
    rows = np.array(read_csv(tmp_path / "tradeoff.csv")[1:], dtype=float)
    assert rows.shape == (12, 3)
    assert np.all(np.diff(rows[:, 1]) >= -1e-6) and np.all(np.diff(rows[:, 2]) >= -1e-6)


def test_sample_and_geodesics(tmp_path, capsys):
    assert main(["sample", "--grid", "7x7", "--nbhd", "moore", "--goal", "6", "--beta", "100", "--start", "0",
                 "--count", "2000", "--seed", "3", "--out", str(tmp_path)]) == 0
    data = read_json(tmp_path / "sample.json")
    props = np.array(data["proportions"])
    props[[0, 6]] = 0
    assert int(np.argmax(props)) == 12 and data["completed"] == 2000
    assert main(["geodesics", "--grid", "5x5", "--start", "0", "--goal", "12", "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "geodesics.json")["states"] == [0, 1, 2, 5, 6, 7, 10, 11, 12]


def test_infodesics_pair_enumeration(tmp_path, capsys):
    assert main(["infodesics", "--grid", "7x7", "--nbhd", "moore", "--beta", "100", "--epsilon", "0.01",
                 "--start", "0", "--goal", "6", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "infodesics.jsonl").read_text().splitlines()
    assert "meta" in json.loads(lines[0])
    seqs = [json.loads(line)["seq"] for line in lines[1:]]
    assert [0, 12, 6] in seqs


def test_config_errors_name_the_field(tmp_path, capsys):
    assert main(["sample", "--grid", "3x3", "--beta", "1", "--start", "9", "--out", str(tmp_path)]) == 1
    assert "--start" in capsys.readouterr().err
    assert main(["infodesics", "--grid", "3x3", "--beta", "1", "--start", "0", "--out", str(tmp_path)]) == 1
    assert "--start/--goal" in capsys.readouterr().err


def test_jobs_env_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("INFOGEO_JOBS", "2")
    assert main(["pairwise", "--grid", "3x3", "--beta", "1", "--out", str(tmp_path)]) == 0
    monkeypatch.setenv("INFOGEO_JOBS", "many")
    assert main(["pairwise", "--grid", "3x3", "--beta", "1", "--out", str(tmp_path)]) == 1


@pytest.mark.slow
def test_embed_large_grid(tmp_path, capsys):
    assert main(["embed", "--grid", "11x11", "--nbhd", "moore", "--dims", "3", "--beta", "0.1",
                 "--out", str(tmp_path)]) == 0
    data = read_json(tmp_path / "embedding.json")
    assert data["dims"] == 3 and len(data["coords"]) == 121 and data["stress"] >= 0


@pytest.mark.slow
def test_infodesic_histogram_corner_maxima(tmp_path, capsys):
    assert main(["infodesics", "--grid", "7x7", "--nbhd", "moore", "--beta", "0.07", "--epsilon", "0.05",
                 "--len", "3", "--format", "csv", "--out", str(tmp_path)]) == 0
    counts = {int(s): int(c) for s, c in read_csv(tmp_path / "histogram.csv")[1:]}
    top = max(counts.values())
    assert {s for s, c in counts.items() if c == top} == {0, 6, 42, 48}
