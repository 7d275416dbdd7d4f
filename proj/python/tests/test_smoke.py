import json

import numpy as np
import pytest

import sar2rgb


def test_metrics():
    zero = np.zeros((3, 8, 8), np.float32)
    half = np.full((3, 8, 8), 0.5, np.float32)
    assert sar2rgb.mae(half, zero) == pytest.approx(0.5)
    assert sar2rgb.psnr(half, zero) == pytest.approx(20 * np.log10(2), abs=1e-6)
    assert sar2rgb.psnr(half, half) == 99.0
    rng = np.random.default_rng(0)
    a, b = rng.random((2, 3, 8, 8), dtype=np.float32)
    assert sar2rgb.mae(a, b) == pytest.approx(np.abs(a.astype(np.float64) - b).mean(), abs=1e-12)
    with pytest.raises(ValueError):
        sar2rgb.mae(a, b[:, :4])


def test_cloud_masks():
    qa = np.array([[0, 1024], [2048, 3072 | 7]], np.float32)
    assert sar2rgb.qa60_cloud_mask(qa).tolist() == [[False, True], [True, True]]
    rgb = np.full((3, 4, 4), 0.05, np.float32)
    rgb[:, :2, :2] = 0.9
    mask = sar2rgb.heuristic_cloud_mask(rgb)
    assert mask.sum() == 4 and mask[:2, :2].all()


def test_tile_round_trip(tmp_path):
    data = np.arange(2 * 3 * 4, dtype=np.float32).reshape(2, 3, 4) - 20
    t = sar2rgb.Tile(data, ["VV", "VH"], "t1", "2021-05-01", "S1", -9999.0)
    sar2rgb.write_tile(t, tmp_path / "t1.s2tl")
    back = sar2rgb.read_tile(tmp_path / "t1.s2tl")
    assert back == t
    assert back.roles == ["VV", "VH"] and back.shape == (2, 3, 4)
    np.testing.assert_array_equal(back.data, data)


def test_split_matches_reference():
    idx = sar2rgb.split_holdout_indices(5, 2, 42)
    assert sorted(idx) == [1, 2]


def test_cli_pipeline(tmp_path):
    d = str(tmp_path)
    code, _, _ = sar2rgb.run_cli(["synth", "--out", d + "/fx", "--n-pairs", "6", "--size", "16",
                                  "--cloud-fraction", "0.5", "--seed", "3"])
    assert code == 0
    assert sar2rgb.run_cli(["screen", "--in", d + "/fx", "--out", d + "/screen.jsonl"])[0] == 0
    assert sar2rgb.run_cli(["filter", "--screen", d + "/screen.jsonl", "--out", d + "/d2.jsonl"])[0] == 0
    kept = [json.loads(line)["pair_id"] for line in open(d + "/d2.jsonl")]
    truth = json.load(open(d + "/fx/truth.json"))
    assert len(kept) == 3 and not set(kept) & set(truth["cloudy"])

    s2 = sar2rgb.read_tile(tmp_path / "fx" / "s2" / (truth["cloudy"][0] + ".s2tl"))
    qa = sar2rgb.read_tile(tmp_path / "fx" / "qa60" / (truth["cloudy"][0] + ".s2tl"))
    report = sar2rgb.screen_tile(s2, qa)
    assert report["heuristic_cloud_ratio"] > 0 and report["qa60_cloud_ratio"] > 0

    args = ["train", "--in", d + "/fx/manifest.jsonl", "--out", d + "/g.s2ck", "--image-size", "16",
            "--seed-size", "4", "--n-up", "2", "--base-width", "4", "--spade-hidden", "4", "--steps", "2"]
    assert sar2rgb.run_cli(args)[0] == 0
    s1 = [sar2rgb.read_tile(tmp_path / "fx" / "s1" / f"tile_{i:04d}.s2tl") for i in range(3)]
    out = sar2rgb.infer(tmp_path / "g.s2ck", s1, jobs=2)
    assert [o.tile_id for o in out] == [t.tile_id for t in s1]
    assert all(o.shape == (3, 16, 16) for o in out)
    assert all(((o.data >= 0) & (o.data <= 1)).all() for o in out)


def test_usage_errors():
    assert sar2rgb.run_cli([])[0] == 1
    assert sar2rgb.run_cli(["filter", "--in", "/nonexistent.jsonl", "--out", "/tmp/x.jsonl"])[0] == 2
