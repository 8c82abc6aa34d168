import json
import subprocess
import sys

import numpy as np
import pytest

from castkit import formats
from castkit.geometry import CameraParams, PointMap, unproject_pixels
from castkit.imageio import load_mask, save_image, save_mask
from castkit.pipeline.cli import main
from castkit.pipeline.manifest import PARTIAL, SCHEMAS, StageOutputs, read_manifest, validate

import synth


def run(*argv):
    return main([str(a) for a in argv])


def manifest(path):
    return json.loads(path.read_text())


@pytest.fixture
def pair(tmp_path):
    rng = np.random.default_rng(0)
    a = 0.5 * synth.texture(rng, 96, 128, channels=3)
    b = a.copy()
    b[30:60, 40:80] = [1.0, 1.0, 0.9]
    save_image(tmp_path / "orig.png", a)
    save_image(tmp_path / "edit.png", b)
    truth = np.zeros((96, 128), bool)
    truth[30:60, 40:80] = True
    return tmp_path / "orig.png", tmp_path / "edit.png", truth


class TestMaskdiff:
    def test_identical(self, pair, tmp_path):
        out = tmp_path / "out"
        assert run("maskdiff", pair[0], pair[0], "--out", out) == 0
        assert not load_mask(out / "first_mask.png").any()
        doc = manifest(out / "maskdiff.json")
        assert doc["stats"]["area_fraction"] == 0 and doc["source"] == "auto"

    def test_block(self, pair, tmp_path):
        out = tmp_path / "out"
        assert run("maskdiff", pair[0], pair[1], "--out", out) == 0
        m = load_mask(out / "first_mask.png")
        truth = pair[2]
        assert (m & truth).sum() >= 0.97 * truth.sum()
        assert (m & ~truth).sum() == 0
        doc = read_manifest(out / "maskdiff.json")
        assert doc["stats"]["bbox"] == [40, 30, 79, 59]

    def test_size_mismatch(self, pair, tmp_path, capsys):
        save_image(tmp_path / "small.png", np.zeros((50, 60)))
        assert run("maskdiff", pair[0], tmp_path / "small.png", "--out", tmp_path / "o") == 2
        err = capsys.readouterr().err
        assert "128x96x3" in err and "60x50x1" in err

    def test_unknown_config_key_fails_before_work(self, pair, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"diff": {"threshold": 0.2, "blur": 3}}))
        out = tmp_path / "o"
        assert run("maskdiff", pair[0], pair[1], "--config", cfg, "--out", out) == 2
        assert "blur" in capsys.readouterr().err
        assert not out.exists()

    def test_user_mask_overrides(self, pair, tmp_path):
        user = np.zeros((96, 128), bool)
        user[0:10, 0:10] = True
        save_mask(tmp_path / "user.png", user)
        out = tmp_path / "o"
        assert run("maskdiff", pair[0], pair[1], "--mask", tmp_path / "user.png", "--out", out) == 0
        assert np.array_equal(load_mask(out / "first_mask.png"), user)
        assert manifest(out / "maskdiff.json")["source"] == "user"

    def test_unreadable_input(self, tmp_path):
        (tmp_path / "junk.png").write_text("not a png")
        assert run("maskdiff", tmp_path / "junk.png", tmp_path / "junk.png", "--out", tmp_path / "o") == 2


def static_scene(tmp_path, n=3):
    cam = CameraParams(80, 80, 31.5, 31.5, np.eye(3), np.zeros(3), 64, 64)
    ys, xs = np.mgrid[0:64, 0:64].astype(float)
    depth = np.full((64, 64), 5.0)
    depth[20:30, 25:40] = 3.0
    pts = unproject_pixels(cam, np.stack([xs.ravel(), ys.ravel()], 1), depth.ravel()).reshape(64, 64, 3)
    mask = np.zeros((64, 64), bool)
    mask[20:30, 25:40] = True
    save_mask(tmp_path / "first.png", mask)
    formats.write_pmap(tmp_path / "pm.pmap", [PointMap.from_points(pts)] * n)
    formats.save_cameras(tmp_path / "cams.json", [cam] * n)
    return mask


class TestPropagate:
    def test_identity_cameras(self, tmp_path):
        mask = static_scene(tmp_path)
        out = tmp_path / "o"
        rc = run("propagate", "--first-mask", tmp_path / "first.png", "--pointmaps", tmp_path / "pm.pmap",
                 "--cameras", tmp_path / "cams.json", "--frames", 3, "--pad-fraction", 0, "--out", out)
        assert rc == 0
        doc = read_manifest(out / "propagate.json")
        assert doc["mode"] == "camera" and doc["frames"] == 3 and doc["semantics"] == "validity"
        assert load_mask(out / "masks/mask_0000.png").all()
        for i in (1, 2):
            assert np.array_equal(load_mask(out / f"masks/mask_{i:04d}.png"), mask)
            assert doc["masks"][i]["bbox"] == [25, 20, 39, 29]
        listing = json.loads((out / "masks.json").read_text())
        assert listing == [{"frame": i, "path": f"masks/mask_{i:04d}.png"} for i in range(3)]

    def test_nearest_mode(self, tmp_path):
        static_scene(tmp_path)
        out = tmp_path / "o"
        assert run("propagate", "--first-mask", tmp_path / "first.png", "--pointmaps", tmp_path / "pm.pmap",
                   "--frames", 3, "--out", out) == 0
        assert manifest(out / "propagate.json")["mode"] == "nearest"

    def test_missing_pointmaps(self, tmp_path):
        static_scene(tmp_path)
        assert run("propagate", "--first-mask", tmp_path / "first.png", "--pointmaps", tmp_path / "nope",
                   "--frames", 3, "--out", tmp_path / "o") == 2

    def test_frame_count_mismatch(self, tmp_path):
        static_scene(tmp_path)
        assert run("propagate", "--first-mask", tmp_path / "first.png", "--pointmaps", tmp_path / "pm.pmap",
                   "--frames", 4, "--out", tmp_path / "o") == 2

    def test_empty_object(self, tmp_path):
        static_scene(tmp_path)
        save_mask(tmp_path / "empty.png", np.zeros((64, 64), bool))
        assert run("propagate", "--first-mask", tmp_path / "empty.png", "--pointmaps", tmp_path / "pm.pmap",
                   "--frames", 3, "--out", tmp_path / "o") == 2


def image_dirs(tmp_path, n, h=64, w=64, same=True, seed=0):
    rng = np.random.default_rng(seed)
    ed, rd = tmp_path / "edited", tmp_path / "rendered"
    ed.mkdir()
    rd.mkdir()
    for i in range(n):
        img = synth.texture(rng, h, w)
        save_image(ed / f"v{i:03d}.png", img)
        save_image(rd / f"v{i:03d}.png", img if same else np.clip(img + rng.normal(0, 0.05, img.shape), 0, 1))
    return ed, rd


class TestSelect:
    def test_identical_all_selected(self, tmp_path):
        ed, rd = image_dirs(tmp_path, 5)
        out = tmp_path / "o"
        assert run("select", "--edited", ed, "--rendered", rd, "--out", out) == 0
        doc = read_manifest(out / "select.json")
        assert doc["rule"] == "threshold" and doc["selected"] == [0, 1, 2, 3, 4]
        assert all(s["score"] == 0 and s["psnr_db"] is None for s in doc["scores"])
        assert doc["k_min"] == 5  # default 12 clamped to the dataset size
        assert "rule=threshold" in (out / "scores.txt").read_text()

    def test_corrupted_frames_excluded(self, tmp_path):
        fx = synth.write_run_fixture(tmp_path, n=12, h=96, w=128, corrupted=(3, 8))
        out = tmp_path / "o"
        assert run("select", "--edited", fx["edited"], "--rendered", fx["rendered"], "--kmin", 4, "--out", out) == 0
        doc = manifest(out / "select.json")
        assert 3 not in doc["selected"] and 8 not in doc["selected"]
        worst = sorted(doc["scores"], key=lambda s: s["score"])[-2:]
        assert {s["frame"] for s in worst} == {3, 8}

    def test_kmin_greater_than_n(self, tmp_path):
        ed, rd = image_dirs(tmp_path, 4)
        assert run("select", "--edited", ed, "--rendered", rd, "--kmin", 5, "--out", tmp_path / "o") == 2

    def test_count_mismatch_names_frame(self, tmp_path, capsys):
        ed, rd = image_dirs(tmp_path, 4)
        (rd / "v003.png").unlink()
        assert run("select", "--edited", ed, "--rendered", rd, "--out", tmp_path / "o") == 2
        assert "v003.png" in capsys.readouterr().err

    def test_shape_mismatch_names_frame(self, tmp_path, capsys):
        ed, rd = image_dirs(tmp_path, 3)
        save_image(rd / "v001.png", np.zeros((64, 70)))
        assert run("select", "--edited", ed, "--rendered", rd, "--out", tmp_path / "o") == 2
        assert "frame 1" in capsys.readouterr().err

    def test_explicit_tau_and_table(self, tmp_path):
        ed, rd = image_dirs(tmp_path, 4, same=False)
        table = tmp_path / "lpips.json"
        table.write_text(json.dumps({"0": 0.0, "1": 0.9, "2": 0.0, "3": 0.9}))
        out = tmp_path / "o"
        rc = run("select", "--edited", ed, "--rendered", rd, "--tau", 0.2, "--kmin", 1,
                 "--perceptual-table", table, "--cameras", "poses.json", "--out", out)
        assert rc == 0
        doc = manifest(out / "select.json")
        assert [s["perceptual"] for s in doc["scores"]] == [0.0, 0.9, 0.0, 0.9]
        assert doc["selected"] == [0, 2] and doc["tau"] == 0.2
        assert doc["cameras"] == "poses.json"
        assert doc["selected_frames"] == ["v000.png", "v002.png"]

    def test_bad_tau(self, tmp_path):
        ed, rd = image_dirs(tmp_path, 2)
        with pytest.raises(SystemExit) as exc:
            run("select", "--edited", ed, "--rendered", rd, "--tau", "soon")
        assert exc.value.code == 2


class TestMatch:
    @pytest.fixture
    def imgs(self, tmp_path):
        rng = np.random.default_rng(3)
        img = synth.texture(rng, 160, 200)
        moved = np.zeros_like(img)
        moved[:, 2:] = img[:, :-2]
        paths = {}
        for name, arr in (("a", img), ("b", moved), ("noise", rng.random(img.shape)), ("flat", np.full(img.shape, 0.5))):
            paths[name] = tmp_path / f"{name}.png"
            save_image(paths[name], arr)
        return paths

    def test_identical(self, imgs, tmp_path):
        out = tmp_path / "o"
        a = imgs["a"]
        assert run("match", "--orig-a", a, "--orig-b", a, "--edit-a", a, "--edit-b", a, "--out", out) == 0
        assert read_manifest(out / "match.json")["ratio"] == 1.0

    def test_separation_and_composite(self, imgs, tmp_path):
        out = tmp_path / "o"
        rc = run("match", "--orig-a", imgs["a"], "--orig-b", imgs["b"], "--edit-a", imgs["a"],
                 "--edit-b", imgs["noise"], "--composite", "--out", out)
        assert rc == 0
        doc = manifest(out / "match.json")
        assert doc["ratio"] < 0.05 and doc["composite"] == "matches.png"
        assert (out / "matches.png").exists()

    def test_missing_file(self, imgs, tmp_path):
        a = imgs["a"]
        assert run("match", "--orig-a", a, "--orig-b", tmp_path / "gone.png", "--edit-a", a, "--edit-b", a,
                   "--out", tmp_path / "o") == 2

    def test_zero_keypoints_degraded(self, imgs, tmp_path):
        out = tmp_path / "o"
        a, flat = imgs["a"], imgs["flat"]
        assert run("match", "--orig-a", a, "--orig-b", a, "--edit-a", flat, "--edit-b", a, "--out", out) == 0
        doc = read_manifest(out / "match.json")
        assert doc["degraded"] and doc["edited_matches"] is None and doc["ratio"] is None


class TestReport:
    def test_single_stage(self, tmp_path, capsys):
        ed, rd = image_dirs(tmp_path, 3)
        out = tmp_path / "run"
        assert run("select", "--edited", ed, "--rendered", rd, "--out", out) == 0
        assert run("report", "--run", out) == 0
        rep = json.loads((out / "report.json").read_text())
        assert list(rep["stages"]) == ["select"]
        assert json.loads(capsys.readouterr().out) == rep

    def test_empty_dir(self, tmp_path):
        (tmp_path / "run").mkdir()
        assert run("report", "--run", tmp_path / "run") == 2
        assert run("report", "--run", tmp_path / "missing") == 2

    def test_corrupt_manifest(self, tmp_path, capsys):
        ed, rd = image_dirs(tmp_path, 3)
        out = tmp_path / "run"
        run("select", "--edited", ed, "--rendered", rd, "--out", out)
        (out / "select.json").write_text("{ not json")
        assert run("report", "--run", out) == 2
        assert "select.json" in capsys.readouterr().err

    def test_tampered_manifest(self, tmp_path):
        ed, rd = image_dirs(tmp_path, 3)
        out = tmp_path / "run"
        run("select", "--edited", ed, "--rendered", rd, "--out", out)
        doc = manifest(out / "select.json")
        doc["selected"] = [0]
        (out / "select.json").write_text(json.dumps(doc))
        assert run("report", "--run", out) == 2


def test_stage_outputs_partial_then_commit(tmp_path):
    outs = StageOutputs(tmp_path)
    outs.path("a.txt").write_text("x")
    assert (tmp_path / f"a.txt{PARTIAL}").exists() and not (tmp_path / "a.txt").exists()
    outs.commit()
    assert (tmp_path / "a.txt").read_text() == "x"
    assert not (tmp_path / f"a.txt{PARTIAL}").exists()


def test_failed_stage_leaves_partial(tmp_path, monkeypatch):
    static_scene(tmp_path)
    import castkit.pipeline.cli as cli

    def boom(*a, **k):
        raise RuntimeError("disk full")

    monkeypatch.setattr(cli.StageOutputs, "write_manifest", boom)
    out = tmp_path / "o"
    rc = run("propagate", "--first-mask", tmp_path / "first.png", "--pointmaps", tmp_path / "pm.pmap",
             "--frames", 3, "--out", out)
    assert rc == 1
    assert (out / f"masks{PARTIAL}").is_dir() and not (out / "masks").exists()
    assert not (out / "propagate.json").exists()


def test_schemas_reject_missing_fields():
    from castkit.errors import ManifestError

    with pytest.raises(ManifestError):
        validate("select", {"schema_version": 1, "stage": "select"})
    assert set(SCHEMAS) == {"maskdiff", "propagate", "select", "match", "report"}


def test_threads_env(monkeypatch):
    from castkit._parallel import resolve_workers

    monkeypatch.setenv("CASTKIT_THREADS", "6")
    assert resolve_workers() == 6
    assert resolve_workers(2) == 2
    monkeypatch.delenv("CASTKIT_THREADS")
    assert resolve_workers() == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "castkit", "report", "--run", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "no stage manifests" in proc.stderr
