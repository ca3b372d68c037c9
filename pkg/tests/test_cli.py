import numpy as np
import pytest
from PIL import Image

from pgmseg.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, config_from_args, main
from pgmseg.evaluation import make_synthetic, write_synthetic_dataset
from pgmseg.imagecore import read_mask
from pgmseg.pipeline import Mode, SegConfig

FAST_ARGS = ["--runs", "1", "--iters", "3"]


@pytest.fixture(name="sample", scope="module")
def fixture_sample(tmp_path_factory):
    directory = tmp_path_factory.mktemp("sample")
    sample = make_synthetic(np.random.default_rng(0))
    Image.fromarray(sample.to_rgb()).save(directory / "image.png")
    return directory / "image.png", sample


def test_config_from_args_defaults():
    args = build_parser().parse_args(["segment", "--image", "a.png", "--bbox", "1 2 3 4", "--out", "m.png"])
    assert config_from_args(args) == SegConfig()


def test_config_from_args():
    args = build_parser().parse_args(
        ["eval", "--manifest", "m.tsv", "--kf", "5", "--lambda", "1.5", "--mode", "gb", "--prior-ring", "7"]
    )
    config = config_from_args(args)
    assert config.k_f == 5
    assert config.lam == 1.5
    assert config.mode == Mode.GB
    assert config.prior_ring == 7


@pytest.mark.slow
def test_segment(tmp_path, sample):
    path, synthetic = sample
    out = tmp_path / "mask.png"
    code = main(["segment", "--image", str(path), "--bbox", str(synthetic.bbox), "--out", str(out), *FAST_ARGS])
    assert code == EXIT_OK
    mask = read_mask(out)
    assert mask.shape == synthetic.image.shape
    assert np.any(mask.foreground)


@pytest.mark.slow
def test_segment_debug_dir(tmp_path, sample):
    path, synthetic = sample
    code = main(
        [
            "segment",
            "--image",
            str(path),
            "--bbox",
            str(synthetic.bbox),
            "--out",
            str(tmp_path / "mask.png"),
            "--debug-dir",
            str(tmp_path / "debug"),
            *FAST_ARGS,
        ]
    )
    assert code == EXIT_OK
    assert (tmp_path / "debug" / "run_00" / "superpixels.png").exists()


def test_segment_missing_image(tmp_path):
    code = main(
        ["segment", "--image", str(tmp_path / "missing.png"), "--bbox", "1 2 3 4", "--out", str(tmp_path / "m.png")]
    )
    assert code == EXIT_USAGE


def test_segment_invalid_bbox(tmp_path, sample):
    path, _ = sample
    code = main(["segment", "--image", str(path), "--bbox", "1 2 3", "--out", str(tmp_path / "m.png")])
    assert code == EXIT_USAGE
    code = main(["segment", "--image", str(path), "--bbox", "0 0 500 500", "--out", str(tmp_path / "m.png")])
    assert code == EXIT_USAGE


def test_segment_degenerate_trimap(tmp_path, sample):
    path, synthetic = sample
    trimap = np.full(synthetic.image.shape, 128, dtype=np.uint8)
    Image.fromarray(trimap).save(tmp_path / "trimap.png")
    code = main(
        ["segment", "--image", str(path), "--trimap", str(tmp_path / "trimap.png"), "--out", str(tmp_path / "m.png"), *FAST_ARGS]
    )
    assert code == EXIT_FAILURE


def test_segment_mode_mismatch(tmp_path, sample):
    path, synthetic = sample
    out = tmp_path / "m.png"
    code = main(["segment", "--image", str(path), "--bbox", str(synthetic.bbox), "--mode", "auto", "--out", str(out)])
    assert code == EXIT_USAGE
    np.save(tmp_path / "prior.npy", np.full(synthetic.image.shape, 0.5))
    code = main(["segment", "--image", str(path), "--prior", str(tmp_path / "prior.npy"), "--out", str(out)])
    assert code == EXIT_USAGE
    assert not out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["segment", "--image", "a.png", "--out", "m.png"],  # missing initialization
        ["segment", "--image", "a.png", "--bbox", "1 2 3 4", "--prior", "p.npy", "--out", "m.png"],
        ["eval", "--manifest", "m.tsv", "--mode", "manual"],
        ["eval", "--manifest", "m.tsv", "--kf", "0"],
        ["eval", "--manifest", "m.tsv", "--lambda", "-1"],
        ["train"],
    ],
)
def test_invalid_invocation(argv):
    with pytest.raises(SystemExit) as exc_info:
        main(argv)
    assert exc_info.value.code == EXIT_USAGE


@pytest.mark.slow
def test_eval(tmp_path, capsys):
    manifest = write_synthetic_dataset(tmp_path / "data", 1)
    records = tmp_path / "records.tsv"
    code = main(["eval", "--manifest", str(manifest), "--out-records", str(records), "--no-progress", *FAST_ARGS])
    assert code == EXIT_OK
    assert records.read_text().startswith("synthetic_000\tbbox_error\t")
    output = capsys.readouterr().out
    assert "mean bbox_error" in output
    assert "images\t1\terrors\t0" in output


def test_eval_with_failures(tmp_path):
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("missing.png\tmissing_gt.png\tbbox\t1 2 3 4\n")
    assert main(["eval", "--manifest", str(manifest), "--no-progress", *FAST_ARGS]) == EXIT_FAILURE


def test_eval_invalid_manifest(tmp_path):
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("")
    assert main(["eval", "--manifest", str(manifest), "--no-progress"]) == EXIT_USAGE
    assert main(["eval", "--manifest", str(tmp_path / "missing.tsv"), "--no-progress"]) == EXIT_USAGE
