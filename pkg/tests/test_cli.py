import csv
import subprocess
import sys

import numpy as np
import pytest

from sfdenoise import load_pgm, save_pgm
from sfdenoise.cli import BENCH_FIELDS, SWEEP_FIELDS, UsageError, main, parse_range


def run(argv, capsys):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def crop(tmp_path, lenna):
    path = tmp_path / "clean.pgm"
    save_pgm(lenna[192:256, 192:256], path)
    return path


@pytest.fixture
def noisy_crop(tmp_path, crop, capsys):
    path = tmp_path / "noisy.pgm"
    assert run(["add-noise", "--in", crop, "--out", path, "--sigma", 20, "--seed", 1], capsys)[0] == 0
    return path


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sfdenoise", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "denoise" in proc.stdout


def test_add_noise_prints_realized_psnr(tmp_path, lenna, capsys):
    src = tmp_path / "lena.pgm"
    save_pgm(lenna, src)
    code, out, _ = run(["add-noise", "--in", src, "--out", tmp_path / "n.pgm", "--sigma", 20], capsys)
    assert code == 0
    assert float(out.split(":")[1].split()[0]) == pytest.approx(22.1, abs=0.1)


def test_add_noise_same_seed_same_bytes(tmp_path, crop, capsys):
    for name, seed in (("a", 3), ("b", 3), ("c", 4)):
        run(["add-noise", "--in", crop, "--out", tmp_path / f"{name}.pgm", "--dist", "laplacian",
             "--sigma", 10, "--seed", seed], capsys)
    a, b, c = ((tmp_path / f"{n}.pgm").read_bytes() for n in "abc")
    assert a == b != c


def test_add_noise_missing_sigma_is_usage_error(tmp_path, crop, capsys):
    code, _, err = run(["add-noise", "--in", crop, "--out", tmp_path / "x.pgm"], capsys)
    assert code == 2
    assert "usage" in err


@pytest.mark.parametrize("sigma", ["0", "-1", "nan", "abc"])
def test_invalid_sigma_is_usage_error(tmp_path, crop, capsys, sigma):
    assert run(["add-noise", "--in", crop, "--out", tmp_path / "x.pgm", "--sigma", sigma], capsys)[0] == 2


def test_missing_input_is_runtime_error(tmp_path, capsys):
    code, _, err = run(["estimate-noise", "--in", tmp_path / "nope.pgm"], capsys)
    assert code == 1
    assert err


def test_bad_pgm_is_runtime_error(tmp_path, capsys):
    bad = tmp_path / "p2.pgm"
    bad.write_bytes(b"P2\n1 1\n255\n0\n")
    code, _, err = run(["estimate-noise", "--in", bad], capsys)
    assert code == 1
    assert "unsupported PGM variant" in err


def test_estimate_noise_prints_number(noisy_crop, capsys):
    code, out, _ = run(["estimate-noise", "--in", noisy_crop, "--dist", "gaussian"], capsys)
    assert code == 0
    assert 10 < float(out) < 40


def test_denoise_sigma_and_dist_conflict(tmp_path, noisy_crop, capsys):
    argv = ["denoise", "--in", noisy_crop, "--out", tmp_path / "o.pgm"]
    assert run(argv + ["--sigma", 20, "--dist", "gaussian"], capsys)[0] == 2
    assert run(argv, capsys)[0] == 2


def test_denoise_outputs(tmp_path, crop, noisy_crop, capsys):
    out, params = tmp_path / "o.pgm", tmp_path / "p.csv"
    code, text, _ = run(["denoise", "--in", noisy_crop, "--out", out, "--sigma", 20, "--clean", crop,
                         "--params-out", params, "--threads", 1], capsys)
    assert code == 0
    assert "wall time" in text
    reported = float(text.split("output PSNR:")[1].split()[0])
    assert reported > 26
    rows = read_csv(params)
    assert rows[0] == ["block_x0", "block_y0", "w", "h", "sigma_x", "sigma_y", "theta", "risk", "iterations"]
    assert len(rows) == 1 + 64
    assert load_pgm(out).shape == (64, 64)


def test_denoise_estimates_sigma_from_dist(tmp_path, noisy_crop, capsys):
    code, text, _ = run(["denoise", "--in", noisy_crop, "--out", tmp_path / "o.pgm", "--dist", "laplacian",
                         "--threads", 1], capsys)
    assert code == 0
    assert "estimated sigma" in text


def test_denoise_threads_do_not_change_bytes(tmp_path, noisy_crop, capsys):
    for n in (1, 2):
        assert run(["denoise", "--in", noisy_crop, "--out", tmp_path / f"o{n}.pgm", "--sigma", 20,
                    "--threads", n, "--params-out", tmp_path / f"p{n}.csv"], capsys)[0] == 0
    assert (tmp_path / "o1.pgm").read_bytes() == (tmp_path / "o2.pgm").read_bytes()
    assert (tmp_path / "p1.csv").read_bytes() == (tmp_path / "p2.csv").read_bytes()


def test_denoise_clean_size_mismatch(tmp_path, noisy_crop, lenna, capsys):
    other = tmp_path / "other.pgm"
    save_pgm(lenna[:32, :32], other)
    code, _, _ = run(["denoise", "--in", noisy_crop, "--out", tmp_path / "o.pgm", "--sigma", 20,
                      "--clean", other], capsys)
    assert code == 1


def test_parse_range():
    np.testing.assert_allclose(parse_range("0.3:0.5:0.1"), [0.3, 0.4, 0.5])
    np.testing.assert_allclose(parse_range("1:1:0.5"), [1.0])
    for bad in ("1:2", "a:b:c", "2:1:0.1", "0:1:0", "0:1:-1"):
        with pytest.raises(UsageError):
            parse_range(bad)


@pytest.mark.parametrize("rng_text", ["0.3:3", "3:0.3:0.1", "0.1:2:0.1"])
def test_sweep_bad_range_is_usage_error(tmp_path, crop, noisy_crop, capsys, rng_text):
    code, _, _ = run(["sweep", "--clean", crop, "--noisy", noisy_crop, "--sigma", 20, "--range", rng_text,
                      "--out", tmp_path / "s.csv"], capsys)
    assert code == 2


def test_sweep_is_u_shaped(tmp_path, lenna, capsys):
    clean, noisy = tmp_path / "c.pgm", tmp_path / "n.pgm"
    save_pgm(lenna, clean)
    run(["add-noise", "--in", clean, "--out", noisy, "--sigma", 20, "--seed", 2], capsys)
    out = tmp_path / "s.csv"
    code, text, _ = run(["sweep", "--clean", clean, "--noisy", noisy, "--sigma", 20, "--range", "0.3:3:0.05",
                         "--out", out], capsys)
    assert code == 0
    assert "argmin" in text
    rows = read_csv(out)
    assert tuple(rows[0]) == SWEEP_FIELDS
    table = np.array(rows[1:], dtype=float)
    assert len(table) == 55
    norm_x = np.sum(lenna * lenna)
    np.testing.assert_allclose(table[:, 2] + norm_x, table[:, 3], rtol=1e-9)
    for col in (1, 3):
        signs = np.sign(np.diff(table[:, col]))
        assert np.all(signs != 0)
        assert np.count_nonzero(np.diff(signs)) == 1 and signs[0] < 0


def test_bench(tmp_path, lenna, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    save_pgm(lenna[:32, :32], images / "a.pgm")
    save_pgm(lenna[300:332, 100:132], images / "b.pgm")
    out = tmp_path / "bench.csv"
    code, text, _ = run(["bench", "--clean-dir", images, "--sigmas", "10,30", "--dists", "gaussian,laplacian",
                         "--seeds", 2, "--out", out, "--threads", 1], capsys)
    assert code == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == BENCH_FIELDS
    assert len(rows) - 1 == 2 * 2 * 2 * 2
    assert {r[4] for r in rows[1:]} == {"0", "1"}
    assert "out PSNR" in text and len(text.strip().splitlines()) == 1 + 2 * 2 * 2
    first = dict(zip(rows[0], rows[1]))
    assert float(first["output_psnr"]) > float(first["input_psnr"])


def test_bench_is_deterministic(tmp_path, lenna, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    save_pgm(lenna[:24, :24], images / "a.pgm")
    outs = []
    for k in range(2):
        out = tmp_path / f"b{k}.csv"
        run(["bench", "--clean-dir", images, "--sigmas", "20", "--dists", "gaussian", "--out", out,
             "--threads", 1], capsys)
        outs.append([r[:7] for r in read_csv(out)])  # wall time differs run to run
    assert outs[0] == outs[1]


def test_bench_empty_dir_is_runtime_error(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code, _, err = run(["bench", "--clean-dir", tmp_path / "empty", "--out", tmp_path / "b.csv"], capsys)
    assert code == 1
    assert "no .pgm" in err


def test_bench_bad_dist_list(tmp_path, capsys):
    assert run(["bench", "--clean-dir", tmp_path, "--dists", "poisson", "--out", tmp_path / "b.csv"], capsys)[0] == 2
