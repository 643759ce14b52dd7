import numpy as np
import pytest

from compfb.bench.cli import main as cli_main
from compfb.bench.experiment import (
    ExperimentConfig,
    SUMMARY_HEADER,
    TRACE_HEADER,
    default_image_path,
    run_experiment,
    shrink_to,
)
from compfb.bench.metrics import (
    compare_criterion,
    gaussian_noise,
    generate_observation,
    snr_db,
)
from compfb.bench.pgm import PgmError, load_pgm, save_pgm
from compfb.linops import Identity, make_motion_blur


class TestPgm:
    def test_round_trip(self, tmp_path):
        img = np.array([[0.0, 128.0], [255.0, 64.0]])
        path = tmp_path / "t.pgm"
        save_pgm(path, img)
        np.testing.assert_array_equal(load_pgm(path), img)

    def test_clamp_and_round(self, tmp_path):
        path = tmp_path / "t.pgm"
        save_pgm(path, np.array([[-5.0, 300.0], [99.6, 99.4]]))
        np.testing.assert_array_equal(load_pgm(path), [[0.0, 255.0], [100.0, 99.0]])

    def test_header_comments_accepted(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n# a comment\n2 1\n# another\n255\n\x07\x08")
        np.testing.assert_array_equal(load_pgm(path), [[7.0, 8.0]])

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(PgmError, match="byte offset"):
            load_pgm(path)

    def test_bad_magic_and_maxval(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0")
        with pytest.raises(PgmError, match="magic"):
            load_pgm(path)
        path.write_bytes(b"P5\n1 1\n511\n\x00\x00")
        with pytest.raises(PgmError, match="maxval"):
            load_pgm(path)


class TestObservation:
    def test_sigma_formula(self):
        x = np.ones((16, 16))  # ||Hx||^2 = N for the identity
        _, sigma = generate_observation(x, Identity((16, 16)), 0.0, seed=3)
        assert sigma == pytest.approx(1.0)

    def test_high_isnr_limit(self):
        x = np.ones((16, 16)) * 7
        y, _ = generate_observation(x, Identity((16, 16)), 300.0, seed=3)
        assert np.linalg.norm(y - x) / np.linalg.norm(x) < 1e-10

    def test_noise_variance(self):
        z = gaussian_noise((65536,), sigma=2.5, seed=11)
        assert abs(np.var(z) - 2.5**2) < 0.03 * 2.5**2
        assert abs(np.mean(z)) < 0.05

    def test_deterministic(self):
        x = np.ones((8, 8))
        y1, _ = generate_observation(x, Identity((8, 8)), 20.0, seed=42)
        y2, _ = generate_observation(x, Identity((8, 8)), 20.0, seed=42)
        np.testing.assert_array_equal(y1, y2)

    def test_realised_isnr(self):
        img = shrink_to(load_pgm(default_image_path(64)), 64)
        blur = make_motion_blur(5, 60.0, (64, 64))
        y, _ = generate_observation(img, blur, 20.0, seed=0)
        hx = blur.apply(img)
        realised = 10 * np.log10(np.sum(hx**2) / np.sum((y - hx) ** 2))
        assert abs(realised - 20.0) < 0.2


class TestScores:
    def test_snr_basic(self):
        ref = np.zeros(100)
        ref[0] = 10.0  # ||ref||^2 = 100
        x = ref.copy()
        x[1] = 1.0  # ||ref - x||^2 = 1
        assert snr_db(ref, x) == pytest.approx(20.0)

    def test_snr_cap_and_zero(self):
        ref = np.ones(4)
        assert snr_db(ref, ref) == 300.0
        assert snr_db(ref, np.zeros(4)) == pytest.approx(0.0)
        with pytest.raises(ValueError):
            snr_db(np.zeros(4), ref)

    def test_compare_criterion(self):
        assert compare_criterion(2.0, 1.0) == pytest.approx(0.5)
        assert compare_criterion(3.0, 3.0) == 0.0
        assert compare_criterion(-2.0, -3.0) == pytest.approx(0.5)
        with pytest.warns(RuntimeWarning):
            assert compare_criterion(0.0, -1.5) == 1.5


class TestShrink:
    def test_block_mean(self):
        img = np.arange(16.0).reshape(4, 4)
        out = shrink_to(img, 2)
        np.testing.assert_allclose(out, [[2.5, 4.5], [10.5, 12.5]])

    def test_identity_when_already_sized(self, rng):
        img = rng.standard_normal((8, 8))
        np.testing.assert_array_equal(shrink_to(img, 8), img)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="smaller"):
            shrink_to(np.zeros((4, 4)), 8)


@pytest.fixture(scope="module")
def smoke(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    cfg = ExperimentConfig(
        size=64,
        n_realizations=2,
        inner_list=(2, 5),
        output_dir=str(out),
        max_outer=4000,
    )
    return cfg, run_experiment(cfg), out


class TestExperiment:
    def test_row_counts_and_convergence(self, smoke):
        _, rows, _ = smoke
        c2fb_rows = [r for r in rows if r.algo == "c2fb"]
        vmfb_rows = [r for r in rows if r.algo == "vmfb"]
        assert len(c2fb_rows) == 4 and len(vmfb_rows) == 2
        assert all(r.converged for r in rows)

    def test_total_inner_bookkeeping(self, smoke):
        _, rows, _ = smoke
        for r in rows:
            expected = r.outer_iters * (r.inner if r.algo == "c2fb" else 1)
            assert r.total_inner == expected

    def test_artifacts_and_headers(self, smoke):
        _, rows, out = smoke
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == SUMMARY_HEADER
        assert len(summary) == 1 + len(rows)
        trace = (out / "trace_vmfb_I1_r0.csv").read_text().splitlines()
        assert trace[0] == TRACE_HEADER
        assert (out / "aggregate.csv").exists()
        echo = (out / "config.echo.txt").read_text()
        assert "noise_seed = 0" in echo and "theta = 1000.0" in echo

    def test_baseline_column(self, smoke):
        _, rows, _ = smoke
        for r in rows:
            if r.algo == "vmfb":
                assert r.c_vs_baseline == 0.0
            else:
                assert np.isfinite(r.c_vs_baseline)

    def test_rerun_is_byte_identical(self, smoke):
        cfg, _, out = smoke
        before = {p.name: p.read_bytes() for p in out.iterdir()}
        run_experiment(cfg)
        after = {p.name: p.read_bytes() for p in out.iterdir()}
        assert before == after

    def test_save_images_writes_reconstructions(self, tmp_path):
        cfg = ExperimentConfig(
            size=64, n_realizations=1, inner_list=(2,), algos=("c2fb",),
            save_images=True, output_dir=str(tmp_path), max_outer=2000,
        )
        run_experiment(cfg)
        recon = load_pgm(tmp_path / "recon_c2fb_I2_r0.pgm")
        assert recon.shape == (64, 64)

    def test_cauchy_with_vmfb_rejected(self):
        with pytest.raises(ValueError, match="[Cc]auchy"):
            ExperimentConfig(penalty_kind="cauchy", algos=("vmfb",))

    def test_size_levels_constraint(self):
        with pytest.raises(ValueError, match="divisible"):
            ExperimentConfig(size=72)


class TestCli:
    def test_run_exit_code_and_files(self, tmp_path, capsys):
        code = cli_main(
            [
                "run", "--size", "64", "--penalty", "logsum", "--theta", "1000",
                "--algo", "c2fb", "--inner", "3", "--seeds", "1",
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 0
        assert (tmp_path / "out" / "summary.csv").exists()
        assert "c2fb" in capsys.readouterr().out

    def test_prox_oracle_subcommand(self, capsys):
        assert cli_main(["prox-oracle", "--kind", "sq", "--trials", "25"]) == 0
        assert "ok" in capsys.readouterr().out

    def test_lrho_penalty_runs(self, tmp_path):
        code = cli_main(
            [
                "run", "--size", "64", "--penalty", "lrho", "--theta", "20",
                "--rho", "0.5", "--algo", "both", "--inner", "3", "--seeds", "1",
                "--kmax", "4000", "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 0
