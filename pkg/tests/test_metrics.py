"""Metric tests: MSE, PSNR, SSIM against closed forms and an independently
coded windowed-statistics oracle."""

import numpy as np
import pytest

from tensorcine import MetricReport, evaluate, mse, psnr, ssim


def ssim_loop_oracle(ref, rec, dynamic_range):
    """Direct re-implementation of SSIM with explicit window loops.

    Gaussian 11x11 window (sigma 1.5), K1 = 0.01, K2 = 0.03, local statistics
    accumulated per valid window position.
    """
    w, sigma = 11, 1.5
    offs = np.arange(w) - (w - 1) / 2.0
    g = np.exp(-(offs**2) / (2 * sigma**2))
    win = np.outer(g, g)
    win /= win.sum()
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    rows, cols = ref.shape
    vals = []
    for i in range(rows - w + 1):
        for j in range(cols - w + 1):
            a = ref[i : i + w, j : j + w]
            b = rec[i : i + w, j : j + w]
            mu_a = (win * a).sum()
            mu_b = (win * b).sum()
            var_a = (win * (a - mu_a) ** 2).sum()
            var_b = (win * (b - mu_b) ** 2).sum()
            cov = (win * (a - mu_a) * (b - mu_b)).sum()
            vals.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# MSE


def test_mse_identical_is_zero():
    rng = np.random.default_rng(70)
    x = rng.random((16, 16, 4))
    assert mse(x, x) == 0.0


def test_mse_constant_offset():
    ref = np.zeros((20, 20))
    rec = np.full((20, 20), 0.7)
    assert abs(mse(ref, rec) - 0.7**2) <= 1e-15


def test_mse_direct_summation_oracle():
    rng = np.random.default_rng(71)
    ref = rng.random((14, 12, 5))
    rec = rng.random((14, 12, 5))
    direct = sum(
        (ref[idx] - rec[idx]) ** 2 for idx in np.ndindex(ref.shape)
    ) / ref.size
    assert abs(mse(ref, rec) - direct) <= 1e-12


def test_mse_shape_mismatch():
    with pytest.raises(ValueError):
        mse(np.zeros((4, 4)), np.zeros((4, 5)))


# ---------------------------------------------------------------------------
# PSNR


def test_psnr_zero_db_case():
    ref = np.ones((25, 25))
    rec = np.zeros((25, 25))  # ||diff|| = max(ref) * sqrt(N)
    assert abs(psnr(ref, rec)) <= 1e-12


def test_psnr_identical_is_infinite():
    rng = np.random.default_rng(72)
    x = rng.random((16, 16))
    assert psnr(x, x) == np.inf


def test_psnr_forty_db_case():
    # max(ref) = 1, N = 10000, ||diff|| = 1
    ref = np.ones((100, 100))
    rec = ref.copy()
    rec[3, 7] -= 1.0
    assert abs(psnr(ref, rec) - 40.0) <= 1e-12


def test_psnr_zero_reference_rejected():
    with pytest.raises(ValueError):
        psnr(np.zeros((16, 16)), np.ones((16, 16)))


def test_psnr_decreases_along_noise_ladder():
    rng = np.random.default_rng(73)
    ref = rng.random((24, 24, 4)) + 0.1
    noise = rng.standard_normal(ref.shape)
    values = [psnr(ref, ref + s * noise) for s in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_mse_psnr_permutation_invariance():
    rng = np.random.default_rng(74)
    ref = rng.random((18, 18))
    rec = rng.random((18, 18))
    perm = rng.permutation(ref.size)
    ref_p = ref.ravel()[perm].reshape(ref.shape)
    rec_p = rec.ravel()[perm].reshape(rec.shape)
    # identical up to summation order
    assert abs(mse(ref, rec) - mse(ref_p, rec_p)) <= 1e-15
    assert abs(psnr(ref, rec) - psnr(ref_p, rec_p)) <= 1e-12


# ---------------------------------------------------------------------------
# SSIM


def test_ssim_identical_is_one():
    rng = np.random.default_rng(75)
    x = rng.random((20, 20))
    assert abs(ssim(x, x) - 1.0) <= 1e-12
    y = rng.random((16, 16, 3))
    assert abs(ssim(y, y) - 1.0) <= 1e-12


def test_ssim_anticorrelated_is_negative():
    # checkerboard: every window mean vanishes, so negating the image flips
    # the covariance while leaving the luminance term near one
    i, j = np.meshgrid(np.arange(24), np.arange(24), indexing="ij")
    ref = ((-1.0) ** (i + j)).astype(float)
    assert ssim(ref, -ref) < 0.0


def test_ssim_matches_loop_oracle():
    rng = np.random.default_rng(77)
    for _ in range(3):
        ref = rng.random((24, 24))
        rec = rng.random((24, 24))
        d = float(ref.max())
        assert abs(ssim(ref, rec, dynamic_range=d) - ssim_loop_oracle(ref, rec, d)) <= 1e-9


def test_ssim_bounded():
    rng = np.random.default_rng(78)
    for _ in range(10):
        ref = rng.random((16, 16))
        rec = rng.random((16, 16))
        v = ssim(ref, rec)
        assert -1.0 <= v <= 1.0


def test_ssim_window_larger_than_frame():
    with pytest.raises(ValueError):
        ssim(np.ones((8, 8)), np.ones((8, 8)))


# ---------------------------------------------------------------------------
# complex handling and the combined report


def test_metrics_use_magnitudes_for_complex_input():
    rng = np.random.default_rng(79)
    mag_ref = rng.random((16, 16, 3)) + 0.2
    mag_rec = rng.random((16, 16, 3)) + 0.2
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, size=mag_ref.shape))
    assert abs(mse(mag_ref * phase, mag_rec * phase) - mse(mag_ref, mag_rec)) <= 1e-14
    assert abs(psnr(mag_ref * phase, mag_rec * phase) - psnr(mag_ref, mag_rec)) <= 1e-10
    assert abs(ssim(mag_ref * phase, mag_rec * phase) - ssim(mag_ref, mag_rec)) <= 1e-10


def test_evaluate_report_consistency():
    rng = np.random.default_rng(80)
    ref = rng.random((20, 20, 4)) + 0.1
    rec = ref + 0.05 * rng.standard_normal(ref.shape)
    report = evaluate(ref, rec)
    assert isinstance(report, MetricReport)
    assert report.mse == mse(ref, rec)
    assert report.psnr == psnr(ref, rec)
    assert abs(report.ssim - ssim(ref, rec)) <= 1e-12
    assert len(report.frame_mse) == 4
    assert len(report.frame_psnr) == 4
    assert len(report.frame_ssim) == 4
    d = report.as_dict()
    assert set(d) == {"mse", "psnr", "ssim", "frame_mse", "frame_psnr", "frame_ssim"}
