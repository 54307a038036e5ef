"""Image quality metrics: MSE, PSNR, and SSIM, plus per-frame breakdowns.

Complex inputs are compared by magnitude; real inputs are compared as given.
MSE is normalized by the pixel count, and PSNR is
``20 log10(max(ref) sqrt(N) / ||ref - rec||_2)`` with the peak taken over the
whole array.  SSIM uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
K2 = 0.03, and dynamic range ``max(ref)``; a dynamic series scores the mean
over frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["mse", "psnr", "ssim", "MetricReport", "evaluate"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _as_real(a) -> np.ndarray:
    a = np.asarray(a)
    return np.abs(a) if np.iscomplexobj(a) else a.astype(float, copy=False)


def _check_pair(ref, rec):
    ref, rec = _as_real(ref), _as_real(rec)
    if ref.shape != rec.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {rec.shape}")
    return ref, rec


def mse(ref, rec) -> float:
    """Mean squared difference, ``sum |ref - rec|^2 / N``."""
    ref, rec = _check_pair(ref, rec)
    return float(np.mean((ref - rec) ** 2))


def psnr(ref, rec) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` when the images coincide."""
    ref, rec = _check_pair(ref, rec)
    peak = float(ref.max())
    if peak <= 0:
        raise ValueError("reference image has no positive peak; PSNR undefined")
    err = float(np.linalg.norm(ref - rec))
    if err == 0:
        return math.inf
    return 20.0 * math.log10(peak * math.sqrt(ref.size) / err)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()


def _ssim_frame(ref, rec, dynamic_range, window, k1, k2) -> float:
    if min(ref.shape) < window.shape[0]:
        raise ValueError(
            f"frame of shape {ref.shape} is smaller than the "
            f"{window.shape[0]}x{window.shape[1]} SSIM window"
        )
    w = window.shape[0]
    views_a = np.lib.stride_tricks.sliding_window_view(ref, (w, w))
    views_b = np.lib.stride_tricks.sliding_window_view(rec, (w, w))
    mu_a = np.tensordot(views_a, window, axes=([2, 3], [0, 1]))
    mu_b = np.tensordot(views_b, window, axes=([2, 3], [0, 1]))
    e_aa = np.tensordot(views_a * views_a, window, axes=([2, 3], [0, 1]))
    e_bb = np.tensordot(views_b * views_b, window, axes=([2, 3], [0, 1]))
    e_ab = np.tensordot(views_a * views_b, window, axes=([2, 3], [0, 1]))
    var_a = e_aa - mu_a**2
    var_b = e_bb - mu_b**2
    cov = e_ab - mu_a * mu_b
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(ref, rec, dynamic_range: float | None = None) -> float:
    """Structural similarity; 2-D inputs score one frame, 3-D inputs score
    the mean over time frames.  ``dynamic_range`` defaults to the reference
    peak over the whole array."""
    ref, rec = _check_pair(ref, rec)
    if dynamic_range is None:
        dynamic_range = float(ref.max())
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    if ref.ndim == 2:
        return _ssim_frame(ref, rec, dynamic_range, window, SSIM_K1, SSIM_K2)
    if ref.ndim == 3:
        vals = [
            _ssim_frame(ref[:, :, t], rec[:, :, t], dynamic_range, window, SSIM_K1, SSIM_K2)
            for t in range(ref.shape[2])
        ]
        return float(np.mean(vals))
    raise ValueError("ssim expects a 2-D frame or a (n_x, n_y, n_t) series")


@dataclass(frozen=True)
class MetricReport:
    """Volume metrics plus per-frame breakdowns (PSNR per frame reuses the
    whole-volume peak so frames are comparable)."""

    mse: float
    psnr: float
    ssim: float
    frame_mse: tuple
    frame_psnr: tuple
    frame_ssim: tuple

    def as_dict(self) -> dict:
        return {
            "mse": self.mse,
            "psnr": self.psnr,
            "ssim": self.ssim,
            "frame_mse": list(self.frame_mse),
            "frame_psnr": list(self.frame_psnr),
            "frame_ssim": list(self.frame_ssim),
        }


def evaluate(ref, rec) -> MetricReport:
    """All three metrics over a dynamic series, with per-frame values."""
    ref_r, rec_r = _check_pair(ref, rec)
    if ref_r.ndim != 3:
        raise ValueError("evaluate expects (n_x, n_y, n_t) inputs")
    peak = float(ref_r.max())
    if peak <= 0:
        raise ValueError("reference image has no positive peak")
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    f_mse, f_psnr, f_ssim = [], [], []
    for t in range(ref_r.shape[2]):
        a, b = ref_r[:, :, t], rec_r[:, :, t]
        m = float(np.mean((a - b) ** 2))
        f_mse.append(m)
        f_psnr.append(math.inf if m == 0 else 10.0 * math.log10(peak**2 / m))
        f_ssim.append(_ssim_frame(a, b, peak, window, SSIM_K1, SSIM_K2))
    return MetricReport(
        mse=mse(ref_r, rec_r),
        psnr=psnr(ref_r, rec_r),
        ssim=float(np.mean(f_ssim)),
        frame_mse=tuple(f_mse),
        frame_psnr=tuple(f_psnr),
        frame_ssim=tuple(f_ssim),
    )
