"""Simulated dynamic-MRI acquisition model.

The encoding operator is ``A = P F``: a centered, orthonormal 2-D discrete
Fourier transform applied per time frame (DC at grid index
``(n_x // 2, n_y // 2)``), followed by pointwise undersampling with a binary
k-space mask.  The module also provides mask generators (Gaussian variable
density, pseudo-radial, uniform interleaved), a moving-ellipse complex
phantom, and a Charbonnier-smoothed l1 finite-difference regularizer with its
gradient.

Image tensors are complex arrays of shape ``(n_x, n_y, n_t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "SamplingMask",
    "fft2c",
    "ifft2c",
    "forward",
    "adjoint",
    "data_gradient",
    "FourierEncoding",
    "PointwiseSampling",
    "RegularizerConfig",
    "regularizer_value",
    "regularizer_gradient",
    "gen_mask_gaussian",
    "gen_mask_radial",
    "gen_mask_uniform_interleaved",
    "gen_phantom",
]

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))  # ~111.25 degrees


# ---------------------------------------------------------------------------
# sampling masks


@dataclass(frozen=True)
class SamplingMask:
    """Binary k-space sampling pattern over ``(k_x, k_y, t)``.

    Cartesian line masks are constant along ``k_x`` (fully sampled frequency
    encodes); radial masks vary per sample.
    """

    kept: np.ndarray

    def __post_init__(self):
        kept = np.asarray(self.kept)
        if kept.dtype != bool:
            raise ValueError("mask must be boolean")
        if kept.ndim != 3:
            raise ValueError("mask must have shape (n_x, n_y, n_t)")
        if not kept.any():
            raise ValueError("mask keeps no samples")
        object.__setattr__(self, "kept", kept)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.kept.shape

    @property
    def n_kept(self) -> int:
        return int(np.count_nonzero(self.kept))

    @property
    def fraction(self) -> float:
        return self.n_kept / self.kept.size

    @property
    def acceleration(self) -> float:
        return self.kept.size / self.n_kept

    @classmethod
    def full(cls, shape) -> "SamplingMask":
        return cls(np.ones(tuple(int(n) for n in shape), dtype=bool))


def _check_dims(shape) -> tuple[int, int, int]:
    shape = tuple(int(n) for n in shape)
    if len(shape) != 3 or any(n < 1 for n in shape):
        raise ValueError(f"dims must be three positive integers, got {shape}")
    return shape


def _central_lines(n_y: int, count: int) -> np.ndarray:
    start = n_y // 2 - count // 2
    return np.arange(start, start + count)


def gen_mask_gaussian(
    shape,
    acceleration: float,
    seed: int,
    center_lines: int = 4,
    per_frame: bool = True,
) -> SamplingMask:
    """Gaussian variable-density Cartesian mask.

    Phase-encode lines are drawn per frame with probability proportional to
    ``exp(-k_y^2 / (2 sigma^2))``, where ``sigma`` is solved so that the
    expected number of kept lines equals ``n_y / acceleration``.  The
    ``center_lines`` central phase encodes are always kept.  Each frame keeps
    exactly ``round(n_y / acceleration)`` lines, so the realized acceleration
    matches the request up to rounding.  ``per_frame=False`` reuses one draw
    for every frame.
    """
    n_x, n_y, n_t = _check_dims(shape)
    if acceleration < 1:
        raise ValueError("acceleration must be >= 1")
    n_lines = int(round(n_y / acceleration))
    if n_lines < center_lines:
        raise ValueError(
            f"acceleration {acceleration} leaves fewer than "
            f"{center_lines} lines per frame"
        )
    ky = np.arange(n_y) - n_y // 2

    def expected_minus_target(sigma):
        return np.minimum(1.0, np.exp(-(ky**2) / (2 * sigma**2))).sum() - n_lines

    if n_lines >= n_y:
        kept_weights = np.ones(n_y)
    else:
        sigma = brentq(expected_minus_target, 1e-3, 100.0 * n_y, xtol=1e-9)
        kept_weights = np.exp(-(ky**2) / (2 * sigma**2))

    central = _central_lines(n_y, center_lines)
    others = np.setdiff1d(np.arange(n_y), central)
    weights = kept_weights[others]
    weights = weights / weights.sum()

    rng = np.random.default_rng(seed)
    kept = np.zeros((n_x, n_y, n_t), dtype=bool)
    draws = n_t if per_frame else 1
    for t in range(draws):
        lines = central
        extra = n_lines - center_lines
        if extra > 0:
            picked = rng.choice(others, size=extra, replace=False, p=weights)
            lines = np.concatenate([central, picked])
        kept[:, lines, t if per_frame else slice(None)] = True
    return SamplingMask(kept)


def gen_mask_radial(shape, spokes_per_frame: int, seed: int) -> SamplingMask:
    """Pseudo-radial mask: straight spokes rasterized on the Cartesian grid,
    uniformly spread over half a turn within each frame and rotated by the
    golden angle from frame to frame.  ``seed`` randomizes the global starting
    angle only."""
    n_x, n_y, n_t = _check_dims(shape)
    if spokes_per_frame < 1:
        raise ValueError("spokes_per_frame must be >= 1")
    rng = np.random.default_rng(seed)
    theta0 = rng.uniform(0.0, np.pi)
    cx, cy = (n_x - 1) / 2.0, (n_y - 1) / 2.0
    half_len = 0.5 * np.hypot(n_x, n_y)
    steps = np.linspace(-half_len, half_len, int(8 * max(n_x, n_y)))
    kept = np.zeros((n_x, n_y, n_t), dtype=bool)
    for t in range(n_t):
        base = theta0 + t * GOLDEN_ANGLE
        for s in range(spokes_per_frame):
            angle = base + s * np.pi / spokes_per_frame
            ix = np.rint(cx + steps * np.cos(angle)).astype(int)
            iy = np.rint(cy + steps * np.sin(angle)).astype(int)
            ok = (ix >= 0) & (ix < n_x) & (iy >= 0) & (iy < n_y)
            kept[ix[ok], iy[ok], t] = True
    return SamplingMask(kept)


def gen_mask_uniform_interleaved(shape, acceleration: int) -> SamplingMask:
    """Uniform lattice of phase-encode lines, shifted by one line per frame,
    so any ``acceleration`` consecutive frames jointly cover all of k-space."""
    n_x, n_y, n_t = _check_dims(shape)
    r = int(acceleration)
    if r < 1:
        raise ValueError("acceleration must be >= 1")
    kept = np.zeros((n_x, n_y, n_t), dtype=bool)
    lines = np.arange(n_y)
    for t in range(n_t):
        kept[:, (lines % r) == (t % r), t] = True
    return SamplingMask(kept)


# ---------------------------------------------------------------------------
# Fourier encoding


def fft2c(x) -> np.ndarray:
    """Centered orthonormal 2-D DFT over the first two axes, per frame."""
    x = np.asarray(x)
    shifted = np.fft.ifftshift(x, axes=(0, 1))
    k = np.fft.fft2(shifted, axes=(0, 1), norm="ortho")
    return np.fft.fftshift(k, axes=(0, 1))


def ifft2c(k) -> np.ndarray:
    """Inverse (and adjoint) of :func:`fft2c`."""
    k = np.asarray(k)
    shifted = np.fft.ifftshift(k, axes=(0, 1))
    x = np.fft.ifft2(shifted, axes=(0, 1), norm="ortho")
    return np.fft.fftshift(x, axes=(0, 1))


def forward(image, mask: SamplingMask) -> np.ndarray:
    """Encoding operator ``A = P F``: per-frame centered DFT, then zero out
    unsampled k-space entries."""
    image = np.asarray(image)
    if image.shape != mask.shape:
        raise ValueError(f"image shape {image.shape} != mask shape {mask.shape}")
    return np.where(mask.kept, fft2c(image), 0.0)


def adjoint(kspace, mask: SamplingMask) -> np.ndarray:
    """Adjoint ``A^H = F^H P^H``: zero-filled inverse transform."""
    kspace = np.asarray(kspace)
    if kspace.shape != mask.shape:
        raise ValueError(f"k-space shape {kspace.shape} != mask shape {mask.shape}")
    return ifft2c(np.where(mask.kept, kspace, 0.0))


def data_gradient(image, kspace, mask: SamplingMask) -> np.ndarray:
    """Gradient of ``0.5 * ||A x - y||^2``, i.e. ``A^H (A x - y)``."""
    return adjoint(forward(image, mask) - np.asarray(kspace), mask)


class FourierEncoding:
    """``A = P F`` as an operator object (used by the solvers)."""

    def __init__(self, mask: SamplingMask):
        self.mask = mask

    @property
    def shape(self):
        return self.mask.shape

    def forward(self, image):
        return forward(image, self.mask)

    def adjoint(self, kspace):
        return adjoint(kspace, self.mask)


class PointwiseSampling:
    """Pointwise sampling operator (identity transform + mask): the pure
    tensor-completion setting, measurements live in image space."""

    def __init__(self, mask: SamplingMask):
        self.mask = mask

    @property
    def shape(self):
        return self.mask.shape

    def forward(self, image):
        image = np.asarray(image)
        if image.shape != self.mask.shape:
            raise ValueError("shape mismatch")
        return np.where(self.mask.kept, image, 0.0)

    adjoint = forward


# ---------------------------------------------------------------------------
# regularizer


@dataclass(frozen=True)
class RegularizerConfig:
    """Charbonnier-smoothed l1 penalty on first-order finite differences.

    ``kind`` selects the difference axis: ``temporal_fd`` (periodic along t),
    ``spatial_fd`` (replicate boundary along x and y), or ``none``.
    ``weight`` is the multiplier applied to both the penalty value and its
    gradient.
    """

    kind: str = "temporal_fd"
    epsilon: float = 1e-3
    weight: float = 0.0

    KINDS = ("temporal_fd", "spatial_fd", "none")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.kind != "none" and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")

    def _axes(self):
        if self.kind == "temporal_fd":
            return ((2, True),)
        if self.kind == "spatial_fd":
            return ((0, False), (1, False))
        return ()


def _diff(x, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return np.roll(x, -1, axis=axis) - x
    out = np.zeros_like(x)
    head = [slice(None)] * x.ndim
    tail = [slice(None)] * x.ndim
    head[axis] = slice(0, -1)
    tail[axis] = slice(1, None)
    out[tuple(head)] = x[tuple(tail)] - x[tuple(head)]
    return out


def _diff_adjoint(u, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return np.roll(u, 1, axis=axis) - u
    out = np.zeros_like(u)
    lo = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    out[tuple(hi)] += u[tuple(lo)]
    out[tuple(lo)] -= u[tuple(lo)]
    return out


def regularizer_value(image, cfg: RegularizerConfig) -> float:
    """Weighted penalty ``weight * sum sqrt(|Wx|^2 + eps^2)`` over the
    configured difference axes."""
    if cfg.kind == "none" or cfg.weight == 0:
        return 0.0
    x = np.asarray(image)
    total = 0.0
    for axis, periodic in cfg._axes():
        d = _diff(x, axis, periodic)
        total += np.sum(np.sqrt(np.abs(d) ** 2 + cfg.epsilon**2))
    return cfg.weight * float(total)


def regularizer_gradient(image, cfg: RegularizerConfig) -> np.ndarray:
    """Gradient of :func:`regularizer_value` (Wirtinger convention, matching
    ``A^H (A x - y)`` for the fidelity term)."""
    x = np.asarray(image)
    if cfg.kind == "none" or cfg.weight == 0:
        return np.zeros_like(x)
    grad = np.zeros_like(x)
    for axis, periodic in cfg._axes():
        d = _diff(x, axis, periodic)
        grad += _diff_adjoint(d / np.sqrt(np.abs(d) ** 2 + cfg.epsilon**2), axis, periodic)
    return cfg.weight * grad


# ---------------------------------------------------------------------------
# phantom


def gen_phantom(shape=(64, 64, 16), n_ellipses: int = 6, motion_amplitude: float = 1.0, seed: int = 0) -> np.ndarray:
    """Complex-valued dynamic ellipse phantom.

    A large static body ellipse plus smaller ellipses, a subset of which
    oscillate sinusoidally in center position and axis length over the time
    axis (scaled by ``motion_amplitude``).  Soft ellipse edges and a smooth
    spatial phase ramp keep the tensor genuinely complex and quasi-low-rank
    along the time mode.  Deterministic for a given seed.
    """
    n_x, n_y, n_t = _check_dims(shape)
    out = np.zeros((n_x, n_y, n_t), dtype=complex)
    if n_ellipses == 0:
        return out
    rng = np.random.default_rng(seed)
    gx = (np.arange(n_x) - (n_x - 1) / 2.0) / (n_x / 2.0)
    gy = (np.arange(n_y) - (n_y - 1) / 2.0) / (n_y / 2.0)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    edge_width = 0.05
    t_phase = 2.0 * np.pi * np.arange(n_t) / n_t

    for e in range(n_ellipses):
        if e == 0:
            cx, cy, ax, ay = 0.0, 0.0, 0.74, 0.84
            angle = 0.0
            value = 1.0
            dynamic = False
        else:
            cx, cy = rng.uniform(-0.5, 0.5, size=2)
            ax, ay = rng.uniform(0.10, 0.34, size=2)
            angle = rng.uniform(0.0, np.pi)
            value = rng.uniform(0.25, 0.85) * (-1.0 if rng.uniform() < 0.3 else 1.0)
            dynamic = e % 3 == 1
        phase0 = rng.uniform(0.0, 2.0 * np.pi)
        ca, sa = np.cos(angle), np.sin(angle)
        for t in range(n_t):
            if dynamic and motion_amplitude != 0:
                s = np.sin(t_phase[t] + phase0)
                c = np.cos(t_phase[t] + phase0)
                cxt = cx + 0.055 * motion_amplitude * s
                cyt = cy + 0.035 * motion_amplitude * c
                axt = ax * (1.0 + 0.16 * motion_amplitude * s)
                ayt = ay * (1.0 + 0.12 * motion_amplitude * c)
            else:
                cxt, cyt, axt, ayt = cx, cy, ax, ay
            u = (xx - cxt) * ca + (yy - cyt) * sa
            v = -(xx - cxt) * sa + (yy - cyt) * ca
            rho = np.sqrt((u / axt) ** 2 + (v / ayt) ** 2)
            out[:, :, t] += value / (1.0 + np.exp((rho - 1.0) / edge_width))

    a1, a2 = rng.uniform(0.2, 0.5, size=2)
    ramp = np.exp(1j * np.pi * (a1 * xx + a2 * yy + 0.1 * (xx**2 + yy**2)))
    return out * ramp[:, :, None]
