"""Binary and text file formats.

CTEN v1 (complex tensor): magic ``CTEN``, u32 version = 1, u32 ndim,
ndim x u64 dims, then ``prod(dims)`` interleaved (real, imag) little-endian
f32 pairs in first-index-fastest order.

CTKR v1 (Tucker tensor): a CTEN block holding the core, followed by one
block per mode: u64 rows, u64 cols, then rows*cols interleaved f32 pairs in
column-major order.

MASK v1 (sampling mask): magic ``MASK``, u32 version = 1, u32 ndim,
ndim x u64 dims, then one byte per sample (0 or 1) in first-index-fastest
order.

Solve and metric reports serialize to CSV and JSON.  All writers go through
a temp-file-plus-rename so partially written outputs never appear under the
final name.
"""

from __future__ import annotations

import dataclasses
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .mri import SamplingMask
from .tensors import TuckerTensor

__all__ = [
    "write_cten",
    "read_cten",
    "write_ctkr",
    "read_ctkr",
    "write_mask",
    "read_mask",
    "write_report_csv",
    "write_report_json",
    "write_metrics_json",
    "write_metrics_csv",
    "atomic_write_bytes",
    "atomic_write_text",
]

CTEN_MAGIC = b"CTEN"
MASK_MAGIC = b"MASK"
FORMAT_VERSION = 1


def atomic_write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# CTEN


def _cten_payload(x: np.ndarray) -> bytes:
    header = struct.pack("<4sII", CTEN_MAGIC, FORMAT_VERSION, x.ndim)
    dims = struct.pack(f"<{x.ndim}Q", *x.shape)
    data = np.ascontiguousarray(x.ravel(order="F")).astype("<c8").tobytes()
    return header + dims + data


def write_cten(path, x) -> None:
    """Write a complex tensor (values stored at f32 precision)."""
    x = np.asarray(x, dtype=complex)
    if x.ndim < 1:
        raise ValueError("CTEN stores tensors with ndim >= 1")
    atomic_write_bytes(path, _cten_payload(x))


def _read_cten_block(buf: memoryview, offset: int):
    magic, version, ndim = struct.unpack_from("<4sII", buf, offset)
    if magic != CTEN_MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a CTEN block")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported CTEN version {version}")
    offset += 12
    dims = struct.unpack_from(f"<{ndim}Q", buf, offset)
    offset += 8 * ndim
    count = int(np.prod(dims)) if ndim else 0
    flat = np.frombuffer(buf, dtype="<c8", count=count, offset=offset)
    offset += 8 * count
    x = flat.astype(np.complex128).reshape(dims, order="F")
    return x, offset


def read_cten(path) -> np.ndarray:
    buf = memoryview(Path(path).read_bytes())
    x, offset = _read_cten_block(buf, 0)
    if offset != len(buf):
        raise ValueError(f"{path}: trailing bytes after CTEN payload")
    return x


# ---------------------------------------------------------------------------
# CTKR


def write_ctkr(path, t: TuckerTensor) -> None:
    """Write a Tucker tensor: CTEN core block, then one factor block per mode."""
    parts = [_cten_payload(np.asarray(t.core, dtype=complex))]
    for u in t.factors:
        u = np.asarray(u, dtype=complex)
        parts.append(struct.pack("<QQ", *u.shape))
        parts.append(np.ascontiguousarray(u.ravel(order="F")).astype("<c8").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_ctkr(path) -> TuckerTensor:
    buf = memoryview(Path(path).read_bytes())
    core, offset = _read_cten_block(buf, 0)
    factors = []
    for _ in range(core.ndim):
        rows, cols = struct.unpack_from("<QQ", buf, offset)
        offset += 16
        flat = np.frombuffer(buf, dtype="<c8", count=rows * cols, offset=offset)
        offset += 8 * rows * cols
        u = flat.astype(np.complex128).reshape((rows, cols), order="F")
        # f32 quantization perturbs orthonormality at ~1e-7; snap back to the
        # nearest orthonormal matrix (polar factor) to restore the invariant
        w, _, vh = np.linalg.svd(u, full_matrices=False)
        factors.append(w @ vh)
    if offset != len(buf):
        raise ValueError(f"{path}: trailing bytes after CTKR payload")
    return TuckerTensor(core, tuple(factors))


# ---------------------------------------------------------------------------
# MASK


def write_mask(path, mask: SamplingMask) -> None:
    kept = mask.kept
    header = struct.pack("<4sII", MASK_MAGIC, FORMAT_VERSION, kept.ndim)
    dims = struct.pack(f"<{kept.ndim}Q", *kept.shape)
    data = kept.ravel(order="F").astype(np.uint8).tobytes()
    atomic_write_bytes(path, header + dims + data)


def read_mask(path) -> SamplingMask:
    buf = memoryview(Path(path).read_bytes())
    magic, version, ndim = struct.unpack_from("<4sII", buf, 0)
    if magic != MASK_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}; not a MASK file")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported MASK version {version}")
    offset = 12
    dims = struct.unpack_from(f"<{ndim}Q", buf, offset)
    offset += 8 * ndim
    count = int(np.prod(dims))
    flat = np.frombuffer(buf, dtype=np.uint8, count=count, offset=offset)
    if offset + count != len(buf):
        raise ValueError(f"{path}: trailing bytes after MASK payload")
    if not np.isin(flat, (0, 1)).all():
        raise ValueError(f"{path}: mask bytes must be 0 or 1")
    return SamplingMask(flat.astype(bool).reshape(dims, order="F"))


# ---------------------------------------------------------------------------
# reports


def write_report_csv(path, report) -> None:
    """Per-iteration telemetry: iteration, objective, fidelity, grad_norm,
    step, ms."""
    lines = ["iteration,objective,fidelity,grad_norm,step,ms"]
    for k in range(report.iterations):
        lines.append(
            f"{k},{report.objective[k]:.17g},{report.fidelity[k]:.17g},"
            f"{report.grad_norm[k]:.17g},{report.step_size[k]:.17g},"
            f"{report.wall_ms[k]:.3f}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def write_report_json(path, report, config=None, extra=None) -> None:
    """Solve summary: status, final metrics, op-count totals, config echo.
    Wall-clock timings stay out so summaries are run-to-run reproducible."""
    doc = {
        "algorithm": report.algorithm,
        "status": report.status,
        "converged": report.converged,
        "message": report.message,
        "iterations": report.iterations,
        "final_objective": report.final_objective,
        "final_fidelity": report.final_fidelity,
        "total_forward_evals": int(sum(report.forward_evals)),
        "total_adjoint_evals": int(sum(report.adjoint_evals)),
        "total_projections": int(sum(report.projections)),
        "total_truncations": int(sum(report.truncations)),
        "total_linesearch_evals": int(sum(report.linesearch_evals)),
    }
    if config is not None:
        doc["config"] = _jsonable(
            dataclasses.asdict(config) if dataclasses.is_dataclass(config) else config
        )
    if extra:
        doc.update(_jsonable(extra))
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_metrics_json(path, metrics) -> None:
    atomic_write_text(path, json.dumps(_jsonable(metrics.as_dict()), indent=2) + "\n")


def write_metrics_csv(path, metrics) -> None:
    lines = ["frame,mse,psnr,ssim"]
    lines.append(f"all,{metrics.mse:.17g},{metrics.psnr:.17g},{metrics.ssim:.17g}")
    for t, (m, p, s) in enumerate(
        zip(metrics.frame_mse, metrics.frame_psnr, metrics.frame_ssim)
    ):
        lines.append(f"{t},{m:.17g},{p:.17g},{s:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")
