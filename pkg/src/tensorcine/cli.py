"""Command-line interface.

Subcommands: ``gen-phantom`` (dynamic test image), ``gen-mask`` (sampling
patterns), ``recon`` (one reconstruction with reports and PNG snapshots),
``sweep`` (repeat a reconstruction over a parameter range).

All commands are deterministic given their flags and seeds.  A TOML config
file (``--config``) may supply any long flag of the invoked subcommand
(dashes become underscores); explicit command-line flags win.

Exit codes: 0 success, 1 numerical failure (solver diverged, stalled, or hit
a rank-deficient iterate), 2 usage or I/O errors.

PNG snapshots are 8-bit grayscale conveniences, not metric sources.  Frame
and y-t images show magnitude normalized by the reference volume's peak
(range [0, 1]); error maps show the difference of peak-normalized magnitudes
displayed over the fixed range [0, 0.07].
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import fileio, metrics as metrics_mod, mri, solvers, tensors

USAGE_ERROR = 2
NUMERICAL_ERROR = 1

FAILURE_STATUSES = ("diverged", "stalled", "rank_deficient")
ERROR_MAP_RANGE = 0.07
AUTO_RANK_FLOOR = 1e-6


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# small parsers


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"bad dims {text!r}; expected e.g. 64,64,16") from None
    if len(dims) != 3 or any(n < 1 for n in dims):
        raise UsageError(f"dims must be three positive integers, got {text!r}")
    return dims


def parse_rank(text: str):
    """'auto' | a single temporal rank | an explicit 'r1,r2,r3' triple."""
    if text == "auto":
        return ("auto", None)
    parts = text.split(",")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad rank {text!r}") from None
    if len(values) == 1:
        if values[0] < 1:
            raise UsageError("rank must be positive")
        return ("auto", values[0])
    if len(values) == 3:
        if any(v < 1 for v in values):
            raise UsageError("rank entries must be positive")
        return ("exact", tuple(values))
    raise UsageError(f"rank must be 'auto', one integer, or three, got {text!r}")


def parse_values(text: str) -> list:
    try:
        vals = [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"bad value list {text!r}") from None
    if not vals:
        raise UsageError("value list is empty")
    return vals


def auto_rank(zero_filled: np.ndarray, r3: int | None) -> tuple:
    """Largest rank whose initializer core stays well conditioned.

    Starts from temporal-only truncation and repeatedly shrinks each mode to
    the last singular value of the initializer's core unfolding above
    ``AUTO_RANK_FLOOR`` (relative).  Shrinking one mode can lower another
    mode's numerical rank, so iterate to a fixed point.
    """
    dims = zero_filled.shape
    r = [dims[0], dims[1], min(13 if r3 is None else r3, dims[2])]
    for _ in range(10):
        t = tensors.hosvd_truncate(zero_filled, tuple(r))
        caps = []
        for mode in range(3):
            s = np.linalg.svd(tensors.matricize(t.core, mode), compute_uv=False)
            keep = int(np.count_nonzero(s >= AUTO_RANK_FLOOR * s[0]))
            caps.append(max(1, min(r[mode], keep)))
        # multilinear-rank feasibility: r_i <= prod of the others
        for mode in range(3):
            other = caps[(mode + 1) % 3] * caps[(mode + 2) % 3]
            caps[mode] = min(caps[mode], other)
        if caps == r:
            break
        r = caps
    return tuple(r)


# ---------------------------------------------------------------------------
# PNG snapshots


def _save_png_gray(path, values01: np.ndarray) -> None:
    from PIL import Image

    data = np.clip(values01, 0.0, 1.0)
    img = Image.fromarray((data * 255.0).round().astype(np.uint8), mode="L")
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        img.save(tmp, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_snapshots(outdir: Path, reference, zero_filled, recon, frame, column):
    """Magnitude frames, error maps, and y-t profiles (see module docstring
    for the display normalization)."""
    ref, zf, rec = (np.abs(v) for v in (reference, zero_filled, recon))
    peak = ref.max()
    if peak == 0:
        peak = 1.0
    ref, zf, rec = ref / peak, zf / peak, rec / peak
    _save_png_gray(outdir / "frame_reference.png", ref[:, :, frame])
    _save_png_gray(outdir / "frame_zero_filled.png", zf[:, :, frame])
    _save_png_gray(outdir / "frame_recon.png", rec[:, :, frame])
    scale = 1.0 / ERROR_MAP_RANGE
    _save_png_gray(outdir / "error_map_recon.png",
                   np.abs(rec[:, :, frame] - ref[:, :, frame]) * scale)
    _save_png_gray(outdir / "error_map_zero_filled.png",
                   np.abs(zf[:, :, frame] - ref[:, :, frame]) * scale)
    _save_png_gray(outdir / "yt_reference.png", ref[column, :, :])
    _save_png_gray(outdir / "yt_zero_filled.png", zf[column, :, :])
    _save_png_gray(outdir / "yt_recon.png", rec[column, :, :])


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_phantom(args) -> int:
    dims = parse_dims(args.dims)
    phantom = mri.gen_phantom(
        shape=dims,
        n_ellipses=args.ellipses,
        motion_amplitude=args.motion_amplitude,
        seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_cten(out, phantom)
    s = np.linalg.svd(tensors.matricize(phantom, 2), compute_uv=False)
    total = float(np.sum(s**2)) or 1.0
    head = float(np.sum(s[:4] ** 2)) / total
    ratios = " ".join(f"{v:.3e}" for v in (s[: min(6, s.size)] / s[0]))
    print(f"wrote {out} dims={dims}")
    print(f"mode-3 spectrum: sv ratios {ratios}")
    print(f"mode-3 energy in first 4 singular values: {head:.4f}")
    return 0


def cmd_gen_mask(args) -> int:
    dims = parse_dims(args.dims)
    try:
        if args.kind == "gaussian":
            mask = mri.gen_mask_gaussian(
                dims,
                acceleration=args.acceleration,
                seed=args.seed,
                center_lines=args.center_lines,
                per_frame=not args.static,
            )
        elif args.kind == "radial":
            mask = mri.gen_mask_radial(dims, spokes_per_frame=args.spokes, seed=args.seed)
        else:
            mask = mri.gen_mask_uniform_interleaved(dims, acceleration=int(args.acceleration))
    except ValueError as err:
        raise UsageError(str(err)) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_mask(out, mask)
    print(f"wrote {out} kind={args.kind} dims={dims}")
    print(f"kept {mask.n_kept}/{mask.kept.size} samples "
          f"(fraction {mask.fraction:.4f}, realized acceleration {mask.acceleration:.2f})")
    return 0


def _load_inputs(args):
    phantom_path = Path(args.phantom)
    mask_path = Path(args.mask)
    if not phantom_path.exists():
        raise UsageError(f"phantom file not found: {phantom_path}")
    if not mask_path.exists():
        raise UsageError(f"mask file not found: {mask_path}")
    try:
        reference = fileio.read_cten(phantom_path)
        mask = fileio.read_mask(mask_path)
    except ValueError as err:
        raise UsageError(str(err)) from None
    if reference.shape != mask.shape:
        raise UsageError(
            f"phantom dims {reference.shape} do not match mask dims {mask.shape}"
        )
    return reference, mask


def _build_configs(args, shape):
    reg = mri.RegularizerConfig(
        kind=args.reg_kind if args.reg_weight > 0 else "none",
        epsilon=args.reg_epsilon,
        weight=args.reg_weight,
    )
    cfg = solvers.SolverConfig(
        algorithm=args.algorithm,
        max_iterations=args.max_iterations,
        step_rule=args.step_rule,
        eta0=args.eta0,
        armijo_c=args.armijo_c,
        armijo_beta=args.armijo_beta,
        tolerance=args.tolerance,
        seed=args.seed,
    )
    return reg, cfg


def _resolve_rank(args, zero_filled):
    mode, value = parse_rank(args.rank)
    if mode == "exact":
        try:
            return tensors.validate_rank(zero_filled.shape, value)
        except ValueError as err:
            raise UsageError(str(err)) from None
    return auto_rank(zero_filled, value)


def _run_one(reference, mask, rank, reg, cfg):
    y = mri.forward(reference, mask)
    operator = mri.FourierEncoding(mask)
    problem = solvers.ReconProblem(operator=operator, kspace=y, rank=rank, regularizer=reg)
    zero_filled = problem.zero_filled()
    recon, report = solvers.solve(problem, cfg)
    return zero_filled, recon, report


def cmd_recon(args) -> int:
    reference, mask = _load_inputs(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    reg, cfg = _build_configs(args, reference.shape)
    rank = _resolve_rank(args, mri.adjoint(mri.forward(reference, mask), mask))
    print(f"rank {rank}, algorithm {cfg.algorithm}, lambda {reg.weight:g}")

    zero_filled, recon, report = _run_one(reference, mask, rank, reg, cfg)
    m_rec = metrics_mod.evaluate(reference, recon)
    m_zf = metrics_mod.evaluate(reference, zero_filled)

    fileio.write_cten(outdir / "recon.cten", recon)
    fileio.write_cten(outdir / "zero_filled.cten", zero_filled)
    fileio.write_report_csv(outdir / "report.csv", report)
    config_echo = {
        "solver": dataclasses.asdict(cfg),
        "regularizer": dataclasses.asdict(reg),
        "rank": list(rank),
        "phantom": str(args.phantom),
        "mask": str(args.mask),
    }
    fileio.write_report_json(
        outdir / "report.json",
        report,
        config=config_echo,
        extra={
            "metrics_recon": m_rec.as_dict(),
            "metrics_zero_filled": m_zf.as_dict(),
        },
    )
    fileio.write_metrics_json(outdir / "metrics.json", m_rec)
    fileio.write_metrics_csv(outdir / "metrics.csv", m_rec)
    fileio.write_metrics_json(outdir / "metrics_zero_filled.json", m_zf)
    fileio.write_metrics_csv(outdir / "metrics_zero_filled.csv", m_zf)

    n_x, _, n_t = reference.shape
    frame = args.png_frame if args.png_frame is not None else n_t // 2
    column = args.profile_column if args.profile_column is not None else n_x // 2
    if not 0 <= frame < n_t:
        raise UsageError(f"png frame {frame} out of range [0, {n_t})")
    if not 0 <= column < n_x:
        raise UsageError(f"profile column {column} out of range [0, {n_x})")
    write_snapshots(outdir, reference, zero_filled, recon, frame, column)

    print(f"status {report.status} after {report.iterations} iterations: {report.message or 'ok'}")
    print(f"zero-filled: PSNR {m_zf.psnr:.2f} dB, SSIM {m_zf.ssim:.4f}")
    print(f"recon:       PSNR {m_rec.psnr:.2f} dB, SSIM {m_rec.ssim:.4f}")
    if report.status in FAILURE_STATUSES:
        print(f"solver failure: {report.status}", file=sys.stderr)
        return NUMERICAL_ERROR
    return 0


def cmd_sweep(args) -> int:
    values = parse_values(args.values)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.phantom is not None:
        phantom_path = Path(args.phantom)
        if not phantom_path.exists():
            raise UsageError(f"phantom file not found: {phantom_path}")
        reference = fileio.read_cten(phantom_path)
    else:
        reference = mri.gen_phantom(seed=args.phantom_seed)
    dims = reference.shape

    def make_mask(acceleration):
        try:
            if args.mask_kind == "gaussian":
                return mri.gen_mask_gaussian(
                    dims, acceleration=acceleration, seed=args.mask_seed,
                    center_lines=args.center_lines,
                )
            if args.mask_kind == "radial":
                return mri.gen_mask_radial(dims, spokes_per_frame=args.spokes, seed=args.mask_seed)
            return mri.gen_mask_uniform_interleaved(dims, acceleration=int(acceleration))
        except ValueError as err:
            raise UsageError(str(err)) from None

    reg, cfg = _build_configs(args, dims)
    rows = []
    csv_path = outdir / "sweep.csv"

    def flush_rows():
        lines = [f"{args.param},mse,psnr,ssim,status,iterations"]
        for row in rows:
            lines.append("{},{:.17g},{:.17g},{:.17g},{},{}".format(*row))
        fileio.atomic_write_text(csv_path, "\n".join(lines) + "\n")

    failed = None
    for value in values:
        if args.param == "rank-r3":
            # an exact --rank triple supplies the spatial ranks; its r3 slot
            # is replaced by the swept value
            mask = make_mask(args.acceleration)
            mode, req = parse_rank(args.rank)
            if mode == "exact":
                rank = (req[0], req[1], value)
            else:
                base = auto_rank(mri.adjoint(mri.forward(reference, mask), mask), req)
                rank = (base[0], base[1], value)
            try:
                rank = tensors.validate_rank(dims, rank)
            except ValueError as err:
                failed = f"r3={value}: {err}"
                break
        else:
            mask = make_mask(value)
            rank = _resolve_rank(args, mri.adjoint(mri.forward(reference, mask), mask))
        try:
            zero_filled, recon, report = _run_one(reference, mask, rank, reg, cfg)
        except mri.np.linalg.LinAlgError as err:  # pragma: no cover - defensive
            failed = f"{args.param}={value}: {err}"
            break
        m = metrics_mod.evaluate(reference, recon)
        fileio.write_cten(outdir / f"recon_{args.param.replace('-', '_')}_{value}.cten", recon)
        rows.append((value, m.mse, m.psnr, m.ssim, report.status, report.iterations))
        flush_rows()
        print(f"{args.param}={value}: rank {rank} | PSNR {m.psnr:.2f} dB SSIM {m.ssim:.4f} "
              f"({report.status}@{report.iterations})")
        if report.status in FAILURE_STATUSES:
            failed = f"{args.param}={value}: solver status {report.status}"
            break

    if rows and not args.no_plot:
        _plot_sweep(outdir / "sweep.png", args.param, rows)
    if failed is not None:
        print(f"sweep aborted ({failed}); partial results kept in {csv_path}", file=sys.stderr)
        return NUMERICAL_ERROR
    print(f"wrote {csv_path}")
    return 0


def _plot_sweep(path, param, rows):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r[0] for r in rows]
    psnrs = [r[2] for r in rows]
    ssims = [r[3] for r in rows]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.plot(xs, psnrs, "o-", color="tab:blue", label="PSNR")
    ax1.set_xlabel(param)
    ax1.set_ylabel("PSNR (dB)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(xs, ssims, "s--", color="tab:orange", label="SSIM")
    ax2.set_ylabel("SSIM", color="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# parser plumbing


def _add_solver_flags(p):
    p.add_argument("--algorithm", choices=("rgd", "iht"), default="rgd")
    p.add_argument("--rank", default="auto",
                   help="'auto', a temporal rank, or an explicit r1,r2,r3 triple")
    p.add_argument("--max-iterations", type=int, default=250)
    p.add_argument("--step-rule", choices=("armijo", "fixed"), default="armijo")
    p.add_argument("--eta0", type=float, default=1.0)
    p.add_argument("--armijo-c", type=float, default=1e-4)
    p.add_argument("--armijo-beta", type=float, default=0.5)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--reg-kind", choices=("temporal_fd", "spatial_fd", "none"),
                   default="temporal_fd")
    p.add_argument("--reg-weight", type=float, default=0.0, help="lambda")
    p.add_argument("--reg-epsilon", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorcine",
        description="Dynamic image reconstruction on fixed-rank tensor manifolds",
    )
    parser.add_argument("--config", default=None,
                        help="TOML file supplying defaults for the subcommand's flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-phantom", help="write a dynamic ellipse phantom as CTEN")
    p.add_argument("--dims", default="64,64,16")
    p.add_argument("--ellipses", type=int, default=6)
    p.add_argument("--motion-amplitude", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_phantom)

    p = sub.add_parser("gen-mask", help="write a sampling mask as MASK")
    p.add_argument("--kind", choices=("gaussian", "radial", "interleaved"), required=True)
    p.add_argument("--dims", default="64,64,16")
    p.add_argument("--acceleration", type=float, default=8.0)
    p.add_argument("--spokes", type=int, default=6)
    p.add_argument("--center-lines", type=int, default=4)
    p.add_argument("--static", action="store_true",
                   help="gaussian only: one line draw reused for every frame")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_mask)

    p = sub.add_parser("recon", help="reconstruct a phantom from masked measurements")
    p.add_argument("--phantom", required=True, help="reference CTEN file")
    p.add_argument("--mask", required=True, help="MASK file")
    p.add_argument("--outdir", required=True)
    _add_solver_flags(p)
    p.add_argument("--png-frame", type=int, default=None,
                   help="frame index for PNG snapshots (default: middle frame)")
    p.add_argument("--profile-column", type=int, default=None,
                   help="x index of the y-t profile (default: middle column)")
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("sweep", help="repeat a reconstruction over a parameter range")
    p.add_argument("--param", choices=("rank-r3", "acceleration"), required=True)
    p.add_argument("--values", required=True, help="comma-separated integers")
    p.add_argument("--phantom", default=None, help="reference CTEN (default: generated)")
    p.add_argument("--phantom-seed", type=int, default=0)
    p.add_argument("--mask-kind", choices=("gaussian", "radial", "interleaved"),
                   default="gaussian")
    p.add_argument("--acceleration", type=float, default=8.0)
    p.add_argument("--spokes", type=int, default=6)
    p.add_argument("--center-lines", type=int, default=4)
    p.add_argument("--mask-seed", type=int, default=1)
    p.add_argument("--outdir", required=True)
    p.add_argument("--no-plot", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def _apply_config_file(parser, argv):
    """Pre-scan for --config and fold the TOML values in as subparser
    defaults so that explicit command-line flags keep precedence."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a path")
    path = Path(argv[idx + 1])
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise UsageError(f"bad config file {path}: {err}") from None

    remaining = argv[:idx] + argv[idx + 2:]
    if not remaining:
        raise UsageError("--config requires a subcommand")
    command = remaining[0]
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    choices = sub_actions[0].choices if sub_actions else {}
    if command not in choices:
        return remaining  # let argparse produce its usage error
    subparser = choices[command]
    known = {a.dest for a in subparser._actions}
    overrides = {}
    for key, value in table.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"config key {key!r} is not a flag of {command!r}")
        overrides[dest] = value
    subparser.set_defaults(**overrides)
    return remaining


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
