# Simulated acquisition: the moving-ellipse phantom and the three
# undersampling mask families (variable-density Gaussian, golden-angle
# radial, uniform interleaved).
#
# Run:  python3 demos/03_masks_and_phantom.py
# Writes PNGs into demo_output/.

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tensorcine import (
    gen_mask_gaussian,
    gen_mask_radial,
    gen_mask_uniform_interleaved,
    gen_phantom,
    matricize,
)

outdir = Path("demo_output")
outdir.mkdir(exist_ok=True)

# ---------------------------------------------------------------------------
# The phantom is a set of ellipses whose centers and axes oscillate over the
# time axis; each frame is a complex image with a smooth phase ramp.

x = gen_phantom()  # 64 x 64 x 16, seed 0
print("phantom:", x.shape, x.dtype)

# low multilinear rank is what the reconstruction exploits; look at how fast
# the singular values of each unfolding decay
for i, label in ((0, "space x"), (1, "space y"), (2, "time")):
    s = np.linalg.svd(matricize(x, i), compute_uv=False)
    s = s / s[0]
    head = "  ".join(f"{v:.3f}" for v in s[:6])
    print(f"mode {i} ({label:7s}) leading normalized singular values: {head}")

fig, axes = plt.subplots(1, 4, figsize=(12, 3.2))
for ax, t in zip(axes, (0, 5, 10, 15)):
    ax.imshow(np.abs(x[:, :, t]), cmap="gray")
    ax.set_title(f"frame {t}")
    ax.axis("off")
fig.tight_layout()
fig.savefig(outdir / "phantom_frames.png", dpi=120)
print("wrote", outdir / "phantom_frames.png")

# ---------------------------------------------------------------------------
# Mask families.  All are Cartesian in the sense that whole readout lines
# are kept or dropped; they differ in how the kept lines are chosen per frame.

shape = x.shape
masks = {
    "gaussian R=8": gen_mask_gaussian(shape, acceleration=8, seed=1),
    "radial 8 spokes": gen_mask_radial(shape, spokes_per_frame=8, seed=1),
    "interleaved R=8": gen_mask_uniform_interleaved(shape, acceleration=8),
}

fig, axes = plt.subplots(1, 3, figsize=(10, 3.6))
for ax, (name, mask) in zip(axes, masks.items()):
    print(f"{name:18s} sampled fraction {mask.fraction:.4f} "
          f"(acceleration {mask.acceleration:.2f})")
    # k-t view: the k_x row through DC, across frames
    ax.imshow(mask.kept[shape[0] // 2, :, :].T, cmap="gray", aspect="auto")
    ax.set_title(name, fontsize=9)
    ax.set_xlabel("k_y")
    ax.set_ylabel("frame")
fig.tight_layout()
fig.savefig(outdir / "mask_families.png", dpi=120)
print("wrote", outdir / "mask_families.png")
