# Geometry of the fixed-rank Tucker manifold: tangent spaces, orthogonal
# projection, and the retraction used by the Riemannian solver.
#
# Run:  python3 demos/02_manifold_geometry.py

import numpy as np

from tensorcine import (
    manifold_dim,
    project_tangent,
    random_point,
    random_tangent,
    retract,
    tangent_embed,
)

rng = np.random.default_rng(3)
shape, rank = (16, 16, 8), (4, 4, 3)

n_amb = int(np.prod(shape))
n_man = manifold_dim(shape, rank)
print(f"ambient (complex) dimension {n_amb}, manifold dimension {n_man}")
print(f"compression: {n_amb / n_man:.1f}x fewer parameters\n")

x = random_point(shape, rank, rng)

# ---------------------------------------------------------------------------
# Tangent vectors carry one core perturbation plus one per-mode factor
# perturbation, gauged so each factor delta is orthogonal to its factor.

a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
tv = project_tangent(x, a)
for i, (v, u) in enumerate(zip(tv.factor_deltas, x.factors)):
    print(f"gauge mode {i}:  ||V^H U|| = {np.linalg.norm(v.conj().T @ u):.2e}")

# the projection is orthogonal: the residual has no tangent component,
# and projecting twice changes nothing
p = tangent_embed(x, tv)
residual = a - p
probe = tangent_embed(x, random_tangent(x, rng))
print(f"\n<residual, tangent probe>   = {abs(np.vdot(probe, residual)):.2e}")
pp = tangent_embed(x, project_tangent(x, p))
print(f"||P(P(a)) - P(a)||          = {np.linalg.norm(pp - p):.2e}")
print(f"||P(a)|| / ||a||            = {np.linalg.norm(p) / np.linalg.norm(a):.3f}"
      "  (contractive)\n")

# ---------------------------------------------------------------------------
# The retraction maps a tangent step back onto the manifold by truncating
# x + t*xi.  It matches the straight-line step to first order, so the
# error-per-unit-step shrinks linearly with t: halving t halves the ratio.

xi = random_tangent(x, rng)
xd = x.to_dense()
xi_d = tangent_embed(x, xi)

print("step t      ||R(t) - (x + t xi)|| / t")
prev = None
for t in (1e-1, 1e-2, 1e-3, 1e-4):
    ratio = np.linalg.norm(retract(x, xi, t).to_dense() - (xd + t * xi_d)) / t
    note = "" if prev is None else f"   ({prev / ratio:.2f}x smaller)"
    print(f"{t:8.0e}    {ratio:.6e}{note}")
    prev = ratio

# the retracted point is a genuine manifold point: orthonormal factors,
# full-rank core
y = retract(x, xi, 0.05)
worst = max(
    np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])) for u in y.factors
)
print(f"\nretracted factors orthonormal to {worst:.2e}")
