# Tucker tensors from the ground up: matricization, mode products, and
# truncation via the higher-order SVD.
#
# Run:  python3 demos/01_tensor_basics.py

import numpy as np

from tensorcine import (
    dematricize,
    hosvd_truncate,
    matricize,
    mode_product,
    multi_mode_product,
    multilinear_rank,
)

rng = np.random.default_rng(7)

# ---------------------------------------------------------------------------
# Matricization flattens a tensor into a matrix, one mode on the rows.
# With first-index-fastest ordering the 2x2x2 tensor holding 1..8 unfolds
# along mode 0 into two rows that interleave the remaining indices.

x = np.reshape(np.arange(1.0, 9.0), (2, 2, 2), order="F")
print("mode-0 unfolding of 1..8:")
print(matricize(x, 0))
print("mode-1 unfolding:")
print(matricize(x, 1))

# folding is exact for every mode
for i in range(3):
    assert np.array_equal(dematricize(matricize(x, i), i, x.shape), x)
print("matricize/dematricize round trips: ok\n")

# ---------------------------------------------------------------------------
# A mode product multiplies every mode-i fiber by a matrix.  On unfoldings it
# is ordinary matrix multiplication: (A x_i M)_(i) = M X_(i).

a = rng.standard_normal((4, 5, 3))
m = rng.standard_normal((6, 4))
prod = mode_product(a, m, 0)
print("mode product shape: %s x M(6x4) along mode 0 -> %s" % (a.shape, prod.shape))
gap = np.linalg.norm(matricize(prod, 0) - m @ matricize(a, 0))
print(f"defining identity residual: {gap:.2e}\n")

# ---------------------------------------------------------------------------
# A Tucker tensor is a small core expanded by one factor matrix per mode
# (one mode product per mode).

core = rng.standard_normal((2, 2, 2))
factors = [rng.standard_normal((n, 2)) for n in (8, 7, 6)]
t = multi_mode_product(core, factors)
print("assembled Tucker tensor:", t.shape, "multilinear rank", multilinear_rank(t))

# ---------------------------------------------------------------------------
# hosvd_truncate projects onto the leading singular subspace of each
# unfolding.  The result is quasi-optimal: its squared error is bounded by
# the sum over modes of the discarded singular values squared.

y = rng.standard_normal((20, 20, 10)) + 1j * rng.standard_normal((20, 20, 10))
rank = (5, 5, 3)
approx = hosvd_truncate(y, rank)
err2 = np.linalg.norm(y - approx.full()) ** 2

bound = 0.0
for i, r in enumerate(rank):
    s = np.linalg.svd(matricize(y, i), compute_uv=False)
    bound += np.sum(s[r:] ** 2)

print(f"\ntruncation to rank {rank}:")
print(f"  squared error      {err2:10.4f}")
print(f"  tail-energy bound  {bound:10.4f}")
print(f"  ratio              {err2 / bound:10.4f}  (<= 1 by quasi-optimality)")

# a tensor that already has the target rank is reproduced exactly
exact = approx.full()
rel = np.linalg.norm(hosvd_truncate(exact, rank).full() - exact) / np.linalg.norm(exact)
print(f"exact-rank reproduction: {rel:.2e}")
