# %% [markdown]
# How the sine-dampened coordinate turns distances into s^q H(t/s).
#
# A single coordinate maps v to a sine of a random p-stable projection. Its
# expected q-th power gap is s^q H(t/s): nearly t^q (times a constant) for
# t much smaller than s, and flat for t beyond s.

# %%
import numpy as np

from sinembed import stable, threshold

p, q, s = 2.0, 1.0, 20.0
for t in (0.5, 2.0, 8.0, 20.0, 80.0):
    h = threshold.expected_transform(p, q, s, t)
    print(f"t={t:6.1f}  s^q H(t/s)={h:8.4f}  ratio to t^q={h / t ** q:.4f}")

# %% [markdown]
# The series route and the quadrature route agree, and both match the
# Gaussian closed form (1 - exp(-4a^2)) / 2 at p = q = 2.

# %%
for a in (0.1, 1.0, 3.0):
    series = stable.transform_H(2, 2, a)
    quad = stable.transform_H(2, 2, a, method="quad")
    print(a, series, quad, (1 - np.exp(-4 * a * a)) / 2)

# %% [markdown]
# Averaging many independent embeddings recovers the expectation.

# %%
rng = np.random.default_rng(0)
v = rng.normal(size=6)
u = rng.normal(size=6)
w = v + 5.0 * u / np.linalg.norm(u)
vals = [np.abs(np.diff(threshold.make_threshold_embedding(p, q, s, 64, 6, seed)(np.vstack([v, w])), axis=0)).sum()
        for seed in range(200)]
print("mean", np.mean(vals), "expected", threshold.expected_transform(p, q, s, 5.0))
