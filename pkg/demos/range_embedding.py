# %% [markdown]
# Bounded-range dimension reduction on a clustered l1 data set.
#
# Distances concentrate in [1, 4]. The threshold s is chosen from R and eps,
# the dimension from the Bennett/Hoeffding brackets with a leading constant
# calibrated on a separate data set.

# %%
import numpy as np

from sinembed import range as rg
from sinembed.harness import DatasetSpec, generate_dataset, pair_norms

params = rg.RangeParams(p=1.0, q=1.0, R=4.0, eps=0.3, n=100)
s = rg.select_threshold(1.0, 1.0, 4.0, 0.3)
print("threshold s =", s)

calib = generate_dataset(DatasetSpec("clustered", 100, 128, seed=1))
c_dim, history = rg.calibrate_c_dim(calib, params, seed=7)
for c, k, frac in history:
    print(f"C_dim={c:<5} k={k:<6} in band={frac:.3f}")

# %%
X = generate_dataset(DatasetSpec("clustered", 100, 128, seed=0))
E = rg.make_range_embedding(rg.RangeParams(1.0, 1.0, 4.0, 0.3, 100, c_dim=c_dim), 128, seed=7)
i, j = np.triu_indices(100, 1)
t = pair_norms(X, i, j, 1.0)
emb = pair_norms(E(X), i, j, 1.0)
mid = (t >= 1) & (t <= 4)
print("k =", E.k)
print("ratio quantiles in range:", np.quantile(emb[mid] / t[mid], [0.01, 0.5, 0.99]))
print("largest small-scale image:", emb[t < 1].max())
