# %% [markdown]
# Snowflaking a curve: embedded distances track t^alpha.

# %%
import numpy as np
from scipy import stats

from sinembed import snowflake as sf
from sinembed.harness import DatasetSpec, generate_dataset, pair_norms

X = generate_dataset(DatasetSpec("low-doubling-curve", 60, 32, seed=0))
i, j = np.triu_indices(len(X), 1)
t = pair_norms(X, i, j, 1.0)

for alpha in (0.5, 0.3):
    phi = sf.build_snowflake(X, alpha, 0.2, 1.0, 1.0, kprime=16, seed=0)
    emb = pair_norms(phi(X), i, j, 1.0)
    slope = np.polyfit(np.log(t), np.log(emb), 1)[0]
    print(f"alpha={alpha}: v={phi.params.v}, scales={len(phi.params.scales)}, M={phi.M:.3g}, "
          f"slope={slope:.3f}, spearman={stats.spearmanr(t, emb)[0]:.4f}")

# %% [markdown]
# Most of a pair's embedded mass sits in a window of scales around its
# distance.

# %%
share, _ = sf.window_share(phi, X, i, j)
print("window share quantiles:", np.quantile(share, [0.0, 0.5, 1.0]))
