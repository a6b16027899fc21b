# %% [markdown]
# k-center through a net and a snowflake, compared with exhaustive search.

# %%
from sinembed import kcenter as kc
from sinembed.harness import DatasetSpec, generate_dataset

X = generate_dataset(DatasetSpec("clustered", 120, 64, seed=3, clusters=5))
for k in (1, 2, 3):
    opt = kc.brute_force_kcenter(X, k, norm_p=1.0)
    far = kc.gonzalez(X, k, norm_p=1.0)
    pipe = kc.kcenter_pipeline(X, k, 0.3, seed=0, norm_p=1.0)
    print(f"k={k}: optimum {opt.radius:.3f}, farthest-point {far.radius:.3f}, "
          f"pipeline {pipe.radius:.3f} on a net of {pipe.history['net_size']} points")
