"""Sine-dampened p-stable embeddings: threshold, range, snowflake and
intrinsic-dimension maps, with metric tools and a k-center pipeline."""
from .errors import GuardError, ParameterError
from .stable import (StableSampler, abs_moment, constant_Q, constant_Qa, cosine_moment, density,
                     sample, sin_moment, transform_H)
from .threshold import (CoordinateEmbedding, ThresholdEmbedding, embed_coordinate, embed_point,
                        expected_transform, make_threshold_embedding)
from .range import (RangeEmbedding, RangeParams, calibrate_c_dim, embed, make_range_embedding,
                    required_dimension, select_threshold)
from .metric import (Hierarchy, Net, PaddedPartitionFamily, build_hierarchy, build_net,
                     estimate_doubling_dimension, intrinsic_embedding, padded_decomposition)
from .snowflake import SnowflakeEmbedding, SnowflakeParams, build_snowflake, calibrate_M, snowflake_embed
from .kcenter import KCenterSolution, brute_force_kcenter, gonzalez, kcenter_pipeline
from .harness import DatasetSpec, DistortionReport, distortion_report, generate_dataset

__version__ = "0.1.0"
