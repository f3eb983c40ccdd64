"""anomap: training-free anomaly localization over pre-extracted
vision-transformer patch features.

A query image is matched to its most similar normal support image by global
embedding cosine similarity; the support's foreground patch features are
clustered into prototypes; the query's per-patch mean cosine similarity to
those prototypes, inverted and min-max normalized, is the anomaly map.
"""

from .clustering import CentroidSet, kmeans
from .errors import AnomapError, FormatError, UndefinedMetricError, ValidationError
from .manifest import DatasetManifest, ManifestEntry, load_manifest, write_manifest
from .matching import SupportSelection, cosine_similarity, select_support, select_support_random
from .metrics import ScoredPixels, auprc, auroc, pool_pixels
from .pipeline import (
    DetectReport,
    EvalRow,
    PipelineConfig,
    QueryResult,
    run_ablation_k,
    run_ablation_strategy,
    run_detect,
    run_eval,
)
from .synth import SynthConfig, run_synth
from .tensor_io import read_header, read_tensor, write_tensor

__version__ = "0.1.0"
