"""No-reference quality assessment for 360-degree equirectangular images.

The pipeline turns one panorama into a fixed-length feature vector
(multi-frequency wavelet subband entropies, plus viewport-local and
whole-image naturalness statistics), regresses the vector onto opinion
scores with an epsilon-insensitive support vector machine, and reports
rank and linear correlation over repeated train/test splits.
"""

from .config import (PipelineConfig, RunConfig, parse_config_text,
                     run_config_from)
from .dataset import (DatasetFeatures, DatasetManifest, ManifestEntry,
                      extract_dataset_features, extract_image_features,
                      load_manifest)
from .errors import (DegenerateDataError, ImageFormatError, ManifestError,
                     ModelFormatError, PanoqaError, ValidationError)
from .evaluation import (LogisticParams, TrialResult, TrialSummary,
                         fit_logistic, fractional_ranks, logistic_map, plcc,
                         rmse, run_trials, split_indices, srocc)
from .nss import (AggdParams, GgdParams, MscnConfig, ZcaConfig,
                  extract_naturalness, fit_aggd, fit_ggd, gaussian_window,
                  mscn, paired_products, zca_kernel, zca_whiten)
from .raster import (Raster, downsample_half, load_erp, luminance_from_rgb,
                     to_uint8, write_pgm, write_png)
from .regression import (FeatureScaler, SvrModel, SvrParams, grid_search_svr,
                         kkt_violation, load_model, read_model, save_model,
                         train_svr, write_model)
from .viewport import (ViewportSamplingConfig, ViewportSet, ViewportSpec,
                       combine_local_global, extract_local_naturalness,
                       plan_viewports, project_viewport, render_viewports)
from .wavelet import (SubbandSet, extract_multifrequency, haar_decompose,
                      haar_reconstruct, subband_entropy)

__version__ = "0.1.0"

__all__ = [
    "AggdParams", "DatasetFeatures", "DatasetManifest", "DegenerateDataError",
    "FeatureScaler", "GgdParams", "ImageFormatError", "LogisticParams",
    "ManifestEntry", "ManifestError", "ModelFormatError", "MscnConfig",
    "PanoqaError", "PipelineConfig", "Raster", "RunConfig", "SubbandSet",
    "SvrModel", "SvrParams", "TrialResult", "TrialSummary",
    "ValidationError", "ViewportSamplingConfig", "ViewportSet",
    "ViewportSpec", "__version__", "combine_local_global", "downsample_half",
    "extract_dataset_features", "extract_image_features",
    "extract_local_naturalness", "extract_multifrequency",
    "extract_naturalness", "fit_aggd", "fit_ggd", "fit_logistic",
    "fractional_ranks", "gaussian_window", "grid_search_svr",
    "haar_decompose", "haar_reconstruct", "kkt_violation", "load_erp",
    "load_manifest", "load_model", "logistic_map", "luminance_from_rgb",
    "mscn", "paired_products", "parse_config_text", "plan_viewports",
    "plcc", "project_viewport", "read_model", "render_viewports", "rmse",
    "run_config_from", "run_trials", "save_model", "split_indices", "srocc",
    "subband_entropy",
    "to_uint8", "train_svr", "write_model", "write_pgm", "write_png",
    "zca_kernel", "zca_whiten",
]
