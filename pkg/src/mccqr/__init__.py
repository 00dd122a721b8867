"""Monte-Carlo-dropout composite quantile regression (MCCQR) with calibration,
brain-age-gap association tests and occlusion-sensitivity mapping."""

from .baselines import LassoModel, ann_predict, ann_train, lasso_fit
from .calibration import CalibrationReport, crossing_rate, median_abs_error, picp, picp_curve
from .gaps import GapRecord, association_test, compute_gaps, ols_fit
from .loss import QuantileGrid, composite_loss, composite_loss_grad, tilted_loss
from .model import MccqrModel, NetworkParams, TrainConfig, parameter_count, train
from .numerics import RngState, matmul
from .occlusion import RegionAtlas, occlude, occlusion_deltas, region_contrast_fit
from .predict import PredictiveDistribution, UncertaintyMode, predict_batch, predict_distribution
from .synthetic import SyntheticSpec, generate, oracle_quantile

__version__ = "0.1.0"

__all__ = [
    "CalibrationReport", "GapRecord", "LassoModel", "MccqrModel", "NetworkParams",
    "PredictiveDistribution", "QuantileGrid", "RegionAtlas", "RngState", "SyntheticSpec",
    "TrainConfig", "UncertaintyMode", "ann_predict", "ann_train", "association_test",
    "composite_loss", "composite_loss_grad", "compute_gaps", "crossing_rate", "generate",
    "lasso_fit", "matmul", "median_abs_error", "occlude", "occlusion_deltas", "ols_fit",
    "oracle_quantile", "parameter_count", "picp", "picp_curve", "predict_batch",
    "predict_distribution", "region_contrast_fit", "tilted_loss", "train",
]
