"""ptphos: photophysical property prediction for phosphorescent Pt(II) emitters.

Library + CLI implementing joint X-Y sample splitting, a from-scratch
regression learner suite, two-layer stacking with out-of-fold meta
features, seeded random-search tuning, cross-validated score tables, and
the frequency-squared radiative rate law.
"""

from .dataset import (
    Dataset,
    DesignMatrix,
    FeatureSchema,
    Sample,
    ScalerStats,
    TargetSpec,
    apply_scaler,
    default_schema,
    encode,
    encode_features,
    fit_scaler,
    load_dataset,
)
from .learners import (
    ImportanceReport,
    LearnerSpec,
    TrainedRegressor,
    feature_importance,
    fit,
    predict,
)
from .metrics import EvalReport, ReportRow, cv_report, mae, pearson_r2, r2, rmse
from .physics import (
    TransitionRecord,
    frequency_to_wavelength,
    kr_from_transition,
    log10_rate,
    rate_from_log10,
    wavelength_to_frequency,
)
from .split import SplitPlan, combined_xy_distances, kfold_assign, spxy_split
from .stacking import (
    StackArchitecture,
    StackModel,
    build_oof_matrix,
    predict_stack,
    train_stack,
)
from .tuning import Choice, IntUniform, LogUniform, TrialRecord, Uniform, random_search

__version__ = "0.1.0"
