"""Frequency-severity claim modelling with neural mean functions.

Two-part models of claim counts and average severities where both mean
functions are feed-forward networks, the severity mean carries an explicit
dependence on the claim count, and the aggregate-loss mean and variance
have closed forms.  Includes linear baselines, a synthetic benchmark,
Lorenz/Gini model comparison and exact Shapley explanations.
"""

from .families import (
    Binomial,
    Gamma,
    InverseGaussian,
    Normal,
    Poisson,
    ZeroInflatedPoisson,
)
from .moments import (
    AggregateMoments,
    MonteCarloMoments,
    aggregate_mean,
    aggregate_moments,
    aggregate_variance,
    simulate_aggregate,
)
from .network import (
    EVAL_MODE,
    ForwardMode,
    MlpParams,
    mlp_backward,
    mlp_forward,
    mlp_init,
    transform_positive,
    transform_unit,
)
from .optim import Adam, ConstantLr, PlateauDecay, Sgd, StepDecay, make_optimizer
from .data import (
    ColumnSpec,
    Dataset,
    DataSchema,
    PreprocMeta,
    RawTable,
    apply_preproc,
    fit_preproc,
    generate_synthetic,
    load_table,
    train_test_split,
    true_functions,
    write_dataset_csv,
)
from .training import (
    EpochRecord,
    FitResult,
    FrequencySeverityModel,
    Predictions,
    TrainConfig,
    TrainingDiverged,
    fit_dglm,
    fit_frequency,
    fit_glm,
    fit_model,
    fit_severity,
    frequency_nll_and_grads,
    predict,
    severity_nll_and_grads,
)
from .metrics import LorenzCurve, gini_index, grid_error, mae, ordered_lorenz, rmse, unit_grid
from .shapley import Attribution, global_importance, shapley_exact, shapley_sampled
from .model_io import load_model, save_model

__version__ = "0.1.0"
