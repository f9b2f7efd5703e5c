from ._core import (
    DecisionTree,
    ForestModel,
    GaussianNBModel,
    HpcpredError,
    LinearModel,
    LogisticModel,
    accuracy,
    f1_score,
    fit_cart_classifier,
    fit_cart_regression,
    fit_elastic_net,
    fit_elastic_net_cv,
    fit_gnb,
    fit_lasso_lars_ic,
    fit_logistic,
    fit_ols,
    fit_random_forest,
    fit_ridge,
    generate_workload,
    mean_squared_error,
    precision,
    r_squared,
    recall,
    run_cli,
)

__all__ = [name for name in dir() if not name.startswith("_")]
