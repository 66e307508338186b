"""Early-PD screening toolkit built on the MDS-UPDRS patient questionnaire.

The package covers the full screening pipeline: cohort handling and
synthetic cohort generation, rank-based statistics, feature selection,
four classifiers trained from first principles, Bayesian hyperparameter
tuning, nested cross-validation, and a scoring CLI/HTTP service.
"""

__version__ = "0.1.0"

from .cohort import (
    PQ_ITEM_NAMES,
    FEATURE_NAMES,
    SBR_NAMES,
    Cohort,
    FeatureVector,
    GroupMoments,
    Observation,
    CohortError,
    InfeasibleMomentsError,
    REFERENCE_MOMENTS,
    REFERENCE_VISITS_NORMAL,
    REFERENCE_VISITS_PD,
    load_cohort,
    write_cohort,
    synthesize_cohort,
    severity_distribution,
    normal_behavior_gap,
)
from .stats import (
    TestResult,
    PairwiseComparison,
    StatsError,
    wilcoxon_rank_sum,
    spearman,
    anova_tukey,
    ci95,
    studentized_range_quantile,
)
from .selection import (
    FeatureMask,
    PcaTransform,
    SelectionError,
    wilcoxon_filter,
    lasso_select,
    lasso_path,
    lambda_max,
    pca_fit,
    pca_apply,
)
from .learn import (
    LogisticModel,
    ForestModel,
    BoostModel,
    SvmModel,
    FitDiagnostics,
    ImportanceScores,
    LearnError,
    fit_logistic,
    logistic_score,
    goodness_of_fit,
    fit_random_forest,
    permutation_importance,
    fit_boosted,
    fit_svm,
    predict_score,
)
from .tune import SearchSpace, TuneResult, TuneError, bayes_optimize
from .evaluation import (
    FoldPlan,
    MetricRecord,
    CVReport,
    EvalError,
    make_fold_plan,
    roc_auc,
    confusion_metrics,
    run_nested_cv,
    compare_classifiers,
    total_score_baseline,
    misclassification_profile,
    correlation_with_hy,
)
from .artifacts import (
    ArtifactError,
    model_to_artifact,
    model_from_artifact,
    save_artifact,
    load_artifact,
    builtin_artifact,
    PAPER_EQ1,
)
