//! Hypothesis states from measurement data.

mod evaluation;
mod learners;
mod solver;
mod training;

pub use evaluation::{
    evaluate_generalization, generalization_error_exact, prediction_delta, prediction_metrics,
    prediction_metrics_exact, PredictionMetrics,
};
pub use learners::{
    learn_absolute, learn_feasible, learn_quadratic, principal_eigenvector_hypothesis,
    LearnedHypothesis, FEASIBILITY_MARGIN, ZERO_LOSS,
};
pub use solver::{projected_gradient_minimize, LearnerConfig, Minimized, Objective, StopReason};
pub use training::{Labels, TrainingSet};
