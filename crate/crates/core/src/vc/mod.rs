//! Diagnostics of approximability by step functions, matrix distributions
//! and the random-point check.

mod matdist;
mod random_points;
mod refine;
mod stepfit;

pub use matdist::{
    matrix_distribution_exact, matrix_distribution_sample, sampling_tolerance, MatrixDistribution, ENUMERATION_LIMIT,
};
pub use random_points::{random_points_check, sampled_submatrix, RandomPointsReport};
pub use refine::{refinement_study, residue_lower_bound, Family, RefinementRow};
pub use stepfit::{
    evaluate_partition, is_exact_size, partition_error, step_fit_exists, vc_profile, FitOutcome, StepFit, VcProfile,
    EXACT_MAX_ATOMS, HEURISTIC_RESTARTS,
};
