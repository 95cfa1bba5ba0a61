//! Thickness, regulator norms and transport duality for functions of two
//! variables on finite weighted spaces.
//!
//! Every computation is generic over [`Scalar`]: exact rationals
//! ([`Rational`]) or `f64` with an absolute tolerance.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod flow;
pub mod matrix;
pub mod model;
pub mod scalar;
pub mod sr_norm;
pub mod tau;
pub mod thickness;
pub mod transport;
pub mod vc;

pub use coupling::{complete_to_bistochastic, integrate_against_plan, max_bistochastic_mass, qb_norm, HallResult};
pub use error::{Error, Result};
pub use matrix::Grid;
pub use model::{
    level_set, product_measure, validate_semimetric, validate_space, DiscreteSpace, LevelMode, MassView, MetricClass,
    MetricMatrix, MetricWitness, Plan, ProductFunction, ProductSet, SeparableMajorant, SignedPlan, SpaceRef,
};
pub use scalar::{Mode, Rational, Scalar, Tol};
pub use sr_norm::{cutoff, layer_cake_integral, nuclear_bound, sr_norm, NuclearBound, RankOneTerm, SrNormResult};
pub use tau::{tau_ball_check, tau_distance, TauResult};
pub use thickness::{thickness, thickness_bruteforce, thickness_of_level_set, ThicknessResult};
pub use transport::{kantorovich, kr_norm, two_level_duality_check, KrNorm, TransportResult, TwoLevelReport};
