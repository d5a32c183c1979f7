//! Smooth fictitious play for finite discounted stochastic games: model
//! types, regularized auxiliary games, discrete learners, continuous-time
//! dynamics, reference oracles and an experiment harness.

pub mod auxiliary;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod oracles;
pub mod profile;
pub mod regularizers;
pub mod scalar;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases.
pub type Game = game::StochasticGame<f64>;
pub type Profile = profile::StationaryProfile<f64>;
pub type Values = profile::ContinuationValues<f64>;
pub type LearnerF64 = learners::Learner<f64>;
pub type LearnerStateF64 = learners::LearnerState<f64>;
pub type ModelEstimateF64 = learners::ModelEstimate<f64>;
pub type ContinuousStateF64 = dynamics::ContinuousState<f64>;
pub type TraceF64 = trace::Trace<f64>;
pub type OracleResultF64 = oracles::OracleResult<f64>;
