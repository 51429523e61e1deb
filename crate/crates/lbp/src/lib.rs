//! Loopy belief propagation on discrete pairwise Markov random fields, with the analysis
//! tools around it: potential-strength measures, synchronous and residual-scheduled
//! sum-product, computation trees, convergence certificates, distance bounds between fixed
//! points, accuracy intervals against exact marginals, and the closed-form dynamics of
//! completely uniform binary graphs.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.

// `!(x >= 0)` style checks are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accuracy;
pub mod bounds;
pub mod bp;
pub mod convergence;
pub mod error;
pub mod matrix;
pub mod mrf;
pub mod report;
pub mod residual;
pub mod scalar;
pub mod strength;
pub mod trees;
pub mod uniform;

pub use error::{Error, Result};
pub use mrf::{parse_model, write_model, DirectedEdge, Topology};
pub use scalar::Scalar;

pub type Mrf = mrf::PairwiseMrf<f64>;
pub type Matrix = matrix::Matrix<f64>;
pub type Strengths = strength::StrengthTable<f64>;
pub type Messages = bp::MessageSet<f64>;
pub type Run = bp::RunResult<f64>;
pub type Trace = residual::ScheduleTrace<f64>;
pub type Bounds = bounds::BoundReport<f64>;
pub type Verdict = convergence::ConvergenceVerdict<f64>;
pub type Accuracy = accuracy::AccuracyBound<f64>;
pub type Uniform = uniform::UniformModel<f64>;
