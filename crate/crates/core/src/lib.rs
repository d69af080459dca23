//! Exact step-function calculus with quasinorm, rearrangement, dilation,
//! covering and series diagnostics on rearrangement-invariant spaces.

pub mod approximation;
pub mod associate;
pub mod dilation;
pub mod error;
pub mod geometry;
pub mod jsonio;
pub mod quasinorm;
pub mod rearrangement;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod series;
pub mod step;

pub use error::{Error, Result};
pub use geometry::{DyadicComplex, DyadicCube, MeasureSpace, RatBox, RegionSet};
pub use scalar::{rat, rat_int, rat_to_f64, two_pow, Rat, Scalar};
pub use step::StepFunction;
