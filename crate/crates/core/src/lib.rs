//! Certified lower bounds on the probabilistic safety of Bayesian neural
//! networks with diagonal Gaussian weight posteriors.
//!
//! A weight rectangle is built around each posterior sample and checked with
//! interval or linear bound propagation; rectangles that pass are made
//! disjoint and their Gaussian mass is summed into a bound that holds for the
//! whole input region.

pub mod certify;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod ibp;
pub mod interval;
pub mod io;
pub mod lbp;
pub mod model;
pub mod spec;

pub use certify::{certify, certify_union, CertificationResult, CertifyConfig, Method, SafeWeightSet};
pub use error::{Error, Result};
pub use estimate::McEstimate;
pub use interval::{Interval, IntervalBox, IntervalMatrix};
pub use model::{ActivationKind, BnnModel, LayerPosterior, MarginSemantics, WeightSample};
pub use spec::{CheckOutcome, ClassIndex, InputRegion, SafetySpec, Verdict};
