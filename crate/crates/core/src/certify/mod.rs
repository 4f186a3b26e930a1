//! Sampling-based search for certified weight rectangles.
//!
//! Each iteration draws a posterior sample, grows it into a rectangle whose
//! half-widths are `gamma` times the posterior scale, and checks the safety
//! property on the whole rectangle with IBP or LBP. Accepted rectangles are
//! made disjoint from everything accepted before them by box subtraction, and
//! the posterior mass of the resulting fragments is the certified bound.
//!
//! Iteration `i` only depends on `(seed, i)`. Checks run in parallel, while
//! subtraction and accumulation run afterwards in iteration order, so the
//! result does not depend on the number of threads and the bound can only
//! grow when more samples are added.

mod disjoint;
pub mod measure;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::disjoint::DisjointUnion;
use crate::error::{check_dim, Error, Result};
use crate::estimate::McEstimate;
use crate::ibp::ibp_check_spec;
use crate::interval::IntervalBox;
use crate::lbp::{lbp_check_spec_with, LbpOptions, McCormickVariant};
use crate::model::{sample_weights_stream, weight_rectangle, BnnModel, MarginSemantics, WeightSample};
use crate::spec::{CheckOutcome, InputRegion, SafetySpec};

pub use measure::{gaussian_box_mass, mc_box_mass, normal_interval_mass, DiagonalGaussian};

/// Bound propagation engine used to check candidate rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Ibp,
    Lbp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ibp => "ibp",
            Method::Lbp => "lbp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ibp" => Ok(Method::Ibp),
            "lbp" => Ok(Method::Lbp),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected `ibp` or `lbp`)"
            ))),
        }
    }
}

/// Default cap on the fragments kept when one accepted rectangle is made
/// disjoint from the earlier ones.
pub const DEFAULT_MAX_FRAGMENTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Number of posterior samples `N`; rejected samples count towards it.
    pub n_samples: usize,
    /// Weight margin `gamma`.
    pub weight_margin: f64,
    pub method: Method,
    pub seed: u64,
    #[serde(default)]
    pub margin_semantics: MarginSemantics,
    #[serde(default)]
    pub mccormick: McCormickVariant,
    /// When subtracting earlier rectangles splits a new one into more
    /// pieces than this, only the pieces of largest posterior mass are kept.
    #[serde(default = "default_max_fragments")]
    pub max_fragments: usize,
}

fn default_max_fragments() -> usize {
    DEFAULT_MAX_FRAGMENTS
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            weight_margin: 1.0,
            method: Method::Ibp,
            seed: 0,
            margin_semantics: MarginSemantics::Stddev,
            mccormick: McCormickVariant::Lower,
            max_fragments: DEFAULT_MAX_FRAGMENTS,
        }
    }
}

impl CertifyConfig {
    pub fn new(n_samples: usize, weight_margin: f64, method: Method, seed: u64) -> Self {
        Self {
            n_samples,
            weight_margin,
            method,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("number of samples must be at least 1".into()));
        }
        if !(self.weight_margin >= 0.0 && self.weight_margin.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight margin must be finite and non-negative, got {}",
                self.weight_margin
            )));
        }
        if self.max_fragments == 0 {
            return Err(Error::InvalidArgument("fragment cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Pairwise-disjoint weight rectangles on which the property was certified.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SafeWeightSet {
    rectangles: Vec<IntervalBox>,
}

impl SafeWeightSet {
    /// Wraps rectangles, rejecting any pair that overlaps.
    pub fn new(rectangles: Vec<IntervalBox>) -> Result<Self> {
        let set = Self { rectangles };
        match set.first_overlap() {
            Some((i, j)) => Err(Error::InvalidArgument(format!(
                "rectangles {i} and {j} overlap"
            ))),
            None => Ok(set),
        }
    }

    pub fn rectangles(&self) -> &[IntervalBox] {
        &self.rectangles
    }

    pub fn len(&self) -> usize {
        self.rectangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    pub fn contains_point(&self, w: &[f64]) -> bool {
        self.rectangles.iter().any(|r| r.contains_point(w))
    }

    /// First overlapping pair `(i, j)` with `i < j`, if any.
    pub fn first_overlap(&self) -> Option<(usize, usize)> {
        for (j, b) in self.rectangles.iter().enumerate() {
            if let Some(i) = self.rectangles[..j].iter().position(|a| a.overlaps(b)) {
                return Some((i, j));
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationResult {
    /// Certified lower bound on the probability of safety.
    pub p_lower: f64,
    pub safe_set: SafeWeightSet,
    /// Mass of each rectangle of `safe_set`, in the same order.
    pub per_box_mass: Vec<f64>,
    /// Samples whose rectangle passed the check.
    pub accepted: usize,
    pub rejected: usize,
    /// Fragments discarded because of the fragment cap.
    pub dropped_fragments: usize,
    pub wall_time: Duration,
    pub config: CertifyConfig,
    /// Set when the masses are Monte Carlo estimates rather than exact.
    pub standard_error: Option<f64>,
}

/// Runs the configured check on one weight rectangle.
pub fn check_rectangle(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
    method: Method,
    mccormick: McCormickVariant,
) -> Result<CheckOutcome> {
    match method {
        Method::Ibp => ibp_check_spec(model, t, h, spec),
        Method::Lbp => lbp_check_spec_with(model, t, h, spec, LbpOptions { mccormick }),
    }
}

/// Collects, in iteration order, the rectangles that passed the check.
fn accepted_rectangles(
    model: &BnnModel,
    centres: impl Fn(u64) -> Result<WeightSample> + Sync,
    n: usize,
    t: &IntervalBox,
    spec: &SafetySpec,
    cfg: &CertifyConfig,
) -> Result<(Vec<IntervalBox>, usize)> {
    let checked = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let w = centres(i)?;
            let rect = weight_rectangle(model, &w, cfg.weight_margin, cfg.margin_semantics)?;
            let outcome = check_rectangle(model, t, &rect, spec, cfg.method, cfg.mccormick)?;
            Ok(outcome.is_safe().then_some(rect))
        })
        .collect::<Result<Vec<_>>>()?;
    let rejected = checked.iter().filter(|r| r.is_none()).count();
    Ok((checked.into_iter().flatten().collect(), rejected))
}

fn disjoint_union(
    measure: &DiagonalGaussian,
    accepted: Vec<IntervalBox>,
    max_fragments: usize,
) -> Result<(SafeWeightSet, usize)> {
    let mut acc = DisjointUnion::new(measure, max_fragments);
    for rect in &accepted {
        acc.insert(rect);
    }
    let (rectangles, dropped) = acc.into_parts();
    Ok((SafeWeightSet { rectangles }, dropped))
}

/// Certified lower bound on the probability that every input of `t` is
/// mapped into the safe set.
pub fn certify(
    model: &BnnModel,
    t: &IntervalBox,
    spec: &SafetySpec,
    cfg: &CertifyConfig,
) -> Result<CertificationResult> {
    let start = Instant::now();
    cfg.validate()?;
    check_dim("input box", model.input_dim(), t.dim())?;
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;

    let centres = |i: u64| Ok(sample_weights_stream(model, cfg.seed, i));
    let (accepted, rejected) = accepted_rectangles(model, centres, cfg.n_samples, t, spec, cfg)?;
    let n_accepted = accepted.len();
    let measure = DiagonalGaussian::from_model(model);
    let (safe_set, dropped) = disjoint_union(&measure, accepted, cfg.max_fragments)?;
    let per_box_mass = safe_set
        .rectangles
        .iter()
        .map(|r| measure.box_mass(r))
        .collect::<Result<Vec<_>>>()?;
    let p_lower = per_box_mass.iter().fold(0.0, |acc, m| acc + m).min(1.0);
    Ok(CertificationResult {
        p_lower,
        safe_set,
        per_box_mass,
        accepted: n_accepted,
        rejected,
        dropped_fragments: dropped,
        wall_time: start.elapsed(),
        config: cfg.clone(),
        standard_error: None,
    })
}

/// Combines per-box lower bounds: `max(0, 1 - sum_k (1 - p_k))`.
///
/// A single bound is returned unchanged; evaluating `1 - (1 - p)` would
/// round small bounds to zero.
pub fn union_bound(ps: &[f64]) -> f64 {
    match ps {
        [p] => *p,
        _ => ps.iter().fold(1.0, |acc, p| acc - (1.0 - p)).max(0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionCertificationResult {
    pub p_lower: f64,
    /// One result per input box, in region order.
    pub per_region: Vec<CertificationResult>,
}

/// Certifies each box of a multi-box region and combines the bounds with
/// the union bound. Every box reuses the same configuration and seed.
pub fn certify_union(
    model: &BnnModel,
    region: &InputRegion,
    spec: &SafetySpec,
    cfg: &CertifyConfig,
) -> Result<UnionCertificationResult> {
    let per_region = region
        .boxes()
        .iter()
        .map(|t| certify(model, t, spec, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ps: Vec<f64> = per_region.iter().map(|r| r.p_lower).collect();
    Ok(UnionCertificationResult {
        p_lower: union_bound(&ps),
        per_region,
    })
}

/// Certification for a posterior given only through samples.
///
/// Rectangles are centred on the first `n_samples` proposal samples and
/// sized with the empirical per-weight variance of the integration samples.
/// Their mass is then estimated as the fraction of integration samples that
/// land in the certified set, so the bound holds up to the reported standard
/// error. The two sample lists should be independent draws.
pub fn certify_sample_set(
    model: &BnnModel,
    proposals: &[WeightSample],
    integration: &[WeightSample],
    t: &IntervalBox,
    spec: &SafetySpec,
    cfg: &CertifyConfig,
) -> Result<CertificationResult> {
    let start = Instant::now();
    cfg.validate()?;
    if proposals.is_empty() || integration.is_empty() {
        return Err(Error::InvalidArgument(
            "sample-set certification needs proposal and integration samples".into(),
        ));
    }
    check_dim("input box", model.input_dim(), t.dim())?;
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;
    for w in proposals.iter().chain(integration) {
        check_dim("weight sample", model.num_weights(), w.len())?;
    }
    let (mean, var) = empirical_moments(integration);
    let surrogate = model.with_moments(&mean, &var)?;

    let n = cfg.n_samples.min(proposals.len());
    let centres = |i: u64| Ok(proposals[i as usize].clone());
    let (accepted, rejected) = accepted_rectangles(&surrogate, centres, n, t, spec, cfg)?;
    let n_accepted = accepted.len();
    let measure = DiagonalGaussian::from_model(&surrogate);
    let (safe_set, dropped) = disjoint_union(&measure, accepted, cfg.max_fragments)?;

    let mut hits = vec![0usize; safe_set.len()];
    for w in integration {
        if let Some(k) = safe_set.rectangles.iter().position(|r| r.contains_point(w.values())) {
            hits[k] += 1;
        }
    }
    let total = McEstimate::from_counts(hits.iter().sum(), integration.len());
    let per_box_mass = hits
        .iter()
        .map(|h| *h as f64 / integration.len() as f64)
        .collect();
    Ok(CertificationResult {
        p_lower: total.value,
        safe_set,
        per_box_mass,
        accepted: n_accepted,
        rejected,
        dropped_fragments: dropped,
        wall_time: start.elapsed(),
        config: cfg.clone(),
        standard_error: Some(total.standard_error),
    })
}

/// Per-coordinate sample mean and (biased) sample variance.
pub fn empirical_moments(samples: &[WeightSample]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let dim = samples.first().map_or(0, |w| w.len());
    let mut mean = vec![0.0; dim];
    for w in samples {
        for (m, v) in mean.iter_mut().zip(w.values()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for w in samples {
        for ((s, v), m) in var.iter_mut().zip(w.values()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}
