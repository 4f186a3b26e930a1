//! Monte Carlo reference estimates of safety probabilities.
//!
//! These are statistical estimates, not certificates. They are used as
//! oracles for the certifier and as upper references for reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ibp::ibp_check_spec;
use crate::lbp::lbp_check_spec;
use crate::model::{forward, sample_weights_stream, BnnModel, WeightSample};
use crate::spec::{InputRegion, SafetySpec};

/// A binomial proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub n: usize,
    pub standard_error: f64,
}

impl McEstimate {
    /// `successes / n` with standard error `sqrt(p (1 - p) / n)`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0` or `successes > n`.
    pub fn from_counts(successes: usize, n: usize) -> Self {
        assert!(n > 0 && successes <= n, "invalid counts {successes}/{n}");
        let value = successes as f64 / n as f64;
        Self {
            value,
            n,
            standard_error: (value * (1.0 - value) / n as f64).sqrt(),
        }
    }
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("number of samples must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Whether one sampled network is certified safe on every box of `region`.
///
/// The check runs IBP and, if that is inconclusive, LBP on the point weight
/// box. A network counted as safe is therefore safe on the whole region; one
/// counted as unsafe might still be safe, so the estimate is biased low.
pub fn network_certified_safe(
    model: &BnnModel,
    w: &WeightSample,
    region: &InputRegion,
    spec: &SafetySpec,
) -> Result<bool> {
    let h = w.as_box();
    for t in region.boxes() {
        if ibp_check_spec(model, t, &h, spec)?.is_safe() {
            continue;
        }
        if !lbp_check_spec(model, t, &h, spec)?.is_safe() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fraction of `n` posterior samples certified safe on the whole region.
///
/// Sample `i` is stream `i` of `seed`, as in the certifier.
pub fn mc_estimate_psafe(
    model: &BnnModel,
    region: &InputRegion,
    spec: &SafetySpec,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    require_samples(n)?;
    check_dim("input region", model.input_dim(), region.dim())?;
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;
    let safe = (0..n as u64)
        .into_par_iter()
        .map(|i| network_certified_safe(model, &sample_weights_stream(model, seed, i), region, spec))
        .collect::<Result<Vec<bool>>>()?;
    Ok(McEstimate::from_counts(safe.iter().filter(|s| **s).count(), n))
}

/// Fraction of `n` posterior samples whose output at the single input `x`
/// satisfies the specification.
pub fn mc_pointwise_robustness(
    model: &BnnModel,
    x: &[f64],
    spec: &SafetySpec,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    require_samples(n)?;
    check_dim("input", model.input_dim(), x.len())?;
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;
    let ok = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let y = forward(model, &sample_weights_stream(model, seed, i), x)?;
            spec.is_satisfied(&y)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(McEstimate::from_counts(ok.iter().filter(|s| **s).count(), n))
}

/// Posterior mean of the network output at `x` over `n` samples.
pub fn mc_output_mean(model: &BnnModel, x: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    require_samples(n)?;
    check_dim("input", model.input_dim(), x.len())?;
    let mut sum = vec![0.0; model.output_dim()];
    for i in 0..n as u64 {
        let y = forward(model, &sample_weights_stream(model, seed, i), x)?;
        for (s, v) in sum.iter_mut().zip(y) {
            *s += v;
        }
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

/// Markov ceiling for a threshold property `y_i > a` with `a > 0` and a
/// non-negative output: the probability is at most `E[y_i] / a`.
pub fn markov_ceiling(mean_output: f64, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    Ok((mean_output / threshold).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{Interval, IntervalBox};
    use crate::model::{ActivationKind, LayerPosterior};
    use crate::spec::band_spec;

    fn net(var: f64) -> BnnModel {
        BnnModel::new(
            1,
            vec![
                LayerPosterior::new(1, 2, vec![1.0, -1.0], vec![var; 2], vec![0.0; 2], vec![var; 2], ActivationKind::Tanh)
                    .unwrap(),
                LayerPosterior::new(2, 1, vec![1.0, 1.0], vec![var; 2], vec![0.0], vec![var], ActivationKind::Identity)
                    .unwrap(),
            ],
        )
        .unwrap()
    }

    fn region() -> InputRegion {
        InputRegion::single(IntervalBox::new(vec![Interval::new(-0.5, 0.5)]))
    }

    #[test]
    fn deterministic_safe_net() {
        let m = net(0.0);
        let e = mc_estimate_psafe(&m, &region(), &band_spec(3.0, 1).unwrap(), 50, 1).unwrap();
        assert_eq!((e.value, e.standard_error), (1.0, 0.0));
    }

    #[test]
    fn impossible_spec() {
        let m = net(0.1);
        let spec = SafetySpec::new(vec![vec![1.0]], vec![-1e9]).unwrap();
        assert_eq!(mc_estimate_psafe(&m, &region(), &spec, 50, 1).unwrap().value, 0.0);
        assert_eq!(mc_pointwise_robustness(&m, &[0.0], &spec, 50, 1).unwrap().value, 0.0);
    }

    #[test]
    fn huge_band_always_holds() {
        let m = net(0.5);
        let e = mc_pointwise_robustness(&m, &[0.2], &band_spec(1e9, 1).unwrap(), 200, 4).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let m = net(0.5);
        let spec = band_spec(0.5, 1).unwrap();
        let a = mc_estimate_psafe(&m, &region(), &spec, 300, 9).unwrap();
        let b = mc_estimate_psafe(&m, &region(), &spec, 300, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0 && a.value < 1.0);
    }

    #[test]
    fn standard_error_formula() {
        let e = McEstimate::from_counts(30, 120);
        assert_eq!(e.value, 0.25);
        assert!((e.standard_error - (0.25f64 * 0.75 / 120.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn markov() {
        assert_eq!(markov_ceiling(0.5, 2.0).unwrap(), 0.25);
        assert_eq!(markov_ceiling(5.0, 2.0).unwrap(), 1.0);
        assert!(markov_ceiling(1.0, 0.0).is_err());
    }
}
