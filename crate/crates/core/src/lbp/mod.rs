//! Linear bound propagation with interval-valued weights.
//!
//! Every pre-activation is sandwiched between two affine functions of the
//! input `x` and of the weight matrices. A layer is handled in three steps:
//! the activation of the previous layer is relaxed to a pair of lines on the
//! scalar bounds obtained by minimising and maximising the previous bounding
//! functions; the lines are composed with those functions; and each monomial
//! `W_ij z_j` is replaced by a McCormick form, whose `z_j` part is bounded by
//! the composed functions and whose `W_ij` part stays a free variable.

pub mod lbf;
pub mod mccormick;
pub mod relax;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::ibp::naive_margin;
use crate::interval::{Interval, IntervalBox};
use crate::model::{BnnModel, LayerIntervals};
use crate::spec::{CheckOutcome, SafetySpec};

pub use lbf::{lbf_linear_combine, LbfPair, LinearBoundingFunction};
pub use mccormick::{mccormick_bounds, BilinearForm, McCormickForms, McCormickVariant};
pub use relax::{relax_activation, ActivationRelaxation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LbpOptions {
    pub mccormick: McCormickVariant,
}

/// Bounding functions of every neuron of one layer and the scalar bounds
/// they induce over the input and weight boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfEnvelope {
    pub neurons: Vec<LbfPair>,
    pub bounds: IntervalBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbpOutput {
    /// Box containing the network output.
    pub output: IntervalBox,
    /// Bounding functions of the output layer.
    pub envelope: LbfEnvelope,
    /// Pre-activation bounds of every layer, output layer last.
    pub pre_activation: Vec<IntervalBox>,
}

fn layer_envelope(
    model: &BnnModel,
    k: usize,
    params: &[LayerIntervals],
    t: &IntervalBox,
    inputs: &[LbfPair],
    input_bounds: &IntervalBox,
    opts: LbpOptions,
) -> LbfEnvelope {
    let layer = &model.layers()[k];
    let p = &params[k];
    let n_in = layer.inputs();
    let mut neurons = Vec::with_capacity(layer.outputs());
    let mut bounds = Vec::with_capacity(layer.outputs());
    for i in 0..layer.outputs() {
        let mut lower = LinearBoundingFunction::zero(model, k + 1);
        let mut upper = LinearBoundingFunction::zero(model, k + 1);
        lower.lambda = p.biases[i].lo();
        upper.lambda = p.biases[i].hi();
        for j in 0..n_in {
            let forms = mccormick_bounds(p.weights.get(i, j), input_bounds[j], opts.mccormick);
            let (fl, fu) = (forms.lower, forms.upper);
            lower.add_scaled(fl.z_coef, inputs[j].lower_for(fl.z_coef));
            lower.nu[k][i * n_in + j] += fl.w_coef;
            lower.lambda += fl.constant;
            upper.add_scaled(fu.z_coef, inputs[j].upper_for(fu.z_coef));
            upper.nu[k][i * n_in + j] += fu.w_coef;
            upper.lambda += fu.constant;
        }
        let lo = lower.minimize(t, params);
        let hi = upper.maximize(t, params);
        bounds.push(Interval::new(lo.min(hi), hi.max(lo)));
        neurons.push(LbfPair { lower, upper });
    }
    LbfEnvelope {
        neurons,
        bounds: IntervalBox::new(bounds),
    }
}

/// Bounding functions on the activations of a layer from those on its
/// pre-activations.
fn activation_lbfs(model: &BnnModel, k: usize, env: &LbfEnvelope) -> Result<(Vec<LbfPair>, IntervalBox)> {
    let act = model.layers()[k].activation();
    let mut out = Vec::with_capacity(env.neurons.len());
    for (pair, iv) in env.neurons.iter().zip(env.bounds.iter()) {
        let r = relax_activation(act, iv.lo(), iv.hi())?;
        let lower = lbf_linear_combine(pair, r.alpha_lo, r.beta_lo).lower;
        let upper = lbf_linear_combine(pair, r.alpha_hi, r.beta_hi).upper;
        out.push(LbfPair { lower, upper });
    }
    let post = env.bounds.iter().map(|iv| iv.map_monotone(|v| act.apply(v))).collect();
    Ok((out, post))
}

/// Runs linear bound propagation and returns the output box together with
/// the output layer's bounding functions.
pub fn lbp_propagate_with(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    opts: LbpOptions,
) -> Result<LbpOutput> {
    check_dim("input box", model.input_dim(), t.dim())?;
    let params = model.layer_intervals(h)?;
    let mut inputs: Vec<LbfPair> = (0..model.input_dim())
        .map(|j| LbfPair::exact(LinearBoundingFunction::input_coordinate(model, j)))
        .collect();
    let mut input_bounds = t.clone();
    let mut pre_activation = Vec::with_capacity(params.len());
    let last = params.len() - 1;
    for k in 0..=last {
        let env = layer_envelope(model, k, &params, t, &inputs, &input_bounds, opts);
        pre_activation.push(env.bounds.clone());
        if k == last {
            return Ok(LbpOutput {
                output: env.bounds.clone(),
                envelope: env,
                pre_activation,
            });
        }
        (inputs, input_bounds) = activation_lbfs(model, k, &env)?;
    }
    unreachable!("loop returns at the output layer")
}

pub fn lbp_propagate(model: &BnnModel, t: &IntervalBox, h: &IntervalBox) -> Result<LbpOutput> {
    lbp_propagate_with(model, t, h, LbpOptions::default())
}

/// Certified lower bound on every specification row.
///
/// The output bounding functions are pushed through each row of `C`, and the
/// resulting lower function is minimised over the boxes. The bound from the
/// plain output box is also valid; each row reports the larger of the two.
pub fn lbp_spec_margins_with(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
    opts: LbpOptions,
) -> Result<Vec<f64>> {
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;
    let out = lbp_propagate_with(model, t, h, opts)?;
    let params = model.layer_intervals(h)?;
    let depth = model.layers().len();
    let naive_rows = (0..spec.num_rows())
        .map(|r| {
            let (c, d) = spec.row(r);
            crate::interval::min_linear_over_box(c, d, &out.output)
        })
        .collect::<Result<Vec<_>>>()?;
    let margins = naive_rows
        .into_iter()
        .enumerate()
        .map(|(r, naive)| {
            let (c, d) = spec.row(r);
            let mut f = LinearBoundingFunction::zero(model, depth);
            f.lambda = d;
            for (cj, pair) in c.iter().zip(&out.envelope.neurons) {
                f.add_scaled(*cj, pair.lower_for(*cj));
            }
            f.minimize(t, &params).max(naive)
        })
        .collect();
    Ok(margins)
}

pub fn lbp_check_spec_with(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
    opts: LbpOptions,
) -> Result<CheckOutcome> {
    let m = lbp_spec_margins_with(model, t, h, spec, opts)?;
    Ok(CheckOutcome::from_margin(m.into_iter().fold(f64::INFINITY, f64::min)))
}

/// Checks `C f^w(x) + d >= 0` for all `x` in `t`, `w` in `h`.
pub fn lbp_check_spec(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
) -> Result<CheckOutcome> {
    lbp_check_spec_with(model, t, h, spec, LbpOptions::default())
}

/// Spec margin from the plain LBP output box.
pub fn lbp_naive_margin(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
) -> Result<f64> {
    let out = lbp_propagate(model, t, h)?;
    naive_margin(&out.output, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{forward, sample_weights, ActivationKind, LayerPosterior, WeightSample};

    fn affine_net() -> BnnModel {
        BnnModel::new(
            2,
            vec![
                LayerPosterior::deterministic(
                    2,
                    3,
                    vec![1.0, -2.0, 0.5, 0.5, -1.0, 3.0],
                    vec![0.1, -0.2, 0.3],
                    ActivationKind::Identity,
                )
                .unwrap(),
                LayerPosterior::deterministic(3, 1, vec![2.0, -1.0, 0.5], vec![1.0], ActivationKind::Identity)
                    .unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn affine_net_is_exact() {
        let m = affine_net();
        let w = m.mean_sample();
        let t = IntervalBox::new(vec![Interval::new(-1.0, 0.5), Interval::new(0.0, 2.0)]);
        let out = lbp_propagate(&m, &t, &w.as_box()).unwrap();
        // Composite map y = c . x + e.
        let e = forward(&m, &w, &[0.0, 0.0]).unwrap()[0];
        let c0 = forward(&m, &w, &[1.0, 0.0]).unwrap()[0] - e;
        let c1 = forward(&m, &w, &[0.0, 1.0]).unwrap()[0] - e;
        let lo = crate::interval::min_linear_over_box(&[c0, c1], e, &t).unwrap();
        let hi = crate::interval::max_linear_over_box(&[c0, c1], e, &t).unwrap();
        assert!((out.output[0].lo() - lo).abs() < 1e-12);
        assert!((out.output[0].hi() - hi).abs() < 1e-12);

        let spec = SafetySpec::new(vec![vec![-1.0]], vec![3.0]).unwrap();
        let m_lbp = lbp_check_spec(&m, &t, &w.as_box(), &spec).unwrap().margin;
        assert!((m_lbp - (3.0 - hi)).abs() < 1e-12);
    }

    #[test]
    fn point_boxes_collapse() {
        let m = BnnModel::new(
            1,
            vec![
                LayerPosterior::new(1, 2, vec![1.0, -1.0], vec![0.3, 0.3], vec![0.2, 0.1], vec![0.1, 0.1], ActivationKind::Relu)
                    .unwrap(),
                LayerPosterior::new(2, 1, vec![1.0, 2.0], vec![0.2, 0.2], vec![0.0], vec![0.1], ActivationKind::Identity)
                    .unwrap(),
            ],
        )
        .unwrap();
        for seed in 0..20 {
            let w: WeightSample = sample_weights(&m, seed);
            let x = [0.3 - 0.05 * seed as f64];
            let out = lbp_propagate(&m, &IntervalBox::point(&x), &w.as_box()).unwrap().output;
            let y = forward(&m, &w, &x).unwrap()[0];
            assert!((out[0].lo() - y).abs() < 1e-12 && (out[0].hi() - y).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_spec_row() {
        let m = affine_net();
        let t = IntervalBox::new(vec![Interval::new(-1.0, 1.0); 2]);
        let spec = SafetySpec::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let o = lbp_check_spec(&m, &t, &m.mean_sample().as_box(), &spec).unwrap();
        assert!(o.is_safe());
        assert_eq!(o.margin, 1.0);
    }
}
