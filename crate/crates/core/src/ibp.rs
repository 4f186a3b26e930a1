//! Interval bound propagation with interval-valued weights.
//!
//! Each monomial `W_ij * z_j` of a layer is bounded by its four corner
//! products; the bounds are summed per output neuron together with the bias
//! interval and pushed through the (monotone) activation endpointwise.

use crate::error::{check_dim, Result};
use crate::interval::{interval_bilinear, min_linear_over_box, Interval, IntervalBox, IntervalMatrix};
use crate::model::{BnnModel, LayerIntervals};
use crate::spec::{CheckOutcome, SafetySpec};

/// Per-monomial corner bounds `t_ij^L`, `t_ij^U` of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearCornerBounds {
    rows: usize,
    cols: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BilinearCornerBounds {
    pub fn compute(weights: &IntervalMatrix, z: &IntervalBox) -> Result<Self> {
        check_dim("layer input", weights.cols(), z.dim())?;
        let n = weights.rows() * weights.cols();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..weights.rows() {
            for (w, zj) in weights.row(i).iter().zip(z.iter()) {
                let t = interval_bilinear(*w, *zj);
                lower.push(t.lo());
                upper.push(t.hi());
            }
        }
        Ok(Self {
            rows: weights.rows(),
            cols: weights.cols(),
            lower,
            upper,
        })
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.cols + j]
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        self.upper[i * self.cols + j]
    }

    /// `[sum_j t_ij^L + b_i^L, sum_j t_ij^U + b_i^U]` for every row.
    pub fn pre_activation(&self, biases: &[Interval]) -> IntervalBox {
        (0..self.rows)
            .map(|i| {
                let row = i * self.cols..(i + 1) * self.cols;
                let lo = self.lower[row.clone()].iter().sum::<f64>() + biases[i].lo();
                let hi = self.upper[row].iter().sum::<f64>() + biases[i].hi();
                Interval::new(lo, hi)
            })
            .collect()
    }
}

/// Bounds on one layer before and after its activation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBounds {
    pub pre_activation: IntervalBox,
    pub post_activation: IntervalBox,
}

fn propagate_layer(
    model: &BnnModel,
    k: usize,
    params: &LayerIntervals,
    z: &IntervalBox,
) -> Result<LayerBounds> {
    let act = model.layers()[k].activation();
    let pre = BilinearCornerBounds::compute(&params.weights, z)?.pre_activation(&params.biases);
    let post = pre.iter().map(|iv| iv.map_monotone(|v| act.apply(v))).collect();
    Ok(LayerBounds {
        pre_activation: pre,
        post_activation: post,
    })
}

/// Bounds for every layer, input layer first. The last entry bounds the
/// network output.
pub fn ibp_layer_bounds(model: &BnnModel, t: &IntervalBox, h: &IntervalBox) -> Result<Vec<LayerBounds>> {
    check_dim("input box", model.input_dim(), t.dim())?;
    let params = model.layer_intervals(h)?;
    let mut out: Vec<LayerBounds> = Vec::with_capacity(params.len());
    for (k, p) in params.iter().enumerate() {
        let z = out.last().map_or(t, |b| &b.post_activation);
        let next = propagate_layer(model, k, p, z)?;
        out.push(next);
    }
    Ok(out)
}

/// Box containing `f^w(x)` for every `x` in `t` and `w` in `h`.
pub fn ibp_propagate(model: &BnnModel, t: &IntervalBox, h: &IntervalBox) -> Result<IntervalBox> {
    let mut layers = ibp_layer_bounds(model, t, h)?;
    Ok(layers.pop().expect("model has layers").post_activation)
}

/// Certified lower bound on every specification row, per row.
///
/// The specification is folded into the output layer: the interval weights
/// `C W^(K)` and biases `C b^(K) + d` are formed from the last layer's
/// weight intervals and bounded against the last hidden activations with the
/// corner rule. The bound read off the plain output box is also valid, and
/// each row reports the larger of the two.
pub fn ibp_spec_margins(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
) -> Result<Vec<f64>> {
    check_dim("specification columns", model.output_dim(), spec.output_dim())?;
    check_dim("input box", model.input_dim(), t.dim())?;
    let params = model.layer_intervals(h)?;
    let last = params.len() - 1;
    let mut z = t.clone();
    for (k, p) in params[..last].iter().enumerate() {
        z = propagate_layer(model, k, p, &z)?.post_activation;
    }
    let out_params = &params[last];
    let output = propagate_layer(model, last, out_params, &z)?.post_activation;

    let w = &out_params.weights;
    let mut margins = Vec::with_capacity(spec.num_rows());
    for r in 0..spec.num_rows() {
        let (c, d) = spec.row(r);
        let mut bias_lo = d;
        for (cj, bj) in c.iter().zip(&out_params.biases) {
            bias_lo += bj.scale(*cj).lo();
        }
        let mut elided = bias_lo;
        for (l, zl) in z.iter().enumerate() {
            let folded = c
                .iter()
                .enumerate()
                .fold(Interval::point(0.0), |acc, (j, cj)| acc.add(&w.get(j, l).scale(*cj)));
            elided += interval_bilinear(folded, *zl).lo();
        }
        let naive = min_linear_over_box(c, d, &output)?;
        margins.push(elided.max(naive));
    }
    Ok(margins)
}

/// Checks `C f^w(x) + d >= 0` for all `x` in `t`, `w` in `h`.
pub fn ibp_check_spec(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
) -> Result<CheckOutcome> {
    let margins = ibp_spec_margins(model, t, h, spec)?;
    Ok(CheckOutcome::from_margin(
        margins.into_iter().fold(f64::INFINITY, f64::min),
    ))
}

/// Spec margin from the plain output box, without folding.
pub fn ibp_naive_margin(
    model: &BnnModel,
    t: &IntervalBox,
    h: &IntervalBox,
    spec: &SafetySpec,
) -> Result<f64> {
    let out = ibp_propagate(model, t, h)?;
    naive_margin(&out, spec)
}

pub(crate) fn naive_margin(output: &IntervalBox, spec: &SafetySpec) -> Result<f64> {
    check_dim("specification columns", output.dim(), spec.output_dim())?;
    let mut m = f64::INFINITY;
    for r in 0..spec.num_rows() {
        let (c, d) = spec.row(r);
        m = m.min(min_linear_over_box(c, d, output)?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{forward, ActivationKind, LayerPosterior, WeightSample};
    use crate::spec::band_spec;

    /// hidden: one ReLU neuron with weight in [1, 2]; output: identity weight 1.
    fn scalar_net() -> (BnnModel, IntervalBox) {
        let m = BnnModel::new(
            1,
            vec![
                LayerPosterior::new(1, 1, vec![1.5], vec![0.25], vec![0.0], vec![0.0], ActivationKind::Relu)
                    .unwrap(),
                LayerPosterior::deterministic(1, 1, vec![1.0], vec![0.0], ActivationKind::Identity)
                    .unwrap(),
            ],
        )
        .unwrap();
        let h = IntervalBox::new(vec![
            Interval::new(1.0, 2.0),
            Interval::point(0.0),
            Interval::point(1.0),
            Interval::point(0.0),
        ]);
        (m, h)
    }

    #[test]
    fn scalar_example() {
        let (m, h) = scalar_net();
        let t = IntervalBox::new(vec![Interval::new(-1.0, 1.0)]);
        let layers = ibp_layer_bounds(&m, &t, &h).unwrap();
        assert_eq!(layers[0].pre_activation[0], Interval::new(-2.0, 2.0));
        assert_eq!(layers[0].post_activation[0], Interval::new(0.0, 2.0));
        assert_eq!(ibp_propagate(&m, &t, &h).unwrap()[0], Interval::new(0.0, 2.0));
    }

    #[test]
    fn point_collapse() {
        let (m, _) = scalar_net();
        let w = WeightSample::new(&m, vec![1.7, -0.3, 0.9, 0.2]).unwrap();
        let out = ibp_propagate(&m, &IntervalBox::point(&[0.8]), &w.as_box()).unwrap();
        let y = forward(&m, &w, &[0.8]).unwrap();
        assert_eq!(out.lower(), y);
        assert_eq!(out.upper(), y);
    }

    #[test]
    fn spec_margin_arithmetic() {
        // Output lies in [-3, -1] exactly: constant network.
        let m = BnnModel::new(
            1,
            vec![
                LayerPosterior::deterministic(1, 1, vec![0.0], vec![1.0], ActivationKind::Relu).unwrap(),
                LayerPosterior::deterministic(1, 1, vec![1.0], vec![-4.0], ActivationKind::Identity)
                    .unwrap(),
            ],
        )
        .unwrap();
        let mut h = m.mean_sample().as_box().intervals().to_vec();
        h[3] = Interval::new(-4.0, -2.0);
        let h = IntervalBox::new(h);
        let t = IntervalBox::new(vec![Interval::new(-1.0, 1.0)]);
        let spec = SafetySpec::new(vec![vec![1.0]], vec![5.0]).unwrap();
        let out = ibp_check_spec(&m, &t, &h, &spec).unwrap();
        assert_eq!(out.margin, 2.0);
        assert!(out.is_safe());
        let huge = SafetySpec::new(vec![vec![1.0], vec![-1.0]], vec![1e9, 1e9]).unwrap();
        assert!(ibp_check_spec(&m, &t, &h, &huge).unwrap().is_safe());
        let tight = band_spec(2.5, 1).unwrap();
        let o = ibp_check_spec(&m, &t, &h, &tight).unwrap();
        assert!(!o.is_safe());
        assert_eq!(o.margin, -0.5);
    }

    #[test]
    fn shape_errors() {
        let (m, h) = scalar_net();
        let t2 = IntervalBox::new(vec![Interval::new(0.0, 1.0); 2]);
        assert!(ibp_propagate(&m, &t2, &h).is_err());
        let t = IntervalBox::new(vec![Interval::new(0.0, 1.0)]);
        let short = IntervalBox::new(vec![Interval::point(0.0); 3]);
        assert!(ibp_propagate(&m, &t, &short).is_err());
        let spec2 = SafetySpec::new(vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        assert!(ibp_check_spec(&m, &t, &h, &spec2).is_err());
    }
}
