//! Linear bounding functions in the input and the weight matrices.

use crate::interval::IntervalBox;
use crate::model::{BnnModel, LayerIntervals, WeightSample};

/// `mu . x + sum_l <nu_l, W^(l)> + lambda`.
///
/// `nu[l]` is a dense row-major coefficient matrix for the weights of layer
/// `l`; biases never appear as variables (their interval endpoints are folded
/// into `lambda`). A function bounding a quantity of layer `k` carries
/// coefficients for layers `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBoundingFunction {
    pub mu: Vec<f64>,
    pub nu: Vec<Vec<f64>>,
    pub lambda: f64,
}

impl LinearBoundingFunction {
    /// The zero function over the input and the weight matrices of layers
    /// `0..depth`.
    pub fn zero(model: &BnnModel, depth: usize) -> Self {
        Self {
            mu: vec![0.0; model.input_dim()],
            nu: model.layers()[..depth]
                .iter()
                .map(|l| vec![0.0; l.inputs() * l.outputs()])
                .collect(),
            lambda: 0.0,
        }
    }

    /// The coordinate function `x_j`.
    pub fn input_coordinate(model: &BnnModel, j: usize) -> Self {
        let mut f = Self::zero(model, 0);
        f.mu[j] = 1.0;
        f
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            mu: self.mu.iter().map(|v| a * v).collect(),
            nu: self
                .nu
                .iter()
                .map(|m| m.iter().map(|v| a * v).collect())
                .collect(),
            lambda: a * self.lambda,
        }
    }

    /// `self += a * other`. `other` may cover fewer layers than `self`.
    pub fn add_scaled(&mut self, a: f64, other: &LinearBoundingFunction) {
        debug_assert!(other.nu.len() <= self.nu.len());
        for (s, o) in self.mu.iter_mut().zip(&other.mu) {
            *s += a * o;
        }
        for (sm, om) in self.nu.iter_mut().zip(&other.nu) {
            for (s, o) in sm.iter_mut().zip(om) {
                *s += a * o;
            }
        }
        self.lambda += a * other.lambda;
    }

    pub fn evaluate(&self, model: &BnnModel, x: &[f64], w: &WeightSample) -> f64 {
        let mut acc = self.lambda;
        for (c, v) in self.mu.iter().zip(x) {
            acc += c * v;
        }
        for (l, m) in self.nu.iter().enumerate() {
            let start = model.weight_offset(l);
            for (c, v) in m.iter().zip(&w.values()[start..]) {
                acc += c * v;
            }
        }
        acc
    }

    /// Exact minimum over `x` in `t` and weights in `params`.
    pub fn minimize(&self, t: &IntervalBox, params: &[LayerIntervals]) -> f64 {
        self.extremum(t, params, false)
    }

    /// Exact maximum over `x` in `t` and weights in `params`.
    pub fn maximize(&self, t: &IntervalBox, params: &[LayerIntervals]) -> f64 {
        self.extremum(t, params, true)
    }

    fn extremum(&self, t: &IntervalBox, params: &[LayerIntervals], max: bool) -> f64 {
        let pick = |c: f64, lo: f64, hi: f64| {
            if (c >= 0.0) == max {
                c * hi
            } else {
                c * lo
            }
        };
        let mut acc = self.lambda;
        for (c, iv) in self.mu.iter().zip(t.iter()) {
            acc += pick(*c, iv.lo(), iv.hi());
        }
        for (m, p) in self.nu.iter().zip(params) {
            for (c, iv) in m.iter().zip(p.weights.entries()) {
                acc += pick(*c, iv.lo(), iv.hi());
            }
        }
        acc
    }
}

/// Lower and upper bounding functions of one scalar quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfPair {
    pub lower: LinearBoundingFunction,
    pub upper: LinearBoundingFunction,
}

impl LbfPair {
    pub fn exact(f: LinearBoundingFunction) -> Self {
        Self {
            lower: f.clone(),
            upper: f,
        }
    }

    /// The function of the pair used for the lower bound of `a * g`.
    pub fn lower_for(&self, a: f64) -> &LinearBoundingFunction {
        if a >= 0.0 {
            &self.lower
        } else {
            &self.upper
        }
    }

    /// The function of the pair used for the upper bound of `a * g`.
    pub fn upper_for(&self, a: f64) -> &LinearBoundingFunction {
        if a >= 0.0 {
            &self.upper
        } else {
            &self.lower
        }
    }
}

/// Bounds on `a * g + b` from bounds on `g`: a non-negative `a` keeps the
/// roles of the two functions, a negative `a` swaps them.
pub fn lbf_linear_combine(pair: &LbfPair, a: f64, b: f64) -> LbfPair {
    let mut lower = pair.lower_for(a).scaled(a);
    let mut upper = pair.upper_for(a).scaled(a);
    lower.lambda += b;
    upper.lambda += b;
    LbfPair { lower, upper }
}
