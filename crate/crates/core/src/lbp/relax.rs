//! Linear relaxations of activation functions over a pre-activation interval.

use crate::error::{Error, Result};
use crate::model::ActivationKind;

const BISECTION_TOL: f64 = 1e-8;
const BISECTION_MAX_ITERS: usize = 60;

/// Lines `alpha_lo * v + beta_lo <= sigma(v) <= alpha_hi * v + beta_hi`, valid
/// on the interval they were built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationRelaxation {
    pub alpha_lo: f64,
    pub beta_lo: f64,
    pub alpha_hi: f64,
    pub beta_hi: f64,
}

impl ActivationRelaxation {
    fn new(lower: (f64, f64), upper: (f64, f64)) -> Self {
        Self {
            alpha_lo: lower.0,
            beta_lo: lower.1,
            alpha_hi: upper.0,
            beta_hi: upper.1,
        }
    }

    pub fn lower_at(&self, v: f64) -> f64 {
        self.alpha_lo * v + self.beta_lo
    }

    pub fn upper_at(&self, v: f64) -> f64 {
        self.alpha_hi * v + self.beta_hi
    }
}

/// Builds bracketing lines for `kind` on `[lo, hi]`.
///
/// ReLU uses the triangle upper line and, when the interval crosses zero,
/// the lower slope 1 if `hi >= -lo` and 0 otherwise. Tanh and sigmoid use a
/// chord on the side where it is valid and a tangent on the other; when the
/// interval straddles the inflection point the tangent point is found by
/// bisection, rounding towards the side that keeps the line valid.
pub fn relax_activation(kind: ActivationKind, lo: f64, hi: f64) -> Result<ActivationRelaxation> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(match kind {
        ActivationKind::Identity => ActivationRelaxation::new((1.0, 0.0), (1.0, 0.0)),
        ActivationKind::Relu => relax_relu(lo, hi),
        ActivationKind::Tanh | ActivationKind::Sigmoid => relax_s_shaped(kind, lo, hi),
    })
}

fn relax_relu(lo: f64, hi: f64) -> ActivationRelaxation {
    if lo >= 0.0 {
        ActivationRelaxation::new((1.0, 0.0), (1.0, 0.0))
    } else if hi <= 0.0 {
        ActivationRelaxation::new((0.0, 0.0), (0.0, 0.0))
    } else {
        let slope = hi / (hi - lo);
        let lower_slope = if hi >= -lo { 1.0 } else { 0.0 };
        ActivationRelaxation::new((lower_slope, 0.0), (slope, -slope * lo))
    }
}

fn tangent(kind: ActivationKind, d: f64) -> (f64, f64) {
    let s = kind.derivative(d);
    (s, kind.apply(d) - s * d)
}

/// Sigmoid and tanh: convex on `v < 0`, concave on `v > 0`.
fn relax_s_shaped(kind: ActivationKind, lo: f64, hi: f64) -> ActivationRelaxation {
    let f = |v: f64| kind.apply(v);
    let df = |v: f64| kind.derivative(v);
    if lo == hi {
        let t = tangent(kind, lo);
        return ActivationRelaxation::new(t, t);
    }
    let slope = (f(hi) - f(lo)) / (hi - lo);
    let chord = (slope, f(lo) - slope * lo);
    let mid = 0.5 * (lo + hi);
    if hi <= 0.0 {
        return ActivationRelaxation::new(tangent(kind, mid), chord);
    }
    if lo >= 0.0 {
        return ActivationRelaxation::new(chord, tangent(kind, mid));
    }

    let upper = if df(hi) >= slope {
        chord
    } else {
        // Tangent at d in [0, hi] passing above (lo, f(lo)).
        let gap = |d: f64| f(d) + df(d) * (lo - d) - f(lo);
        let (mut a, mut b) = (0.0, hi);
        for _ in 0..BISECTION_MAX_ITERS {
            if b - a <= BISECTION_TOL {
                break;
            }
            let m = 0.5 * (a + b);
            if gap(m) >= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        tangent(kind, b)
    };

    let lower = if df(lo) >= slope {
        chord
    } else {
        // Tangent at d in [lo, 0] passing below (hi, f(hi)).
        let gap = |d: f64| f(hi) - f(d) - df(d) * (hi - d);
        let (mut a, mut b) = (lo, 0.0);
        for _ in 0..BISECTION_MAX_ITERS {
            if b - a <= BISECTION_TOL {
                break;
            }
            let m = 0.5 * (a + b);
            if gap(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        tangent(kind, a)
    };
    ActivationRelaxation::new(lower, upper)
}
