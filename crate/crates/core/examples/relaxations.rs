//! Prints the linear bracketing lines used for activations and for
//! weight-times-input products, and checks them on a grid.
//!
//! Run with `cargo run --example relaxations`.

use probsafe::lbp::{mccormick_bounds, relax_activation, McCormickVariant};
use probsafe::{ActivationKind, Interval};

fn main() -> probsafe::Result<()> {
    let kinds = [ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid];
    for kind in kinds {
        for (lo, hi) in [(-2.0, 1.0), (0.5, 3.0), (-3.0, -0.5)] {
            let r = relax_activation(kind, lo, hi)?;
            let gap = (0..=100)
                .map(|k| lo + (hi - lo) * k as f64 / 100.0)
                .map(|v| r.upper_at(v) - r.lower_at(v))
                .fold(0.0f64, f64::max);
            println!(
                "{:>7} on [{lo:>4}, {hi:>4}]: {:+.4} v {:+.4} <= f(v) <= {:+.4} v {:+.4}   max gap {gap:.4}",
                kind.name(),
                r.alpha_lo,
                r.beta_lo,
                r.alpha_hi,
                r.beta_hi
            );
        }
    }

    let (w, z) = (Interval::new(-0.5, 1.5), Interval::new(0.0, 2.0));
    for variant in [McCormickVariant::Lower, McCormickVariant::Envelope] {
        let f = mccormick_bounds(w, z, variant);
        let mut worst = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let wv = w.lo() + w.width() * i as f64 / 20.0;
                let zv = z.lo() + z.width() * j as f64 / 20.0;
                let p = wv * zv;
                assert!(f.lower.eval(wv, zv) <= p + 1e-12 && p <= f.upper.eval(wv, zv) + 1e-12);
                worst = worst.max(f.upper.eval(wv, zv) - f.lower.eval(wv, zv));
            }
        }
        println!("{variant:?} bounds for w*z on {w} x {z}: widest gap {worst:.3}");
    }
    Ok(())
}
