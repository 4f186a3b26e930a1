//! Certifies a region made of several input boxes and combines the per-box
//! bounds into a bound for the whole region. On this network interval
//! propagation fails on the hull of the four boxes but succeeds on each box.
//!
//! Run with `cargo run --release --example union_bound`.

use probsafe::certify::union_bound;
use probsafe::spec::band_spec;
use probsafe::{
    certify, certify_union, ActivationKind, BnnModel, CertifyConfig, InputRegion, Interval,
    IntervalBox, LayerPosterior, Method,
};

/// A 2-3-1 ReLU network with posterior standard deviation 0.1 on every weight.
fn small_model() -> probsafe::Result<BnnModel> {
    let hidden = LayerPosterior::new(
        2,
        3,
        vec![1.0, -0.5, 0.3, 0.8, -0.2, 0.6],
        vec![0.01; 6],
        vec![0.1, 0.0, -0.1],
        vec![0.01; 3],
        ActivationKind::Relu,
    )?;
    let output = LayerPosterior::new(3, 1, vec![0.7, -0.4, 0.5], vec![0.01; 3], vec![0.0], vec![0.01], ActivationKind::Identity)?;
    BnnModel::new(2, vec![hidden, output])
}

fn main() -> probsafe::Result<()> {
    let model = small_model()?;
    let spec = band_spec(2.5, 1)?;
    let cfg = CertifyConfig::new(200, 3.0, Method::Ibp, 0);

    let square = |x: f64, y: f64| IntervalBox::new(vec![Interval::new(x, x + 1.0), Interval::new(y, y + 1.0)]);
    let region = InputRegion::new(vec![square(-1.0, -1.0), square(0.0, -1.0), square(-1.0, 0.0), square(0.0, 0.0)])?;
    let u = certify_union(&model, &region, &spec, &cfg)?;
    for (t, r) in region.boxes().iter().zip(&u.per_region) {
        println!("  {t}: {:.4}", r.p_lower);
    }
    println!("union bound over the four boxes: {:.4}", u.p_lower);

    let hull = IntervalBox::new(vec![Interval::new(-1.0, 1.0); 2]);
    let direct = certify(&model, &hull, &spec, &cfg)?;
    println!("direct bound on the hull:        {:.4}", direct.p_lower);
    println!("union_bound([0.9, 0.95, 0.99]) = {:.4}", union_bound(&[0.9, 0.95, 0.99]));
    Ok(())
}
