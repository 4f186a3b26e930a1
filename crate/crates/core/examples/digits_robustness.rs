//! Local robustness of the bundled digits classifier (zero versus one) on an
//! L-infinity ball around its first test image.
//!
//! Run with `cargo run --release --example digits_robustness`.

use std::path::PathBuf;

use probsafe::estimate::mc_pointwise_robustness;
use probsafe::io::{load_model, load_property};
use probsafe::{certify, CertifyConfig, Method};

fn main() -> probsafe::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let model = load_model(dir.join("digits_0v1.json"))?;
    let property = load_property(dir.join("digits_property.json"), &model)?;
    let t = &property.region.boxes()[0];
    println!(
        "{} inputs, {} weights, {} classes",
        model.input_dim(),
        model.num_weights(),
        model.output_dim()
    );

    let centre = t.center();
    let point = mc_pointwise_robustness(&model, &centre, &property.spec, 2000, 0)?;
    println!(
        "sampled networks classifying the centre correctly: {:.4} +- {:.4}",
        point.value, point.standard_error
    );

    for method in [Method::Ibp, Method::Lbp] {
        let cfg = CertifyConfig::new(50, 2.0, method, 0);
        let r = certify(&model, t, &property.spec, &cfg)?;
        println!(
            "{method}: p_lower {:.4e}, {} of {} rectangles accepted, {} pieces",
            r.p_lower,
            r.accepted,
            cfg.n_samples,
            r.safe_set.len()
        );
    }
    Ok(())
}
