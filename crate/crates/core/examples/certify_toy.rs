//! Certifies the bundled 1-128-1 regression network on `x in [-0.2, 0.2]`
//! with the band `|y| <= 5`, for a few sample counts.
//!
//! Run with `cargo run --release --example certify_toy`.

use std::path::PathBuf;

use probsafe::io::{load_model, load_property};
use probsafe::{certify, CertifyConfig, Method};

fn main() -> probsafe::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let model = load_model(dir.join("toy_regression.json"))?;
    let property = load_property(dir.join("toy_property.json"), &model)?;
    let t = &property.region.boxes()[0];

    println!("{} weights, input box {t}", model.num_weights());
    println!("{:>5} {:>6} {:>9} {:>9} {:>14}", "N", "gamma", "accepted", "rejected", "p_lower");
    for gamma in [2.5, 3.0] {
        for n in [50, 100, 200] {
            let cfg = CertifyConfig::new(n, gamma, Method::Ibp, 0);
            let r = certify(&model, t, &property.spec, &cfg)?;
            println!(
                "{n:>5} {gamma:>6} {:>9} {:>9} {:>14.6e}",
                r.accepted, r.rejected, r.p_lower
            );
        }
    }
    Ok(())
}
