//! Sampling estimates that accompany the certified bound: the fraction of
//! sampled networks verified safe on the whole region, pointwise satisfaction
//! at the centre, and the posterior mean output.
//!
//! Run with `cargo run --release --example monte_carlo`.

use std::path::PathBuf;

use probsafe::estimate::{mc_estimate_psafe, mc_output_mean, mc_pointwise_robustness};
use probsafe::io::{load_model, load_property};
use probsafe::{certify, CertifyConfig, Method};

fn main() -> probsafe::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let model = load_model(dir.join("toy_regression.json"))?;
    let property = load_property(dir.join("toy_property.json"), &model)?;
    let t = &property.region.boxes()[0];

    let region = mc_estimate_psafe(&model, &property.region, &property.spec, 5000, 7)?;
    let centre = t.center();
    let point = mc_pointwise_robustness(&model, &centre, &property.spec, 5000, 7)?;
    let mean = mc_output_mean(&model, &centre, 5000, 7)?;
    let bound = certify(&model, t, &property.spec, &CertifyConfig::new(200, 3.0, Method::Ibp, 7))?;

    println!("certified lower bound:        {:.4e}", bound.p_lower);
    println!("safe on the whole region:     {:.4} +- {:.4}", region.value, region.standard_error);
    println!("safe at x = {:.2}:            {:.4} +- {:.4}", centre[0], point.value, point.standard_error);
    println!("posterior mean output there:  {:.4}", mean[0]);
    Ok(())
}
