//! Compares interval and linear bound propagation on the regression network:
//! output bounds on one weight rectangle, then certified probabilities.
//!
//! Run with `cargo run --release --example ibp_vs_lbp`.

use std::path::PathBuf;

use probsafe::ibp::ibp_propagate;
use probsafe::io::{load_model, load_property};
use probsafe::lbp::lbp_propagate;
use probsafe::model::weight_rectangle;
use probsafe::{certify, CertifyConfig, MarginSemantics, Method};

fn main() -> probsafe::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let model = load_model(dir.join("toy_regression.json"))?;
    let property = load_property(dir.join("toy_property.json"), &model)?;
    let t = &property.region.boxes()[0];

    println!("output bounds on the rectangle around the mean weights");
    for gamma in [0.5, 1.0, 2.0, 3.0] {
        let h = weight_rectangle(&model, &model.mean_sample(), gamma, MarginSemantics::Stddev)?;
        let ibp = ibp_propagate(&model, t, &h)?;
        let lbp = lbp_propagate(&model, t, &h)?.output;
        println!("  gamma {gamma:>4}: ibp {}  lbp {}", ibp[0], lbp[0]);
    }

    println!("\ncertified lower bounds, N = 100");
    for gamma in [1.5, 2.0, 2.5] {
        let mut row = format!("  gamma {gamma:>4}:");
        for method in [Method::Ibp, Method::Lbp] {
            let r = certify(&model, t, &property.spec, &CertifyConfig::new(100, gamma, method, 1))?;
            row += &format!("  {method} {:.4e} ({} accepted)", r.p_lower, r.accepted);
        }
        println!("{row}");
    }
    Ok(())
}
