//! Certification when the posterior is only available as samples: the
//! rectangle sizes come from empirical moments and the certified mass is
//! estimated by counting held-out samples.
//!
//! Run with `cargo run --release --example sample_posterior`.

use probsafe::certify::{certify_sample_set, mc_box_mass};
use probsafe::model::sample_weights_stream;
use probsafe::spec::{band_spec, linf_ball};
use probsafe::{certify, ActivationKind, BnnModel, CertifyConfig, LayerPosterior, Method};

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
    let t = linf_ball(&[0.0, 0.0], 0.2, None)?;
    let spec = band_spec(1.5, 1)?;
    let cfg = CertifyConfig::new(100, 2.0, Method::Lbp, 0);

    let proposals: Vec<_> = (0..100).map(|i| sample_weights_stream(&model, 0, i)).collect();
    let integration: Vec<_> = (0..50_000).map(|i| sample_weights_stream(&model, 1, i)).collect();
    let sampled = certify_sample_set(&model, &proposals, &integration, &t, &spec, &cfg)?;
    println!(
        "from samples only:     {:.4} +- {:.4}",
        sampled.p_lower,
        sampled.standard_error.unwrap_or(0.0)
    );

    let exact = certify(&model, &t, &spec, &cfg)?;
    let held_out: Vec<_> = (0..50_000).map(|i| sample_weights_stream(&model, 2, i)).collect();
    let mc = mc_box_mass(&held_out, &exact.safe_set)?;
    println!("closed-form mass:      {:.4}", exact.p_lower);
    println!("same set, by sampling: {:.4} +- {:.4}", mc.value, mc.standard_error);
    Ok(())
}
