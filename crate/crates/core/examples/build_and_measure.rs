//! Builds a small network in code, writes the model and a property to disk,
//! certifies from the files and measures the certified rectangles again.
//!
//! Run with `cargo run --example build_and_measure`.

use probsafe::certify::{gaussian_box_mass, SafeWeightSet};
use probsafe::io::{
    load_boxes, load_model, load_property, save_model, save_property, write_json, BoxesFile,
    PropertyFile, RegionFile, SpecFile,
};
use probsafe::{certify, ActivationKind, BnnModel, CertifyConfig, LayerPosterior, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
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
    let model = BnnModel::new(2, vec![hidden, output])?;

    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    save_model(dir.join("model.json"), &model)?;
    save_property(
        dir.join("property.json"),
        &PropertyFile {
            description: Some("output stays within 1.5 of zero near the origin".into()),
            region: RegionFile::LinfBall { center: vec![0.0, 0.0], epsilon: 0.2, clip: None },
            spec: SpecFile::Band { band: 1.5 },
        },
    )?;

    let model = load_model(dir.join("model.json"))?;
    let property = load_property(dir.join("property.json"), &model)?;
    let t = &property.region.boxes()[0];
    let r = certify(&model, t, &property.spec, &CertifyConfig::new(50, 2.0, Method::Lbp, 0))?;
    println!("p_lower {:.6}, {} disjoint rectangles", r.p_lower, r.safe_set.len());

    let boxes_path = dir.join("safe_set.json");
    write_json(&boxes_path, &BoxesFile { boxes: r.safe_set.rectangles().to_vec() })?;
    let boxes = load_boxes(&boxes_path)?;
    let set = SafeWeightSet::new(boxes)?;
    let total: f64 = set
        .rectangles()
        .iter()
        .map(|b| gaussian_box_mass(&model, b))
        .sum::<probsafe::Result<f64>>()?;
    println!("re-measured from {}: {total:.6}", boxes_path.display());
    Ok(())
}
