//! Random fixture networks shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use probsafe::io::{load_model, load_property};
use probsafe::ibp::ibp_check_spec;
use probsafe::model::{forward, weight_rectangle, BnnModel, LayerPosterior};
use probsafe::spec::{band_spec, classification_spec};
use probsafe::{ActivationKind, ClassIndex, Interval, IntervalBox, MarginSemantics, SafetySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// The committed 1-128-1 regression network with its `[-0.2, 0.2]` region
/// and `|y| <= 5` band.
pub fn toy() -> (BnnModel, IntervalBox, SafetySpec) {
    let model = load_model(fixture_path("toy_regression.json")).unwrap();
    let prop = load_property(fixture_path("toy_property.json"), &model).unwrap();
    (model, prop.region.boxes()[0].clone(), prop.spec)
}

/// A randomly drawn verification problem.
pub struct Problem {
    pub model: BnnModel,
    pub t: IntervalBox,
    pub spec: SafetySpec,
    pub gamma: f64,
}

/// Network with 1 or 2 hidden layers of 4 to 32 ReLU or tanh units,
/// a random input box, a band or classification property that holds at the
/// box centre for the mean weights, and a weight margin near the edge of
/// what the property allows.
pub fn random_problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_dim = rng.random_range(1..=3);
    let hidden = rng.random_range(1..=2);
    let act = if rng.random_bool(0.5) {
        ActivationKind::Relu
    } else {
        ActivationKind::Tanh
    };
    let classify = rng.random_bool(0.5);
    let output_dim = if classify { rng.random_range(2..=3) } else { rng.random_range(1..=2) };
    let mut widths = vec![input_dim];
    for _ in 0..hidden {
        widths.push(rng.random_range(4..=32));
    }
    widths.push(output_dim);
    let sd: f64 = rng.random_range(0.005..0.05);
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (n_in, n_out) = (w[0], w[1]);
            let scale = 1.5 / (n_in as f64).sqrt();
            let wm = (0..n_in * n_out).map(|_| rng.random_range(-scale..scale)).collect();
            let wv = (0..n_in * n_out).map(|_| (sd * rng.random_range(0.5..1.5)).powi(2)).collect();
            let bm = (0..n_out).map(|_| rng.random_range(-0.3..0.3)).collect();
            let bv = (0..n_out).map(|_| (sd * rng.random_range(0.5..1.5)).powi(2)).collect();
            let kind = if k + 2 == widths.len() { ActivationKind::Identity } else { act };
            LayerPosterior::new(n_in, n_out, wm, wv, bm, bv, kind).unwrap()
        })
        .collect();
    let model = BnnModel::new(input_dim, layers).unwrap();
    let centre: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let half = rng.random_range(0.01..0.2);
    let t: IntervalBox = centre.iter().map(|c| Interval::centered(*c, half)).collect();
    let y = forward(&model, &model.mean_sample(), &centre).unwrap();
    let spec = if classify {
        let top = (0..output_dim)
            .max_by(|a, b| y[*a].total_cmp(&y[*b]))
            .unwrap();
        classification_spec(output_dim, ClassIndex::from_zero_based(top)).unwrap()
    } else {
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        band_spec(peak + rng.random_range(0.2..1.5), output_dim).unwrap()
    };
    let gamma = informative_gamma(&model, &t, &spec);
    Problem { model, t, spec, gamma }
}

/// Largest margin on a grid at which the rectangle around the mean weights
/// still passes IBP, so that sampled rectangles sit near the boundary.
fn informative_gamma(model: &BnnModel, t: &IntervalBox, spec: &SafetySpec) -> f64 {
    let mean = model.mean_sample();
    [4.0, 3.5, 3.0, 2.5, 2.0, 1.5, 1.0, 0.75, 0.5, 0.25]
        .into_iter()
        .find(|&g| {
            let h = weight_rectangle(model, &mean, g, MarginSemantics::Stddev).unwrap();
            ibp_check_spec(model, t, &h, spec).unwrap().is_safe()
        })
        .unwrap_or(0.25)
}

/// Uniform point of a box.
pub fn uniform_in(rng: &mut impl Rng, b: &IntervalBox) -> Vec<f64> {
    b.iter()
        .map(|iv| {
            if iv.is_degenerate() {
                iv.lo()
            } else {
                rng.random_range(iv.lo()..=iv.hi())
            }
        })
        .collect()
}

/// A vertex of a box chosen at random.
pub fn corner_of(rng: &mut impl Rng, b: &IntervalBox) -> Vec<f64> {
    b.iter()
        .map(|iv| if rng.random_bool(0.5) { iv.lo() } else { iv.hi() })
        .collect()
}

/// Whether `v` lies in `iv` up to a relative slack.
pub fn within(iv: Interval, v: f64, rel: f64) -> bool {
    let tol = |x: f64| rel * x.abs().max(1.0);
    v >= iv.lo() - tol(iv.lo()) && v <= iv.hi() + tol(iv.hi())
}
