//! JSON and CSV formats read and written by the command-line tool.
//!
//! Models, properties and weight-box lists are JSON documents. Reports are
//! JSON with a `report_version` field; sweeps are CSV. Floats are written in
//! shortest round-trip form, so a saved model reloads bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certify::{CertificationResult, CertifyConfig, Method, SafeWeightSet};
use crate::error::{check_dim, Error, Result};
use crate::estimate::McEstimate;
use crate::interval::{Interval, IntervalBox};
use crate::model::{ActivationKind, BnnModel, LayerPosterior};
use crate::spec::{band_spec, classification_spec, linf_ball, ClassIndex, InputRegion, SafetySpec};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// One layer as stored on disk; matrices are lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub weights_mean: Vec<Vec<f64>>,
    pub weights_var: Vec<Vec<f64>>,
    pub bias_mean: Vec<f64>,
    pub bias_var: Vec<f64>,
    pub activation: ActivationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub input_dim: usize,
    pub layers: Vec<LayerFile>,
    /// Free-form provenance (training data, optimiser, ...).
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

fn flatten_rows(k: usize, what: &str, rows: &[Vec<f64>], cols: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidModel(format!(
                "layer {k}: {what} row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        out.extend_from_slice(row);
    }
    Ok(out)
}

impl ModelFile {
    pub fn from_model(model: &BnnModel, metadata: serde_json::Map<String, serde_json::Value>) -> Self {
        let rows = |flat: &[f64], cols: usize| flat.chunks(cols).map(<[f64]>::to_vec).collect();
        Self {
            format_version: MODEL_FORMAT_VERSION,
            input_dim: model.input_dim(),
            layers: model
                .layers()
                .iter()
                .map(|l| LayerFile {
                    weights_mean: rows(l.weight_mean(), l.inputs()),
                    weights_var: rows(l.weight_var(), l.inputs()),
                    bias_mean: l.bias_mean().to_vec(),
                    bias_var: l.bias_var().to_vec(),
                    activation: l.activation(),
                })
                .collect(),
            metadata,
        }
    }

    /// Validates shapes and values and builds the model.
    pub fn to_model(&self) -> Result<BnnModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut inputs = self.input_dim;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.iter().enumerate() {
            let outputs = l.weights_mean.len();
            if l.weights_var.len() != outputs {
                return Err(Error::InvalidModel(format!(
                    "layer {k}: weights_var has {} rows, weights_mean has {outputs}",
                    l.weights_var.len()
                )));
            }
            let wm = flatten_rows(k, "weights_mean", &l.weights_mean, inputs)?;
            let wv = flatten_rows(k, "weights_var", &l.weights_var, inputs)?;
            let layer = LayerPosterior::new(
                inputs,
                outputs,
                wm,
                wv,
                l.bias_mean.clone(),
                l.bias_var.clone(),
                l.activation,
            )
            .map_err(|e| match e {
                Error::InvalidModel(m) => Error::InvalidModel(format!("layer {k}: {m}")),
                other => other,
            })?;
            layers.push(layer);
            inputs = outputs;
        }
        BnnModel::new(self.input_dim, layers)
    }
}

/// Reads and validates a model file.
///
/// Syntax and type errors carry the line and column of the offending token;
/// value errors name the layer and the flat index.
pub fn load_model(path: impl AsRef<Path>) -> Result<BnnModel> {
    let path = path.as_ref();
    let file: ModelFile = parse_json(path, &read_text(path)?)?;
    file.to_model()
}

/// Parses a model from a JSON string.
pub fn model_from_json(text: &str) -> Result<BnnModel> {
    parse_json::<ModelFile>(Path::new("<string>"), text)?.to_model()
}

pub fn save_model(path: impl AsRef<Path>, model: &BnnModel) -> Result<()> {
    save_model_with_metadata(path, model, serde_json::Map::new())
}

pub fn save_model_with_metadata(
    path: impl AsRef<Path>,
    model: &BnnModel,
    metadata: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    let file = ModelFile::from_model(model, metadata);
    let text = serde_json::to_string_pretty(&file).expect("model serialises");
    write_text(path.as_ref(), &(text + "\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionFile {
    Boxes(Vec<IntervalBox>),
    LinfBall {
        center: Vec<f64>,
        epsilon: f64,
        #[serde(default)]
        clip: Option<Interval>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationFile {
    pub n_classes: usize,
    /// Zero-based index of the class that must stay on top.
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecFile {
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Band { band: f64 },
    Classification { classification: ClassificationFile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub region: RegionFile,
    pub spec: SpecFile,
}

/// Input region and output specification of a property.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub region: InputRegion,
    pub spec: SafetySpec,
}

impl PropertyFile {
    /// Builds the property and checks it against the model's dimensions.
    pub fn resolve(&self, model: &BnnModel) -> Result<Property> {
        let region = match &self.region {
            RegionFile::Boxes(b) => InputRegion::new(b.clone())?,
            RegionFile::LinfBall { center, epsilon, clip } => {
                InputRegion::single(linf_ball(center, *epsilon, *clip)?)
            }
        };
        let spec = match &self.spec {
            SpecFile::Linear { matrix, offset } => SafetySpec::new(matrix.clone(), offset.clone())?,
            SpecFile::Band { band } => band_spec(*band, model.output_dim())?,
            SpecFile::Classification { classification: c } => {
                classification_spec(c.n_classes, ClassIndex::from_zero_based(c.predicted))?
            }
        };
        check_dim("property input region", model.input_dim(), region.dim())?;
        check_dim("property specification columns", model.output_dim(), spec.output_dim())?;
        Ok(Property { region, spec })
    }
}

pub fn load_property_file(path: impl AsRef<Path>) -> Result<PropertyFile> {
    let path = path.as_ref();
    parse_json(path, &read_text(path)?)
}

/// Reads a property and resolves it against `model`.
pub fn load_property(path: impl AsRef<Path>, model: &BnnModel) -> Result<Property> {
    load_property_file(path)?.resolve(model)
}

pub fn save_property(path: impl AsRef<Path>, property: &PropertyFile) -> Result<()> {
    let text = serde_json::to_string_pretty(property).expect("property serialises");
    write_text(path.as_ref(), &(text + "\n"))
}

/// A list of weight-space boxes. The `safe_set` field of a certify report
/// is accepted as well, so a report can be measured directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxesFile {
    #[serde(alias = "safe_set")]
    pub boxes: Vec<IntervalBox>,
}

pub fn load_boxes(path: impl AsRef<Path>) -> Result<Vec<IntervalBox>> {
    let path = path.as_ref();
    let file: BoxesFile = parse_json(path, &read_text(path)?)?;
    Ok(file.boxes)
}

/// Certification outcome on one input box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub p_lower: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub dropped_fragments: usize,
    pub per_box_mass: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_set: Option<SafeWeightSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RegionReport {
    pub fn from_result(r: &CertificationResult, rectangles: bool, timing: bool) -> Self {
        Self {
            p_lower: r.p_lower,
            accepted: r.accepted,
            rejected: r.rejected,
            dropped_fragments: r.dropped_fragments,
            per_box_mass: r.per_box_mass.clone(),
            standard_error: r.standard_error,
            safe_set: rectangles.then(|| r.safe_set.clone()),
            wall_time_seconds: timing.then_some(r.wall_time.as_secs_f64()),
        }
    }
}

/// Output of the `certify` command.
///
/// With several input boxes, `p_lower` combines the per-box bounds with the
/// union bound. Wall time is omitted unless requested so that reports of
/// identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub report_version: u32,
    pub p_lower: f64,
    pub config: CertifyConfig,
    /// How the specification is checked on a rectangle.
    pub spec_check: String,
    pub regions: Vec<RegionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn spec_check_label(method: Method) -> &'static str {
    match method {
        Method::Ibp => "elided last layer, at least the output-box margin",
        Method::Lbp => "propagated through the specification, at least the output-box margin",
    }
}

/// One point estimate in an `estimate` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub x: Vec<f64>,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub report_version: u32,
    pub seed: u64,
    /// Fraction of sampled networks certified safe on the whole region.
    pub region: McEstimate,
    /// Fraction of sampled networks satisfying the specification at the
    /// centre of each input box; an upper reference for `region`.
    pub box_centres: Vec<PointEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub report_version: u32,
    pub masses: Vec<f64>,
    /// Sum of `masses`; the mass of the union only if the boxes are disjoint.
    pub total: f64,
    pub disjoint: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McEstimate>,
}

/// Serialises a report as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialises") + "\n"
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path.as_ref(), &to_json_string(value))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    parse_json(path, &read_text(path)?)
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub n_samples: usize,
    pub gamma: f64,
    pub seed: u64,
    pub p_lower: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub seconds: f64,
}

pub const SWEEP_HEADER: &str = "method,N,gamma,seed,p_lower,accepted,rejected,seconds";

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:?},{},{},{:.6}",
            r.method, r.n_samples, r.gamma, r.seed, r.p_lower, r.accepted, r.rejected, r.seconds
        )?;
    }
    Ok(())
}

/// Parses a table written by [`write_sweep_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SWEEP_HEADER => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "sweep table must start with `{SWEEP_HEADER}`"
            )))
        }
    }
    let bad = |line: usize, what: &str| Error::Parse {
        path: "<sweep>".into(),
        line: line + 1,
        column: 1,
        message: format!("invalid {what}"),
    };
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 8 {
                return Err(bad(i, "field count"));
            }
            Ok(SweepRow {
                method: f[0].parse().map_err(|_| bad(i, "method"))?,
                n_samples: f[1].parse().map_err(|_| bad(i, "N"))?,
                gamma: f[2].parse().map_err(|_| bad(i, "gamma"))?,
                seed: f[3].parse().map_err(|_| bad(i, "seed"))?,
                p_lower: f[4].parse().map_err(|_| bad(i, "p_lower"))?,
                accepted: f[5].parse().map_err(|_| bad(i, "accepted"))?,
                rejected: f[6].parse().map_err(|_| bad(i, "rejected"))?,
                seconds: f[7].parse().map_err(|_| bad(i, "seconds"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "format_version": 1,
  "input_dim": 1,
  "layers": [
    {"weights_mean": [[1.0]], "weights_var": [[0.1]], "bias_mean": [0.0], "bias_var": [0.0], "activation": "relu"},
    {"weights_mean": [[2.0]], "weights_var": [[0.0]], "bias_mean": [0.5], "bias_var": [0.2], "activation": "identity"}
  ]
}"#;

    #[test]
    fn minimal_model_parses() {
        let m = model_from_json(MINIMAL).unwrap();
        assert_eq!(m.hidden_layers(), 1);
        assert_eq!(m.num_weights(), 4);
    }

    #[test]
    fn negative_variance_names_layer_and_index() {
        let text = MINIMAL.replace(r#""bias_var": [0.2]"#, r#""bias_var": [-0.2]"#);
        let msg = model_from_json(&text).unwrap_err().to_string();
        assert!(msg.contains("layer 1") && msg.contains("bias variance[0]"), "{msg}");
    }

    #[test]
    fn mismatched_dims_are_rejected() {
        let text = MINIMAL.replace(r#""weights_mean": [[2.0]], "weights_var": [[0.0]]"#, r#""weights_mean": [[2.0, 1.0]], "weights_var": [[0.0, 0.0]]"#);
        let msg = model_from_json(&text).unwrap_err().to_string();
        assert!(msg.contains("layer 1") && msg.contains("row 0"), "{msg}");
    }

    #[test]
    fn syntax_errors_report_line() {
        let text = MINIMAL.replace(r#""bias_var": [0.2]"#, r#""bias_var": [0.2,]"#);
        match model_from_json(&text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            e => panic!("unexpected {e}"),
        }
        let text = MINIMAL.replace(r#""activation": "relu""#, r#""activation": "swish""#);
        match model_from_json(&text).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("swish"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn property_variants_resolve() {
        let m = model_from_json(MINIMAL).unwrap();
        let p: PropertyFile = serde_json::from_str(r#"{"region": {"boxes": [[[-0.2, 0.2]]]}, "spec": {"band": 5}}"#).unwrap();
        let r = p.resolve(&m).unwrap();
        assert_eq!(r.spec.num_rows(), 2);
        let p: PropertyFile = serde_json::from_str(
            r#"{"region": {"linf_ball": {"center": [0.01], "epsilon": 0.025, "clip": [0, 1]}}, "spec": {"matrix": [[1.0]], "offset": [3.0]}}"#,
        )
        .unwrap();
        let r = p.resolve(&m).unwrap();
        assert_eq!(r.region.boxes()[0][0].lo(), 0.0);
        let p: PropertyFile = serde_json::from_str(
            r#"{"region": {"boxes": [[[0, 1]]]}, "spec": {"classification": {"n_classes": 2, "predicted": 0}}}"#,
        )
        .unwrap();
        assert!(p.resolve(&m).is_err(), "model has one output");
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = vec![SweepRow {
            method: Method::Lbp,
            n_samples: 100,
            gamma: 1.5,
            seed: 3,
            p_lower: 0.125,
            accepted: 90,
            rejected: 10,
            seconds: 0.5,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SWEEP_HEADER));
        assert_eq!(parse_sweep_csv(&text).unwrap(), rows);
    }
}
