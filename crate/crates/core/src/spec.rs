//! Linear output specifications `C y + d >= 0` and input regions.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::interval::{Interval, IntervalBox};

/// Safe output set `{ y : C y + d >= 0 }` with `C` of shape `rows x outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetySpec {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl SafetySpec {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::InvalidProperty("specification has no rows".into()));
        }
        check_dim("specification offset", matrix.len(), offset.len())?;
        let width = matrix[0].len();
        if width == 0 {
            return Err(Error::InvalidProperty("specification has no columns".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidProperty(format!(
                    "specification row {i} has {} columns, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProperty(format!(
                    "specification row {i} has a non-finite coefficient"
                )));
            }
        }
        if offset.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidProperty("specification offset is NaN".into()));
        }
        Ok(Self { matrix, offset })
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    /// Number of network outputs the specification constrains.
    pub fn output_dim(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.matrix[i], self.offset[i])
    }

    /// Per-row values of `C y + d`.
    pub fn margins(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("specification input", self.output_dim(), y.len())?;
        Ok(self
            .matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, d)| row.iter().zip(y).fold(*d, |acc, (c, v)| acc + c * v))
            .collect())
    }

    /// `min_i (C y + d)_i`.
    pub fn min_margin(&self, y: &[f64]) -> Result<f64> {
        Ok(self
            .margins(y)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// Non-strict membership: every row `>= 0`.
    pub fn is_satisfied(&self, y: &[f64]) -> Result<bool> {
        Ok(self.min_margin(y)? >= 0.0)
    }
}

/// `|y_k| <= delta` for every one of `output_dim` outputs.
pub fn band_spec(delta: f64, output_dim: usize) -> Result<SafetySpec> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "band half-width must be positive, got {delta}"
        )));
    }
    if output_dim == 0 {
        return Err(Error::InvalidArgument("band over zero outputs".into()));
    }
    let mut matrix = Vec::with_capacity(2 * output_dim);
    for k in 0..output_dim {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; output_dim];
            row[k] = sign;
            matrix.push(row);
        }
    }
    SafetySpec::new(matrix, vec![delta; 2 * output_dim])
}

/// Index of a class. Documentation counts classes from 1; files and the
/// in-memory representation count from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassIndex(usize);

impl ClassIndex {
    pub fn from_zero_based(i: usize) -> Self {
        ClassIndex(i)
    }

    /// Panics on 0.
    pub fn from_one_based(i: usize) -> Self {
        assert!(i >= 1, "one-based class index must be at least 1");
        ClassIndex(i - 1)
    }

    pub fn zero_based(self) -> usize {
        self.0
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

/// Specification that the logit of `predicted` stays the largest and positive.
///
/// Row `j != i` is `y_i - y_j`; row `i` is `y_i` itself. The offset is zero.
pub fn classification_spec(n_classes: usize, predicted: ClassIndex) -> Result<SafetySpec> {
    let i = predicted.zero_based();
    if n_classes == 0 || i >= n_classes {
        return Err(Error::InvalidArgument(format!(
            "class {} is out of range for {n_classes} classes",
            predicted.one_based()
        )));
    }
    let matrix = (0..n_classes)
        .map(|j| {
            let mut row = vec![0.0; n_classes];
            row[i] = 1.0;
            if j != i {
                row[j] = -1.0;
            }
            row
        })
        .collect();
    SafetySpec::new(matrix, vec![0.0; n_classes])
}

/// The l-infinity ball of radius `epsilon`, optionally clipped to `clip` in
/// every coordinate.
pub fn linf_ball(center: &[f64], epsilon: f64, clip: Option<Interval>) -> Result<IntervalBox> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    center
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let ball = Interval::try_new(c - epsilon, c + epsilon)?;
            match clip {
                None => Ok(ball),
                Some(domain) => ball.intersection(&domain).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "coordinate {k} ball {ball} lies outside the clip domain {domain}"
                    ))
                }),
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(IntervalBox::new)
}

/// Input region made of pairwise-disjoint boxes of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRegion {
    boxes: Vec<IntervalBox>,
}

impl InputRegion {
    pub fn new(boxes: Vec<IntervalBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidProperty("input region has no boxes".into()));
        }
        let dim = boxes[0].dim();
        for (k, b) in boxes.iter().enumerate() {
            check_dim("input region box", dim, b.dim())?;
            if let Some(j) = boxes[..k].iter().position(|o| o.overlaps(b)) {
                return Err(Error::InvalidProperty(format!(
                    "input boxes {j} and {k} overlap"
                )));
            }
        }
        Ok(Self { boxes })
    }

    pub fn single(b: IntervalBox) -> Self {
        Self { boxes: vec![b] }
    }

    pub fn boxes(&self) -> &[IntervalBox] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains_point(x))
    }
}

/// Outcome of a one-sided safety check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    /// The bound was not tight enough; this never asserts a violation.
    Unknown,
}

/// A verdict with the certified lower bound on `min_i (C f(x) + d)_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub margin: f64,
}

impl CheckOutcome {
    pub fn from_margin(margin: f64) -> Self {
        let verdict = if margin >= 0.0 {
            Verdict::Safe
        } else {
            Verdict::Unknown
        };
        Self { verdict, margin }
    }

    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }
}
