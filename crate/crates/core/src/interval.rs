//! Closed intervals, axis-aligned boxes and interval matrices.
//!
//! All arithmetic is plain `f64` with round-to-nearest; there is no outward
//! rounding. Degenerate intervals (`lo == hi`) are ordinary values and are
//! used for point inputs and zero-variance weights.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        match Self::try_new(lo, hi) {
            Ok(iv) => iv,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    /// Interval centred on `center` with the given non-negative half width.
    pub fn centered(center: f64, half_width: f64) -> Self {
        Self::new(center - half_width, center + half_width)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Whether the two intervals share more than a boundary point.
    ///
    /// Touching at a single point counts as overlap only when one of the two
    /// intervals is itself that point.
    pub fn overlaps(&self, other: &Interval) -> bool {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo < hi {
            true
        } else if lo == hi {
            self.is_degenerate() || other.is_degenerate()
        } else {
            false
        }
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// `{c * v : v in self}`.
    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval {
                lo: c * self.lo,
                hi: c * self.hi,
            }
        } else {
            Interval {
                lo: c * self.hi,
                hi: c * self.lo,
            }
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// Applies a non-decreasing function endpointwise.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Interval {
        Interval {
            lo: f(self.lo),
            hi: f(self.hi),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Display for IntervalBox {
    /// Writes the box as a product of intervals, `[a, b] x [c, d]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, iv) in self.dims.iter().enumerate() {
            if k > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::try_new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

/// Exact hull of `{w * z : w in w_iv, z in z_iv}`.
///
/// A bilinear form over a rectangle attains its extremes at the corners, so
/// the four corner products are enough.
pub fn interval_bilinear(w_iv: Interval, z_iv: Interval) -> Interval {
    let c = [
        w_iv.lo * z_iv.lo,
        w_iv.lo * z_iv.hi,
        w_iv.hi * z_iv.lo,
        w_iv.hi * z_iv.hi,
    ];
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi }
}

/// An axis-aligned box, one [`Interval`] per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        Self { dims }
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self> {
        check_dim("box bounds", lower.len(), upper.len())?;
        let dims = lower
            .iter()
            .zip(upper)
            .map(|(&lo, &hi)| Interval::try_new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dims })
    }

    /// Zero-width box at `p`.
    pub fn point(p: &[f64]) -> Self {
        Self {
            dims: p.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.dims.iter()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::lo).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::hi).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::midpoint).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.dims.iter().all(Interval::is_degenerate)
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dims.len() && self.dims.iter().zip(p).all(|(iv, &v)| iv.contains(v))
    }

    pub fn contains_box(&self, other: &IntervalBox) -> bool {
        other.dim() == self.dim()
            && self
                .dims
                .iter()
                .zip(&other.dims)
                .all(|(a, b)| a.contains_interval(b))
    }

    /// Interval-overlap test in every dimension (see [`Interval::overlaps`]).
    pub fn overlaps(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && self.dims.iter().zip(&other.dims).all(|(a, b)| a.overlaps(b))
    }

    pub fn intersection(&self, other: &IntervalBox) -> Option<IntervalBox> {
        if self.dim() != other.dim() {
            return None;
        }
        self.dims
            .iter()
            .zip(&other.dims)
            .map(|(a, b)| a.intersection(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalBox::new)
    }

    /// Bounding box of both.
    pub fn hull(&self, other: &IntervalBox) -> Result<IntervalBox> {
        check_dim("box hull", self.dim(), other.dim())?;
        Ok(IntervalBox::new(
            self.dims.iter().zip(&other.dims).map(|(a, b)| a.hull(b)).collect(),
        ))
    }

    fn with_dim(&self, d: usize, iv: Interval) -> IntervalBox {
        let mut out = self.clone();
        out.dims[d] = iv;
        out
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;

    fn index(&self, i: usize) -> &Interval {
        &self.dims[i]
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalBox::new(iter.into_iter().collect())
    }
}

/// Decomposes `a \ b` into boxes that pairwise share at most faces.
///
/// Slabs are peeled off one dimension at a time: for dimension `d` the parts
/// of the remaining core below and above `b` become output boxes and the core
/// shrinks to `b`'s extent along `d`. What is left at the end is `a ∩ b` and is
/// dropped. Every output box is contained in `a`, at most `2 * dim` are
/// produced, and their union is the closure of `a \ b`.
pub fn box_subtract(a: &IntervalBox, b: &IntervalBox) -> Result<Vec<IntervalBox>> {
    check_dim("box subtraction", a.dim(), b.dim())?;
    if !a.overlaps(b) {
        return Ok(vec![a.clone()]);
    }
    let mut core = a.clone();
    let mut out = Vec::new();
    for d in 0..a.dim() {
        let c = core.dims[d];
        let cut = b.dims[d];
        let mut lo = c.lo;
        let mut hi = c.hi;
        if lo < cut.lo {
            out.push(core.with_dim(d, Interval::new(lo, cut.lo)));
            lo = cut.lo;
        }
        if cut.hi < hi {
            out.push(core.with_dim(d, Interval::new(cut.hi, hi)));
            hi = cut.hi;
        }
        core.dims[d] = Interval::new(lo, hi);
    }
    Ok(out)
}

/// Exact minimum of `c . y + d` over `y` in `bx`.
pub fn min_linear_over_box(c: &[f64], d: f64, bx: &IntervalBox) -> Result<f64> {
    check_dim("linear objective", bx.dim(), c.len())?;
    Ok(c
        .iter()
        .zip(bx.iter())
        .fold(d, |acc, (&ci, iv)| acc + if ci >= 0.0 { ci * iv.lo } else { ci * iv.hi }))
}

/// Exact maximum of `c . y + d` over `y` in `bx`.
pub fn max_linear_over_box(c: &[f64], d: f64, bx: &IntervalBox) -> Result<f64> {
    check_dim("linear objective", bx.dim(), c.len())?;
    Ok(c
        .iter()
        .zip(bx.iter())
        .fold(d, |acc, (&ci, iv)| acc + if ci >= 0.0 { ci * iv.hi } else { ci * iv.lo }))
}

/// Row-major matrix of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Interval>) -> Result<Self> {
        check_dim("interval matrix entries", rows * cols, entries.len())?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Interval] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn bilinear_examples() {
        assert_eq!(interval_bilinear(iv(1.0, 1.0), iv(2.0, 3.0)), iv(2.0, 3.0));
        assert_eq!(interval_bilinear(iv(-1.0, 2.0), iv(1.0, 3.0)), iv(-3.0, 6.0));
        assert_eq!(interval_bilinear(iv(-1.0, 1.0), iv(-1.0, 1.0)), iv(-1.0, 1.0));
    }

    #[test]
    fn bilinear_sampled_containment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let (c, d) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let w = iv(f64::min(a, b), f64::max(a, b));
            let z = iv(f64::min(c, d), f64::max(c, d));
            let r = interval_bilinear(w, z);
            for _ in 0..1000 {
                let wv = rng.random_range(w.lo()..=w.hi());
                let zv = rng.random_range(z.lo()..=z.hi());
                assert!(r.contains(wv * zv));
            }
            let corners = [w.lo() * z.lo(), w.lo() * z.hi(), w.hi() * z.lo(), w.hi() * z.hi()];
            assert!(corners.contains(&r.lo()) && corners.contains(&r.hi()));
        }
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(Interval::try_new(1.0, 0.0).is_err());
        assert!(Interval::try_new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn subtract_examples_1d() {
        let a = IntervalBox::new(vec![iv(0.0, 2.0)]);
        let r = box_subtract(&a, &IntervalBox::new(vec![iv(3.0, 4.0)])).unwrap();
        assert_eq!(r, vec![a.clone()]);
        let r = box_subtract(&a, &IntervalBox::new(vec![iv(-1.0, 3.0)])).unwrap();
        assert!(r.is_empty());
        let r = box_subtract(&a, &IntervalBox::new(vec![iv(1.0, 3.0)])).unwrap();
        assert_eq!(r, vec![IntervalBox::new(vec![iv(0.0, 1.0)])]);
    }

    #[test]
    fn subtract_dimension_mismatch() {
        let a = IntervalBox::new(vec![iv(0.0, 2.0)]);
        let b = IntervalBox::new(vec![iv(0.0, 2.0), iv(0.0, 1.0)]);
        assert!(matches!(
            box_subtract(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn subtract_degenerate_dimension_inside() {
        // Zero-variance weights give point intervals shared by every box.
        let a = IntervalBox::new(vec![iv(0.0, 2.0), iv(1.0, 1.0)]);
        let b = IntervalBox::new(vec![iv(1.0, 3.0), iv(1.0, 1.0)]);
        let r = box_subtract(&a, &b).unwrap();
        assert_eq!(r, vec![IntervalBox::new(vec![iv(0.0, 1.0), iv(1.0, 1.0)])]);
        assert!(!r[0].overlaps(&b));
    }

    #[test]
    fn min_linear_examples() {
        let unit = IntervalBox::new(vec![iv(0.0, 1.0), iv(0.0, 1.0)]);
        assert_eq!(min_linear_over_box(&[1.0, -1.0], 0.0, &unit).unwrap(), -1.0);
        assert_eq!(min_linear_over_box(&[0.0, 0.0], 5.0, &unit).unwrap(), 5.0);
        let b = IntervalBox::new(vec![iv(-1.0, 3.0)]);
        assert_eq!(min_linear_over_box(&[2.0], 1.0, &b).unwrap(), -1.0);
        assert!(min_linear_over_box(&[1.0], 0.0, &unit).is_err());
    }

    fn arb_box(dim: usize) -> impl Strategy<Value = IntervalBox> {
        prop::collection::vec((-5.0f64..5.0, 0.0f64..4.0), dim)
            .prop_map(|v| v.into_iter().map(|(lo, w)| Interval::new(lo, lo + w)).collect())
    }

    proptest! {
        #[test]
        fn min_linear_matches_corner_enumeration(
            (c, bx) in (1usize..=10).prop_flat_map(|d| (prop::collection::vec(-3.0f64..3.0, d), arb_box(d))),
            off in -2.0f64..2.0,
        ) {
            let d = c.len();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << d) {
                let v: f64 = (0..d)
                    .map(|k| c[k] * if mask >> k & 1 == 1 { bx[k].hi() } else { bx[k].lo() })
                    .sum::<f64>() + off;
                best = best.min(v);
            }
            let got = min_linear_over_box(&c, off, &bx).unwrap();
            prop_assert!((got - best).abs() <= 1e-12 * (1.0 + best.abs()));
        }

        #[test]
        fn subtract_partitions_difference(
            (a, b) in (1usize..=4).prop_flat_map(|d| (arb_box(d), arb_box(d))),
            seed in any::<u64>(),
        ) {
            let parts = box_subtract(&a, &b).unwrap();
            prop_assert!(parts.len() <= 2 * a.dim());
            for p in &parts {
                prop_assert!(a.contains_box(p));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let x: Vec<f64> = a.iter().map(|iv| {
                    if iv.is_degenerate() { iv.lo() } else { rng.random_range(iv.lo()..iv.hi()) }
                }).collect();
                // Points on faces are measure zero; only count strict interiors.
                let on_face = |bx: &IntervalBox| x.iter().zip(bx.iter()).any(|(&v, iv)| {
                    !iv.is_degenerate() && (v == iv.lo() || v == iv.hi())
                });
                if parts.iter().any(on_face) || on_face(&b) {
                    continue;
                }
                let covering = parts.iter().filter(|p| p.contains_point(&x)).count();
                if b.contains_point(&x) {
                    prop_assert_eq!(covering, 0);
                } else {
                    prop_assert_eq!(covering, 1);
                }
            }
        }
    }
}
