//! Disjoint decomposition of a growing union of weight rectangles.
//!
//! A new rectangle is cut against every earlier one in turn. Cutting a piece
//! `f` by a rectangle `r` peels `f` one dimension at a time: the parts of `f`
//! below and above `r` along that dimension become new pieces, and `f` is
//! clipped to `r` along it before moving on. Dimensions are peeled in order of
//! increasing overlap, measured by posterior mass, so the heavy pieces come
//! first. When the number of pieces would exceed the cap, the lightest ones
//! are dropped together with whatever part of `f` was not peeled; this only
//! discards mass and keeps every piece disjoint from all earlier rectangles.
//!
//! Piece masses used for ranking come from normal CDF and survival values
//! cached at the box edges, so the inner loops perform no special-function
//! evaluations. Reported masses are recomputed exactly by the caller.

use libm::erfc;

use crate::interval::{Interval, IntervalBox};

use super::measure::DiagonalGaussian;

/// A box edge with the marginal CDF and survival function at it.
#[derive(Debug, Clone, Copy)]
struct Edge {
    x: f64,
    cdf: f64,
    sf: f64,
}

#[derive(Debug, Clone)]
struct Marginal {
    mean: f64,
    sd: f64,
}

impl Marginal {
    fn edge(&self, x: f64) -> Edge {
        if self.sd == 0.0 {
            return Edge { x, cdf: 0.0, sf: 0.0 };
        }
        let z = (x - self.mean) / (self.sd * std::f64::consts::SQRT_2);
        Edge {
            x,
            cdf: 0.5 * erfc(-z),
            sf: 0.5 * erfc(z),
        }
    }

    /// Mass between two edges, taking the difference on the side of the
    /// mean that avoids cancellation.
    fn mass(&self, lo: Edge, hi: Edge) -> f64 {
        if self.sd == 0.0 {
            return if lo.x <= self.mean && self.mean <= hi.x { 1.0 } else { 0.0 };
        }
        let m = if lo.x >= self.mean {
            lo.sf - hi.sf
        } else if hi.x <= self.mean {
            hi.cdf - lo.cdf
        } else {
            1.0 - lo.cdf - hi.sf
        };
        m.max(0.0)
    }
}

#[derive(Debug, Clone)]
struct EdgeBox {
    edges: Vec<(Edge, Edge)>,
}

impl EdgeBox {
    fn to_box(&self) -> IntervalBox {
        self.edges
            .iter()
            .map(|(lo, hi)| Interval::new(lo.x, hi.x))
            .collect()
    }

    /// Same rule as [`IntervalBox::overlaps`]: touching faces do not count
    /// unless one side is degenerate there.
    fn overlaps(&self, other: &EdgeBox) -> bool {
        self.edges.iter().zip(&other.edges).all(|(a, b)| {
            let lo = a.0.x.max(b.0.x);
            let hi = a.1.x.min(b.1.x);
            lo < hi || (lo == hi && (a.0.x == a.1.x || b.0.x == b.1.x))
        })
    }
}

#[derive(Clone)]
struct Piece {
    rect: EdgeBox,
    /// Mass of each dimension's interval.
    dims: Vec<f64>,
    log_mass: f64,
}

/// A dimension along which a piece sticks out of the cutting rectangle,
/// with masses relative to the piece's own interval there.
struct Ext {
    dim: usize,
    core: f64,
    lo: Option<((Edge, Edge), f64)>,
    hi: Option<((Edge, Edge), f64)>,
}

#[derive(Clone, Copy)]
enum Candidate {
    Keep(usize),
    /// The piece clipped to the cut along its first `step` peel dimensions,
    /// with the next one replaced by the part below or above the cut.
    Slab { piece: usize, step: usize, upper: bool },
}

pub(crate) struct DisjointUnion {
    marginals: Vec<Marginal>,
    max_pieces: usize,
    claimed: Vec<EdgeBox>,
    pieces: Vec<IntervalBox>,
    dropped: usize,
}

impl DisjointUnion {
    pub(crate) fn new(measure: &DiagonalGaussian, max_pieces: usize) -> Self {
        let marginals = measure
            .mean()
            .iter()
            .zip(measure.var())
            .map(|(&mean, &var)| Marginal { mean, sd: var.sqrt() })
            .collect();
        Self {
            marginals,
            max_pieces: max_pieces.max(1),
            claimed: Vec::new(),
            pieces: Vec::new(),
            dropped: 0,
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<IntervalBox>, usize) {
        (self.pieces, self.dropped)
    }

    fn edge_box(&self, b: &IntervalBox) -> EdgeBox {
        EdgeBox {
            edges: b
                .iter()
                .zip(&self.marginals)
                .map(|(iv, m)| (m.edge(iv.lo()), m.edge(iv.hi())))
                .collect(),
        }
    }

    fn piece(&self, rect: EdgeBox) -> Piece {
        let dims: Vec<f64> = rect
            .edges
            .iter()
            .zip(&self.marginals)
            .map(|((lo, hi), m)| m.mass(*lo, *hi))
            .collect();
        let log_mass = dims.iter().map(|m| m.ln()).sum();
        Piece {
            rect,
            dims,
            log_mass,
        }
    }

    /// Dimensions along which `p` leaves `cut`, in peel order: those where
    /// the cut keeps the smallest share of the piece's mass come first.
    /// When peeling all of them would produce more than `max_pieces` slabs,
    /// only the first `max_pieces` are returned.
    fn peel_order(&self, p: &Piece, cut: &EdgeBox) -> Vec<Ext> {
        let mut ext: Vec<(f64, usize)> = Vec::new();
        let mut sides = 0;
        for (d, (&f, &c)) in p.rect.edges.iter().zip(&cut.edges).enumerate() {
            let n = (f.0.x < c.0.x) as usize + (c.1.x < f.1.x) as usize;
            if n > 0 {
                let (core0, core1) = clip(f, c);
                ext.push((self.marginals[d].mass(core0, core1) / p.dims[d], d));
                sides += n;
            }
        }
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if sides > self.max_pieces && ext.len() > self.max_pieces {
            ext.select_nth_unstable_by(self.max_pieces - 1, order);
            ext.truncate(self.max_pieces);
        }
        ext.sort_by(order);
        ext.into_iter()
            .map(|(core, d)| {
                let (f, c) = (p.rect.edges[d], cut.edges[d]);
                let m = &self.marginals[d];
                let rel = |s: (Edge, Edge)| (s, m.mass(s.0, s.1) / p.dims[d]);
                Ext {
                    dim: d,
                    core,
                    lo: (f.0.x < c.0.x).then_some((f.0, c.0)).map(rel),
                    hi: (c.1.x < f.1.x).then_some((c.1, f.1)).map(rel),
                }
            })
            .collect()
    }

    /// Adds the part of `rect` not covered by earlier rectangles.
    pub(crate) fn insert(&mut self, rect: &IntervalBox) {
        let claimed = self.edge_box(rect);
        let k = self.max_pieces;
        let mut pieces = vec![self.piece(claimed.clone())];
        let mut cands: Vec<(f64, Candidate)> = Vec::new();
        let mut local: Vec<(f64, Candidate)> = Vec::new();
        for cut in &self.claimed {
            if pieces.is_empty() {
                break;
            }
            cands.clear();
            let mut orders: Vec<Vec<Ext>> = Vec::with_capacity(pieces.len());
            for (pi, p) in pieces.iter().enumerate() {
                if !p.rect.overlaps(cut) {
                    cands.push((p.log_mass, Candidate::Keep(pi)));
                    orders.push(Vec::new());
                    continue;
                }
                let order = self.peel_order(p, cut);
                local.clear();
                let mut kept = 1.0;
                for (step, e) in order.iter().enumerate() {
                    for (upper, side) in [(false, e.lo), (true, e.hi)] {
                        if let Some((_, share)) = side {
                            local.push((kept * share, Candidate::Slab { piece: pi, step, upper }));
                        }
                    }
                    kept *= e.core;
                }
                if local.len() > k {
                    local.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0));
                    self.dropped += local.len() - k;
                    local.truncate(k);
                }
                cands.extend(local.iter().map(|&(share, c)| (p.log_mass + share.ln(), c)));
                orders.push(order);
            }
            if cands.len() > k {
                cands.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0));
                self.dropped += cands.len() - k;
                cands.truncate(k);
            }
            pieces = cands
                .iter()
                .map(|&(log_mass, c)| match c {
                    Candidate::Keep(pi) => pieces[pi].clone(),
                    Candidate::Slab { piece, step, upper } => {
                        let order = &orders[piece];
                        let mut rect = pieces[piece].rect.clone();
                        let mut dims = pieces[piece].dims.clone();
                        for e in &order[..step] {
                            rect.edges[e.dim] = clip(rect.edges[e.dim], cut.edges[e.dim]);
                            dims[e.dim] *= e.core;
                        }
                        let e = &order[step];
                        let (side, share) = if upper { e.hi } else { e.lo }.expect("side exists");
                        rect.edges[e.dim] = side;
                        dims[e.dim] *= share;
                        Piece {
                            rect,
                            dims,
                            log_mass,
                        }
                    }
                })
                .collect();
        }
        self.pieces.extend(pieces.into_iter().map(|p| p.rect.to_box()));
        self.claimed.push(claimed);
    }
}

/// Intersection of a piece's edge pair with the cut's along one dimension.
fn clip(f: (Edge, Edge), c: (Edge, Edge)) -> (Edge, Edge) {
    (
        if c.0.x > f.0.x { c.0 } else { f.0 },
        if c.1.x < f.1.x { c.1 } else { f.1 },
    )
}
