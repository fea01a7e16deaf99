//! Compact subsets of the line or circle, the factor metric on the quotient
//! by such a set, and lifting of simple quotient-valued paths.
//!
//! The factor metric has the closed form
//! `d_K(x, y) = min{ d(x, y), dist(x, K) + dist(K, y) }`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{chord, wrap_angle, Ambient};
use crate::TOL_BASE;

/// A closed interval `[lo, hi]` on the line, or the arc running
/// anticlockwise from angle `lo` to angle `hi = lo + extent` on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
}

impl Piece {
    fn extent(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawRegion {
    space: Ambient,
    pieces: Vec<[f64; 2]>,
}

/// A finite union of pairwise disjoint closed intervals or arcs. May be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion", into = "RawRegion")]
pub struct Region {
    ambient: Ambient,
    pieces: Vec<Piece>,
}

impl From<Region> for RawRegion {
    fn from(r: Region) -> Self {
        RawRegion {
            space: r.ambient,
            pieces: r.pieces.iter().map(|p| [p.lo, p.hi]).collect(),
        }
    }
}

impl TryFrom<RawRegion> for Region {
    type Error = Error;

    fn try_from(raw: RawRegion) -> Result<Self> {
        Region::new(raw.space, raw.pieces.iter().map(|p| (p[0], p[1])))
    }
}

impl Region {
    /// Builds a region from `(start, end)` pairs. On the circle an arc runs
    /// anticlockwise from `start` to `end`; `end - start >= 2π` is the full circle.
    pub fn new(ambient: Ambient, pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in pieces {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Parameter("piece endpoints must be finite".into()));
            }
            let piece = match ambient {
                Ambient::Line => {
                    if a > b {
                        return Err(Error::Parameter(format!("interval [{a}, {b}] is reversed")));
                    }
                    Piece { lo: a, hi: b }
                }
                Ambient::Circle => {
                    let lo = wrap_angle(a);
                    let extent = if b - a >= TAU { TAU } else { wrap_angle(b - a) };
                    Piece { lo, hi: lo + extent }
                }
            };
            out.push(piece);
        }
        out.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        let region = Region { ambient, pieces: out };
        region.check_disjoint()?;
        Ok(region)
    }

    pub fn empty(ambient: Ambient) -> Self {
        Region { ambient, pieces: Vec::new() }
    }

    /// The whole line or the full circle.
    pub fn whole(ambient: Ambient) -> Self {
        let piece = match ambient {
            Ambient::Line => Piece { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
            Ambient::Circle => Piece { lo: 0.0, hi: TAU },
        };
        Region { ambient, pieces: vec![piece] }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    fn check_disjoint(&self) -> Result<()> {
        let overlap = |i: usize, j: usize| {
            let (p, q) = (self.pieces[i], self.pieces[j]);
            match self.ambient {
                Ambient::Line => p.hi >= q.lo && q.hi >= p.lo,
                Ambient::Circle => arc_contains(p, q.lo) || arc_contains(q, p.lo),
            }
        };
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                if overlap(i, j) {
                    return Err(Error::Parameter(format!(
                        "pieces {:?} and {:?} are not disjoint",
                        self.pieces[i], self.pieces[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance from `x` to the region; `+inf` for the empty region.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| piece_distance(self.ambient, *p, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance_to(x) == 0.0
    }

    /// Infimum distance between two regions in the same ambient space.
    pub fn separation(&self, other: &Region) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.pieces {
            for q in &other.pieces {
                let d = match self.ambient {
                    Ambient::Line => (q.lo - p.hi).max(p.lo - q.hi).max(0.0),
                    Ambient::Circle => {
                        if arc_contains(*p, q.lo) || arc_contains(*q, p.lo) {
                            0.0
                        } else {
                            [(p.lo, q.lo), (p.lo, q.hi), (p.hi, q.lo), (p.hi, q.hi)]
                                .iter()
                                .map(|(a, b)| chord(*a, *b))
                                .fold(f64::INFINITY, f64::min)
                        }
                    }
                };
                best = best.min(d);
            }
        }
        best
    }

    /// Endpoints of every piece, normalized (full circles contribute none).
    pub fn boundary(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match self.ambient {
                Ambient::Line => {
                    out.push(p.lo);
                    if p.hi != p.lo {
                        out.push(p.hi);
                    }
                }
                Ambient::Circle => {
                    if p.extent() >= TAU {
                        continue;
                    }
                    out.push(p.lo);
                    if p.extent() > 0.0 {
                        out.push(wrap_angle(p.hi));
                    }
                }
            }
        }
        out.retain(|x| x.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn arc_contains(p: Piece, x: f64) -> bool {
    wrap_angle(x - p.lo) <= p.extent()
}

fn piece_distance(ambient: Ambient, p: Piece, x: f64) -> f64 {
    match ambient {
        Ambient::Line => {
            if x < p.lo {
                p.lo - x
            } else if x > p.hi {
                x - p.hi
            } else {
                0.0
            }
        }
        Ambient::Circle => {
            if arc_contains(p, x) {
                0.0
            } else {
                chord(x, p.lo).min(chord(x, p.hi))
            }
        }
    }
}

/// Nonempty finite union of disjoint closed intervals or arcs: the set
/// collapsed to the basepoint in a quotient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Region", into = "Region")]
pub struct CompactSet(Region);

impl TryFrom<Region> for CompactSet {
    type Error = Error;

    fn try_from(r: Region) -> Result<Self> {
        CompactSet::from_region(r)
    }
}

impl From<CompactSet> for Region {
    fn from(k: CompactSet) -> Self {
        k.0
    }
}

impl std::ops::Deref for CompactSet {
    type Target = Region;

    fn deref(&self) -> &Region {
        &self.0
    }
}

impl CompactSet {
    pub fn new(ambient: Ambient, pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::from_region(Region::new(ambient, pieces)?)
    }

    pub fn from_region(region: Region) -> Result<Self> {
        let k = CompactSet(region);
        k.validate()?;
        Ok(k)
    }

    /// The single point `{x}`.
    pub fn point(ambient: Ambient, x: f64) -> Self {
        CompactSet::new(ambient, [(x, x)]).expect("a single point is a valid compact set")
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::Parameter("compact set must be nonempty".into()));
        }
        if self.0.pieces.iter().any(|p| !p.lo.is_finite() || !p.hi.is_finite()) {
            return Err(Error::Parameter("compact set must be bounded".into()));
        }
        self.0.check_disjoint()
    }

    pub fn region(&self) -> &Region {
        &self.0
    }

    /// `Some(x)` when the set is the single point `{x}`.
    pub fn as_point(&self) -> Option<f64> {
        match self.0.pieces.as_slice() {
            [p] if p.lo == p.hi => Some(p.lo),
            _ => None,
        }
    }
}

/// Factor metric on the quotient by `k`.
pub fn quotient_distance(x: f64, y: f64, k: &CompactSet) -> f64 {
    let direct = k.ambient().distance(x, y);
    let through = k.distance_to(x) + k.distance_to(y);
    direct.min(through)
}

/// Boundary points of `k` ordered by distance to `x`, ties by coordinate.
fn ranked_boundary(x: f64, k: &CompactSet) -> Vec<(f64, f64)> {
    let ambient = k.ambient();
    let mut cands: Vec<(f64, f64)> = k
        .boundary()
        .into_iter()
        .map(|b| (ambient.distance(x, b), b))
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cands
}

/// The boundary point of `k` closest to `x`. Equidistant candidates
/// (within the base tolerance) resolve to the smaller coordinate.
pub fn nearest_boundary(x: f64, k: &CompactSet) -> Result<f64> {
    if k.contains(x) {
        return Err(Error::Domain(x.to_string()));
    }
    let cands = ranked_boundary(x, k);
    let best = cands[0].0;
    Ok(cands
        .iter()
        .take_while(|c| c.0 - best <= TOL_BASE)
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min))
}

fn unambiguous_boundary(x: f64, k: &CompactSet) -> Result<f64> {
    if k.contains(x) {
        return Err(Error::Domain(x.to_string()));
    }
    let cands = ranked_boundary(x, k);
    if let [first, second, ..] = cands.as_slice() {
        if second.0 - first.0 <= TOL_BASE {
            return Err(Error::Ambiguous { a: first.1, b: second.1 });
        }
    }
    Ok(cands[0].1)
}

/// Lifts a simple quotient-valued path to the ambient space.
///
/// `None` (or a coordinate inside `k`) stands for the class of `k`. The
/// active samples must form one contiguous index range; they are returned
/// unchanged and the samples on either side are filled with the boundary
/// point of `k` nearest to the adjacent active sample.
pub fn lift_simple_path(path: &[Option<f64>], k: &CompactSet) -> Result<Vec<f64>> {
    let active: Vec<Option<f64>> = path
        .iter()
        .map(|v| v.filter(|x| !k.contains(*x)))
        .collect();
    let first = active.iter().position(Option::is_some);
    let last = active.iter().rposition(Option::is_some);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::Parameter("path never leaves the compact set".into()));
    };
    if active[first..=last].iter().any(Option::is_none) {
        return Err(Error::Parameter("path is not simple".into()));
    }
    let ambient = k.ambient();
    let mut out: Vec<f64> = active.iter().map(|v| v.map_or(0.0, |x| ambient.normalize(x))).collect();
    if first > 0 {
        let entry = unambiguous_boundary(out[first], k)?;
        out[..first].fill(entry);
    }
    if last + 1 < out.len() {
        let exit = unambiguous_boundary(out[last], k)?;
        out[last + 1..].fill(exit);
    }
    Ok(out)
}

/// Smallest pairwise separation among `regions`; 0 when any pair touches.
pub fn min_separation(regions: &[Region]) -> Result<f64> {
    if regions.len() < 2 {
        return Err(Error::Parameter("need at least two regions".into()));
    }
    if regions.iter().any(|r| r.ambient() != regions[0].ambient()) {
        return Err(Error::SpaceMismatch);
    }
    let mut best = f64::INFINITY;
    for (i, r) in regions.iter().enumerate() {
        for s in &regions[i + 1..] {
            best = best.min(r.separation(s));
        }
    }
    Ok(best)
}
