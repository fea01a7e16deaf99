//! Finite-rank countable multisets in a based metric space and the
//! Φ-distance between them.
//!
//! The basepoint carries an implicit infinite multiplicity, so an optimal
//! pairing of `S` (rank n) and `T` (rank m) lives in the `(n+m)×(n+m)`
//! padded problem: real points against real points, each side's points
//! against the other side's basepoint copies, and basepoint against
//! basepoint at zero cost.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::quotient::Region;
use crate::space::BasedSpace;
use crate::TOL_BASE;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPoint {
    loc: f64,
    mult: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawMultiset {
    space: BasedSpace,
    points: Vec<RawPoint>,
}

/// A finite-rank multiset. Listed locations are distinct, normalized, sorted,
/// and away from the basepoint class; the basepoint tail is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMultiset", into = "RawMultiset")]
pub struct Multiset {
    space: BasedSpace,
    points: Vec<(f64, u32)>,
}

impl TryFrom<RawMultiset> for Multiset {
    type Error = Error;

    fn try_from(raw: RawMultiset) -> Result<Self> {
        Multiset::new(raw.space, raw.points.into_iter().map(|p| (p.loc, p.mult)))
    }
}

impl From<Multiset> for RawMultiset {
    fn from(m: Multiset) -> Self {
        RawMultiset {
            space: m.space,
            points: m.points.into_iter().map(|(loc, mult)| RawPoint { loc, mult }).collect(),
        }
    }
}

impl Multiset {
    /// Builds a multiset from `(location, multiplicity)` pairs. Locations
    /// within the base tolerance of each other merge; locations in the
    /// basepoint class are absorbed into the tail.
    pub fn new(space: BasedSpace, points: impl IntoIterator<Item = (f64, u32)>) -> Result<Self> {
        space.validate()?;
        let mut merged: Vec<(f64, u32)> = Vec::new();
        for (loc, mult) in points {
            if !loc.is_finite() {
                return Err(Error::Parameter(format!("location {loc} is not finite")));
            }
            let loc = space.normalize(loc);
            if mult == 0 || space.is_base(loc) {
                continue;
            }
            match merged
                .iter_mut()
                .find(|(x, _)| space.ambient().distance(*x, loc) <= TOL_BASE)
            {
                Some(entry) => entry.1 += mult,
                None => merged.push((loc, mult)),
            }
        }
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Multiset { space, points: merged })
    }

    /// Each location with multiplicity one (repeats merge).
    pub fn from_points(space: BasedSpace, locs: &[f64]) -> Result<Self> {
        Self::new(space, locs.iter().map(|&x| (x, 1)))
    }

    /// The trivial multiset `O`: basepoint tail only.
    pub fn trivial(space: BasedSpace) -> Self {
        Multiset { space, points: Vec::new() }
    }

    pub fn space(&self) -> &BasedSpace {
        &self.space
    }

    pub fn points(&self) -> &[(f64, u32)] {
        &self.points
    }

    pub fn rank(&self) -> usize {
        self.points.iter().map(|p| p.1 as usize).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.points.is_empty()
    }

    /// Locations repeated according to multiplicity, in sorted order.
    pub fn expanded(&self) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|&(x, k)| std::iter::repeat_n(x, k as usize))
            .collect()
    }

    fn same_space(&self, other: &Multiset) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Equality as multisets, locations compared within the base tolerance.
    pub fn approx_eq(&self, other: &Multiset) -> bool {
        self.space == other.space
            && self.points.len() == other.points.len()
            && self.points.iter().all(|&(x, k)| {
                other
                    .points
                    .iter()
                    .any(|&(y, l)| k == l && self.space.ambient().distance(x, y) <= TOL_BASE)
            })
    }

    /// `S + T`: multiplicities add.
    pub fn sum(&self, other: &Multiset) -> Result<Multiset> {
        self.same_space(other)?;
        Multiset::new(
            self.space.clone(),
            self.points.iter().chain(&other.points).copied(),
        )
    }

    /// `S − T`, defined when `T(x) <= S(x)` at every listed location of `T`.
    pub fn difference(&self, other: &Multiset) -> Result<Multiset> {
        self.same_space(other)?;
        let ambient = self.space.ambient();
        let mut points = self.points.clone();
        for &(y, l) in &other.points {
            let entry = points
                .iter_mut()
                .find(|(x, _)| ambient.distance(*x, y) <= TOL_BASE)
                .ok_or_else(|| Error::Containment(format!("{y} is not in the minuend")))?;
            if entry.1 < l {
                return Err(Error::Containment(format!(
                    "multiplicity {l} of {y} exceeds {}",
                    entry.1
                )));
            }
            entry.1 -= l;
        }
        points.retain(|p| p.1 > 0);
        Ok(Multiset { space: self.space.clone(), points })
    }

    /// `S ∩ U`: listed points inside `region`, basepoint tail kept.
    pub fn intersect(&self, region: &Region) -> Result<Multiset> {
        if region.ambient() != self.space.ambient() {
            return Err(Error::SpaceMismatch);
        }
        let points = self
            .points
            .iter()
            .filter(|(x, _)| region.distance_to(*x) <= TOL_BASE)
            .copied()
            .collect();
        Ok(Multiset { space: self.space.clone(), points })
    }

    /// Exact Φ-distance; see [`distance_phi`].
    pub fn distance(&self, other: &Multiset, spec: NormSpec) -> Result<f64> {
        distance_phi(self, other, spec)
    }
}

/// One side of a matched pair: an expanded point index or a basepoint copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    Point(usize),
    Base,
}

/// An optimal padded pairing. Basepoint-to-basepoint pairs are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub pairs: Vec<(Slot, Slot)>,
    pub value: f64,
}

impl Matching {
    /// Distances of the matched pairs, in pair order.
    pub fn displacements(&self, space: &BasedSpace, s: &[f64], t: &[f64]) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|pair| slot_distance(space, s, t, *pair))
            .collect()
    }
}

fn slot_distance(space: &BasedSpace, s: &[f64], t: &[f64], pair: (Slot, Slot)) -> f64 {
    match pair {
        (Slot::Point(i), Slot::Point(j)) => space.distance(s[i], t[j]),
        (Slot::Point(i), Slot::Base) => space.base_distance(s[i]),
        (Slot::Base, Slot::Point(j)) => space.base_distance(t[j]),
        (Slot::Base, Slot::Base) => 0.0,
    }
}

pub(crate) fn padded_costs(space: &BasedSpace, s: &[f64], t: &[f64]) -> Vec<Vec<f64>> {
    let (n, m) = (s.len(), t.len());
    (0..n + m)
        .map(|i| {
            (0..n + m)
                .map(|j| {
                    let a = if i < n { Slot::Point(i) } else { Slot::Base };
                    let b = if j < m { Slot::Point(j) } else { Slot::Base };
                    slot_distance(space, s, t, (a, b))
                })
                .collect()
        })
        .collect()
}

fn to_pairs(cols: &[usize], n: usize, m: usize) -> Vec<(Slot, Slot)> {
    cols.iter()
        .enumerate()
        .filter_map(|(i, &j)| {
            let a = if i < n { Slot::Point(i) } else { Slot::Base };
            let b = if j < m { Slot::Point(j) } else { Slot::Base };
            (a != Slot::Base || b != Slot::Base).then_some((a, b))
        })
        .collect()
}

fn squared(cost: &[Vec<f64>]) -> Vec<Vec<f64>> {
    cost.iter().map(|r| r.iter().map(|c| c * c).collect()).collect()
}

/// Optimal pairing of two expanded point lists.
///
/// Among optimal pairings the one with the smallest sum of squared
/// displacements is returned, remaining ties going to the solver's
/// row order. Φ_p uses min-cost assignment on `d^p`, Φ_∞ the bottleneck
/// assignment, Ky-Fan exhaustive search (combined size at most 8).
pub fn match_points(space: &BasedSpace, s: &[f64], t: &[f64], spec: NormSpec) -> Result<Matching> {
    spec.validate()?;
    let (n, m) = (s.len(), t.len());
    let cost = padded_costs(space, s, t);
    match spec {
        NormSpec::KyFan(_) => {
            if n + m > 8 {
                return Err(Error::UnsupportedNorm(spec.to_string(), n + m));
            }
            brute_force_points(space, s, t, spec)
        }
        NormSpec::SchattenP(p) if p.is_infinite() => {
            let (value, _) = assignment::bottleneck(&cost);
            let allowed: Vec<Vec<bool>> =
                cost.iter().map(|r| r.iter().map(|c| *c <= value).collect()).collect();
            let cols = assignment::min_sum_restricted(&squared(&cost), &allowed);
            Ok(Matching { pairs: to_pairs(&cols, n, m), value })
        }
        NormSpec::SchattenP(p) => {
            let powered: Vec<Vec<f64>> = if p == 1.0 {
                cost.clone()
            } else {
                cost.iter().map(|r| r.iter().map(|c| c.powf(p)).collect()).collect()
            };
            let sol = assignment::min_sum(&powered);
            let opt = sol.total(&powered);
            let mut cols = sol.cols.clone();
            if p != 2.0 && n + m > 1 {
                let scale = powered.iter().flatten().cloned().fold(0.0, f64::max);
                let tight = assignment::tight_edges(&powered, &sol, 1e-11 * scale);
                let secondary = assignment::min_sum_restricted(&squared(&cost), &tight);
                let total: f64 = secondary.iter().enumerate().map(|(i, &j)| powered[i][j]).sum();
                if total <= opt + 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    cols = secondary;
                }
            }
            let total: f64 = cols.iter().enumerate().map(|(i, &j)| powered[i][j]).sum();
            Ok(Matching { pairs: to_pairs(&cols, n, m), value: total.powf(1.0 / p) })
        }
    }
}

/// Φ-distance: the infimum of `Φ(d(s_1,t_1), d(s_2,t_2), …)` over paired
/// enumerations of `S` and `T`, computed exactly.
pub fn distance_phi(s: &Multiset, t: &Multiset, spec: NormSpec) -> Result<f64> {
    s.same_space(t)?;
    let (a, b) = canonical_order(s.expanded(), t.expanded());
    Ok(match_points(&s.space, &a, &b, spec)?.value)
}

/// Puts the two point lists in a fixed order so that `d(S, T)` and
/// `d(T, S)` run the same floating-point computation.
fn canonical_order(a: Vec<f64>, b: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let key = |v: &Vec<f64>| (v.len(), v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>());
    if key(&b) < key(&a) {
        (b, a)
    } else {
        (a, b)
    }
}

/// Optimal pairing between two multisets, indices into their `expanded()` lists.
pub fn optimal_matching(s: &Multiset, t: &Multiset, spec: NormSpec) -> Result<Matching> {
    s.same_space(t)?;
    match_points(&s.space, &s.expanded(), &t.expanded(), spec)
}

fn brute_force_points(space: &BasedSpace, s: &[f64], t: &[f64], spec: NormSpec) -> Result<Matching> {
    let (n, m) = (s.len(), t.len());
    if n + m > 8 {
        return Err(Error::SizeLimit(n + m));
    }
    let cost = padded_costs(space, s, t);
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for perm in (0..n + m).permutations(n + m) {
        let d: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
        let value = spec.eval(&d)?;
        let second: f64 = d.iter().map(|x| x * x).sum();
        let better = match &best {
            None => true,
            Some((bv, bs, _)) => {
                let tie = (value - bv).abs() <= 1e-12 * bv.max(1e-300);
                if tie {
                    second < *bs - 1e-12 * bs.max(1e-300)
                } else {
                    value < *bv
                }
            }
        };
        if better {
            best = Some((value, second, perm));
        }
    }
    let (value, _, cols) = best.expect("at least the empty permutation");
    Ok(Matching { pairs: to_pairs(&cols, n, m), value })
}

/// Exhaustive Φ-distance over every pairing of the basepoint-padded
/// enumerations. Combined rank at most 8.
pub fn brute_force_distance(s: &Multiset, t: &Multiset, spec: NormSpec) -> Result<f64> {
    s.same_space(t)?;
    spec.validate()?;
    let (a, b) = canonical_order(s.expanded(), t.expanded());
    Ok(brute_force_points(&s.space, &a, &b, spec)?.value)
}

/// Nested quadruple `(S, S', T, T')` on the line based at 0 for which the
/// naive difference estimate fails: `S = S' = T = {1/N, …, 1}` and
/// `T' = T − {1}`.
pub fn difference_counterexample(n: usize) -> Result<[Multiset; 4]> {
    if n < 2 {
        return Err(Error::Parameter("need N > 1".into()));
    }
    let space = BasedSpace::line(0.0);
    let full: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let s = Multiset::from_points(space.clone(), &full)?;
    let t_prime = Multiset::from_points(space, &full[..n - 1])?;
    Ok([s.clone(), s.clone(), s, t_prime])
}
