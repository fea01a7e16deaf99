//! Continuous enumeration of sampled multiset paths.
//!
//! Consecutive samples are paired by the optimal padded assignment that
//! realizes their Φ-distance, and the pairs are chained into tracks. A point
//! paired with a basepoint copy ends its track (or starts a new one) at the
//! basepoint class.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::multiset::{match_points, padded_costs, Matching, Multiset, Slot};
use crate::norms::NormSpec;
use crate::space::BasedSpace;
use crate::TOL_BASE;

/// One eigenvalue track; `None` marks the basepoint class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub values: Vec<Option<f64>>,
    pub birth: usize,
    pub death: usize,
    pub simple: bool,
}

impl Track {
    /// Derives birth, death and simplicity from the values. `None` if the
    /// track is never active.
    pub fn new(values: Vec<Option<f64>>) -> Option<Self> {
        let birth = values.iter().position(Option::is_some)?;
        let death = values.iter().rposition(Option::is_some)?;
        let simple = values[birth..=death].iter().all(Option::is_some);
        Some(Track { values, birth, death, simple })
    }

    pub fn active_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Coordinate at index `j`, inactive values mapped to `base`.
    pub fn coord(&self, j: usize, base: f64) -> f64 {
        self.values[j].unwrap_or(base)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSet {
    pub params: Vec<f64>,
    pub tracks: Vec<Track>,
    pub space: BasedSpace,
}

impl TrackSet {
    /// The multiset `{track_i(t_j)}*` with basepoint values dropped.
    pub fn multiset_at(&self, j: usize) -> Result<Multiset> {
        Multiset::new(
            self.space.clone(),
            self.tracks.iter().filter_map(|tr| tr.values[j]).map(|x| (x, 1)),
        )
    }

    fn distance(&self, a: Option<f64>, b: Option<f64>) -> f64 {
        match (a, b) {
            (Some(x), Some(y)) => self.space.distance(x, y),
            (Some(x), None) | (None, Some(x)) => self.space.base_distance(x),
            (None, None) => 0.0,
        }
    }

    /// Largest distance a track moves between consecutive samples.
    pub fn max_step(&self, track: &Track) -> f64 {
        track
            .values
            .windows(2)
            .map(|w| self.distance(w[0], w[1]))
            .fold(0.0, f64::max)
    }
}

/// Diagnostics for one consecutive pair of samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub index: usize,
    /// Φ-distance between the two samples, realized by the chained pairing.
    pub distance: f64,
    /// Φ_∞ assignment value between the two samples.
    pub bottleneck: f64,
    /// Largest displacement in the chained pairing.
    pub max_displacement: f64,
    /// Sum of `displacement^p` over the chained pairing (`p` finite).
    pub power_sum: Option<f64>,
    /// Bottleneck at most half the smallest nonzero gap in either sample.
    pub adequate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub tracks: TrackSet,
    pub steps: Vec<StepReport>,
    pub warnings: Vec<String>,
}

pub(crate) fn check_samples(samples: &[Multiset], params: &[f64]) -> Result<BasedSpace> {
    if samples.len() < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    if params.len() != samples.len() {
        return Err(Error::Parameter(format!(
            "{} parameters for {} samples",
            params.len(),
            samples.len()
        )));
    }
    if params.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Parameter("parameters must be strictly increasing".into()));
    }
    let space = samples[0].space().clone();
    if samples.iter().any(|s| *s.space() != space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(space)
}

/// Smallest nonzero distance between support points of `pts`.
fn min_gap(space: &BasedSpace, pts: &[(f64, u32)]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, (x, _)) in pts.iter().enumerate() {
        for (y, _) in &pts[i + 1..] {
            let d = space.distance(*x, *y);
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    gap
}

pub(crate) struct StepSolve {
    matching: Matching,
    bottleneck: f64,
}

fn solve_step(space: &BasedSpace, s: &[f64], t: &[f64], spec: NormSpec) -> Result<StepSolve> {
    let matching = match_points(space, s, t, spec)?;
    let bottleneck = if spec.is_sup() {
        matching.value
    } else {
        assignment::bottleneck(&padded_costs(space, s, t)).0
    };
    Ok(StepSolve { matching, bottleneck })
}

/// Solves every consecutive pair in parallel; results are in step order.
pub(crate) fn solve_steps(space: &BasedSpace, expanded: &[Vec<f64>], spec: NormSpec) -> Result<Vec<StepSolve>> {
    expanded
        .par_windows(2)
        .map(|w| solve_step(space, &w[0], &w[1], spec))
        .collect()
}

/// Chains per-step pairings into tracks. `solves[j]` pairs
/// `expanded[j]` with `expanded[j + 1]`.
pub(crate) fn chain(
    space: &BasedSpace,
    samples: &[Multiset],
    params: &[f64],
    expanded: &[Vec<f64>],
    solves: &[&StepSolve],
    p: f64,
) -> Enumeration {
    let n = samples.len();
    let mut values: Vec<Vec<Option<f64>>> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for &x in &expanded[0] {
        let mut v = vec![None; n];
        v[0] = Some(x);
        values.push(v);
        active.push(values.len() - 1);
    }

    let mut steps = Vec::with_capacity(n - 1);
    let mut warnings = Vec::new();
    for (j, solve) in solves.iter().enumerate() {
        let (s, t) = (&expanded[j], &expanded[j + 1]);
        let mut next = vec![usize::MAX; t.len()];
        for &pair in &solve.matching.pairs {
            match pair {
                (Slot::Point(i), Slot::Point(k)) => {
                    values[active[i]][j + 1] = Some(t[k]);
                    next[k] = active[i];
                }
                (Slot::Point(_), Slot::Base) => {}
                (Slot::Base, Slot::Point(k)) => {
                    let mut v = vec![None; n];
                    v[j + 1] = Some(t[k]);
                    values.push(v);
                    next[k] = values.len() - 1;
                }
                (Slot::Base, Slot::Base) => unreachable!("omitted by the solver"),
            }
        }
        debug_assert!(next.iter().all(|&id| id != usize::MAX));
        active = next;

        let disp = solve.matching.displacements(space, s, t);
        let max_displacement = disp.iter().cloned().fold(0.0, f64::max);
        let power_sum = p.is_finite().then(|| disp.iter().map(|d| d.powf(p)).sum());
        let gap = min_gap(space, samples[j].points()).min(min_gap(space, samples[j + 1].points()));
        let adequate = solve.bottleneck <= 0.5 * gap;
        if !adequate {
            let msg = format!(
                "step {j}: bottleneck {:.3e} exceeds half the minimum gap {:.3e}",
                solve.bottleneck, gap
            );
            log::debug!("{msg}");
            warnings.push(msg);
        }
        steps.push(StepReport {
            index: j,
            distance: solve.matching.value,
            bottleneck: solve.bottleneck,
            max_displacement,
            power_sum,
            adequate,
        });
    }

    let tracks = values.into_iter().filter_map(Track::new).collect();
    Enumeration {
        tracks: TrackSet { params: params.to_vec(), tracks, space: space.clone() },
        steps,
        warnings,
    }
}

/// Chains optimal pairings of consecutive samples into tracks.
///
/// Every returned track reconstructs the samples exactly: the multiset of
/// active track values at `params[j]` equals `samples[j]`. Steps whose
/// bottleneck exceeds half the smallest nonzero gap of either sample are
/// flagged as inadequately sampled; tracks across them are best-effort.
pub fn enumerate_path(samples: &[Multiset], params: &[f64], spec: NormSpec) -> Result<Enumeration> {
    let space = check_samples(samples, params)?;
    let Some(p) = spec.exponent() else {
        return Err(Error::Parameter("enumeration needs a Φ_p norm".into()));
    };
    spec.validate()?;
    let expanded: Vec<Vec<f64>> = samples.iter().map(Multiset::expanded).collect();
    let solves = solve_steps(&space, &expanded, spec)?;
    let refs: Vec<&StepSolve> = solves.iter().collect();
    let e = chain(&space, samples, params, &expanded, &refs, p);
    if !e.warnings.is_empty() {
        log::warn!("{} of {} steps are not adequately sampled", e.warnings.len(), e.steps.len());
    }
    Ok(e)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// `d_Φ(tracks at t_j, S(t_j))` per parameter.
    pub reconstruction: Vec<f64>,
    /// Largest consecutive move of each track.
    pub max_step: Vec<f64>,
    /// `d_Φ(S(t_j), S(t_{j+1}))` of the source samples.
    pub sample_steps: Vec<f64>,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `ts` reconstructs `samples` pointwise.
pub fn validate_tracks(ts: &TrackSet, samples: &[Multiset], spec: NormSpec) -> ValidationReport {
    let mut failures = Vec::new();
    if samples.len() != ts.params.len() {
        failures.push(format!("{} samples for {} parameters", samples.len(), ts.params.len()));
    }
    let mut reconstruction = Vec::new();
    for (j, sample) in samples.iter().enumerate().take(ts.params.len()) {
        let d = ts
            .multiset_at(j)
            .and_then(|m| m.distance(sample, spec))
            .unwrap_or_else(|e| {
                failures.push(format!("index {j}: {e}"));
                f64::NAN
            });
        if d > TOL_BASE {
            failures.push(format!("index {j}: reconstruction distance {d:e}"));
        }
        reconstruction.push(d);
    }
    let max_step = ts.tracks.iter().map(|tr| ts.max_step(tr)).collect();
    let sample_steps = samples
        .windows(2)
        .map(|w| w[0].distance(&w[1], spec).unwrap_or(f64::NAN))
        .collect();
    ValidationReport { reconstruction, max_step, sample_steps, failures }
}

/// Cuts every track at each maximal run of basepoint values so that all
/// resulting tracks are simple.
pub fn split_simple(ts: &TrackSet) -> TrackSet {
    let n = ts.params.len();
    let mut tracks = Vec::new();
    for tr in &ts.tracks {
        let mut j = 0;
        while j < n {
            if tr.values[j].is_none() {
                j += 1;
                continue;
            }
            let start = j;
            while j < n && tr.values[j].is_some() {
                j += 1;
            }
            let mut v = vec![None; n];
            v[start..j].copy_from_slice(&tr.values[start..j]);
            tracks.extend(Track::new(v));
        }
    }
    TrackSet { params: ts.params.clone(), tracks, space: ts.space.clone() }
}

/// Pointwise split `S(t) = core(t) + tail(t)` around the basepoint.
#[derive(Debug, Clone, Serialize)]
pub struct Separation {
    /// Cut radius actually used, at most the requested one.
    pub radius: f64,
    pub core: Vec<Multiset>,
    pub tail: Vec<Multiset>,
    /// Maximal index runs `(first, last, core rank)` of constant core rank.
    pub runs: Vec<(usize, usize, usize)>,
}

/// Largest cut radius `<= eps` whose distance to every support radius is at
/// least the base tolerance.
fn shrink_radius(radii: &[f64], eps: f64) -> Option<f64> {
    let clear = |c: f64| radii.iter().all(|r| (r - c).abs() >= TOL_BASE);
    if clear(eps) {
        return Some(eps);
    }
    let mut below: Vec<f64> = radii.iter().copied().filter(|r| *r < eps).collect();
    below.push(0.0);
    below.sort_by(|a, b| b.total_cmp(a));
    below.dedup();
    // midpoints of consecutive distinct radii, from the top down
    let mut upper = radii
        .iter()
        .copied()
        .filter(|r| (r - eps).abs() < TOL_BASE)
        .fold(eps, f64::min);
    for r in below {
        if r >= upper {
            continue;
        }
        let c = 0.5 * (r + upper);
        if c > 0.0 && clear(c) {
            return Some(c);
        }
        upper = r;
    }
    None
}

/// Splits each sample into points outside the shrunk ball around the
/// basepoint (`core`) and points inside it (`tail`).
///
/// A step whose optimal pairing carries points across the cut in both
/// directions cannot be resolved and is reported with its index.
pub fn finite_separation(samples: &[Multiset], eps: f64, spec: NormSpec) -> Result<Separation> {
    if !(eps > 0.0) {
        return Err(Error::Parameter("eps must be positive".into()));
    }
    if samples.is_empty() {
        return Err(Error::Parameter("no samples".into()));
    }
    let space = samples[0].space().clone();
    if samples.iter().any(|s| *s.space() != space) {
        return Err(Error::SpaceMismatch);
    }
    let radii: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.points().iter().map(|(x, _)| space.base_distance(*x)))
        .collect();
    let radius = shrink_radius(&radii, eps)
        .ok_or_else(|| Error::Parameter("no cut radius clears the support".into()))?;

    let outside = |x: f64| space.base_distance(x) > radius;
    let mut core = Vec::with_capacity(samples.len());
    let mut tail = Vec::with_capacity(samples.len());
    for s in samples {
        let (c, t): (Vec<(f64, u32)>, Vec<(f64, u32)>) =
            s.points().iter().partition(|(x, _)| outside(*x));
        core.push(Multiset::new(space.clone(), c)?);
        tail.push(Multiset::new(space.clone(), t)?);
    }

    for (j, w) in samples.windows(2).enumerate() {
        let (a, b) = (w[0].expanded(), w[1].expanded());
        let m = match_points(&space, &a, &b, spec)?;
        let side = |slot: Slot, v: &[f64]| match slot {
            Slot::Point(i) => outside(v[i]),
            Slot::Base => false,
        };
        let (mut leaving, mut entering) = (false, false);
        for &(x, y) in &m.pairs {
            match (side(x, &a), side(y, &b)) {
                (true, false) => entering = true,
                (false, true) => leaving = true,
                _ => {}
            }
        }
        if leaving && entering {
            return Err(Error::Resolution {
                index: j,
                reason: format!("points cross the cut radius {radius} in both directions"),
            });
        }
    }

    let mut runs: Vec<(usize, usize, usize)> = Vec::new();
    for (j, c) in core.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == c.rank() => run.1 = j,
            _ => runs.push((j, j, c.rank())),
        }
    }
    Ok(Separation { radius, core, tail, runs })
}
