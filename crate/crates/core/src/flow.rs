//! Flow of multiset paths on the circle and unitary spectral flow.
//!
//! Two independent routes to the same integer:
//!
//! * winding sum: close the path with the canonical θ-contractions of its
//!   endpoints, enumerate the closed path, and add up the winding numbers
//!   of all tracks;
//! * crossing count: enumerate the open path and count signed passages of
//!   each track's unwrapped phase through the ray at angle θ.
//!
//! For quotients of the circle by a larger compact set both routes run on
//! lifted tracks; that extension is experimental and flagged as such.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{
    chain, check_samples, solve_steps, split_simple, Enumeration, StepSolve, Track, TrackSet,
};
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::norms::NormSpec;
use crate::quotient::lift_simple_path;
use crate::space::{chord, wrap_angle, BasedSpace};
use crate::spectra::SampledOperatorPath;
use crate::TOL_BASE;

/// Contraction samples are spaced at most this far apart in angle.
const CONTRACTION_STEP: f64 = 0.1;
const RESIDUAL_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    WindingSum,
    CrossingCount,
}

/// Principal value in `(-π, π]`.
fn principal(d: f64) -> f64 {
    let r = wrap_angle(d);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Principal phase increments of an angle sequence; any increment of
/// magnitude π or more makes unwrapping ambiguous.
pub fn phase_increments(angles: &[f64]) -> Result<Vec<f64>> {
    angles
        .windows(2)
        .enumerate()
        .map(|(j, w)| {
            let d = principal(w[1] - w[0]);
            if d.abs() >= PI - 1e-12 {
                Err(Error::Resolution { index: j, reason: format!("phase step {d:.6} reaches π") })
            } else {
                Ok(d)
            }
        })
        .collect()
}

/// Winding number of a closed sampled curve on the circle, given by angles.
pub fn winding_number(angles: &[f64]) -> Result<i64> {
    let (Some(first), Some(last)) = (angles.first(), angles.last()) else {
        return Ok(0);
    };
    if chord(*first, *last) > TOL_BASE {
        return Err(Error::Domain(format!("track is not a loop: {first} → {last}")));
    }
    let total: f64 = phase_increments(angles)?.iter().sum();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() >= RESIDUAL_LIMIT {
        return Err(Error::Consistency(turns - rounded));
    }
    Ok(rounded as i64)
}

/// Angles of a track on a plain circle, inactive samples at the basepoint.
fn track_angles(track: &Track, space: &BasedSpace) -> Result<Vec<f64>> {
    let base = match space {
        BasedSpace::Circle { basepoint } => *basepoint,
        _ => return Err(Error::Parameter("plain circle expected".into())),
    };
    Ok((0..track.values.len()).map(|j| track.coord(j, base)).collect())
}

/// Winding number of one track of a closed path on the plain circle.
pub fn track_winding(track: &Track, space: &BasedSpace) -> Result<i64> {
    winding_number(&track_angles(track, space)?)
}

/// Signed passages of the unwrapped phase through `theta + 2πk`. Landing
/// on the ray counts toward the step that leaves it, so a touch-and-retreat
/// counts zero.
pub fn count_crossings(angles: &[f64], theta: f64) -> Result<i64> {
    let Some(&start) = angles.first() else {
        return Ok(0);
    };
    let increments = phase_increments(angles)?;
    let level = |phi: f64| {
        let k = ((phi - theta) / TAU).round();
        let snapped = if (phi - theta - k * TAU).abs() <= TOL_BASE { theta + k * TAU } else { phi };
        ((snapped - theta) / TAU).floor() as i64
    };
    let mut phi = wrap_angle(start);
    let mut count = 0;
    for d in increments {
        let next = phi + d;
        count += level(next) - level(phi);
        phi = next;
    }
    Ok(count)
}

/// Linearly sampled canonical θ-contraction of `s`: every angle `≤ θ`
/// retracts to 0, every angle `> θ` runs up to 2π. Returns the samples
/// for contraction times `0, …, 1`; the first equals `s`, the last is trivial.
pub fn theta_contraction(s: &Multiset, theta: f64) -> Result<Vec<Multiset>> {
    let space = s.space().clone();
    if space != BasedSpace::circle(0.0) {
        return Err(Error::Parameter("θ-contraction needs the circle based at 1".into()));
    }
    let angles = s.expanded();
    let target = |a: f64| if a <= theta { 0.0 } else { TAU };
    let span = angles.iter().map(|&a| (target(a) - a).abs()).fold(0.0, f64::max);
    let count = (span / CONTRACTION_STEP).ceil() as usize + 1;
    if count == 1 {
        return Ok(vec![s.clone()]);
    }
    (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            let pts: Vec<f64> = angles.iter().map(|&a| a * (1.0 - t) + target(a) * t).collect();
            Multiset::from_points(space.clone(), &pts)
        })
        .collect()
}

fn check_theta(theta: f64, endpoints: [&Multiset; 2]) -> Result<()> {
    if !(theta > 0.0 && theta < TAU) {
        return Err(Error::Parameter(format!("θ = {theta} is outside (0, 2π)")));
    }
    let space = endpoints[0].space();
    for s in endpoints {
        for &(a, _) in s.points() {
            if chord(a, theta) <= TOL_BASE {
                return Err(Error::ThetaCollision { theta, angle: a });
            }
        }
    }
    if let Some(k) = space.compact_set() {
        if k.distance_to(theta) <= TOL_BASE {
            return Err(Error::ThetaCollision { theta, angle: theta });
        }
    }
    Ok(())
}

/// Per-θ flow together with what produced it.
#[derive(Debug, Clone, Serialize)]
pub struct MuDetail {
    pub theta: f64,
    pub value: i64,
    pub track_windings: Vec<i64>,
}

/// Shared state for evaluating the flow of one sampled path at many angles:
/// the open path's step pairings are solved once.
pub struct FlowEngine {
    space: BasedSpace,
    samples: Vec<Multiset>,
    expanded: Vec<Vec<f64>>,
    solves: Vec<StepSolve>,
    open: Enumeration,
    spec: NormSpec,
}

impl FlowEngine {
    pub fn new(samples: &[Multiset], params: &[f64], spec: NormSpec) -> Result<Self> {
        let space = check_samples(samples, params)?;
        let p = spec
            .exponent()
            .ok_or_else(|| Error::Parameter("flow needs a Φ_p norm".into()))?;
        spec.validate()?;
        match &space {
            BasedSpace::Circle { basepoint } if *basepoint == 0.0 => {}
            BasedSpace::QuotientCircle { .. } => {}
            _ => return Err(Error::Parameter("flow is defined on the circle based at 1".into())),
        }
        let expanded: Vec<Vec<f64>> = samples.iter().map(Multiset::expanded).collect();
        let solves = solve_steps(&space, &expanded, spec)?;
        let refs: Vec<&StepSolve> = solves.iter().collect();
        let open = chain(&space, samples, params, &expanded, &refs, p);
        Ok(FlowEngine { space, samples: samples.to_vec(), expanded, solves, open, spec })
    }

    pub fn is_experimental(&self) -> bool {
        matches!(self.space, BasedSpace::QuotientCircle { .. })
    }

    /// Enumeration of the open path.
    pub fn open(&self) -> &Enumeration {
        &self.open
    }

    fn endpoints(&self) -> [&Multiset; 2] {
        [&self.samples[0], self.samples.last().unwrap()]
    }

    /// Contraction samples before and after the open path.
    fn contractions(&self, theta: f64) -> Result<(Vec<Multiset>, Vec<Multiset>)> {
        let [first, last] = self.endpoints();
        let mut pre = theta_contraction(first, theta)?;
        pre.reverse();
        Ok((pre, theta_contraction(last, theta)?))
    }

    /// Samples of the closed path `Γ_θ(S(0))⁻¹ ∗ S ∗ Γ_θ(S(1))`.
    pub fn closed_path(&self, theta: f64) -> Result<Vec<Multiset>> {
        let (pre, post) = self.contractions(theta)?;
        let mut samples = pre[..pre.len() - 1].to_vec();
        samples.extend(self.samples.iter().cloned());
        samples.extend(post[1..].iter().cloned());
        Ok(samples)
    }

    /// Enumeration of the closed path, indexed by sample number, and the
    /// index at which the open path starts. Open-path steps reuse the
    /// cached pairings.
    pub fn closed_enumeration(&self, theta: f64) -> Result<(Enumeration, usize)> {
        let (pre, post) = self.contractions(theta)?;
        let pre_exp: Vec<Vec<f64>> = pre.iter().map(Multiset::expanded).collect();
        let post_exp: Vec<Vec<f64>> = post.iter().map(Multiset::expanded).collect();
        let pre_solves = solve_steps(&self.space, &pre_exp, self.spec)?;
        let post_solves = solve_steps(&self.space, &post_exp, self.spec)?;

        let offset = pre.len() - 1;
        let mut samples = pre[..offset].to_vec();
        samples.extend(self.samples.iter().cloned());
        samples.extend(post[1..].iter().cloned());
        let mut expanded = pre_exp[..offset].to_vec();
        expanded.extend(self.expanded.iter().cloned());
        expanded.extend(post_exp[1..].iter().cloned());
        let solves: Vec<&StepSolve> =
            pre_solves.iter().chain(&self.solves).chain(&post_solves).collect();
        let params: Vec<f64> = (0..samples.len()).map(|j| j as f64).collect();
        let p = self.spec.exponent().unwrap();
        Ok((chain(&self.space, &samples, &params, &expanded, &solves, p), offset))
    }

    /// Flow μ(θ) as the winding sum of the closed path's tracks.
    pub fn mu(&self, theta: f64) -> Result<MuDetail> {
        check_theta(theta, self.endpoints())?;
        if self.is_experimental() {
            return self.mu_lifted(theta);
        }
        let (closed, offset) = self.closed_enumeration(theta)?;
        let open_steps = self.samples.len() - 1;
        let simple = split_simple(&closed.tracks);
        let track_windings = simple
            .tracks
            .iter()
            .map(|tr| track_winding(tr, &self.space))
            .collect::<Result<Vec<i64>>>()
            .map_err(|e| match e {
                Error::Resolution { index, reason } if index >= offset && index < offset + open_steps => {
                    Error::Resolution { index: index - offset, reason }
                }
                Error::Resolution { index, reason } => Error::Resolution {
                    index,
                    reason: format!("{reason} (contraction step of the closed path)"),
                },
                other => other,
            })?;
        Ok(MuDetail { theta, value: track_windings.iter().sum(), track_windings })
    }

    /// Lifted angle sequences of the open path's simple tracks.
    fn lifted_tracks(&self) -> Result<Vec<Vec<f64>>> {
        let simple = split_simple(&self.open.tracks);
        match &self.space {
            BasedSpace::QuotientCircle { k } => {
                simple.tracks.iter().map(|tr| lift_simple_path(&tr.values, k)).collect()
            }
            _ => simple.tracks.iter().map(|tr| track_angles(tr, &self.space)).collect(),
        }
    }

    /// Experimental quotient flow: each lifted track is closed through the
    /// chart `[θ, θ + 2π)`, which never meets the ray at θ.
    fn mu_lifted(&self, theta: f64) -> Result<MuDetail> {
        let chart = |a: f64| theta + wrap_angle(a - theta);
        let mut track_windings = Vec::new();
        for angles in self.lifted_tracks()? {
            let delta: f64 = phase_increments(&angles)?.iter().sum();
            let (a, b) = (angles[0], *angles.last().unwrap());
            let turns = (delta + chart(a) - chart(b)) / TAU;
            let rounded = turns.round();
            if (turns - rounded).abs() >= RESIDUAL_LIMIT {
                return Err(Error::Consistency(turns - rounded));
            }
            track_windings.push(rounded as i64);
        }
        Ok(MuDetail { theta, value: track_windings.iter().sum(), track_windings })
    }

    /// Signed crossing count of the open path's tracks through angle θ.
    pub fn crossings(&self, theta: f64) -> Result<i64> {
        check_theta(theta, self.endpoints())?;
        let mut total = 0;
        for angles in self.lifted_tracks()? {
            total += count_crossings(&angles, theta)?;
        }
        Ok(total)
    }

    /// Principal phase increments of each open-path track.
    pub fn phase_increments(&self) -> Result<Vec<Vec<f64>>> {
        self.lifted_tracks()?.iter().map(|a| phase_increments(a)).collect()
    }
}

/// Flow μ(θ; S) of a sampled multiset path on the circle based at 1.
pub fn flow_mu(samples: &[Multiset], params: &[f64], theta: f64, spec: NormSpec) -> Result<i64> {
    Ok(FlowEngine::new(samples, params, spec)?.mu(theta)?.value)
}

/// Signed count of anticlockwise minus clockwise crossings of `e^{iθ}`.
pub fn sf_crossings(samples: &[Multiset], params: &[f64], theta: f64) -> Result<i64> {
    FlowEngine::new(samples, params, NormSpec::SchattenP(2.0))?.crossings(theta)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowDiagnostics {
    pub per_theta: Vec<MuDetail>,
    /// Principal phase increments per open-path track.
    pub phase_increments: Vec<Vec<f64>>,
    pub sampling_warnings: Vec<String>,
    pub experimental: bool,
}

/// Flow over a grid of angles by both methods.
#[derive(Debug, Clone, Serialize)]
pub struct FlowResult {
    pub theta_grid: Vec<f64>,
    pub winding: Vec<i64>,
    pub crossing: Vec<i64>,
    pub diagnostics: FlowDiagnostics,
}

impl FlowResult {
    pub fn flow(&self, method: Method) -> &[i64] {
        match method {
            Method::WindingSum => &self.winding,
            Method::CrossingCount => &self.crossing,
        }
    }

    pub fn methods_agree(&self) -> bool {
        self.winding == self.crossing
    }
}

/// Evaluates both methods at every angle of `thetas`, in parallel.
pub fn flow_over_grid(engine: &FlowEngine, thetas: &[f64]) -> Result<FlowResult> {
    let rows: Vec<(MuDetail, i64)> = thetas
        .par_iter()
        .map(|&theta| Ok((engine.mu(theta)?, engine.crossings(theta)?)))
        .collect::<Result<_>>()?;
    let winding = rows.iter().map(|r| r.0.value).collect();
    let crossing = rows.iter().map(|r| r.1).collect();
    Ok(FlowResult {
        theta_grid: thetas.to_vec(),
        winding,
        crossing,
        diagnostics: FlowDiagnostics {
            per_theta: rows.into_iter().map(|r| r.0).collect(),
            phase_increments: engine.phase_increments()?,
            sampling_warnings: engine.open().warnings.clone(),
            experimental: engine.is_experimental(),
        },
    })
}

/// Spectral flow sf(θ; U) := μ(θ; σ(U)) over a grid of angles.
pub fn sf_unitary(path: &SampledOperatorPath, thetas: &[f64], spec: NormSpec) -> Result<FlowResult> {
    path.validate()?;
    let spectra = path.spectra()?;
    let engine = FlowEngine::new(&spectra, &path.params, spec)?;
    flow_over_grid(&engine, thetas)
}

/// `n` equally spaced angles from `a` to `b` inclusive.
pub fn theta_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(a > 0.0 && b < TAU && a <= b) {
        return Err(Error::Parameter(format!("bad θ grid {a}:{b}:{n}")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Parses `a:b:n`.
pub fn parse_theta_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("θ grid must look like 0.1:6.2:64, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    theta_grid(
        a.parse().map_err(|_| bad())?,
        b.parse().map_err(|_| bad())?,
        n.parse().map_err(|_| bad())?,
    )
}

/// Track set of the open path, e.g. for plotting.
pub fn open_tracks(engine: &FlowEngine) -> &TrackSet {
    &engine.open().tracks
}
