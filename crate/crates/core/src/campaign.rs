//! Seeded verification campaigns. Every instance draws from its own ChaCha
//! stream, so results do not depend on thread scheduling.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{theta_grid, FlowEngine};
use crate::multiset::{brute_force_distance, difference_counterexample, distance_phi, Multiset};
use crate::norms::NormSpec;
use crate::space::BasedSpace;
use crate::spectra::{
    eigenvalues, exp_i_hermitian, generate_path, random_hermitian, random_normal, random_unitary,
    verify_bhatia_sinha, verify_hoffman_wielandt, verify_kato_selfadjoint, Check, OperatorModel,
    Recipe, SampledOperatorPath,
};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Metric,
    SumDiff,
    BhatiaSinha,
    HoffmanWielandt,
    Kato,
    FlowAgreement,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Metric,
        Suite::SumDiff,
        Suite::BhatiaSinha,
        Suite::HoffmanWielandt,
        Suite::Kato,
        Suite::FlowAgreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::SumDiff => "sum-diff",
            Suite::BhatiaSinha => "bhatia-sinha",
            Suite::HoffmanWielandt => "hoffman-wielandt",
            Suite::Kato => "kato",
            Suite::FlowAgreement => "flow-agreement",
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Suite::Metric | Suite::SumDiff => 500,
            Suite::FlowAgreement => 200,
            _ => 1000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite {s:?}")))
    }
}

/// Tolerances applied by the campaigns.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Allowed violation of an inequality.
    pub inequality: f64,
    /// Allowed gap between the assignment solver and the brute-force oracle.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { inequality: 1e-9, oracle: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub checks: usize,
    /// Smallest `rhs − lhs` over all inequality checks.
    pub min_slack: f64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outcome of one instance.
#[derive(Default)]
struct Tally {
    checks: usize,
    min_slack: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, min_slack: f64::INFINITY, failures: Vec::new() }
    }

    fn inequality(&mut self, label: impl FnOnce() -> String, lhs: f64, rhs: f64, tol: f64) {
        self.checks += 1;
        self.min_slack = self.min_slack.min(rhs - lhs);
        if !(lhs <= rhs + tol) {
            self.failures.push(format!("{}: {lhs:e} > {rhs:e}", label()));
        }
    }

    fn check(&mut self, label: impl FnOnce() -> String, c: Check, tol: f64) {
        self.inequality(label, c.lhs, c.rhs, tol);
    }

    fn expect(&mut self, ok: bool, label: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(label());
        }
    }

    fn error(&mut self, i: usize, e: Error) {
        self.checks += 1;
        self.failures.push(format!("instance {i}: {e}"));
    }
}

/// Random generator for instance `index` of a campaign.
pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Random multiset of the given rank. Locations are snapped to a coarse
/// grid or repeated some of the time so that ties and multiplicities occur.
pub fn random_multiset<R: Rng + ?Sized>(space: &BasedSpace, rank: usize, rng: &mut R) -> Result<Multiset> {
    let mut locs: Vec<f64> = Vec::with_capacity(rank);
    let circle = matches!(space, BasedSpace::Circle { .. } | BasedSpace::QuotientCircle { .. });
    while locs.len() < rank {
        let roll: f64 = rng.random();
        let x = if roll < 0.15 && !locs.is_empty() {
            locs[rng.random_range(0..locs.len())]
        } else if circle {
            let a: f64 = rng.random_range(0.0..TAU);
            if roll < 0.35 { (a / (TAU / 8.0)).round() * (TAU / 8.0) } else { a }
        } else {
            let a: f64 = rng.random_range(-2.0..2.0);
            if roll < 0.35 { (a * 4.0).round() / 4.0 } else { a }
        };
        if space.is_base(x) {
            continue;
        }
        locs.push(x);
    }
    Multiset::from_points(space.clone(), &locs)
}

fn random_space<R: Rng + ?Sized>(index: usize, rng: &mut R) -> BasedSpace {
    if index.is_multiple_of(2) {
        BasedSpace::line(rng.random_range(-1.0..1.0))
    } else {
        BasedSpace::circle(rng.random_range(0.0..TAU))
    }
}

pub fn metric_norms() -> [NormSpec; 4] {
    [NormSpec::SchattenP(1.0), NormSpec::SchattenP(2.0), NormSpec::inf(), NormSpec::KyFan(2)]
}

const SCHATTEN: [f64; 3] = [1.0, 2.0, f64::INFINITY];

fn metric_instance(seed: u64, i: usize, tol: Tolerances) -> Tally {
    let mut rng = instance_rng(seed, i);
    let mut tally = Tally::new();
    let space = random_space(i, &mut rng);
    let mut ranks = [0usize; 3];
    for r in &mut ranks {
        *r = rng.random_range(0..=4);
    }
    while ranks.iter().sum::<usize>() > 8 {
        let k = rng.random_range(0..3);
        ranks[k] = ranks[k].saturating_sub(1);
    }
    let sets: Vec<Multiset> = match ranks.iter().map(|&r| random_multiset(&space, r, &mut rng)).collect() {
        Ok(v) => v,
        Err(e) => {
            tally.error(i, e);
            return tally;
        }
    };
    for spec in metric_norms() {
        let mut d = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                match (distance_phi(&sets[a], &sets[b], spec), brute_force_distance(&sets[a], &sets[b], spec)) {
                    (Ok(x), Ok(y)) => {
                        d[a][b] = x;
                        tally.expect((x - y).abs() <= tol.oracle, || {
                            format!("instance {i} {spec}: solver {x:e} vs oracle {y:e}")
                        });
                    }
                    (Err(e), _) | (_, Err(e)) => tally.error(i, e),
                }
            }
        }
        for a in 0..3 {
            tally.expect(d[a][a] == 0.0, || format!("instance {i} {spec}: d(S,S) = {:e}", d[a][a]));
            for b in 0..3 {
                tally.expect(d[a][b] == d[b][a], || {
                    format!("instance {i} {spec}: asymmetric {:e} vs {:e}", d[a][b], d[b][a])
                });
                for c in 0..3 {
                    tally.inequality(
                        || format!("instance {i} {spec}: triangle ({a},{b},{c})"),
                        d[a][c],
                        d[a][b] + d[b][c],
                        tol.inequality,
                    );
                }
            }
        }
    }
    tally
}

/// Random `(S, S', T, T')` with `S' ⊆ S`, `T' ⊆ T` and `rank S' + rank T' ≥ 1`.
pub fn random_nested_quadruple<R: Rng + ?Sized>(space: &BasedSpace, rng: &mut R) -> Result<[Multiset; 4]> {
    let (mut rs, mut rt) = (rng.random_range(0..=3), rng.random_range(0..=3));
    if rng.random_bool(0.3) {
        rt = rs;
    }
    if rs + rt == 0 {
        rs = 1;
    }
    let s_prime = random_multiset(space, rs, rng)?;
    let t_prime = random_multiset(space, rt, rng)?;
    let s = s_prime.sum(&random_multiset(space, rng.random_range(0..=3), rng)?)?;
    let t = t_prime.sum(&random_multiset(space, rng.random_range(0..=3), rng)?)?;
    Ok([s, s_prime, t, t_prime])
}

fn sum_diff_instance(seed: u64, i: usize, tol: Tolerances) -> Result<Tally> {
    let mut rng = instance_rng(seed, i);
    let mut tally = Tally::new();
    let space = random_space(i, &mut rng);
    let [s, s_prime, t, t_prime] = random_nested_quadruple(&space, &mut rng)?;
    let n = (s_prime.rank() + t_prime.rank()) as f64;
    for p in SCHATTEN {
        let spec = NormSpec::SchattenP(p);
        let d = distance_phi(&s, &t, spec)?;
        let d_prime = distance_phi(&s_prime, &t_prime, spec)?;
        let sum = distance_phi(&s.sum(&s_prime)?, &t.sum(&t_prime)?, spec)?;
        tally.inequality(|| format!("instance {i} {spec}: sum estimate"), sum, d + d_prime, tol.inequality);
        let diff = distance_phi(&s.difference(&s_prime)?, &t.difference(&t_prime)?, spec)?;
        tally.inequality(
            || format!("instance {i} {spec}: difference estimate, n = {n}"),
            diff,
            3.0 * n * (d + d_prime),
            tol.inequality,
        );
    }
    Ok(tally)
}

/// The fixed counterexample with `N = 16`: returns `(ρ₂(S−S', T−T'), ρ₂(S,T) + ρ₂(S',T'))`.
pub fn naive_difference_counterexample() -> Result<(f64, f64)> {
    let [s, s_prime, t, t_prime] = difference_counterexample(16)?;
    let spec = NormSpec::SchattenP(2.0);
    let diff = distance_phi(&s.difference(&s_prime)?, &t.difference(&t_prime)?, spec)?;
    let bound = distance_phi(&s, &t, spec)? + distance_phi(&s_prime, &t_prime, spec)?;
    Ok((diff, bound))
}

fn perturb_unitary<R: Rng + ?Sized>(u: &crate::spectra::CMatrix, rng: &mut R) -> crate::spectra::CMatrix {
    let d = u.nrows();
    if rng.random_bool(0.5) {
        random_unitary(d, rng)
    } else {
        let eps = 10f64.powf(rng.random_range(-3.0..0.0));
        u * exp_i_hermitian(&random_hermitian(d, rng), eps)
    }
}

fn bhatia_sinha_instance(seed: u64, i: usize, tol: Tolerances) -> Result<Tally> {
    let mut rng = instance_rng(seed, i);
    let mut tally = Tally::new();
    let d = rng.random_range(2..=16);
    let model = OperatorModel::unitary_identity(d);
    let u = random_unitary(d, &mut rng);
    let v = perturb_unitary(&u, &mut rng);
    let p = SCHATTEN[i % 3];
    let c = verify_bhatia_sinha(&u, &v, p, &model)?;
    tally.check(|| format!("instance {i}: d = {d}, p = {p}"), c, tol.inequality);
    Ok(tally)
}

fn kato_instance(seed: u64, i: usize, tol: Tolerances) -> Result<Tally> {
    let mut rng = instance_rng(seed, i);
    let mut tally = Tally::new();
    let d = rng.random_range(2..=16);
    let model = OperatorModel::hermitian_zero(d);
    let h = random_hermitian(d, &mut rng);
    let g = if rng.random_bool(0.5) {
        random_hermitian(d, &mut rng)
    } else {
        let eps = 10f64.powf(rng.random_range(-3.0..0.0));
        &h + random_hermitian(d, &mut rng).scale(eps)
    };
    let p = SCHATTEN[i % 3];
    let c = verify_kato_selfadjoint(&h, &g, p, &model)?;
    tally.check(|| format!("instance {i}: d = {d}, p = {p}"), c, tol.inequality);
    Ok(tally)
}

fn hoffman_wielandt_instance(seed: u64, i: usize, tol: Tolerances) -> Result<Tally> {
    let mut rng = instance_rng(seed, i);
    let mut tally = Tally::new();
    let d = rng.random_range(2..=16);
    let n = random_normal(d, &mut rng);
    let m = random_normal(d, &mut rng);
    let c = verify_hoffman_wielandt(&n, &m)?;
    tally.check(|| format!("instance {i}: d = {d}"), c, tol.inequality);
    Ok(tally)
}

/// A seeded random unitary loop based at the identity, as used by the
/// flow campaigns.
pub fn random_loop(seed: u64, index: usize, samples: usize) -> Result<SampledOperatorPath> {
    let mut rng = instance_rng(seed, index);
    let d = rng.random_range(2..=8);
    let recipe = Recipe::RandomLoop {
        seed: rng.random(),
        amplitude: rng.random_range(0.1..0.8),
        max_winding: rng.random_range(0..=2),
    };
    generate_path(&recipe, &OperatorModel::unitary_identity(d), samples)
}

/// Winding number of `det U(t)` around 0, summed from principal increments.
pub fn determinant_winding(path: &SampledOperatorPath) -> Result<i64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for m in &path.matrices {
        let arg: f64 = eigenvalues(m)?.iter().map(|z| z.arg()).sum();
        if let Some(p) = prev {
            let mut d = (arg - p).rem_euclid(TAU);
            if d > std::f64::consts::PI {
                d -= TAU;
            }
            total += d;
        }
        prev = Some(arg);
    }
    Ok((total / TAU).round() as i64)
}

/// Expected jump `μ(b) − μ(a)` of the flow of an open path with endpoint
/// angle lists `start`, `end`.
pub fn expected_jump(start: &[f64], end: &[f64], a: f64, b: f64) -> i64 {
    let inside = |xs: &[f64]| xs.iter().filter(|&&x| x > a && x < b).count() as i64;
    inside(start) - inside(end)
}

pub const FLOW_SAMPLES: usize = 256;

fn flow_instance(seed: u64, i: usize) -> Result<Tally> {
    let mut tally = Tally::new();
    let path = random_loop(seed, i, FLOW_SAMPLES)?;
    let spectra = path.spectra()?;
    let thetas = theta_grid(0.1, 6.2, 64)?;
    let spec = NormSpec::SchattenP(2.0);

    let engine = FlowEngine::new(&spectra, &path.params, spec)?;
    let expected = determinant_winding(&path)?;
    for &theta in &thetas {
        let mu = engine.mu(theta)?.value;
        let cross = engine.crossings(theta)?;
        tally.expect(mu == cross, || format!("instance {i}: θ = {theta}: winding {mu} vs crossing {cross}"));
        tally.expect(mu == expected, || format!("instance {i}: θ = {theta}: flow {mu} vs det winding {expected}"));
    }

    // the first half is an open path whose flow jumps only at endpoint angles
    let half = FLOW_SAMPLES / 2;
    let open = FlowEngine::new(&spectra[..=half], &path.params[..=half], spec)?;
    let (start, end) = (spectra[0].expanded(), spectra[half].expanded());
    let mut prev: Option<(f64, i64)> = None;
    for &theta in &thetas {
        let mu = match (open.mu(theta), open.crossings(theta)) {
            (Ok(m), Ok(c)) => {
                tally.expect(m.value == c, || format!("instance {i} (open): θ = {theta}: {} vs {c}", m.value));
                m.value
            }
            (Err(Error::ThetaCollision { .. }), _) | (_, Err(Error::ThetaCollision { .. })) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if let Some((a, prev_mu)) = prev {
            let want = expected_jump(&start, &end, a, theta);
            tally.expect(mu - prev_mu == want, || {
                format!("instance {i} (open): jump {} on ({a}, {theta}), expected {want}", mu - prev_mu)
            });
        }
        prev = Some((theta, mu));
    }
    Ok(tally)
}

/// Runs `count` instances of `suite` in parallel.
pub fn run_suite(suite: Suite, seed: u64, count: usize, tol: Tolerances) -> SuiteReport {
    let tallies: Vec<Tally> = (0..count)
        .into_par_iter()
        .map(|i| {
            let result = match suite {
                Suite::Metric => Ok(metric_instance(seed, i, tol)),
                Suite::SumDiff => sum_diff_instance(seed, i, tol),
                Suite::BhatiaSinha => bhatia_sinha_instance(seed, i, tol),
                Suite::HoffmanWielandt => hoffman_wielandt_instance(seed, i, tol),
                Suite::Kato => kato_instance(seed, i, tol),
                Suite::FlowAgreement => flow_instance(seed, i),
            };
            result.unwrap_or_else(|e| {
                let mut t = Tally::new();
                t.error(i, e);
                t
            })
        })
        .collect();
    let mut report = SuiteReport { suite, instances: count, checks: 0, min_slack: f64::INFINITY, failures: Vec::new() };
    for t in tallies {
        report.checks += t.checks;
        report.min_slack = report.min_slack.min(t.min_slack);
        report.failures.extend(t.failures);
    }
    if suite == Suite::SumDiff {
        match naive_difference_counterexample() {
            Ok((diff, bound)) => {
                report.checks += 1;
                if !(diff == 1.0 && bound <= 0.25 && diff > bound) {
                    report.failures.push(format!(
                        "naive difference estimate should fail: ρ₂(S−S', T−T') = {diff}, bound {bound}"
                    ));
                }
            }
            Err(e) => report.failures.push(format!("counterexample: {e}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn counterexample_values() {
        let (diff, bound) = naive_difference_counterexample().unwrap();
        assert_eq!(diff, 1.0);
        assert!(bound <= 0.25);
    }

    #[test]
    fn small_campaigns_pass() {
        for suite in Suite::ALL {
            let count = if suite == Suite::FlowAgreement { 3 } else { 20 };
            let r = run_suite(suite, 7, count, Tolerances::default());
            assert!(r.passed(), "{suite}: {:?}", r.failures);
            assert!(r.checks >= count);
        }
    }

    #[test]
    fn deterministic() {
        let a = run_suite(Suite::Metric, 3, 10, Tolerances::default());
        let b = run_suite(Suite::Metric, 3, 10, Tolerances::default());
        assert_eq!(a.min_slack.to_bits(), b.min_slack.to_bits());
        assert_eq!(a.checks, b.checks);
    }

    #[test]
    fn jump_rule() {
        assert_eq!(expected_jump(&[1.0, 2.0], &[1.5], 0.5, 2.5), 1);
        assert_eq!(expected_jump(&[], &[3.0], 2.0, 4.0), -1);
    }
}
