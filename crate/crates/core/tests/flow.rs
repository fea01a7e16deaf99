use std::f64::consts::TAU;

use multiset_flow::campaign::{determinant_winding, random_loop};
use multiset_flow::flow::{flow_mu, sf_crossings, sf_unitary, theta_grid, FlowEngine};
use multiset_flow::spectra::{diag, phase, OperatorModel, SampledOperatorPath};
use multiset_flow::{BasedSpace, Multiset, NormSpec};

const P2: NormSpec = NormSpec::SchattenP(2.0);

fn params(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
}

/// `diag(e^{2πi k t}, 1, …, 1)` sampled at `ts`.
fn first_entry_loop(d: usize, k: f64, ts: &[f64]) -> SampledOperatorPath {
    let matrices = ts
        .iter()
        .map(|t| {
            let mut e = vec![phase(0.0); d];
            e[0] = phase(TAU * k * t);
            diag(&e)
        })
        .collect();
    SampledOperatorPath::new(OperatorModel::unitary_identity(d), ts.to_vec(), matrices).unwrap()
}

fn slice(path: &SampledOperatorPath, range: std::ops::RangeInclusive<usize>) -> SampledOperatorPath {
    SampledOperatorPath::new(
        path.model.clone(),
        path.params[range.clone()].to_vec(),
        path.matrices[range].to_vec(),
    )
    .unwrap()
}

#[test]
fn golden_loop_and_speeds() {
    let thetas = theta_grid(0.1, 6.2, 16).unwrap();
    for (k, expected) in [(0.0, 0), (1.0, 1), (2.0, 2), (-1.0, -1)] {
        let path = first_entry_loop(3, k, &params(97));
        let r = sf_unitary(&path, &thetas, P2).unwrap();
        assert!(r.winding.iter().all(|&v| v == expected), "k = {k}: {:?}", r.winding);
        assert!(r.methods_agree());
        assert_eq!(determinant_winding(&path).unwrap(), expected);
        let back = sf_unitary(&path.reversed(), &thetas, P2).unwrap();
        assert!(back.winding.iter().all(|&v| v == -expected));
    }
}

#[test]
fn constant_path_has_no_flow() {
    let ts = params(10);
    let u = diag(&[phase(1.0), phase(2.0), phase(4.0)]);
    let model = OperatorModel::unitary_identity(3);
    let path = SampledOperatorPath::new(model, ts, vec![u; 10]).unwrap();
    let r = sf_unitary(&path, &[0.5, 1.5, 3.0, 5.0], P2).unwrap();
    assert_eq!(r.winding, vec![0; 4]);
    assert_eq!(r.crossing, vec![0; 4]);
}

#[test]
fn additivity_over_concatenation() {
    let thetas = theta_grid(0.1, 6.2, 24).unwrap();
    for i in 0..6 {
        let whole = random_loop(11, i, 129).unwrap();
        let (a, b) = (slice(&whole, 0..=64), slice(&whole, 64..=128));
        let ends: Vec<f64> = [&a, &b]
            .iter()
            .flat_map(|p| {
                let s = p.spectra().unwrap();
                [s[0].expanded(), s.last().unwrap().expanded()].concat()
            })
            .collect();
        for &theta in &thetas {
            if ends.iter().any(|&x| (x - theta).abs() < 1e-6) {
                continue;
            }
            let mu = |p: &SampledOperatorPath| {
                let s = p.spectra().unwrap();
                flow_mu(&s, &p.params, theta, P2).unwrap()
            };
            assert_eq!(mu(&whole), mu(&a) + mu(&b), "loop {i}, θ = {theta}");
        }
        let joined = whole.concat(&whole).unwrap();
        let r = sf_unitary(&joined, &thetas, P2).unwrap();
        let expected = 2 * determinant_winding(&whole).unwrap();
        assert!(r.winding.iter().all(|&v| v == expected));
        let other = random_loop(12, i, 129).unwrap();
        if other.model != whole.model {
            assert!(whole.concat(&other).is_err());
        }
    }
}

#[test]
fn reparametrization_and_refinement() {
    let thetas = theta_grid(0.1, 6.2, 12).unwrap();
    for i in 0..5 {
        let base = random_loop(21, i, 129).unwrap();
        let flow = sf_unitary(&base, &thetas, P2).unwrap().winding;
        let fine = random_loop(21, i, 257).unwrap();
        assert_eq!(sf_unitary(&fine, &thetas, P2).unwrap().winding, flow);
    }
    let squared: Vec<f64> = params(160).iter().map(|t| t * t).collect();
    let golden = first_entry_loop(4, 1.0, &squared);
    assert!(sf_unitary(&golden, &thetas, P2).unwrap().winding.iter().all(|&v| v == 1));
}

#[test]
fn open_path_flow_depends_on_theta() {
    let ts = params(41);
    let space = BasedSpace::circle(0.0);
    let samples: Vec<Multiset> = ts
        .iter()
        .map(|t| Multiset::from_points(space.clone(), &[1.0 + 3.0 * t, 5.0]).unwrap())
        .collect();
    for (theta, expected) in [(0.5, 0), (2.0, 1), (3.9, 1), (4.5, 0), (5.5, 0)] {
        assert_eq!(flow_mu(&samples, &ts, theta, P2).unwrap(), expected, "θ = {theta}");
        assert_eq!(sf_crossings(&samples, &ts, theta).unwrap(), expected);
    }
}

#[test]
fn norm_choice_does_not_change_flow() {
    let path = random_loop(31, 0, 129).unwrap();
    let spectra = path.spectra().unwrap();
    let theta = 2.5;
    let base = flow_mu(&spectra, &path.params, theta, P2).unwrap();
    for p in [1.0, 3.0, f64::INFINITY] {
        assert_eq!(flow_mu(&spectra, &path.params, theta, NormSpec::SchattenP(p)).unwrap(), base);
    }
    assert!(flow_mu(&spectra, &path.params, theta, NormSpec::KyFan(1)).is_err());
}

#[test]
fn coarse_sampling_is_reported() {
    // a half turn per step cannot be unwrapped
    let ts = params(3);
    let space = BasedSpace::circle(0.0);
    let samples: Vec<Multiset> = [0.5, 0.5 + std::f64::consts::PI, 0.5]
        .iter()
        .map(|&a| Multiset::from_points(space.clone(), &[a]).unwrap())
        .collect();
    let engine = FlowEngine::new(&samples, &ts, P2).unwrap();
    assert!(engine.crossings(2.0).is_err());
}
