use std::f64::consts::{FRAC_PI_2, PI, TAU};

use multiset_flow::campaign::naive_difference_counterexample;
use multiset_flow::multiset::{brute_force_distance, distance_phi, Multiset};
use multiset_flow::quotient::{lift_simple_path, min_separation, quotient_distance, CompactSet, Region};
use multiset_flow::space::{chord, Ambient};
use multiset_flow::{BasedSpace, NormSpec};
use proptest::prelude::*;

fn specs() -> [NormSpec; 3] {
    [NormSpec::SchattenP(1.0), NormSpec::SchattenP(2.0), NormSpec::inf()]
}

fn space_strategy() -> impl Strategy<Value = BasedSpace> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(BasedSpace::line),
        (0.0..TAU).prop_map(BasedSpace::circle),
    ]
}

/// Locations on a coarse grid half the time, so ties and repeats happen.
fn locs(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-3.0..3.0f64, (-12i32..12).prop_map(|k| k as f64 / 4.0)], 0..=max)
}

fn build(space: &BasedSpace, xs: &[f64]) -> Multiset {
    Multiset::from_points(space.clone(), xs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn metric_axioms(space in space_strategy(), a in locs(4), b in locs(4), c in locs(4)) {
        let (s, u, t) = (build(&space, &a), build(&space, &b), build(&space, &c));
        for spec in specs() {
            let st = distance_phi(&s, &t, spec).unwrap();
            prop_assert_eq!(st, distance_phi(&t, &s, spec).unwrap());
            prop_assert_eq!(st <= 1e-9, s.approx_eq(&t));
            let su = distance_phi(&s, &u, spec).unwrap();
            let ut = distance_phi(&u, &t, spec).unwrap();
            prop_assert!(st <= su + ut + 1e-9);
        }
    }

    #[test]
    fn solver_matches_oracle(space in space_strategy(), a in locs(4), b in locs(4)) {
        let (s, t) = (build(&space, &a), build(&space, &b));
        for spec in specs() {
            let fast = distance_phi(&s, &t, spec).unwrap();
            let slow = brute_force_distance(&s, &t, spec).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-10, "{spec}: {fast} vs {slow}");
        }
    }

    #[test]
    fn sum_and_difference_estimates(
        space in space_strategy(),
        a in locs(3), b in locs(3), extra_s in locs(3), extra_t in locs(3),
    ) {
        prop_assume!(a.len() + b.len() >= 1);
        let (sp, tp) = (build(&space, &a), build(&space, &b));
        let s = sp.sum(&build(&space, &extra_s)).unwrap();
        let t = tp.sum(&build(&space, &extra_t)).unwrap();
        prop_assert_eq!(s.rank(), sp.rank() + extra_s.iter().filter(|&&x| !space.is_base(x)).count());
        let n = (sp.rank() + tp.rank()) as f64;
        for spec in specs() {
            let d = distance_phi(&s, &t, spec).unwrap();
            let dp = distance_phi(&sp, &tp, spec).unwrap();
            let sum = distance_phi(&s.sum(&sp).unwrap(), &t.sum(&tp).unwrap(), spec).unwrap();
            prop_assert!(sum <= d + dp + 1e-9);
            let diff = distance_phi(&s.difference(&sp).unwrap(), &t.difference(&tp).unwrap(), spec).unwrap();
            prop_assert!(diff <= 3.0 * n * (d + dp) + 1e-9);
        }
    }

    #[test]
    fn finite_rank_estimates(pairs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..6), s0 in -3.0..3.0f64) {
        let space = BasedSpace::line(0.0);
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let total: f64 = pairs.iter().map(|(x, y)| (x - y).abs()).sum();
        let repeated = vec![s0; xs.len()];
        for spec in specs() {
            prop_assert!(distance_phi(&build(&space, &xs), &build(&space, &ys), spec).unwrap() <= total + 1e-9);
            let spread = xs.iter().map(|x| (x - s0).abs()).fold(0.0, f64::max);
            let d = distance_phi(&build(&space, &repeated), &build(&space, &xs), spec).unwrap();
            prop_assert!(spread <= 2.0 * d + 1e-9);
        }
    }

    #[test]
    fn intersection_stability(
        a in prop::collection::vec(prop_oneof![0.5..1.5f64, 4.0..5.0f64], 1..5),
        noise in prop::collection::vec(-0.2..0.2f64, 5),
    ) {
        // regions [0, 2] and [3.5, 5.5] are 1.5 apart; basepoint far away
        let space = BasedSpace::line(-50.0);
        let regions = [
            Region::new(Ambient::Line, [(0.0, 2.0)]).unwrap(),
            Region::new(Ambient::Line, [(3.5, 5.5)]).unwrap(),
        ];
        let delta = min_separation(&regions).unwrap();
        prop_assert_eq!(delta, 1.5);
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let (s, t) = (build(&space, &a), build(&space, &b));
        for spec in specs() {
            let d = distance_phi(&s, &t, spec).unwrap();
            prop_assume!(d < delta);
            for r in &regions {
                let (si, ti) = (s.intersect(r).unwrap(), t.intersect(r).unwrap());
                prop_assert_eq!(si.rank(), ti.rank());
                prop_assert!(distance_phi(&si, &ti, spec).unwrap() <= d + 1e-9);
            }
        }
    }

    #[test]
    fn quotient_metric(x in 0.0..TAU, y in 0.0..TAU, z in 0.0..TAU, lo in 0.0..TAU, ext in 0.0..3.0f64) {
        let k = CompactSet::new(Ambient::Circle, [(lo, lo + ext)]).unwrap();
        let d = |a, b| quotient_distance(a, b, &k);
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
        prop_assert!(d(x, y) <= chord(x, y));
    }

    #[test]
    fn lift_projects_back(start in 1.05..1.5f64, len in 3usize..12, up in any::<bool>()) {
        let k = CompactSet::new(Ambient::Line, [(0.0, 1.0)]).unwrap();
        // a path that leaves K, moves, and returns
        let mut path: Vec<Option<f64>> = vec![None];
        for j in 0..len {
            let x = if up { start + j as f64 * 0.1 } else { -(start - 1.0) - j as f64 * 0.1 };
            path.push(Some(x));
        }
        path.push(None);
        let lifted = lift_simple_path(&path, &k).unwrap();
        let space = BasedSpace::quotient(k.clone());
        for (p, l) in path.iter().zip(&lifted) {
            match p {
                Some(x) => prop_assert_eq!(*x, *l),
                None => prop_assert!(space.is_base(*l)),
            }
        }
    }
}

#[test]
fn naive_difference_estimate_fails() {
    let (diff, bound) = naive_difference_counterexample().unwrap();
    assert_eq!(diff, 1.0);
    assert!(bound <= 0.25, "{bound}");
}

#[test]
fn operation_examples() {
    let line = BasedSpace::line(0.0);
    let s = build(&line, &[1.0, 1.0, 2.0]);
    assert_eq!(s.sum(&Multiset::trivial(line.clone())).unwrap(), s);
    assert_eq!(build(&line, &[1.0]).sum(&build(&line, &[1.0])).unwrap().points(), &[(1.0, 2)]);
    assert!(s.difference(&s).unwrap().is_trivial());
    assert_eq!(s.difference(&build(&line, &[1.0])).unwrap(), build(&line, &[1.0, 2.0]));
    assert!(s.difference(&build(&line, &[1.0 + 1e-6])).is_err());
    assert_eq!(s.intersect(&Region::whole(Ambient::Line)).unwrap(), s);
    assert!(s.intersect(&Region::empty(Ambient::Line)).unwrap().is_trivial());
    let u = Region::new(Ambient::Line, [(0.5, 1.5)]).unwrap();
    assert_eq!(s.intersect(&u).unwrap().points(), &[(1.0, 2)]);
}

#[test]
fn forced_pairing_is_basepoint_distance() {
    for space in [BasedSpace::line(0.5), BasedSpace::circle(1.0)] {
        let s = build(&space, &[2.5]);
        for spec in [NormSpec::SchattenP(1.0), NormSpec::SchattenP(3.0), NormSpec::inf(), NormSpec::KyFan(2)] {
            let d = distance_phi(&s, &Multiset::trivial(space.clone()), spec).unwrap();
            assert!((d - space.base_distance(2.5)).abs() < 1e-15);
        }
    }
}

#[test]
fn quotient_examples() {
    let k = CompactSet::new(Ambient::Line, [(0.0, 1.0)]).unwrap();
    assert_eq!(quotient_distance(-1.0, 2.0, &k), 2.0);
    assert_eq!(quotient_distance(0.2, 0.9, &k), 0.0);
    let arc = CompactSet::new(Ambient::Circle, [(0.0, FRAC_PI_2)]).unwrap();
    let (x, y) = (1.5 * PI, 1.75 * PI);
    let via_k = chord(x, 0.0) + chord(0.0, y);
    assert!((quotient_distance(x, y, &arc) - chord(x, y).min(via_k)).abs() < 1e-15);
}
