//! Symmetric norms on finite real sequences.
//!
//! Only the ℓ_p family and the Ky-Fan k-norms are represented. Every
//! evaluation first takes absolute values and sorts them non-increasingly,
//! so the result does not depend on the input order at all.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A symmetric norm descriptor.
///
/// Serialized as a short token: `p1`, `p2`, `p1.5`, `pinf`, `kyfan3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// Φ_p, with `f64::INFINITY` standing for the sup-norm.
    SchattenP(f64),
    /// Sum of the k largest absolute entries.
    KyFan(usize),
}

impl NormSpec {
    pub fn p(p: f64) -> Result<Self> {
        let spec = NormSpec::SchattenP(p);
        spec.validate()?;
        Ok(spec)
    }

    pub const fn inf() -> Self {
        NormSpec::SchattenP(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::SchattenP(p) if p.is_nan() || p < 1.0 => {
                Err(Error::Parameter(format!("p must be >= 1, got {p}")))
            }
            NormSpec::KyFan(0) => Err(Error::Parameter("Ky-Fan index must be >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Exponent when this is a Φ_p norm.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            NormSpec::SchattenP(p) => Some(p),
            NormSpec::KyFan(_) => None,
        }
    }

    pub fn is_sup(&self) -> bool {
        matches!(*self, NormSpec::SchattenP(p) if p.is_infinite())
    }

    /// Evaluates the norm of `seq` padded with zeros.
    pub fn eval(&self, seq: &[f64]) -> Result<f64> {
        self.validate()?;
        let abs: Vec<f64> = seq.iter().map(|x| x.abs()).collect();
        Ok(self.eval_sorted(&sort_desc(abs)))
    }

    /// Evaluates on a sequence already known to be nonnegative and sorted
    /// non-increasingly.
    pub(crate) fn eval_sorted(&self, desc: &[f64]) -> f64 {
        let Some(&max) = desc.first() else {
            return 0.0;
        };
        if max == 0.0 {
            return 0.0;
        }
        match *self {
            NormSpec::SchattenP(p) if p.is_infinite() => max,
            NormSpec::SchattenP(1.0) => desc.iter().rev().sum(),
            NormSpec::SchattenP(p) => {
                let s: f64 = desc.iter().rev().map(|x| (x / max).powf(p)).sum();
                max * s.powf(1.0 / p)
            }
            NormSpec::KyFan(k) => desc.iter().take(k).rev().sum(),
        }
    }
}

/// Evaluates `spec` on `seq`; free-function form of [`NormSpec::eval`].
pub fn eval_norm(spec: NormSpec, seq: &[f64]) -> Result<f64> {
    spec.eval(seq)
}

fn sort_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Non-increasing rearrangement of a nonnegative sequence.
pub fn rearrange_desc(seq: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = seq.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Parameter(format!("negative entry {x}")));
    }
    Ok(sort_desc(seq.to_vec()))
}

/// True iff `xi` is weakly majorized by `eta`: every partial sum of the
/// rearranged `xi` is bounded by the matching partial sum of `eta`.
/// The shorter sequence is padded with zeros.
pub fn weakly_majorizes(eta: &[f64], xi: &[f64]) -> bool {
    let n = eta.len().max(xi.len());
    let pad = |v: &[f64]| {
        let mut w: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        w.resize(n, 0.0);
        sort_desc(w)
    };
    let (eta, xi) = (pad(eta), pad(xi));
    let (mut se, mut sx) = (0.0, 0.0);
    for (e, x) in eta.iter().zip(&xi) {
        se += e;
        sx += x;
        // relative slack absorbs summation-order rounding only
        if sx > se + 1e-14 * se.max(1.0) {
            return false;
        }
    }
    true
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NormSpec::SchattenP(p) if p.is_infinite() => write!(f, "pinf"),
            NormSpec::SchattenP(p) => write!(f, "p{p}"),
            NormSpec::KyFan(k) => write!(f, "kyfan{k}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("unrecognized norm token {s:?}"));
        let spec = if let Some(k) = s.strip_prefix("kyfan") {
            NormSpec::KyFan(k.parse().map_err(|_| bad())?)
        } else if let Some(p) = s.strip_prefix('p') {
            if p == "inf" {
                NormSpec::inf()
            } else {
                let p: f64 = p.parse().map_err(|_| bad())?;
                if !p.is_finite() {
                    return Err(bad());
                }
                NormSpec::SchattenP(p)
            }
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_specs() -> Vec<NormSpec> {
        vec![
            NormSpec::SchattenP(1.0),
            NormSpec::SchattenP(1.5),
            NormSpec::SchattenP(2.0),
            NormSpec::SchattenP(3.0),
            NormSpec::inf(),
            NormSpec::KyFan(1),
            NormSpec::KyFan(2),
            NormSpec::KyFan(3),
        ]
    }

    #[test]
    fn unit_vector_has_norm_one() {
        for spec in all_specs() {
            assert_eq!(spec.eval(&[1.0, 0.0, 0.0]).unwrap(), 1.0, "{spec}");
        }
    }

    #[test]
    fn simple_values() {
        assert_eq!(NormSpec::SchattenP(2.0).eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(NormSpec::inf().eval(&[0.5, -0.25, 0.125]).unwrap(), 0.5);
        assert_eq!(NormSpec::SchattenP(1.0).eval(&[0.5, -0.25, 0.125]).unwrap(), 0.875);
        assert_eq!(NormSpec::KyFan(2).eval(&[0.5, -0.25, 0.125]).unwrap(), 0.75);
        assert_eq!(NormSpec::SchattenP(2.0).eval(&[]).unwrap(), 0.0);
    }

    #[test]
    fn invalid_p_rejected() {
        assert!(NormSpec::SchattenP(0.5).eval(&[1.0]).is_err());
        assert!(NormSpec::p(f64::NAN).is_err());
        assert!(NormSpec::KyFan(0).validate().is_err());
    }

    #[test]
    fn tokens() {
        for (tok, spec) in [
            ("p1", NormSpec::SchattenP(1.0)),
            ("p2", NormSpec::SchattenP(2.0)),
            ("p1.5", NormSpec::SchattenP(1.5)),
            ("pinf", NormSpec::inf()),
            ("kyfan3", NormSpec::KyFan(3)),
        ] {
            assert_eq!(tok.parse::<NormSpec>().unwrap(), spec);
            assert_eq!(spec.to_string(), tok);
        }
        for bad in ["p0.5", "q2", "kyfan0", "p", "pnan", "kyfanx"] {
            assert!(bad.parse::<NormSpec>().is_err(), "{bad}");
        }
        let json = serde_json::to_string(&NormSpec::KyFan(2)).unwrap();
        assert_eq!(json, "\"kyfan2\"");
    }

    #[test]
    fn rearrangement() {
        assert_eq!(rearrange_desc(&[1.0, 3.0, 2.0]).unwrap(), vec![3.0, 2.0, 1.0]);
        assert!(rearrange_desc(&[]).unwrap().is_empty());
        assert_eq!(rearrange_desc(&[0.2, 0.2, 0.1]).unwrap(), vec![0.2, 0.2, 0.1]);
        assert!(rearrange_desc(&[0.1, -0.1]).is_err());
    }

    #[test]
    fn majorization_examples() {
        assert!(weakly_majorizes(&[2.0, 0.0], &[1.0, 1.0]));
        assert!(!weakly_majorizes(&[1.0, 1.0], &[2.0, 0.0]));
        assert!(weakly_majorizes(&[0.3, 0.2, 0.1], &[0.3, 0.2, 0.1]));
        assert!(weakly_majorizes(&[1.0], &[0.5, 0.5]));
    }

    fn spec_strategy() -> impl Strategy<Value = NormSpec> {
        prop_oneof![
            Just(NormSpec::SchattenP(1.0)),
            Just(NormSpec::SchattenP(2.0)),
            Just(NormSpec::inf()),
            (1.0f64..6.0).prop_map(NormSpec::SchattenP),
            (1usize..5).prop_map(NormSpec::KyFan),
        ]
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..10).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..10.0, n),
                prop::collection::vec(0.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn permutation_and_sign_invariance(
            spec in spec_strategy(),
            seq in prop::collection::vec(-10.0f64..10.0, 0..12),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled: Vec<f64> = seq.iter().map(|x| -x).collect();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(spec.eval(&seq).unwrap(), spec.eval(&shuffled).unwrap());
        }

        #[test]
        fn monotone_and_sandwiched(spec in spec_strategy(), (xi, eta) in pair_strategy()) {
            let lo: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| a.min(*b)).collect();
            prop_assert!(spec.eval(&lo).unwrap() <= spec.eval(&eta).unwrap() + 1e-12);

            let v = spec.eval(&xi).unwrap();
            let max = xi.iter().cloned().fold(0.0, f64::max);
            let sum: f64 = xi.iter().sum();
            prop_assert!(max <= v + 1e-12 && v <= sum + 1e-12);
        }

        #[test]
        fn rearrangement_is_one_lipschitz(spec in spec_strategy(), (xi, eta) in pair_strategy()) {
            let xs = rearrange_desc(&xi).unwrap();
            let es = rearrange_desc(&eta).unwrap();
            let sorted_diff: Vec<f64> = xs.iter().zip(&es).map(|(a, b)| (a - b).abs()).collect();
            let raw_diff: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| (a - b).abs()).collect();
            prop_assert!(spec.eval(&sorted_diff).unwrap() <= spec.eval(&raw_diff).unwrap() + 1e-12);
        }

        #[test]
        fn respects_weak_majorization(spec in spec_strategy(), (xi, eta) in pair_strategy()) {
            if weakly_majorizes(&eta, &xi) {
                prop_assert!(spec.eval(&xi).unwrap() <= spec.eval(&eta).unwrap() + 1e-12);
            }
            // averaging is always majorized by the original
            let mean = eta.iter().sum::<f64>() / eta.len() as f64;
            let flat = vec![mean; eta.len()];
            prop_assert!(weakly_majorizes(&eta, &flat));
            prop_assert!(spec.eval(&flat).unwrap() <= spec.eval(&eta).unwrap() + 1e-12);
        }
    }
}
