//! Based metric spaces: the real line, the unit circle, and their quotients
//! by a compact set.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotient::{quotient_distance, CompactSet};
use crate::TOL_BASE;

/// The underlying space before any quotient is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    Line,
    Circle,
}

impl Ambient {
    /// Line: `|x - y|`. Circle (angles in radians): the chord `|e^{ix} - e^{iy}|`.
    pub fn distance(self, x: f64, y: f64) -> f64 {
        match self {
            Ambient::Line => (x - y).abs(),
            Ambient::Circle => chord(x, y),
        }
    }

    pub fn normalize(self, x: f64) -> f64 {
        match self {
            Ambient::Line => x,
            Ambient::Circle => wrap_angle(x),
        }
    }
}

/// Chord length between `e^{ia}` and `e^{ib}`.
pub fn chord(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) * 0.5).sin().abs()
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A metric space with a distinguished basepoint.
///
/// For the quotient variants the basepoint is the class of the compact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasedSpace {
    Line { basepoint: f64 },
    Circle { basepoint: f64 },
    QuotientLine { k: CompactSet },
    QuotientCircle { k: CompactSet },
}

impl BasedSpace {
    pub fn line(basepoint: f64) -> Self {
        BasedSpace::Line { basepoint }
    }

    pub fn circle(basepoint: f64) -> Self {
        BasedSpace::Circle {
            basepoint: wrap_angle(basepoint),
        }
    }

    /// Quotient by `k`; the ambient space is taken from `k`.
    pub fn quotient(k: CompactSet) -> Self {
        match k.ambient() {
            Ambient::Line => BasedSpace::QuotientLine { k },
            Ambient::Circle => BasedSpace::QuotientCircle { k },
        }
    }

    pub fn ambient(&self) -> Ambient {
        match self {
            BasedSpace::Line { .. } | BasedSpace::QuotientLine { .. } => Ambient::Line,
            BasedSpace::Circle { .. } | BasedSpace::QuotientCircle { .. } => Ambient::Circle,
        }
    }

    pub fn compact_set(&self) -> Option<&CompactSet> {
        match self {
            BasedSpace::QuotientLine { k } | BasedSpace::QuotientCircle { k } => Some(k),
            _ => None,
        }
    }

    /// Concrete basepoint coordinate, `None` for quotient spaces.
    pub fn basepoint(&self) -> Option<f64> {
        match *self {
            BasedSpace::Line { basepoint } | BasedSpace::Circle { basepoint } => Some(basepoint),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BasedSpace::Line { basepoint } | BasedSpace::Circle { basepoint } => {
                if basepoint.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Parameter("basepoint must be finite".into()))
                }
            }
            BasedSpace::QuotientLine { k } | BasedSpace::QuotientCircle { k } => {
                k.validate()?;
                if k.ambient() != self.ambient() {
                    return Err(Error::Parameter("compact set lives in the wrong ambient space".into()));
                }
                Ok(())
            }
        }
    }

    pub fn normalize(&self, x: f64) -> f64 {
        self.ambient().normalize(x)
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match self {
            BasedSpace::QuotientLine { k } | BasedSpace::QuotientCircle { k } => {
                quotient_distance(x, y, k)
            }
            _ => self.ambient().distance(x, y),
        }
    }

    /// Distance from `x` to the basepoint (class).
    pub fn base_distance(&self, x: f64) -> f64 {
        match self {
            BasedSpace::Line { basepoint } | BasedSpace::Circle { basepoint } => {
                self.ambient().distance(x, *basepoint)
            }
            BasedSpace::QuotientLine { k } | BasedSpace::QuotientCircle { k } => k.distance_to(x),
        }
    }

    /// True when `x` is absorbed into the basepoint class.
    pub fn is_base(&self, x: f64) -> bool {
        self.base_distance(x) <= TOL_BASE
    }
}
