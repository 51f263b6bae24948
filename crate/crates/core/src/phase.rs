//! Angles on the unit circle.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real angle normalized into `(-π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Phase(f64);

/// Reduces `x` modulo 2π into `(-π, π]`. The antipode is represented by `+π`.
pub fn normalize_phase(x: f64) -> Result<Phase> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Phase(wrap(x)))
}

pub(crate) fn wrap(x: f64) -> f64 {
    let mut r = x.rem_euclid(TAU);
    // rem_euclid can land one ulp past π for odd multiples of π
    if (r - PI).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
        return PI;
    }
    if r > PI {
        r -= TAU;
    }
    r + 0.0
}

/// `|e^{ia} - e^{ib}|`.
pub fn chord(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) / 2.0).sin().abs()
}

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub fn new(x: f64) -> Result<Self> {
        normalize_phase(x)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `e^{i·self}`.
    pub fn unit(self) -> Complex<f64> {
        Complex::from_polar(1.0, self.0)
    }

    pub fn chord(self, other: Phase) -> f64 {
        chord(self.0, other.0)
    }

    pub fn shifted(self, other: f64) -> Phase {
        Phase(wrap(self.0 + other))
    }

    pub fn inverse(self) -> Phase {
        Phase(wrap(-self.0))
    }
}

impl TryFrom<f64> for Phase {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        normalize_phase(x)
    }
}

impl From<Phase> for f64 {
    fn from(p: Phase) -> f64 {
        p.0
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
