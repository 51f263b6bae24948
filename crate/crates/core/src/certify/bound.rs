use serde::{Deserialize, Serialize};

use crate::diagonal::ClusteredModel;
use crate::error::{Error, Result};
use crate::length::ell_ess;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgMode {
    Calkin,
    Typeiii,
}

impl NgMode {
    pub fn numerator(self) -> f64 {
        match self {
            NgMode::Calkin => 64.0,
            NgMode::Typeiii => 2048.0,
        }
    }
}

/// `⌈c / length⌉` with `c = 64` (calkin) or `2048` (typeiii). Quotients
/// within `1e-9` of an integer round down to it.
pub fn ng_bound_from_length(length: f64, mode: NgMode) -> Result<usize> {
    if !length.is_finite() {
        return Err(Error::NonFinite(length));
    }
    if length <= 1e-12 {
        return Err(Error::ZeroLength);
    }
    Ok((mode.numerator() / length - 1e-9).ceil() as usize)
}

/// Normal generation bound `⌈64 / ℓ_ess(v)⌉` of a Calkin element.
pub fn ng_bound(v: &ClusteredModel) -> Result<usize> {
    ng_bound_from_length(ell_ess(v), NgMode::Calkin)
}
