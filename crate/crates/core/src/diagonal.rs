//! Diagonal unitaries and clustered spectral models.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{UnitaryMatrix, C64};
use crate::phase::{wrap, Phase};

/// `diag(e^{iθ_0}, …, e^{iθ_{D-1}})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalJson")]
pub struct DiagonalUnitary {
    phases: Vec<Phase>,
}

#[derive(Deserialize)]
struct DiagonalJson {
    phases: Vec<Phase>,
}

impl TryFrom<DiagonalJson> for DiagonalUnitary {
    type Error = Error;

    fn try_from(j: DiagonalJson) -> Result<Self> {
        DiagonalUnitary::new(j.phases)
    }
}

impl DiagonalUnitary {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Empty);
        }
        Ok(DiagonalUnitary { phases })
    }

    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&a| Phase::new(a)).collect::<Result<_>>()?)
    }

    pub fn identity(dim: usize) -> Self {
        DiagonalUnitary { phases: vec![Phase::ZERO; dim] }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn angles(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.value()).collect()
    }

    pub fn entries(&self) -> Vec<C64> {
        self.phases.iter().map(|p| p.unit()).collect()
    }

    pub fn to_matrix(&self) -> UnitaryMatrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (k, p) in self.phases.iter().enumerate() {
            m[(k, k)] = p.unit();
        }
        UnitaryMatrix::new_unchecked(m)
    }

    /// Multiplies every entry by `e^{iα}`.
    pub fn rotate(&self, alpha: f64) -> Self {
        DiagonalUnitary { phases: self.phases.iter().map(|p| p.shifted(alpha)).collect() }
    }

    pub fn inverse(&self) -> Self {
        DiagonalUnitary { phases: self.phases.iter().map(|p| p.inverse()).collect() }
    }

    /// Entry-wise product.
    pub fn compose(&self, other: &DiagonalUnitary) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(DiagonalUnitary {
            phases: self
                .phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| a.shifted(b.value()))
                .collect(),
        })
    }

    /// The diagonal whose entry `k` is entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        DiagonalUnitary { phases: perm.iter().map(|&k| self.phases[k]).collect() }
    }
}

/// Finite-multiplicity exceptional phases plus infinite-multiplicity
/// cluster phases, truncated on demand by [`ClusteredModel::materialize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson")]
pub struct ClusteredModel {
    clusters: Vec<Phase>,
    #[serde(default)]
    exceptional: Vec<(Phase, usize)>,
}

#[derive(Deserialize)]
struct ModelJson {
    clusters: Vec<Phase>,
    #[serde(default)]
    exceptional: Vec<(Phase, usize)>,
}

impl TryFrom<ModelJson> for ClusteredModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        ClusteredModel::new(j.clusters, j.exceptional)
    }
}

const DISTINCT_TOL: f64 = 1e-12;

impl ClusteredModel {
    pub fn new(clusters: Vec<Phase>, exceptional: Vec<(Phase, usize)>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::InvalidModel("clusters must be nonempty".into()));
        }
        if let Some((p, _)) = exceptional.iter().find(|(_, m)| *m == 0) {
            return Err(Error::InvalidModel(format!("exceptional phase {p} has multiplicity 0")));
        }
        let all: Vec<Phase> = clusters.iter().copied().chain(exceptional.iter().map(|e| e.0)).collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a.chord(*b) <= DISTINCT_TOL {
                    return Err(Error::InvalidModel(format!("phase {a} appears twice")));
                }
            }
        }
        Ok(ClusteredModel { clusters, exceptional })
    }

    pub fn from_clusters(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&a| Phase::new(a)).collect::<Result<_>>()?, Vec::new())
    }

    pub fn clusters(&self) -> &[Phase] {
        &self.clusters
    }

    pub fn exceptional(&self) -> &[(Phase, usize)] {
        &self.exceptional
    }

    pub fn is_cluster_only(&self) -> bool {
        self.exceptional.is_empty()
    }

    pub fn exceptional_count(&self) -> usize {
        self.exceptional.iter().map(|e| e.1).sum()
    }

    /// Dimension of the truncation with every cluster repeated `n` times.
    pub fn dim(&self, n: usize) -> usize {
        n * self.clusters.len() + self.exceptional_count()
    }

    /// The cluster repetition `n` with `self.dim(n) == dim`, if there is one.
    pub fn repetition_for(&self, dim: usize) -> Option<usize> {
        let rest = dim.checked_sub(self.exceptional_count())?;
        let k = self.clusters.len();
        (rest > 0 && rest % k == 0).then_some(rest / k)
    }

    /// Clusters round-robin `n` times, then each exceptional phase repeated
    /// its multiplicity.
    pub fn materialize(&self, n: usize) -> DiagonalUnitary {
        assert!(n >= 1, "truncation must be positive");
        let mut phases = Vec::with_capacity(self.dim(n));
        for _ in 0..n {
            phases.extend_from_slice(&self.clusters);
        }
        for &(p, mult) in &self.exceptional {
            phases.extend(std::iter::repeat_n(p, mult));
        }
        DiagonalUnitary { phases }
    }

    pub fn rotate(&self, alpha: f64) -> Self {
        ClusteredModel {
            clusters: self.clusters.iter().map(|p| p.shifted(alpha)).collect(),
            exceptional: self.exceptional.iter().map(|&(p, m)| (p.shifted(alpha), m)).collect(),
        }
    }
}

/// Largest gap on the circle between consecutive sorted phases, as
/// `(start, length)`: the gap runs counterclockwise from `start`. Ties go
/// to the lowest starting phase.
pub(crate) fn largest_gaps(angles: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = angles.iter().map(|&a| wrap(a)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let gaps: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let next = if k + 1 < n { sorted[k + 1] } else { sorted[0] + std::f64::consts::TAU };
            (sorted[k], next - sorted[k])
        })
        .collect();
    let best = gaps.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    gaps.into_iter().filter(|g| g.1 >= best - 1e-12).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn materialize_examples() {
        let m = ClusteredModel::from_clusters(&[0.0]).unwrap();
        assert_eq!(m.materialize(3).angles(), vec![0.0; 3]);

        let m = ClusteredModel::new(
            vec![Phase::new(PI / 2.0).unwrap(), Phase::new(-PI / 2.0).unwrap()],
            vec![(Phase::new(PI).unwrap(), 1)],
        )
        .unwrap();
        assert_eq!(m.materialize(2).angles(), vec![PI / 2.0, -PI / 2.0, PI / 2.0, -PI / 2.0, PI]);
        assert_eq!(m.repetition_for(5), Some(2));
        assert_eq!(m.repetition_for(6), None);
    }

    #[test]
    fn model_validation() {
        assert!(ClusteredModel::from_clusters(&[]).is_err());
        assert!(ClusteredModel::from_clusters(&[1.0, 1.0 + 2.0 * PI]).is_err());
        let zero_mult = ClusteredModel::new(vec![Phase::ZERO], vec![(Phase::new(1.0).unwrap(), 0)]);
        assert!(zero_mult.is_err());
        let json = r#"{"clusters":[0.5],"exceptional":[[1.0,3]]}"#;
        let m: ClusteredModel = serde_json::from_str(json).unwrap();
        assert_eq!(m.exceptional_count(), 3);
        assert!(serde_json::from_str::<ClusteredModel>(r#"{"clusters":[]}"#).is_err());
    }

    #[test]
    fn empty_diagonal_rejected() {
        assert!(serde_json::from_str::<DiagonalUnitary>(r#"{"phases":[]}"#).is_err());
    }

    #[test]
    fn gaps_include_wraparound() {
        let g = largest_gaps(&[0.0, 0.5]);
        assert_eq!(g.len(), 1);
        assert!((g[0].0 - 0.5).abs() < 1e-15 && (g[0].1 - (2.0 * PI - 0.5)).abs() < 1e-12);
        let tie = largest_gaps(&[0.0, PI]);
        assert_eq!(tie.len(), 2);
        assert_eq!(tie[0].0, 0.0);
    }
}
