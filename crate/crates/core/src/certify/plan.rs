//! Placement of host pairs of base phases at block positions `0, 2, 4, …`.

use serde::Serialize;

use crate::diagonal::{ClusteredModel, DiagonalUnitary};
use crate::error::{Error, Result};
use crate::matrix::UnitaryMatrix;
use crate::phase::{chord, Phase};

const CHORD_SLACK: f64 = 1e-12;
const MAX_SUGGESTED_DIM: usize = 1 << 16;

/// A rearrangement `v″` of a canonical materialization with host pairs
/// `(γ⁺, γ⁻)` at positions `(2k, 2k+1)` and the remainder after them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockPlan {
    /// Cluster repetition of the materialization.
    pub repetition: usize,
    pub canonical: DiagonalUnitary,
    pub arranged: DiagonalUnitary,
    /// Entry `p` of `arranged` is entry `arrangement[p]` of `canonical`.
    pub arrangement: Vec<usize>,
    pub starts: Vec<usize>,
    pub pairs: Vec<(Phase, Phase)>,
}

impl BlockPlan {
    pub(crate) fn from_hosts(canonical: &DiagonalUnitary, repetition: usize, hosts: &[(usize, usize)]) -> Self {
        let d = canonical.dim();
        let mut used = vec![false; d];
        let mut arrangement = Vec::with_capacity(d);
        for &(a, b) in hosts {
            arrangement.extend([a, b]);
            used[a] = true;
            used[b] = true;
        }
        arrangement.extend((0..d).filter(|&p| !used[p]));
        let phases = canonical.phases();
        BlockPlan {
            repetition,
            canonical: canonical.clone(),
            arranged: canonical.permuted(&arrangement),
            arrangement,
            starts: (0..hosts.len()).map(|k| 2 * k).collect(),
            pairs: hosts.iter().map(|&(a, b)| (phases[a], phases[b])).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.canonical.dim()
    }

    pub fn block_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn chords(&self) -> Vec<f64> {
        self.pairs.iter().map(|(a, b)| a.chord(*b)).collect()
    }

    /// The permutation `A` with `A · canonical · A* = arranged`.
    pub fn host_permutation(&self) -> UnitaryMatrix {
        let mut perm = vec![0; self.dim()];
        for (p, &k) in self.arrangement.iter().enumerate() {
            perm[k] = p;
        }
        UnitaryMatrix::permutation(&perm)
    }
}

/// Disjoint pairs of positions of `base` whose phases are at least `gap`
/// apart, at most `limit` of them.
///
/// Phases are grouped into classes of equal value. Each step takes the
/// class with the most unpaired positions that still has a partner at
/// distance `gap`, pairing it with the fullest such partner (ties: larger
/// chord, then lower class index). Positions are consumed in index order.
pub(crate) fn pair_hosts(base: &DiagonalUnitary, gap: f64, limit: usize) -> Vec<(usize, usize)> {
    let mut classes: Vec<(f64, Vec<usize>)> = Vec::new();
    for (p, ph) in base.phases().iter().enumerate() {
        match classes.iter_mut().find(|c| chord(c.0, ph.value()) <= CHORD_SLACK) {
            Some(c) => c.1.push(p),
            None => classes.push((ph.value(), vec![p])),
        }
    }
    let k = classes.len();
    let mut next = vec![0usize; k];
    let remaining = |c: usize, next: &[usize]| classes[c].1.len() - next[c];
    let ok = |a: usize, b: usize| a != b && chord(classes[a].0, classes[b].0) >= gap - CHORD_SLACK;

    let mut pairs = Vec::new();
    while pairs.len() < limit {
        let mut pick: Option<(usize, usize)> = None;
        for a in 0..k {
            if remaining(a, &next) == 0 {
                continue;
            }
            if pick.is_some_and(|(best, _)| remaining(a, &next) <= remaining(best, &next)) {
                continue;
            }
            let partner = (0..k)
                .filter(|&b| ok(a, b) && remaining(b, &next) > 0)
                .fold(None::<usize>, |best, b| match best {
                    None => Some(b),
                    Some(c) => {
                        let (rb, rc) = (remaining(b, &next), remaining(c, &next));
                        let (cb, cc) = (chord(classes[a].0, classes[b].0), chord(classes[a].0, classes[c].0));
                        if rb > rc || (rb == rc && cb > cc + CHORD_SLACK) {
                            Some(b)
                        } else {
                            Some(c)
                        }
                    }
                });
            if let Some(b) = partner {
                pick = Some((a, b));
            }
        }
        let Some((a, b)) = pick else { break };
        pairs.push((classes[a].1[next[a]], classes[b].1[next[b]]));
        next[a] += 1;
        next[b] += 1;
    }
    pairs
}

/// Largest chord between two distinct phases of `base`.
pub(crate) fn max_chord(base: &DiagonalUnitary) -> f64 {
    let a = base.angles();
    let mut best = 0.0f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            best = best.max(chord(a[i], a[j]));
        }
    }
    best
}

/// Arranges the materialization of `v` at dimension `dim` so that
/// `block_count` host pairs, each with chord at least `required_gap`, sit
/// at positions `0, 2, 4, …`.
pub fn arrange_gap_blocks(v: &ClusteredModel, required_gap: f64, block_count: usize, dim: usize) -> Result<BlockPlan> {
    let n = v
        .repetition_for(dim)
        .ok_or(Error::DimensionMismatch { left: dim, right: v.dim(1) })?;
    let canonical = v.materialize(n);
    if block_count == 0 {
        return Ok(BlockPlan::from_hosts(&canonical, n, &[]));
    }
    let widest = max_chord(&canonical);
    if widest < required_gap - CHORD_SLACK {
        return Err(Error::GapInfeasible { max_chord: widest, required: required_gap });
    }
    let hosts = pair_hosts(&canonical, required_gap, block_count);
    if hosts.len() < block_count {
        let fits = |r: usize| pair_hosts(&v.materialize(r), required_gap, block_count).len() >= block_count;
        // doubling then bisection on the repetition
        let (mut lo, mut hi) = (n, n + 1);
        while v.dim(hi) <= MAX_SUGGESTED_DIM && !fits(hi) {
            lo = hi;
            hi *= 2;
        }
        let suggested_dim = (v.dim(hi) <= MAX_SUGGESTED_DIM).then(|| {
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if fits(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            v.dim(hi)
        });
        return Err(Error::DimensionTooSmall { dim, needed: block_count, available: hosts.len(), suggested_dim });
    }
    Ok(BlockPlan::from_hosts(&canonical, n, &hosts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn two_cluster_example() {
        let v = ClusteredModel::from_clusters(&[FRAC_PI_2, -FRAC_PI_2]).unwrap();
        let plan = arrange_gap_blocks(&v, SQRT_2, 2, 8).unwrap();
        let a = plan.arranged.angles();
        assert_eq!(&a[..4], &[FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2]);
        assert_eq!(plan.starts, vec![0, 2]);
        assert!(plan.chords().iter().all(|&c| (c - 2.0).abs() < 1e-15));

        let conj = plan
            .host_permutation()
            .mul(&plan.canonical.to_matrix())
            .mul(&plan.host_permutation().adjoint());
        assert_eq!(conj, plan.arranged.to_matrix());
    }

    #[test]
    fn single_cluster_has_no_gap() {
        let v = ClusteredModel::from_clusters(&[0.0]).unwrap();
        assert!(matches!(arrange_gap_blocks(&v, 0.1, 1, 4), Err(Error::GapInfeasible { .. })));
    }

    #[test]
    fn zero_blocks_is_canonical() {
        let v = ClusteredModel::from_clusters(&[0.0, 1.0, 2.0]).unwrap();
        let plan = arrange_gap_blocks(&v, 1.0, 0, 6).unwrap();
        assert_eq!(plan.arranged, v.materialize(2));
        assert!(plan.starts.is_empty());
    }

    #[test]
    fn too_small_reports_a_dimension() {
        let v = ClusteredModel::from_clusters(&[0.0, PI]).unwrap();
        match arrange_gap_blocks(&v, 1.0, 3, 4) {
            Err(Error::DimensionTooSmall { available: 2, suggested_dim: Some(d), .. }) => assert!(d >= 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(arrange_gap_blocks(&v, 1.0, 1, 5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exceptional_entries_can_host() {
        let v = ClusteredModel::new(vec![Phase::ZERO], vec![(Phase::new(PI).unwrap(), 2)]).unwrap();
        let plan = arrange_gap_blocks(&v, 1.5, 2, 5).unwrap();
        assert_eq!(plan.block_count(), 2);
        assert!(plan.chords().iter().all(|&c| c >= 1.5));
    }

    #[test]
    fn balanced_pairing_uses_every_class() {
        let base = DiagonalUnitary::from_angles(&[0.0, 2.0, -2.0, 0.0, 2.0, -2.0]).unwrap();
        let hosts = pair_hosts(&base, 1.0, usize::MAX);
        assert_eq!(hosts.len(), 3);
        let mut seen: Vec<usize> = hosts.iter().flat_map(|&(a, b)| [a, b]).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3, 4, 5]);
    }
}
