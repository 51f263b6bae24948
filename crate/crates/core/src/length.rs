//! Projective length `ℓ`, its essential counterpart, and the distances
//! built on them.
//!
//! For a unitary with eigenphases `θ_i`, `ℓ = min_λ max_i |1 - λ e^{iθ_i}|`.
//! Rotating the spectrum so that the complement of its largest circular gap
//! is centred at 1 is optimal, which gives the closed form
//! `2·sin((2π - g_max)/4)`.

use std::f64::consts::TAU;

use crate::diagonal::{largest_gaps, ClusteredModel, DiagonalUnitary};
use crate::error::{Error, Result};
use crate::matrix::{eigenphases, UnitaryMatrix};
use crate::phase::{chord, Phase};

/// `ℓ` of the diagonal unitary with the given eigenphases.
pub fn ell(phases: &[Phase]) -> Result<f64> {
    ell_of_angles(&phases.iter().map(|p| p.value()).collect::<Vec<_>>())
}

pub fn ell_of_angles(angles: &[f64]) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&x) = angles.iter().find(|a| !a.is_finite()) {
        return Err(Error::NonFinite(x));
    }
    let gap = largest_gaps(angles)[0].1;
    Ok((2.0 * ((TAU - gap) / 4.0).sin()).clamp(0.0, 2.0))
}

/// Rotation angle `α` such that `e^{iα}·u` has its spectrum centred at 1 with
/// the largest gap centred at -1. One angle per maximal gap.
pub fn centering_rotations(angles: &[f64]) -> Vec<f64> {
    largest_gaps(angles)
        .into_iter()
        .map(|(start, gap)| -(start + std::f64::consts::PI + gap / 2.0))
        .collect()
}

/// `ℓ_ess`: the length of the cluster part alone.
pub fn ell_ess(model: &ClusteredModel) -> f64 {
    ell(model.clusters()).expect("clusters are nonempty")
}

/// `ℓ` of an arbitrary unitary, from its eigenphases.
pub fn ell_matrix(u: &UnitaryMatrix) -> f64 {
    ell(&eigenphases(u)).expect("dimension is positive")
}

/// Projective distance `ℓ(u v*)`; zero exactly when `u = λ v`.
pub fn proj_dist(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    Ok(ell_matrix(&u.mul(&v.adjoint())))
}

/// `‖1 - u v⁻¹‖_HS` for diagonal `u`, `v`, without the cap at 1.
pub fn hs_norm_diff(u: &DiagonalUnitary, v: &DiagonalUnitary) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    Ok(u.phases()
        .iter()
        .zip(v.phases())
        .map(|(a, b)| chord(a.value(), b.value()).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Truncated Hilbert–Schmidt distance `min{1, ‖1 - u v⁻¹‖_HS}`.
pub fn hs_dist(u: &DiagonalUnitary, v: &DiagonalUnitary) -> Result<f64> {
    Ok(hs_norm_diff(u, v)?.min(1.0))
}

/// `min{1, ‖1 - u v*‖_HS}` for dense unitaries.
pub fn hs_dist_matrix(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    let d = u.dim();
    let diff = nalgebra::DMatrix::identity(d, d) - u.mul(&v.adjoint()).into_matrix();
    Ok(diff.norm().min(1.0))
}

/// Operator norm `‖1 - u v⁻¹‖` for diagonal `u`, `v`.
pub fn op_norm_diff(u: &DiagonalUnitary, v: &DiagonalUnitary) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    Ok(u.phases()
        .iter()
        .zip(v.phases())
        .map(|(a, b)| chord(a.value(), b.value()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid_ell;
    use crate::sample::random_unitary;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, SQRT_2};

    #[test]
    fn ell_fixed_points() {
        assert_eq!(ell_of_angles(&[0.0]).unwrap(), 0.0);
        assert!((ell_of_angles(&[0.0, PI]).unwrap() - SQRT_2).abs() < 1e-12);
        let quarter = ell_of_angles(&[0.0, FRAC_PI_2]).unwrap();
        assert!((quarter - 2.0 * (PI / 8.0).sin()).abs() < 1e-12);
        assert!((quarter - grid_ell(&[0.0, FRAC_PI_2], 100_000)).abs() < 1e-4);
        assert!(matches!(ell_of_angles(&[]), Err(Error::Empty)));
    }

    #[test]
    fn dense_hs_matches_diagonal() {
        let u = DiagonalUnitary::from_angles(&[0.1, -0.05, 0.2]).unwrap();
        let v = DiagonalUnitary::from_angles(&[0.0, 0.1, 0.1]).unwrap();
        let dense = hs_dist_matrix(&u.to_matrix(), &v.to_matrix()).unwrap();
        assert!((dense - hs_dist(&u, &v).unwrap()).abs() < 1e-15);
        assert!(dense < 1.0);
        let far = DiagonalUnitary::from_angles(&[PI, 0.0, 0.0]).unwrap();
        assert_eq!(hs_dist_matrix(&far.to_matrix(), &v.to_matrix()).unwrap(), 1.0);
    }

    #[test]
    fn ell_ess_ignores_exceptional() {
        let m = ClusteredModel::new(vec![Phase::ZERO], vec![(Phase::new(PI).unwrap(), 5)]).unwrap();
        assert_eq!(ell_ess(&m), 0.0);
        let m = ClusteredModel::from_clusters(&[FRAC_PI_2, -FRAC_PI_2]).unwrap();
        assert!((ell_ess(&m) - SQRT_2).abs() < 1e-12);
        let m = ClusteredModel::from_clusters(&[0.0, 2.0 * FRAC_PI_3, -2.0 * FRAC_PI_3]).unwrap();
        assert!((ell_ess(&m) - 3f64.sqrt()).abs() < 1e-12);
        assert!((ell_ess(&m) - grid_ell(&[0.0, 2.0 * FRAC_PI_3, -2.0 * FRAC_PI_3], 100_000)).abs() < 1e-4);
    }

    #[test]
    fn materialized_cluster_model_has_same_length() {
        let m = ClusteredModel::from_clusters(&[0.3, 1.9, -2.2]).unwrap();
        for n in 1..5 {
            assert_eq!(ell(m.materialize(n).phases()).unwrap(), ell_ess(&m));
        }
    }

    #[test]
    fn proj_dist_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 4);
        assert!(proj_dist(&u, &u).unwrap() < 1e-7);
        let rotated = DiagonalUnitary::from_angles(&[0.7; 4]).unwrap().to_matrix().mul(&u);
        assert!(proj_dist(&u, &rotated).unwrap() < 1e-7);
        let flip = DiagonalUnitary::from_angles(&[0.0, PI]).unwrap().to_matrix();
        assert!((proj_dist(&UnitaryMatrix::identity(2), &flip).unwrap() - SQRT_2).abs() < 1e-12);
        assert!(proj_dist(&UnitaryMatrix::identity(2), &UnitaryMatrix::identity(3)).is_err());
    }

    #[test]
    fn hs_examples() {
        let u = DiagonalUnitary::from_angles(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(hs_dist(&u, &u).unwrap(), 0.0);
        let far = DiagonalUnitary::from_angles(&[0.1 + PI, 0.2, 0.3]).unwrap();
        assert_eq!(hs_dist(&u, &far).unwrap(), 1.0);
        let near = DiagonalUnitary::from_angles(&[0.2, 0.2, 0.3]).unwrap();
        assert!((hs_dist(&u, &near).unwrap() - 2.0 * 0.05f64.sin()).abs() < 1e-12);
        assert!(hs_dist(&u, &DiagonalUnitary::identity(2)).is_err());
    }

    fn angles(max: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-PI..PI, 1..max)
    }

    proptest! {
        #[test]
        fn ell_rotation_invariant(a in angles(40), alpha in -10.0f64..10.0) {
            let rotated: Vec<f64> = a.iter().map(|x| x + alpha).collect();
            prop_assert!((ell_of_angles(&a).unwrap() - ell_of_angles(&rotated).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn ell_matches_grid(a in angles(64)) {
            prop_assert!((ell_of_angles(&a).unwrap() - grid_ell(&a, 100_000)).abs() < 1e-4);
        }

        #[test]
        fn hs_dominates_operator_norm(a in angles(20), shift in -1.0f64..1.0) {
            let u = DiagonalUnitary::from_angles(&a).unwrap();
            let v = DiagonalUnitary::from_angles(&a.iter().enumerate().map(|(k, x)| x + shift * k as f64).collect::<Vec<_>>()).unwrap();
            prop_assert!(op_norm_diff(&u, &v).unwrap() <= hs_norm_diff(&u, &v).unwrap() + 1e-15);
        }

        #[test]
        fn hs_triangle_inequality(a in angles(12), b in angles(12), c in angles(12)) {
            let n = a.len().min(b.len()).min(c.len());
            let (u, v, w) = (
                DiagonalUnitary::from_angles(&a[..n]).unwrap(),
                DiagonalUnitary::from_angles(&b[..n]).unwrap(),
                DiagonalUnitary::from_angles(&c[..n]).unwrap(),
            );
            let d = |x: &DiagonalUnitary, y: &DiagonalUnitary| hs_norm_diff(x, y).unwrap();
            prop_assert!((d(&u, &v) - d(&v, &u)).abs() < 1e-12);
            prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-12);
        }
    }

    #[test]
    fn conjugation_and_subadditivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3, 8, 16] {
            for _ in 0..5 {
                let (u, v, g) = (
                    random_unitary(&mut rng, dim),
                    random_unitary(&mut rng, dim),
                    random_unitary(&mut rng, dim),
                );
                let conj = |x: &UnitaryMatrix| g.mul(x).mul(&g.adjoint());
                let d0 = proj_dist(&u, &v).unwrap();
                let d1 = proj_dist(&conj(&u), &conj(&v)).unwrap();
                assert!((d0 - d1).abs() < 1e-9);
                assert!(ell_matrix(&u.mul(&v)) <= ell_matrix(&u) + ell_matrix(&v) + 1e-9);
            }
        }
    }
}
