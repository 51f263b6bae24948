//! Seeded random inputs for property runs.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::diagonal::ClusteredModel;
use crate::matrix::UnitaryMatrix;
use crate::phase::Phase;

/// A unitary from the QR factorization of a matrix with uniform entries.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    UnitaryMatrix::new_unchecked(a.qr().q())
}

pub fn random_angles<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-PI..PI)).collect()
}

/// A cluster-only model with `k` distinct phases at least `sep` apart.
pub fn random_cluster_model<R: Rng + ?Sized>(rng: &mut R, k: usize, sep: f64) -> ClusteredModel {
    loop {
        let angles = random_angles(rng, k);
        let ok = angles
            .iter()
            .enumerate()
            .all(|(i, a)| angles[i + 1..].iter().all(|b| crate::phase::chord(*a, *b) >= sep));
        if ok {
            let clusters = angles.into_iter().map(|a| Phase::new(a).unwrap()).collect();
            return ClusteredModel::new(clusters, Vec::new()).unwrap();
        }
    }
}

/// Zero-sum sequence of dyadic rationals, so that every partial sum is exact.
pub fn dyadic_zero_sum<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let scale = 1.0 / 1024.0;
    let mut ints: Vec<i64> = (0..len.saturating_sub(1)).map(|_| rng.random_range(-1000..=1000)).collect();
    let s: i64 = ints.iter().sum();
    ints.push(-s);
    ints.into_iter().map(|k| k as f64 * scale).collect()
}
