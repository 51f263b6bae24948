//! Brute-force reference computations.
//!
//! Nothing here shares code with the closed forms it is used to check.

use nalgebra::Complex;
use std::f64::consts::{PI, TAU};

/// `min_λ max_i |1 - λ e^{iθ_i}|` over `samples` equally spaced `λ`.
///
/// The maximum distance from 1 is monotone in the angular distance, so the
/// inner loop compares angles and takes one sine per rotation.
pub fn grid_ell(angles: &[f64], samples: usize) -> f64 {
    let mut best = f64::INFINITY;
    for s in 0..samples {
        let beta = TAU * s as f64 / samples as f64;
        let mut worst = 0.0f64;
        for &a in angles {
            let x = a + beta;
            let d = (x - TAU * (x / TAU).round()).abs();
            worst = worst.max(d);
        }
        best = best.min(worst.min(PI));
    }
    2.0 * (best / 2.0).sin()
}

/// Same quantity, evaluated with complex arithmetic on a coarser grid.
pub fn grid_ell_complex(angles: &[f64], samples: usize) -> f64 {
    (0..samples)
        .map(|s| {
            let lambda = Complex::from_polar(1.0, TAU * s as f64 / samples as f64);
            angles
                .iter()
                .map(|&a| (Complex::new(1.0, 0.0) - lambda * Complex::from_polar(1.0, a)).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Partial products of diagonal factors, accumulated entry-wise in complex
/// arithmetic: element `n` is `factors[0] · … · factors[n]`.
pub fn partial_products(factors: &[Vec<f64>]) -> Vec<Vec<Complex<f64>>> {
    let mut out = Vec::with_capacity(factors.len());
    let Some(first) = factors.first() else {
        return out;
    };
    let mut acc: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0); first.len()];
    for f in factors {
        for (a, &x) in acc.iter_mut().zip(f) {
            *a *= Complex::from_polar(1.0, x);
        }
        out.push(acc.clone());
    }
    out
}

/// `arccos` of the real half-trace; the textbook eigenphase of an SU(2)
/// element.
pub fn su2_angle_by_trace(tr_re: f64) -> f64 {
    (tr_re / 2.0).clamp(-1.0, 1.0).acos()
}

/// Rotation angle `t` for which `v·R(t) v R(t)*` has eigenphase `|φ|`, from
/// `cos²t = sin²(φ/2) / sin²θ`.
pub fn su2_rotation_closed_form(theta: f64, phi: f64) -> f64 {
    ((phi / 2.0).sin().abs() / theta.sin().abs()).clamp(0.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_grids_agree() {
        let a = [0.3, 2.0, -1.1, 2.9];
        assert!((grid_ell(&a, 20_000) - grid_ell_complex(&a, 20_000)).abs() < 1e-9);
    }
}
