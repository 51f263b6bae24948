//! Decompositions of diagonal unitaries into simpler diagonal factors, and
//! the reordering that keeps their block angles small.
//!
//! * The product decomposition writes a determinant-one diagonal as a
//!   product of factors supported on consecutive pairs `(j, j+1)`, factor
//!   `j` carrying `(s_j, -s_j)` with `s_j` the `j`-th prefix sum of phases.
//! * The torus decomposition writes any diagonal as a product of factors
//!   that are constant from position `j` onward.
//!
//! Small prefix sums are obtained with [`greedy_order`] after
//! [`angle_normalize`] has rotated the spectrum to zero phase sum.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::diagonal::DiagonalUnitary;
use crate::error::{Error, Result};
use crate::length::{centering_rotations, ell};
use crate::phase::{wrap, Phase};

/// Tolerance on `|Σ θ|` for inputs that must have zero phase sum.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Product,
    Torus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSequence {
    pub kind: FactorKind,
    pub factors: Vec<DiagonalUnitary>,
    /// Unreduced block angles `s_j` of a product decomposition.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub block_angles: Vec<f64>,
}

impl FactorSequence {
    /// Entry-wise product of all factors.
    pub fn product(&self) -> Option<DiagonalUnitary> {
        let mut it = self.factors.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, f| acc.compose(f).expect("factors share a dimension")))
    }
}

fn check_zero_sum(angles: &[f64]) -> Result<()> {
    let sum: f64 = angles.iter().sum();
    let scale = 1.0 + angles.iter().map(|a| a.abs()).sum::<f64>();
    if sum.abs() > SUM_TOL * scale {
        return Err(Error::NonZeroSum { sum });
    }
    Ok(())
}

/// Product decomposition of a diagonal whose phases sum to zero.
pub fn product_decomposition(u: &DiagonalUnitary) -> Result<FactorSequence> {
    product_decomposition_angles(&u.angles())
}

/// Product decomposition from unreduced angles (their sum must vanish as a
/// real number, not only modulo 2π).
pub fn product_decomposition_angles(angles: &[f64]) -> Result<FactorSequence> {
    if angles.is_empty() {
        return Err(Error::Empty);
    }
    check_zero_sum(angles)?;
    let d = angles.len();
    let mut factors = Vec::with_capacity(d - 1);
    let mut block_angles = Vec::with_capacity(d - 1);
    let mut s = 0.0;
    for j in 0..d - 1 {
        s += angles[j];
        let mut f = vec![0.0; d];
        f[j] = s;
        f[j + 1] = -s;
        factors.push(DiagonalUnitary::from_angles(&f)?);
        block_angles.push(s);
    }
    Ok(FactorSequence { kind: FactorKind::Product, factors, block_angles })
}

/// Torus decomposition: factor 0 is the constant `θ_0`, factor `j ≥ 1` is
/// zero before position `j` and `θ_j - θ_{j-1}` from `j` on.
pub fn torus_decomposition(v: &DiagonalUnitary) -> FactorSequence {
    let a = v.angles();
    let d = a.len();
    let factors = (0..d)
        .map(|j| {
            let step = if j == 0 { a[0] } else { a[j] - a[j - 1] };
            let f: Vec<f64> = (0..d).map(|p| if p < j { 0.0 } else { step }).collect();
            DiagonalUnitary::from_angles(&f).expect("finite angles")
        })
        .collect();
    FactorSequence { kind: FactorKind::Torus, factors, block_angles: Vec::new() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyOrder {
    /// Entry `n` of the reordered sequence is `alphas[permutation[n]]`.
    pub permutation: Vec<usize>,
    /// Picks for which no unused entry of the required sign remained.
    pub stalls: usize,
}

impl GreedyOrder {
    pub fn prefix_sums(&self, alphas: &[f64]) -> Vec<f64> {
        self.permutation
            .iter()
            .scan(0.0, |s, &k| {
                *s += alphas[k];
                Some(*s)
            })
            .collect()
    }
}

/// Reorders a zero-sum sequence so that every prefix sum is bounded by
/// `max |α_j|`: while the running sum is positive the next unused
/// nonpositive entry is taken, otherwise the next unused nonnegative one.
pub fn greedy_order(alphas: &[f64]) -> Result<GreedyOrder> {
    check_zero_sum(alphas)?;
    let nonpos: Vec<usize> = (0..alphas.len()).filter(|&k| alphas[k] <= 0.0).collect();
    let nonneg: Vec<usize> = (0..alphas.len()).filter(|&k| alphas[k] >= 0.0).collect();
    let mut used = vec![false; alphas.len()];
    let (mut i_np, mut i_nn) = (0, 0);
    let next = |list: &[usize], cursor: &mut usize, used: &[bool]| {
        while *cursor < list.len() && used[list[*cursor]] {
            *cursor += 1;
        }
        list.get(*cursor).copied()
    };

    let mut permutation = Vec::with_capacity(alphas.len());
    let mut stalls = 0;
    let mut sum = 0.0;
    for _ in 0..alphas.len() {
        let preferred = if sum > 0.0 {
            next(&nonpos, &mut i_np, &used)
        } else {
            next(&nonneg, &mut i_nn, &used)
        };
        let k = match preferred {
            Some(k) => k,
            None => {
                // only reachable through rounding in the zero-sum check
                stalls += 1;
                let other = if sum > 0.0 {
                    next(&nonneg, &mut i_nn, &used)
                } else {
                    next(&nonpos, &mut i_np, &used)
                };
                other.expect("an unused entry remains")
            }
        };
        used[k] = true;
        permutation.push(k);
        sum += alphas[k];
    }
    Ok(GreedyOrder { permutation, stalls })
}

/// A projective rotation and reordering of a diagonal unitary with zero
/// phase sum and small prefix sums.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleNormalization {
    /// `λ` as an angle: the rotated unitary is `e^{iλ}·u`.
    pub rotation: Phase,
    /// Entry `n` of the ordered diagonal is entry `permutation[n]` of `e^{iλ}u`.
    pub permutation: Vec<usize>,
    /// The ordered, rotated phases; they sum to zero.
    pub angles: Vec<f64>,
    /// Largest `|prefix sum|` of `angles`.
    pub prefix_bound: f64,
    /// `2·ℓ(u) + π/D`.
    pub allowed: f64,
}

impl AngleNormalization {
    pub fn ordered(&self) -> DiagonalUnitary {
        DiagonalUnitary::from_angles(&self.angles).expect("finite angles")
    }
}

/// Rotates `u` to zero phase sum and orders it greedily.
///
/// Every rotation that makes the reduced phases sum to zero is of the form
/// `β + (2πk - r)/D`, with `β` a gap-centring rotation and `r` the phase sum
/// after it; all of them are tried and the one with the smallest achieved
/// prefix bound is kept. Fails if that bound exceeds `2·ℓ(u) + π/D`.
pub fn angle_normalize(u: &DiagonalUnitary) -> Result<AngleNormalization> {
    let theta = u.angles();
    let d = theta.len();
    let ell_u = ell(u.phases())?;
    if ell_u <= 1e-12 {
        return Err(Error::Scalar);
    }
    let allowed = 2.0 * ell_u + PI / d as f64;

    let mut best: Option<(f64, f64, GreedyOrder, Vec<f64>)> = None;
    for beta in centering_rotations(&theta) {
        let r: f64 = theta.iter().map(|t| wrap(t + beta)).sum();
        let k_lo = ((r - PI * d as f64) / TAU).floor() as i64 - 1;
        let k_hi = ((r + PI * d as f64) / TAU).ceil() as i64 + 1;
        for k in k_lo..=k_hi {
            let alpha = beta + (TAU * k as f64 - r) / d as f64;
            let phi: Vec<f64> = theta.iter().map(|t| wrap(t + alpha)).collect();
            let Ok(order) = greedy_order(&phi) else {
                continue;
            };
            let bound = order.prefix_sums(&phi).iter().fold(0.0f64, |m, s| m.max(s.abs()));
            if best.as_ref().is_none_or(|b| bound < b.0 - 1e-15) {
                best = Some((bound, alpha, order, phi));
            }
        }
    }
    let (bound, alpha, order, phi) = best.ok_or(Error::Internal("no zero-sum rotation found".into()))?;
    if bound > allowed + 1e-12 {
        let excess = bound - 2.0 * ell_u;
        return Err(Error::NormalizationInfeasible {
            dim: d,
            achieved: bound,
            allowed,
            suggested_dim: (excess > 1e-9).then(|| (PI / excess).ceil() as usize),
        });
    }
    Ok(AngleNormalization {
        rotation: Phase::new(alpha)?,
        angles: order.permutation.iter().map(|&k| phi[k]).collect(),
        permutation: order.permutation,
        prefix_bound: bound,
        allowed,
    })
}

/// Splits `θ_n = θ'_n + θ''_n` with `θ'_n = θ_n/2 + (-1)^n |θ_n|`, so that
/// both parts alternate in sign on the support of `θ` and
/// `|θ'_n|, |θ''_n| ≤ (3/2)|θ_n|`.
pub fn split_angles(thetas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    thetas
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let first = t / 2.0 + sign * t.abs();
            (first, t - first)
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::partial_products;
    use crate::sample::dyadic_zero_sum;
    use nalgebra::Complex;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, SQRT_2};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn product_examples() {
        let two = product_decomposition_angles(&[0.4, -0.4]).unwrap();
        assert_eq!(two.factors.len(), 1);
        assert!(close(&two.factors[0].angles(), &[0.4, -0.4]));

        let three = product_decomposition_angles(&[FRAC_PI_2, -FRAC_PI_2, 0.0]).unwrap();
        assert!(close(&three.factors[0].angles(), &[FRAC_PI_2, -FRAC_PI_2, 0.0]));
        assert!(close(&three.factors[1].angles(), &[0.0, 0.0, 0.0]));

        let thirds = product_decomposition_angles(&[FRAC_PI_3, FRAC_PI_3, -2.0 * FRAC_PI_3]).unwrap();
        assert!(close(&thirds.factors[0].angles(), &[FRAC_PI_3, -FRAC_PI_3, 0.0]));
        assert!(close(&thirds.factors[1].angles(), &[0.0, 2.0 * FRAC_PI_3, -2.0 * FRAC_PI_3]));
        assert!(close(&thirds.block_angles, &[FRAC_PI_3, 2.0 * FRAC_PI_3]));

        assert!(matches!(product_decomposition_angles(&[0.1, 0.2]), Err(Error::NonZeroSum { .. })));
    }

    #[test]
    fn torus_examples() {
        let zero = torus_decomposition(&DiagonalUnitary::identity(3));
        assert_eq!(zero.factors.len(), 3);
        assert!(zero.factors.iter().all(|f| f.angles().iter().all(|&a| a == 0.0)));

        let t = torus_decomposition(&DiagonalUnitary::from_angles(&[FRAC_PI_2, -FRAC_PI_2]).unwrap());
        assert!(close(&t.factors[0].angles(), &[FRAC_PI_2, FRAC_PI_2]));
        assert!(close(&t.factors[1].angles(), &[0.0, PI]));

        let (a, b, c) = (0.3, -1.0, 2.0);
        let t = torus_decomposition(&DiagonalUnitary::from_angles(&[a, b, c]).unwrap());
        assert!(close(&t.factors[0].angles(), &[a, a, a]));
        assert!(close(&t.factors[1].angles(), &[0.0, b - a, b - a]));
        assert!(close(&t.factors[2].angles(), &[0.0, 0.0, c - b]));
    }

    #[test]
    fn partial_products_follow_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = rng.random_range(2..=128);
            let mut theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let mean = theta.iter().sum::<f64>() / d as f64;
            theta.iter_mut().for_each(|t| *t -= mean);

            let prod = product_decomposition_angles(&theta).unwrap();
            let pp = partial_products(&prod.factors.iter().map(|f| f.angles()).collect::<Vec<_>>());
            for (n, row) in pp.iter().enumerate() {
                let s: f64 = theta[..=n].iter().sum();
                for (p, z) in row.iter().enumerate() {
                    let want = if p <= n {
                        theta[p]
                    } else if p == n + 1 {
                        -s
                    } else {
                        0.0
                    };
                    assert!((z - Complex::from_polar(1.0, want)).norm() < 1e-12);
                }
            }

            let torus = torus_decomposition(&DiagonalUnitary::from_angles(&theta).unwrap());
            let pp = partial_products(&torus.factors.iter().map(|f| f.angles()).collect::<Vec<_>>());
            for (n, row) in pp.iter().enumerate() {
                for (p, z) in row.iter().enumerate() {
                    let want = theta[p.min(n)];
                    assert!((z - Complex::from_polar(1.0, want)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn greedy_examples() {
        let g = greedy_order(&[1.0, -1.0]).unwrap();
        assert_eq!(g.permutation, vec![0, 1]);
        assert_eq!(g.prefix_sums(&[1.0, -1.0]), vec![1.0, 0.0]);

        let a = [1.0, 1.0, -2.0];
        let g = greedy_order(&a).unwrap();
        assert_eq!(g.permutation, vec![0, 2, 1]);
        assert_eq!(g.prefix_sums(&a), vec![1.0, -1.0, 0.0]);

        let z = greedy_order(&[0.0; 5]).unwrap();
        assert_eq!(z.permutation, vec![0, 1, 2, 3, 4]);
        assert!(matches!(greedy_order(&[1.0, 0.5]), Err(Error::NonZeroSum { .. })));
    }

    #[test]
    fn greedy_bound_is_exact_on_dyadic_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let len = rng.random_range(1..=100);
            let a = dyadic_zero_sum(&mut rng, len);
            let g = greedy_order(&a).unwrap();
            assert_eq!(g.stalls, 0);
            let max = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(g.prefix_sums(&a).iter().all(|s| s.abs() <= max));
            let mut seen = g.permutation.clone();
            seen.sort();
            assert_eq!(seen, (0..len).collect::<Vec<_>>());
        }
    }

    #[test]
    fn normalize_antipodal_pair() {
        let u = DiagonalUnitary::from_angles(&[0.0, PI]).unwrap();
        let n = angle_normalize(&u).unwrap();
        let mut a = n.angles.clone();
        a.sort_by(f64::total_cmp);
        assert!(close(&a, &[-FRAC_PI_2, FRAC_PI_2]));
        assert!((n.prefix_bound - FRAC_PI_2).abs() < 1e-12);
        assert!(n.prefix_bound <= 2.0 * SQRT_2);
        assert!(matches!(angle_normalize(&DiagonalUnitary::identity(3)), Err(Error::Scalar)));
    }

    #[test]
    fn normalized_diagonal_is_a_rotated_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let d = rng.random_range(2..=32);
            let mut theta: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mean = theta.iter().sum::<f64>() / d as f64;
            theta.iter_mut().for_each(|t| *t -= mean);
            let u = DiagonalUnitary::from_angles(&theta).unwrap();
            let Ok(n) = angle_normalize(&u) else { continue };
            let rotated = u.rotate(n.rotation.value()).permuted(&n.permutation);
            for (a, b) in rotated.phases().iter().zip(&n.angles) {
                assert!(crate::phase::chord(a.value(), *b) < 1e-12);
            }
            assert!(n.angles.iter().sum::<f64>().abs() < 1e-9);
            let max = n.angles.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(n.prefix_bound <= max + 1e-12);
            let prod = product_decomposition_angles(&n.angles).unwrap();
            assert!(prod.block_angles.iter().all(|s| s.abs() <= n.allowed + 1e-12));
        }
    }

    #[test]
    fn one_sided_outlier_is_infeasible_at_large_dimension() {
        let mut theta = vec![0.0; 64];
        theta[63] = PI - 0.01;
        let err = angle_normalize(&DiagonalUnitary::from_angles(&theta).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NormalizationInfeasible { .. }), "{err}");
    }

    #[test]
    fn split_examples() {
        let (a, b) = split_angles(&[0.1, 0.1]);
        assert!(close(&a, &[0.15, -0.05]) && close(&b, &[-0.05, 0.15]));
        let (a, b) = split_angles(&[0.0; 3]);
        assert_eq!((a, b), (vec![0.0; 3], vec![0.0; 3]));
        let (a, b) = split_angles(&[-0.2]);
        assert!(close(&a, &[0.1]) && close(&b, &[-0.3]));
    }

    proptest! {
        #[test]
        fn split_properties(t in prop::collection::vec(-PI..PI, 0..50)) {
            let (a, b) = split_angles(&t);
            for n in 0..t.len() {
                prop_assert!((a[n] + b[n] - t[n]).abs() <= 4.0 * f64::EPSILON * t[n].abs());
                prop_assert!(a[n].abs() <= 1.5 * t[n].abs() + 1e-15);
                prop_assert!(b[n].abs() <= 1.5 * t[n].abs() + 1e-15);
                if t[n] != 0.0 {
                    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                    prop_assert!(a[n] * s > 0.0 && b[n] * s < 0.0);
                }
            }
        }

        #[test]
        fn torus_product_is_input(t in prop::collection::vec(-PI..PI, 1..40)) {
            let v = DiagonalUnitary::from_angles(&t).unwrap();
            let p = torus_decomposition(&v).product().unwrap();
            for (x, y) in p.phases().iter().zip(v.phases()) {
                prop_assert!(x.chord(*y) < 1e-12);
            }
        }
    }
}
