//! Products of conjugates in SU(2).
//!
//! With `v = diag(e^{iθ}, e^{-iθ})` and `|φ| ≤ m|θ|` for an even `m`, the
//! diagonal `diag(e^{iφ}, e^{-iφ})` is a product of exactly `m` conjugates of
//! `v`. Pairs are solved along the rotation path `t ↦ v·R(t)vR(t)*`, whose
//! eigenphase runs from `2|θ|` at `t = 0` to `0` at `t = π/2`; longer chains
//! split `φ` into equal parts.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{UnitaryMatrix, C64};
use crate::DECOMPOSITION_TOL;

/// Determinant and unitarity tolerance for [`Su2Element`].
pub const SU2_TOL: f64 = 1e-12;
const ANGLE_TOL: f64 = 1e-12;
const SCAN_INTERVALS: usize = 64;
const MAX_BISECTIONS: usize = 200;

/// A 2×2 unitary with determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnitaryMatrix", into = "UnitaryMatrix")]
pub struct Su2Element(Matrix2<C64>);

impl TryFrom<UnitaryMatrix> for Su2Element {
    type Error = Error;

    fn try_from(u: UnitaryMatrix) -> Result<Self> {
        if u.dim() != 2 {
            return Err(Error::NotSu2(format!("dimension {} is not 2", u.dim())));
        }
        let m = u.matrix();
        Su2Element::new(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
    }
}

impl From<Su2Element> for UnitaryMatrix {
    fn from(g: Su2Element) -> Self {
        UnitaryMatrix::new_unchecked(DMatrix::from_fn(2, 2, |r, c| g.0[(r, c)]))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl Su2Element {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let det = m.determinant();
        if (det - c(1.0, 0.0)).norm() > SU2_TOL {
            return Err(Error::NotSu2(format!("determinant {det} is not 1")));
        }
        let defect = (m * m.adjoint() - Matrix2::identity()).norm();
        if defect > SU2_TOL {
            return Err(Error::NotSu2(format!("unitarity defect {defect:e}")));
        }
        Ok(Su2Element(m))
    }

    pub fn identity() -> Self {
        Su2Element(Matrix2::identity())
    }

    /// `[[0, 1], [-1, 0]]`; conjugation by it swaps the diagonal entries.
    pub fn flip() -> Self {
        Su2Element(Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)))
    }

    /// `diag(e^{iθ}, e^{-iθ})`.
    pub fn diag(theta: f64) -> Self {
        Su2Element(Matrix2::new(C64::from_polar(1.0, theta), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, -theta)))
    }

    /// The real rotation `[[cos t, -sin t], [sin t, cos t]]`.
    pub fn rotation(t: f64) -> Self {
        let (s, co) = t.sin_cos();
        Su2Element(Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Su2Element(self.0.adjoint())
    }

    pub fn mul(&self, other: &Su2Element) -> Self {
        Su2Element(self.0 * other.0)
    }

    /// `self · x · self*`.
    pub fn conjugate(&self, x: &Su2Element) -> Self {
        Su2Element(self.0 * x.0 * self.0.adjoint())
    }

    pub fn eigenphase(&self) -> Result<f64> {
        eigenphase(self)
    }
}

/// The `ψ ∈ [0, π]` with eigenvalues `e^{±iψ}`.
///
/// Evaluated as `atan2(sin ψ, cos ψ)` with `cos ψ = Re tr/2` and
/// `sin ψ = ‖g - g*‖_F / (2√2)`, which stays accurate near `0` and `π`.
pub fn eigenphase(g: &Su2Element) -> Result<f64> {
    let half_trace = g.0.trace().re / 2.0;
    if half_trace.abs() > 1.0 + 1e-9 {
        return Err(Error::NotSu2(format!("half trace {half_trace} outside [-1, 1]")));
    }
    let sin = (g.0 - g.0.adjoint()).norm() / (2.0 * SQRT_2);
    Ok(sin.atan2(half_trace))
}

fn path_phase(v: &Su2Element, t: f64) -> f64 {
    let r = Su2Element::rotation(t);
    eigenphase(&v.mul(&r.conjugate(v))).expect("products of SU(2) elements are SU(2)")
}

/// Unit eigenvector of `p` for the eigenvalue `lambda`, completed to an
/// SU(2) matrix whose first column it is.
fn aligning_matrix(p: &Matrix2<C64>, lambda: C64) -> Su2Element {
    let a = p - Matrix2::identity() * lambda;
    // either row of a annihilates the eigenvector; take the better conditioned
    let from_first = (-a[(0, 1)], a[(0, 0)]);
    let from_second = (-a[(1, 1)], a[(1, 0)]);
    let norm = |x: &(C64, C64)| (x.0.norm_sqr() + x.1.norm_sqr()).sqrt();
    let (x, n) = if norm(&from_first) >= norm(&from_second) {
        (from_first, norm(&from_first))
    } else {
        (from_second, norm(&from_second))
    };
    if n == 0.0 {
        return Su2Element::identity();
    }
    let (x0, x1) = (x.0 / n, x.1 / n);
    Su2Element(Matrix2::new(x0, -x1.conj(), x1, x0.conj()))
}

fn check_range(theta: f64, phi: f64, factor: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::NonFinite(theta));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite(phi));
    }
    if theta.abs() > FRAC_PI_2 + ANGLE_TOL {
        return Err(Error::Su2Range { theta, phi, limit: FRAC_PI_2 });
    }
    let limit = factor * theta.abs();
    if phi.abs() > limit + ANGLE_TOL {
        return Err(Error::Su2Range { theta, phi, limit });
    }
    Ok(())
}

/// Conjugators `(g₁, g₂)` with `g₁vg₁* · g₂vg₂* = diag(e^{iφ}, e^{-iφ})`
/// for `v = diag(e^{iθ}, e^{-iθ})`.
///
/// Requires `|θ| ≤ π/2` and `|φ| ≤ 2|θ|`.
pub fn su2_pair_solve(theta: f64, phi: f64) -> Result<(Su2Element, Su2Element)> {
    check_range(theta, phi, 2.0)?;
    let phi = phi.clamp(-2.0 * theta.abs(), 2.0 * theta.abs());
    let (id, flip) = (Su2Element::identity(), Su2Element::flip());
    if theta == 0.0 || phi == 0.0 {
        return Ok((id, flip));
    }
    if (phi - 2.0 * theta).abs() <= ANGLE_TOL {
        return Ok((id, id));
    }
    if (phi + 2.0 * theta).abs() <= ANGLE_TOL {
        return Ok((flip, flip));
    }

    let v = Su2Element::diag(theta);
    let target = phi.abs();
    let f = |t: f64| path_phase(&v, t) - target;

    // bracket the first sign change; the path need not be monotone
    let step = FRAC_PI_2 / SCAN_INTERVALS as f64;
    let mut bracket = None;
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    for k in 1..=SCAN_INTERVALS {
        let hi = if k == SCAN_INTERVALS { FRAC_PI_2 } else { k as f64 * step };
        let f_hi = f(hi);
        if f_lo >= 0.0 && f_hi <= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::Internal("rotation path has no sign change".into()))?;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let t = if f(a).abs() <= f(b).abs() { a } else { b };

    let r = Su2Element::rotation(t);
    let p = v.mul(&r.conjugate(&v));
    let q = aligning_matrix(&p.0, C64::from_polar(1.0, phi));
    let g1 = q.adjoint();
    let g2 = q.adjoint().mul(&r);

    let residual = (g1.conjugate(&v).mul(&g2.conjugate(&v)).0 - Su2Element::diag(phi).0).norm();
    if residual > DECOMPOSITION_TOL {
        return Err(Error::Internal(format!(
            "pair solve for theta = {theta}, phi = {phi} has residual {residual:e}"
        )));
    }
    Ok((g1, g2))
}

/// `m` conjugators of `diag(e^{iθ}, e^{-iθ})` whose conjugates multiply,
/// in order, to `diag(e^{iφ}, e^{-iφ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateChain {
    pub base_angle: f64,
    pub target_angle: f64,
    pub conjugators: Vec<Su2Element>,
}

impl ConjugateChain {
    /// The conjugates `g_k v g_k*`.
    pub fn factors(&self) -> Vec<Su2Element> {
        let v = Su2Element::diag(self.base_angle);
        self.conjugators.iter().map(|g| g.conjugate(&v)).collect()
    }

    pub fn product(&self) -> Su2Element {
        self.factors().iter().fold(Su2Element::identity(), |acc, f| acc.mul(f))
    }

    /// Frobenius distance of the product from the target diagonal.
    pub fn residual(&self) -> f64 {
        (self.product().0 - Su2Element::diag(self.target_angle).0).norm()
    }
}

/// Chain of exactly `m` conjugates (`m` even) from `m/2` pair solves at
/// `φ/(m/2)` each. Requires `|θ| ≤ π/2` and `|φ| ≤ m|θ|`.
pub fn su2_chain(theta: f64, phi: f64, m: usize) -> Result<ConjugateChain> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::OddChain(m));
    }
    check_range(theta, phi, m as f64)?;
    let pairs = m / 2;
    let part = (phi / pairs as f64).clamp(-2.0 * theta.abs(), 2.0 * theta.abs());
    let (g1, g2) = su2_pair_solve(theta, part)?;
    let mut conjugators = Vec::with_capacity(m);
    for _ in 0..pairs {
        conjugators.push(g1);
        conjugators.push(g2);
    }
    let chain = ConjugateChain { base_angle: theta, target_angle: phi, conjugators };
    let residual = chain.residual();
    if residual > DECOMPOSITION_TOL {
        return Err(Error::Internal(format!("chain residual {residual:e}")));
    }
    Ok(chain)
}

/// `g` placed at rows and columns `(j, j+1)` of the `dim × dim` identity.
pub fn embed_block(g: &Su2Element, j: usize, dim: usize) -> Result<UnitaryMatrix> {
    if j + 1 >= dim {
        return Err(Error::BlockOutOfRange { position: j, dim });
    }
    let mut m = DMatrix::identity(dim, dim);
    for r in 0..2 {
        for col in 0..2 {
            m[(j + r, j + col)] = g.0[(r, col)];
        }
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{su2_angle_by_trace, su2_rotation_closed_form};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn eigenphase_examples() {
        assert_eq!(eigenphase(&Su2Element::identity()).unwrap(), 0.0);
        assert!((eigenphase(&Su2Element::diag(FRAC_PI_2)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((eigenphase(&Su2Element::diag(FRAC_PI_3)).unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert!((eigenphase(&Su2Element::diag(-2.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenphase_matches_trace_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = Su2Element::rotation(rng.random_range(-3.0..3.0))
                .mul(&Su2Element::diag(rng.random_range(-3.0..3.0)))
                .mul(&Su2Element::rotation(rng.random_range(-3.0..3.0)));
            let by_trace = su2_angle_by_trace(g.0.trace().re);
            assert!((eigenphase(&g).unwrap() - by_trace).abs() < 1e-7);
        }
    }

    #[test]
    fn validation() {
        assert!(Su2Element::new(Matrix2::identity() * c(2.0, 0.0)).is_err());
        let phase_i = Matrix2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(Su2Element::new(phase_i).is_err());
        let json = serde_json::to_string(&Su2Element::flip()).unwrap();
        assert_eq!(serde_json::from_str::<Su2Element>(&json).unwrap(), Su2Element::flip());
    }

    #[test]
    fn pair_special_cases() {
        let (id, flip) = (Su2Element::identity(), Su2Element::flip());
        assert_eq!(su2_pair_solve(FRAC_PI_4, FRAC_PI_2).unwrap(), (id, id));
        assert_eq!(su2_pair_solve(0.7, 0.0).unwrap(), (id, flip));
        assert_eq!(su2_pair_solve(0.0, 0.0).unwrap(), (id, flip));
        assert_eq!(su2_pair_solve(0.3, -0.6).unwrap(), (flip, flip));
        assert!(matches!(su2_pair_solve(0.0, 0.1), Err(Error::Su2Range { .. })));
        assert!(matches!(su2_pair_solve(0.3, 0.7), Err(Error::Su2Range { .. })));
        assert!(matches!(su2_pair_solve(2.0, 0.1), Err(Error::Su2Range { .. })));
    }

    #[test]
    fn pair_solve_generic() {
        let (g1, g2) = su2_pair_solve(FRAC_PI_3, FRAC_PI_4).unwrap();
        let v = Su2Element::diag(FRAC_PI_3);
        let prod = g1.conjugate(&v).mul(&g2.conjugate(&v));
        assert!((prod.0 - Su2Element::diag(FRAC_PI_4).0).norm() <= 1e-8);
    }

    #[test]
    fn bisection_matches_closed_form_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let theta: f64 = rng.random_range(0.05..FRAC_PI_2);
            let phi = rng.random_range(0.01..2.0 * theta - 0.01);
            let t = su2_rotation_closed_form(theta, phi);
            let v = Su2Element::diag(theta);
            assert!((path_phase(&v, t) - phi).abs() < 1e-9, "theta {theta} phi {phi}");
        }
    }

    #[test]
    fn chain_examples() {
        let chain = su2_chain(FRAC_PI_8, FRAC_PI_2, 4).unwrap();
        assert_eq!(chain.conjugators.len(), 4);
        assert!(chain.residual() <= 1e-8);

        let full = su2_chain(0.3, 6.0 * 0.3, 6).unwrap();
        assert!(full.conjugators.iter().all(|g| *g == Su2Element::identity()));

        assert!(matches!(su2_chain(0.3, 0.1, 3), Err(Error::OddChain(3))));
        assert!(matches!(su2_chain(0.3, 0.1, 0), Err(Error::OddChain(0))));
        assert!(matches!(su2_chain(0.1, 0.5, 4), Err(Error::Su2Range { .. })));
    }

    #[test]
    fn random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [2, 4, 6, 8] {
            for _ in 0..100 {
                let theta = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
                let bound = m as f64 * theta.abs();
                let phi = rng.random_range(-bound..=bound);
                let chain = su2_chain(theta, phi, m).unwrap();
                assert_eq!(chain.conjugators.len(), m);
                for f in chain.factors() {
                    assert!((f.eigenphase().unwrap() - theta.abs()).abs() <= 1e-8);
                    assert!((f.0.determinant() - c(1.0, 0.0)).norm() <= 1e-12);
                }
                assert!(chain.residual() <= 1e-8, "m {m} theta {theta} phi {phi}");
            }
        }
    }

    #[test]
    fn embedding() {
        assert_eq!(embed_block(&Su2Element::identity(), 1, 4).unwrap(), UnitaryMatrix::identity(4));
        let e = embed_block(&Su2Element::flip(), 0, 3).unwrap();
        let want = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for r in 0..3 {
            for col in 0..3 {
                assert_eq!(e.matrix()[(r, col)], c(want[r][col], 0.0));
            }
        }
        assert!(matches!(embed_block(&Su2Element::flip(), 2, 3), Err(Error::BlockOutOfRange { .. })));

        let a = embed_block(&Su2Element::rotation(0.4), 0, 5).unwrap();
        let b = embed_block(&Su2Element::diag(1.1).mul(&Su2Element::rotation(0.2)), 2, 5).unwrap();
        assert_eq!(a.mul(&b), b.mul(&a));
    }
}
