//! Dense unitary matrices and their eigendecomposition.

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::diagonal::DiagonalUnitary;
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::{DECOMPOSITION_TOL, UNITARITY_TOL};

pub type C64 = Complex<f64>;

/// A dense square complex matrix that is expected to be unitary.
///
/// Unitarity is not enforced on construction so that tampered or damaged
/// data can still be loaded and inspected; operations that depend on it call
/// [`UnitaryMatrix::check_unitary`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for UnitaryMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let d = j.dim;
        if d == 0 {
            return Err(Error::Malformed("dim must be positive".into()));
        }
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&j.re) {
            return Err(Error::Malformed(format!("re must be a {d}x{d} array")));
        }
        if !rows_ok(&j.im) {
            return Err(Error::Malformed(format!("im must be a {d}x{d} array")));
        }
        let m = DMatrix::from_fn(d, d, |r, c| C64::new(j.re[r][c], j.im[r][c]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Malformed("matrix entries must be finite".into()));
        }
        Ok(UnitaryMatrix { m })
    }
}

impl From<UnitaryMatrix> for MatrixJson {
    fn from(u: UnitaryMatrix) -> Self {
        let d = u.dim();
        MatrixJson {
            dim: d,
            re: (0..d).map(|r| (0..d).map(|c| u.m[(r, c)].re).collect()).collect(),
            im: (0..d).map(|r| (0..d).map(|c| u.m[(r, c)].im).collect()).collect(),
        }
    }
}

impl UnitaryMatrix {
    /// Wraps `m`, rejecting it if it is not unitary within [`UNITARITY_TOL`].
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let u = Self::new_unchecked(m);
        u.check_unitary(UNITARITY_TOL)?;
        Ok(u)
    }

    pub fn new_unchecked(m: DMatrix<C64>) -> Self {
        assert!(m.is_square(), "unitary matrices are square");
        UnitaryMatrix { m }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { m: DMatrix::identity(dim, dim) }
    }

    /// The permutation matrix sending basis vector `e_k` to `e_{perm[k]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        let d = perm.len();
        let mut m = DMatrix::zeros(d, d);
        for (k, &p) in perm.iter().enumerate() {
            m[(p, k)] = C64::new(1.0, 0.0);
        }
        UnitaryMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        UnitaryMatrix { m: &self.m * &other.m }
    }

    /// Frobenius norm of `M M* - I`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { defect, tol })
        }
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &UnitaryMatrix) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        UnitaryMatrix { m }
    }

    fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|r| (0..d).all(|c| r == c || self.m[(r, c)] == C64::new(0.0, 0.0)))
    }
}

pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    (m * m.adjoint() - DMatrix::<C64>::identity(d, d)).norm()
}

/// Unitary `q` and eigenvalues with `m ≈ q · diag(values) · q*`, for `m`
/// close to unitary.
///
/// The complex Schur iteration is tried first with a bounded number of
/// sweeps; it can stall on nearly scalar inputs. The fallback diagonalizes
/// the Cayley transform `i(μ + m)(μ - m)⁻¹`, which is Hermitian for unitary
/// `m` and any `|μ| = 1` outside the spectrum, and reads the eigenvalues back
/// as Rayleigh quotients.
fn unitary_eigen(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<C64>) {
    let d = m.nrows();
    if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, 100 * d.max(4)) {
        let (q, t) = schur.unpack();
        return (q, t.diagonal().iter().copied().collect());
    }
    cayley_eigen(m)
}

fn cayley_eigen(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<C64>) {
    let d = m.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let mut best: Option<(f64, DMatrix<C64>, Vec<C64>)> = None;
    for j in 0..=d {
        let angle = 0.3 + 2.0 * std::f64::consts::PI * j as f64 / (d + 1) as f64;
        let mu = C64::from_polar(1.0, angle);
        let Some(inv) = (&id * mu - m).try_inverse() else { continue };
        let a = (&id * mu + m) * inv * C64::i();
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let q = SymmetricEigen::new(h).eigenvectors;
        let values: Vec<C64> = (0..d).map(|k| (q.column(k).adjoint() * m * q.column(k))[(0, 0)]).collect();
        let residual = (m * &q - &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()))).norm();
        if best.as_ref().is_none_or(|b| residual < b.0) {
            best = Some((residual, q, values));
        }
        if residual <= 1e-12 * (d as f64).sqrt() {
            break;
        }
    }
    let (_, q, values) = best.expect("some shift avoids the spectrum");
    (q, values)
}

/// Eigenvalues of a square complex matrix that is close to unitary.
pub(crate) fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    unitary_eigen(m).1
}

/// Eigenphases of `u`, unsorted.
pub fn eigenphases(u: &UnitaryMatrix) -> Vec<Phase> {
    eigenvalues(&u.m)
        .into_iter()
        .map(|z| Phase::new(z.arg()).expect("finite eigenvalue"))
        .collect()
}

/// Finds a unitary `g` and sorted phases with `u = g · diag(phases) · g*`.
///
/// Diagonal inputs are handled exactly: `g` is then the sorting permutation.
pub fn diagonalize(u: &UnitaryMatrix) -> Result<(UnitaryMatrix, DiagonalUnitary)> {
    u.check_unitary(UNITARITY_TOL)?;
    let d = u.dim();
    let (q, values) = if u.is_diagonal() {
        (DMatrix::identity(d, d), u.m.diagonal().iter().copied().collect::<Vec<_>>())
    } else {
        unitary_eigen(&u.m)
    };
    let phases: Vec<Phase> = values
        .iter()
        .map(|z| Phase::new(z.arg()))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| phases[a].value().total_cmp(&phases[b].value()).then(a.cmp(&b)));

    let g = DMatrix::from_fn(d, d, |r, c| q[(r, order[c])]);
    let sorted = DiagonalUnitary::new(order.iter().map(|&k| phases[k]).collect())?;
    let residual = (&g * sorted.to_matrix().matrix() * g.adjoint() - &u.m).norm();
    if residual > DECOMPOSITION_TOL {
        return Err(Error::Decomposition { residual, tol: DECOMPOSITION_TOL });
    }
    Ok((UnitaryMatrix { m: g }, sorted))
}
