//! Independent checking of certificates.
//!
//! Only the certificate is consulted. A factor `g·base^{±1}·g*` is a
//! genuine conjugate exactly when `g` is unitary, since then
//! `g·b·g* - g·b·g⁻¹ = g·b·(g* - g⁻¹)`; the per-factor residual is
//! therefore the unitarity defect `‖g g* - I‖_F`. An explicit spectral
//! comparison can be requested on top.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::certificate::{BaseForm, Certificate, Sign};
use crate::length::proj_dist;
use crate::matrix::{eigenvalues, unitarity_defect, UnitaryMatrix, C64};
use crate::UNITARITY_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureClass {
    /// More factors than the claimed bound.
    Count,
    /// A conjugator is not unitary or has the wrong shape.
    Factor,
    /// The product is not projectively equal to the target.
    Product,
    /// Base or target cannot be read at the certificate dimension.
    Base,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub class: FailureClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstFactor {
    pub index: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pass: bool,
    /// `proj_dist(product, target)`; absent when the operands are unreadable.
    pub product_residual: Option<f64>,
    pub worst_factor: Option<WorstFactor>,
    pub count_ok: bool,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn has(&self, class: FailureClass) -> bool {
        self.failures.iter().any(|f| f.class == class)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.pass { "pass" } else { "FAIL" })?;
        if let Some(r) = self.product_residual {
            write!(f, ", product residual {r:.3e}")?;
        }
        if let Some(w) = &self.worst_factor {
            write!(f, ", worst factor {} ({:.3e})", w.index, w.residual)?;
        }
        for fail in &self.failures {
            write!(f, "; {:?}", fail.class)?;
            if let Some(i) = fail.index {
                write!(f, " at factor {i}")?;
            }
            write!(f, ": {}", fail.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub tol: f64,
    /// Also compare each factor's eigenvalues with those of the base.
    pub spectral: bool,
}

pub fn verify(cert: &Certificate, tol: f64) -> Report {
    verify_with(cert, &VerifyOptions { tol, spectral: false })
}

/// Largest distance in a greedy nearest matching of two eigenvalue lists.
fn spectrum_mismatch(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        if k == usize::MAX {
            return f64::INFINITY;
        }
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn verify_with(cert: &Certificate, opts: &VerifyOptions) -> Report {
    let tol = opts.tol;
    let mut failures = Vec::new();
    let count_ok = cert.factors.len() <= cert.claimed_bound;
    if !count_ok {
        failures.push(Failure {
            class: FailureClass::Count,
            index: None,
            detail: format!("{} factors exceed the claimed bound {}", cert.factors.len(), cert.claimed_bound),
        });
    }

    let operand = |name: &str, op: &super::certificate::Operand| match op.to_matrix(cert.dim) {
        Ok(u) => match u.check_unitary(UNITARITY_TOL.max(tol)) {
            Ok(()) => Ok(u),
            Err(e) => Err(format!("{name}: {e}")),
        },
        Err(e) => Err(format!("{name}: {e}")),
    };
    let (base, target) = match (operand("base", &cert.base), operand("target", &cert.target)) {
        (Ok(b), Ok(t)) => (b, t),
        (b, t) => {
            for detail in [b.err(), t.err()].into_iter().flatten() {
                failures.push(Failure { class: FailureClass::Base, index: None, detail });
            }
            return Report { pass: false, product_residual: None, worst_factor: None, count_ok, failures };
        }
    };

    let form = BaseForm::new(&base);
    let base_spectrum = opts.spectral.then(|| eigenvalues(base.matrix()));
    let d = cert.dim;
    let mut acc = DMatrix::<C64>::identity(d, d);
    let mut worst: Option<WorstFactor> = None;
    let mut shape_ok = true;
    for (index, f) in cert.factors.iter().enumerate() {
        let g = f.conjugator.matrix();
        if g.nrows() != d {
            failures.push(Failure {
                class: FailureClass::Factor,
                index: Some(index),
                detail: format!("conjugator has dimension {}, expected {d}", g.nrows()),
            });
            shape_ok = false;
            continue;
        }
        let conj = form.conjugate(g, f.sign);
        let mut residual = unitarity_defect(g);
        if let Some(spec) = &base_spectrum {
            let own: Vec<C64> = eigenvalues(&conj);
            let want: Vec<C64> = match f.sign {
                Sign::Plus => spec.clone(),
                Sign::Minus => spec.iter().map(|z| z.conj()).collect(),
            };
            residual = residual.max(spectrum_mismatch(&own, &want));
        }
        if worst.as_ref().is_none_or(|w| residual > w.residual) {
            worst = Some(WorstFactor { index, residual });
        }
        if residual > tol {
            failures.push(Failure {
                class: FailureClass::Factor,
                index: Some(index),
                detail: format!("conjugacy residual {residual:.3e} exceeds {tol:.1e}"),
            });
        }
        acc *= conj;
    }

    let product_residual = if shape_ok {
        let r = proj_dist(&UnitaryMatrix::new_unchecked(acc), &target).unwrap_or(f64::INFINITY);
        if r.is_nan() || r > tol {
            failures.push(Failure {
                class: FailureClass::Product,
                index: None,
                detail: format!("product differs from the target by {r:.3e} projectively"),
            });
        }
        Some(r)
    } else {
        None
    };

    Report { pass: failures.is_empty(), product_residual, worst_factor: worst, count_ok, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certificate::{Factor, Meta, Mode, Operand, Pipeline};
    use crate::diagonal::DiagonalUnitary;

    fn swap_cert() -> Certificate {
        // conjugating diag(a, b) by the swap gives diag(b, a)
        let base = DiagonalUnitary::from_angles(&[0.4, -1.1]).unwrap();
        Certificate {
            mode: Mode::Matrix,
            dim: 2,
            base: Operand::Diagonal(base),
            target: Operand::Diagonal(DiagonalUnitary::from_angles(&[-1.1, 0.4]).unwrap()),
            claimed_bound: 1,
            factors: vec![Factor { sign: Sign::Plus, conjugator: UnitaryMatrix::permutation(&[1, 0]) }],
            meta: Meta { m: 1, pipeline: Pipeline::Shortcut },
        }
    }

    #[test]
    fn accepts_valid() {
        let r = verify(&swap_cert(), 1e-12);
        assert!(r.pass, "{r}");
        assert!(r.count_ok);
        let spectral = verify_with(&swap_cert(), &VerifyOptions { tol: 1e-10, spectral: true });
        assert!(spectral.pass, "{spectral}");
    }

    #[test]
    fn detects_each_class() {
        let mut c = swap_cert();
        c.claimed_bound = 0;
        let r = verify(&c, 1e-6);
        assert!(!r.pass && !r.count_ok && r.has(FailureClass::Count));

        let mut c = swap_cert();
        let mut g = c.factors[0].conjugator.clone().into_matrix();
        g[(0, 0)] += C64::new(1e-2, 0.0);
        c.factors[0].conjugator = UnitaryMatrix::new_unchecked(g);
        let r = verify(&c, 1e-6);
        assert!(r.has(FailureClass::Factor));
        assert_eq!(r.worst_factor.unwrap().index, 0);

        let mut c = swap_cert();
        c.factors[0].sign = Sign::Minus;
        assert!(verify(&c, 1e-6).has(FailureClass::Product));

        let mut c = swap_cert();
        c.dim = 3;
        assert!(verify(&c, 1e-6).has(FailureClass::Base));
    }

    #[test]
    fn report_json_shape() {
        let v = serde_json::to_value(verify(&swap_cert(), 1e-6)).unwrap();
        for key in ["pass", "product_residual", "worst_factor", "count_ok"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
