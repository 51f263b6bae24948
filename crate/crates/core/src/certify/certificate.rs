use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagonal::{ClusteredModel, DiagonalUnitary};
use crate::error::{Error, Result};
use crate::matrix::{UnitaryMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Matrix,
    Calkin,
}

/// Which construction produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Projectively scalar target; no factors.
    Trivial,
    /// Target is a rotated permutation of the base; one factor.
    Shortcut,
    Balanced,
    Split,
    Infsim,
    DoubledCommutator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Sign {
    Plus,
    Minus,
}

impl TryFrom<i64> for Sign {
    type Error = Error;

    fn try_from(x: i64) -> Result<Self> {
        match x {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Malformed(format!("sign must be 1 or -1, got {x}"))),
        }
    }
}

impl From<Sign> for i64 {
    fn from(s: Sign) -> i64 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One factor `g · base^{±1} · g*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub sign: Sign,
    pub conjugator: UnitaryMatrix,
}

/// A base or target as stored in a certificate. Models are materialized at
/// the repetition that fills the certificate dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Diagonal(DiagonalUnitary),
    Model(ClusteredModel),
    Matrix(UnitaryMatrix),
}

impl Operand {
    pub fn to_matrix(&self, dim: usize) -> Result<UnitaryMatrix> {
        match self {
            Operand::Diagonal(d) => {
                if d.dim() != dim {
                    return Err(Error::DimensionMismatch { left: d.dim(), right: dim });
                }
                Ok(d.to_matrix())
            }
            Operand::Model(m) => {
                let n = m
                    .repetition_for(dim)
                    .ok_or(Error::DimensionMismatch { left: m.dim(1), right: dim })?;
                Ok(m.materialize(n).to_matrix())
            }
            Operand::Matrix(u) => {
                if u.dim() != dim {
                    return Err(Error::DimensionMismatch { left: u.dim(), right: dim });
                }
                Ok(u.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub m: usize,
    pub pipeline: Pipeline,
}

/// A witness that `target` lies in `(base^G ∪ base^{-G})^k` up to a global
/// phase, with `k = claimed_bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub dim: usize,
    pub base: Operand,
    pub target: Operand,
    pub claimed_bound: usize,
    pub factors: Vec<Factor>,
    pub meta: Meta,
}

impl Certificate {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `Π_i g_i · base^{sign_i} · g_i*`, in order.
    pub fn product(&self) -> Result<UnitaryMatrix> {
        let base = BaseForm::new(&self.base.to_matrix(self.dim)?);
        let mut acc = DMatrix::<C64>::identity(self.dim, self.dim);
        for f in &self.factors {
            if f.conjugator.dim() != self.dim {
                return Err(Error::DimensionMismatch { left: f.conjugator.dim(), right: self.dim });
            }
            acc *= base.conjugate(f.conjugator.matrix(), f.sign);
        }
        Ok(UnitaryMatrix::new_unchecked(acc))
    }
}

/// The base, kept as its diagonal when it has one so that conjugation is a
/// column scaling plus one product.
pub(crate) enum BaseForm {
    Diagonal(Vec<C64>),
    Dense(DMatrix<C64>),
}

impl BaseForm {
    pub(crate) fn new(b: &UnitaryMatrix) -> Self {
        let m = b.matrix();
        let d = m.nrows();
        let diagonal = (0..d).all(|r| (0..d).all(|c| r == c || m[(r, c)] == C64::new(0.0, 0.0)));
        if diagonal {
            BaseForm::Diagonal(m.diagonal().iter().copied().collect())
        } else {
            BaseForm::Dense(m.clone())
        }
    }

    pub(crate) fn power(&self, sign: Sign) -> DMatrix<C64> {
        match (self, sign) {
            (BaseForm::Diagonal(d), Sign::Plus) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())),
            (BaseForm::Diagonal(d), Sign::Minus) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|z| z.conj())))
            }
            (BaseForm::Dense(m), Sign::Plus) => m.clone(),
            (BaseForm::Dense(m), Sign::Minus) => m.adjoint(),
        }
    }

    pub(crate) fn conjugate(&self, g: &DMatrix<C64>, sign: Sign) -> DMatrix<C64> {
        match self {
            BaseForm::Diagonal(d) => {
                let mut gb = g.clone();
                for (c, z) in d.iter().enumerate() {
                    let z = if sign == Sign::Plus { *z } else { z.conj() };
                    gb.column_mut(c).apply(|x| *x *= z);
                }
                gb * g.adjoint()
            }
            BaseForm::Dense(_) => g * self.power(sign) * g.adjoint(),
        }
    }
}
