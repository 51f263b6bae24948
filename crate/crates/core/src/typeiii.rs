//! Commutator constructions with finite spectra.
//!
//! [`commutator_witness`] exchanges split halves of the two eigenspaces
//! realizing the largest chord, so that the commutator keeps a spectral
//! spread comparable to that of `u`. [`doubled_commutator`] writes
//! `[v₀,w₀] ⊕ [v₀,w₀]⁻¹` as four signed conjugates of `v₀ ⊕ v₀`.

use serde::{Deserialize, Serialize};

use crate::certify::{
    ng_bound_from_length, verify, Certificate, Factor, Meta, Mode, NgMode, Operand, Pipeline, Sign,
};
use crate::diagonal::DiagonalUnitary;
use crate::error::{Error, Result};
use crate::length::{ell, ell_matrix};
use crate::matrix::UnitaryMatrix;
use crate::phase::Phase;
use crate::{DECOMPOSITION_TOL, UNITARITY_TOL};

#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    Canonical,
    Matrix(UnitaryMatrix),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BasisJson {
    Name(String),
    Matrix(UnitaryMatrix),
}

impl Serialize for Basis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Basis::Canonical => BasisJson::Name("canonical".into()).serialize(s),
            Basis::Matrix(u) => BasisJson::Matrix(u.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match BasisJson::deserialize(d)? {
            BasisJson::Name(n) if n == "canonical" => Ok(Basis::Canonical),
            BasisJson::Name(n) => Err(serde::de::Error::custom(format!("basis: unknown name {n:?}"))),
            BasisJson::Matrix(u) => Ok(Basis::Matrix(u)),
        }
    }
}

/// `basis · diag(phases with multiplicity) · basis*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson")]
pub struct FiniteSpectrumUnitary {
    eigenphases: Vec<(Phase, usize)>,
    basis: Basis,
}

#[derive(Deserialize)]
struct SpectrumJson {
    eigenphases: Vec<(Phase, usize)>,
    #[serde(default = "canonical")]
    basis: Basis,
}

fn canonical() -> Basis {
    Basis::Canonical
}

impl TryFrom<SpectrumJson> for FiniteSpectrumUnitary {
    type Error = Error;

    fn try_from(j: SpectrumJson) -> Result<Self> {
        FiniteSpectrumUnitary::new(j.eigenphases, j.basis)
    }
}

impl FiniteSpectrumUnitary {
    pub fn new(eigenphases: Vec<(Phase, usize)>, basis: Basis) -> Result<Self> {
        if eigenphases.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((p, _)) = eigenphases.iter().find(|e| e.1 == 0) {
            return Err(Error::Malformed(format!("eigenphase {p} has multiplicity 0")));
        }
        for (i, a) in eigenphases.iter().enumerate() {
            if eigenphases[i + 1..].iter().any(|b| a.0.chord(b.0) <= 1e-12) {
                return Err(Error::Malformed(format!("eigenphase {} is listed twice", a.0)));
            }
        }
        let dim: usize = eigenphases.iter().map(|e| e.1).sum();
        if let Basis::Matrix(b) = &basis {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch { left: b.dim(), right: dim });
            }
            b.check_unitary(UNITARITY_TOL)?;
        }
        Ok(FiniteSpectrumUnitary { eigenphases, basis })
    }

    pub fn canonical(eigenphases: Vec<(Phase, usize)>) -> Result<Self> {
        Self::new(eigenphases, Basis::Canonical)
    }

    pub fn eigenphases(&self) -> &[(Phase, usize)] {
        &self.eigenphases
    }

    pub fn dim(&self) -> usize {
        self.eigenphases.iter().map(|e| e.1).sum()
    }

    /// The spectrum in eigenbasis order, each phase repeated.
    pub fn diagonal(&self) -> DiagonalUnitary {
        let phases = self
            .eigenphases
            .iter()
            .flat_map(|&(p, k)| std::iter::repeat_n(p, k))
            .collect();
        DiagonalUnitary::new(phases).expect("nonempty")
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Expresses an operator given in the eigenbasis in the ambient basis.
    fn in_ambient_basis(&self, m: &UnitaryMatrix) -> UnitaryMatrix {
        match &self.basis {
            Basis::Canonical => m.clone(),
            Basis::Matrix(b) => b.mul(m).mul(&b.adjoint()),
        }
    }

    pub fn to_matrix(&self) -> UnitaryMatrix {
        self.in_ambient_basis(&self.diagonal().to_matrix())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorWitness {
    pub v: UnitaryMatrix,
    pub commutator: UnitaryMatrix,
    /// Eigenphases `θ_k - θ_{σ(k)}` of the commutator in the eigenbasis of `u`.
    pub commutator_phases: DiagonalUnitary,
    pub ell_u: f64,
    pub ell_commutator: f64,
    pub ratio: f64,
}

/// Inequality `ℓ(u) ≤ 4·ℓ([u, v])` allowance.
const RATIO_SLACK: f64 = 1e-9;

/// A unitary `v` with `ℓ(u) ≤ 4·ℓ([u, v])`, `[u, v] = u v u* v*`.
///
/// `v` permutes four eigenvectors: halves `p₀′, p₀″` and `p₁′, p₁″` of the
/// eigenspaces of the pair of eigenphases at maximal chord (ties: lowest
/// indices), via `σ = (2, 0, 1, 3)` on `(p₀′, p₀″, p₁′, p₁″)`.
pub fn commutator_witness(u: &FiniteSpectrumUnitary) -> Result<CommutatorWitness> {
    let phases = u.eigenphases();
    let distinct: Vec<Phase> = phases.iter().map(|e| e.0).collect();
    let ell_u = ell(&distinct)?;
    if ell_u <= 1e-12 {
        return Err(Error::Central);
    }
    let mut pair = (0, 1);
    let mut widest = -1.0;
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            let c = phases[i].0.chord(phases[j].0);
            if c > widest + 1e-15 {
                widest = c;
                pair = (i, j);
            }
        }
    }
    for k in [pair.0, pair.1] {
        if phases[k].1 < 2 {
            return Err(Error::Multiplicity { phase: phases[k].0.value(), multiplicity: phases[k].1 });
        }
    }

    let offset = |k: usize| phases[..k].iter().map(|e| e.1).sum::<usize>();
    let (o0, o1) = (offset(pair.0), offset(pair.1));
    let local = [o0, o0 + 1, o1, o1 + 1];
    let sigma = [2, 0, 1, 3];

    // v e_{σ(k)} = e_k on the four positions, identity elsewhere
    let dim = u.dim();
    let mut perm: Vec<usize> = (0..dim).collect();
    for k in 0..4 {
        perm[local[sigma[k]]] = local[k];
    }
    let v_local = UnitaryMatrix::permutation(&perm);

    let theta = u.diagonal().angles();
    let mut comm_angles = vec![0.0; dim];
    for k in 0..4 {
        comm_angles[local[k]] = theta[local[k]] - theta[local[sigma[k]]];
    }
    let commutator_phases = DiagonalUnitary::from_angles(&comm_angles)?;

    let um = u.to_matrix();
    let v = u.in_ambient_basis(&v_local);
    let commutator = um.mul(&v).mul(&um.adjoint()).mul(&v.adjoint());
    let expected = u.in_ambient_basis(&commutator_phases.to_matrix());
    let residual = (commutator.matrix() - expected.matrix()).norm();
    if residual > DECOMPOSITION_TOL {
        return Err(Error::Internal(format!("commutator differs from its spectral form by {residual:e}")));
    }

    let ell_commutator = ell(commutator_phases.phases())?;
    let ratio = ell_u / ell_commutator;
    if ell_u.is_nan() || ell_u > 4.0 * ell_commutator + RATIO_SLACK {
        return Err(Error::Internal(format!("witness ratio {ratio} exceeds 4")));
    }
    Ok(CommutatorWitness { v, commutator, commutator_phases, ell_u, ell_commutator, ratio })
}

fn half_swap(n: usize) -> UnitaryMatrix {
    let perm: Vec<usize> = (0..2 * n).map(|k| (k + n) % (2 * n)).collect();
    UnitaryMatrix::permutation(&perm)
}

/// `v″ = [v₀,w₀] ⊕ [v₀,w₀]⁻¹` and a four-factor certificate for it over
/// the base `v₀ ⊕ v₀`.
///
/// Factors, in order: `v`, then `(w₀ ⊕ 1)·v⁻¹·(w₀ ⊕ 1)*`, whose product is
/// `[v₀,w₀] ⊕ 1`; then `s(w₀ ⊕ 1)·v·(s(w₀ ⊕ 1))*` and `v⁻¹`, whose product
/// is `1 ⊕ [v₀,w₀]⁻¹`, where `s` swaps the halves.
pub fn doubled_commutator(v0: &UnitaryMatrix, w0: &UnitaryMatrix) -> Result<(UnitaryMatrix, Certificate)> {
    if v0.dim() != w0.dim() {
        return Err(Error::DimensionMismatch { left: v0.dim(), right: w0.dim() });
    }
    v0.check_unitary(UNITARITY_TOL)?;
    w0.check_unitary(UNITARITY_TOL)?;
    let n = v0.dim();
    let comm = v0.mul(w0).mul(&v0.adjoint()).mul(&w0.adjoint());
    let target = comm.direct_sum(&comm.adjoint());
    let base = v0.direct_sum(v0);
    let lifted = w0.direct_sum(&UnitaryMatrix::identity(n));
    let id = UnitaryMatrix::identity(2 * n);

    let cert = Certificate {
        mode: Mode::Matrix,
        dim: 2 * n,
        base: Operand::Matrix(base),
        target: Operand::Matrix(target.clone()),
        claimed_bound: 4,
        factors: vec![
            Factor { sign: Sign::Plus, conjugator: id.clone() },
            Factor { sign: Sign::Minus, conjugator: lifted.clone() },
            Factor { sign: Sign::Plus, conjugator: half_swap(n).mul(&lifted) },
            Factor { sign: Sign::Minus, conjugator: id },
        ],
        meta: Meta { m: 1, pipeline: Pipeline::DoubledCommutator },
    };
    let report = verify(&cert, DECOMPOSITION_TOL);
    if !report.pass {
        return Err(Error::Internal(format!("doubled commutator failed its own check: {report}")));
    }
    Ok((target, cert))
}

/// `⌈2048 / ℓ(v)⌉`.
pub fn ng_bound_typeiii(v: &UnitaryMatrix) -> Result<usize> {
    ng_bound_from_length(ell_matrix(v), NgMode::Typeiii)
}
