//! Simultaneous generation of disjoint 2×2 blocks.
//!
//! On a host block the arranged base is `e^{iμ}·diag(e^{iδ}, e^{-iδ})`, so
//! `v″ = ṽ·b` with `ṽ` constant on every block and `b` a product of SU(2)
//! blocks. Round `r` conjugates every block of `b` by the `r`-th element of
//! its own chain at once; after `2m` rounds the product is
//! `ṽ^{2m}·diag(targets)`. Then `m` pairs `v″⁻¹ · F v″⁻¹ F*`, with `F`
//! flipping the used blocks, cancel `ṽ^{2m}` and leave the rest of the
//! diagonal untouched. The count is `4m` whatever the number of blocks.

use nalgebra::DMatrix;

use super::certificate::{Certificate, Factor, Meta, Mode, Operand, Pipeline, Sign};
use super::plan::BlockPlan;
use super::verify::verify;
use crate::decomp::{FactorKind, FactorSequence};
use crate::diagonal::DiagonalUnitary;
use crate::error::{Error, Result};
use crate::matrix::{UnitaryMatrix, C64};
use crate::phase::wrap;
use crate::su2::{su2_chain, ConjugateChain, Su2Element};
use crate::DECOMPOSITION_TOL;

const GAP_SLACK: f64 = 1e-12;

fn block_angle(u: &FactorSequence, i: usize) -> f64 {
    u.block_angles.get(i).copied().unwrap_or_else(|| u.factors[i].phases()[i].value())
}

fn with_blocks(dim: usize, blocks: impl IntoIterator<Item = (usize, Su2Element)>) -> DMatrix<C64> {
    let mut m = DMatrix::identity(dim, dim);
    for (j, g) in blocks {
        for r in 0..2 {
            for c in 0..2 {
                m[(j + r, j + c)] = g.matrix()[(r, c)];
            }
        }
    }
    m
}

/// Certificate for `Π_{i ∈ indices} u_i` over the canonical base of `plan`,
/// with the factor at `indices[k]` hosted by block `k` of the plan.
///
/// Requires `m` even, indices pairwise more than one apart, and
/// `|s_{i_k}| ≤ m · chord(γ⁺_k, γ⁻_k)` for every block.
pub fn infsim_generate(u: &FactorSequence, indices: &[usize], plan: &BlockPlan, m: usize) -> Result<Certificate> {
    if u.kind != FactorKind::Product {
        return Err(Error::Malformed("block generation needs a product decomposition".into()));
    }
    if m == 0 || m % 2 == 1 {
        return Err(Error::OddChain(m));
    }
    let dim = plan.dim();
    if let Some(f) = u.factors.first() {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch { left: f.dim(), right: dim });
        }
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[1] - w[0] <= 1 {
            return Err(Error::BlockSpacing { first: w[0], second: w[1] });
        }
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= u.factors.len()) {
        return Err(Error::BlockOutOfRange { position: i, dim });
    }
    if indices.len() > plan.block_count() {
        return Err(Error::DimensionTooSmall {
            dim,
            needed: indices.len(),
            available: plan.block_count(),
            suggested_dim: None,
        });
    }

    let angles: Vec<f64> = indices.iter().map(|&i| block_angle(u, i)).collect();
    let mut chains: Vec<ConjugateChain> = Vec::with_capacity(indices.len());
    for (k, (&a, (gp, gm))) in angles.iter().zip(&plan.pairs).enumerate() {
        let delta = wrap(gp.value() - gm.value()) / 2.0;
        let rhs = m as f64 * gp.chord(*gm);
        if a.abs() > rhs + GAP_SLACK {
            return Err(Error::GapCondition { block: k, lhs: a.abs(), rhs });
        }
        chains.push(su2_chain(delta, a, 2 * m)?);
    }

    let mut target = vec![0.0; dim];
    for (&i, &a) in indices.iter().zip(&angles) {
        target[i] = a;
        target[i + 1] = -a;
    }
    let target = DiagonalUnitary::from_angles(&target)?;

    // W sends host block k to the target block at indices[k]
    let mut to_target = vec![usize::MAX; dim];
    let mut taken = vec![false; dim];
    for (k, &i) in indices.iter().enumerate() {
        to_target[2 * k] = i;
        to_target[2 * k + 1] = i + 1;
        taken[i] = true;
        taken[i + 1] = true;
    }
    let mut free = (0..dim).filter(|&p| !taken[p]);
    for slot in to_target.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = free.next().expect("positions balance");
    }
    let w = UnitaryMatrix::permutation(&to_target);
    let a = plan.host_permutation();
    let wa = w.mul(&a);

    let mut factors = Vec::with_capacity(4 * m);
    for r in 0..2 * m {
        let h = with_blocks(dim, chains.iter().enumerate().map(|(k, c)| (2 * k, c.conjugators[r])));
        let g = w.matrix() * h * a.matrix();
        factors.push(Factor { sign: Sign::Plus, conjugator: UnitaryMatrix::new_unchecked(g) });
    }
    let flip = with_blocks(dim, (0..indices.len()).map(|k| (2 * k, Su2Element::flip())));
    let wfa = UnitaryMatrix::new_unchecked(w.matrix() * flip * a.matrix());
    for _ in 0..m {
        factors.push(Factor { sign: Sign::Minus, conjugator: wa.clone() });
        factors.push(Factor { sign: Sign::Minus, conjugator: wfa.clone() });
    }
    if indices.is_empty() {
        factors.clear();
    }

    let cert = Certificate {
        mode: Mode::Matrix,
        dim,
        base: Operand::Diagonal(plan.canonical.clone()),
        target: Operand::Diagonal(target),
        claimed_bound: 4 * m,
        factors,
        meta: Meta { m, pipeline: Pipeline::Infsim },
    };
    let report = verify(&cert, DECOMPOSITION_TOL);
    if !report.pass {
        return Err(Error::Internal(format!("block generation failed its own check: {report}")));
    }
    Ok(cert)
}
