//! End-to-end certification of diagonal targets against clustered bases.

use super::certificate::{Certificate, Factor, Meta, Mode, Operand, Pipeline, Sign};
use super::infsim::infsim_generate;
use super::plan::{pair_hosts, BlockPlan};
use super::verify::verify;
use crate::decomp::{angle_normalize, product_decomposition_angles, split_angles};
use crate::diagonal::{ClusteredModel, DiagonalUnitary};
use crate::error::{Error, Result};
use crate::length::{centering_rotations, ell, ell_ess};
use crate::matrix::UnitaryMatrix;
use crate::phase::{chord, wrap};
use crate::DECOMPOSITION_TOL;

/// Factor budget per unit of `m` when the target balances directly.
pub const BALANCED_CONSTANT: usize = 32;
/// Factor budget per unit of `m` when the target has to be split first.
pub const SPLIT_CONSTANT: usize = 128;
/// Largest dimension tried by [`certify_calkin`].
pub const DEFAULT_TRUNCATION: usize = 64;

const LENGTH_SLACK: f64 = 1e-12;
const ZERO_BLOCK: f64 = 1e-13;

/// Host pairs available at one chord threshold, widest first.
struct HostPool {
    hosts: Vec<(usize, usize)>,
    chords: Vec<f64>,
}

fn host_pools(base: &DiagonalUnitary) -> Vec<HostPool> {
    let a = base.angles();
    let mut thresholds: Vec<f64> = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let c = chord(a[i], a[j]);
            if c > 1e-12 && !thresholds.iter().any(|t| (t - c).abs() <= 1e-12) {
                thresholds.push(c);
            }
        }
    }
    thresholds.sort_by(|x, y| y.total_cmp(x));
    thresholds
        .into_iter()
        .map(|t| {
            let mut hosts = pair_hosts(base, t, usize::MAX);
            let c = |h: &(usize, usize)| chord(a[h.0], a[h.1]);
            hosts.sort_by(|x, y| c(y).total_cmp(&c(x)));
            let chords = hosts.iter().map(c).collect();
            HostPool { hosts, chords }
        })
        .collect()
}

/// Blocks `(index, angle)` split into groups, each generated at one `m`.
struct Schedule {
    m: usize,
    groups: Vec<Vec<(usize, (usize, usize))>>,
    cost: usize,
}

/// Cheapest schedule within `budget`: blocks sorted by `|angle|` are dealt
/// round-robin into `G` groups, and the `r`-th block of every group goes to
/// the `r`-th widest host. Each group costs `4m`.
fn schedule(blocks: &[(usize, f64)], pools: &[HostPool], budget: usize) -> Option<Schedule> {
    let mut order: Vec<(usize, f64)> = blocks.to_vec();
    order.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()));
    let mut best: Option<(usize, usize, usize, usize)> = None; // cost, pool, m, groups
    for (p, pool) in pools.iter().enumerate() {
        for m in (2..=budget / 4).step_by(2) {
            for g in 1..=budget / (4 * m) {
                let cost = 4 * m * g;
                if best.is_some_and(|b| cost >= b.0) {
                    break;
                }
                let fits = order.iter().enumerate().all(|(t, (_, s))| {
                    pool.chords.get(t / g).is_some_and(|c| s.abs() <= m as f64 * c + 1e-12)
                });
                if fits {
                    best = Some((cost, p, m, g));
                    break;
                }
            }
        }
    }
    let (cost, p, m, g) = best?;
    let mut groups = vec![Vec::new(); g];
    for (t, &(i, _)) in order.iter().enumerate() {
        groups[t % g].push((i, pools[p].hosts[t / g]));
    }
    Some(Schedule { m, groups, cost })
}

/// Factors for `w` up to a global phase via normalization, product
/// decomposition and block generation on the even and odd blocks, using at
/// most `budget` factors in total.
fn balanced_factors(w: &DiagonalUnitary, base: &DiagonalUnitary, repetition: usize, budget: usize) -> Result<Vec<Factor>> {
    let norm = angle_normalize(w)?;
    let prod = product_decomposition_angles(&norm.angles)?;
    let pools = host_pools(base);
    let dim = w.dim();
    let mut remaining = budget;
    let mut factors = Vec::new();
    for parity in 0..2 {
        let blocks: Vec<(usize, f64)> = prod
            .block_angles
            .iter()
            .enumerate()
            .filter(|(j, s)| j % 2 == parity && s.abs() > ZERO_BLOCK)
            .map(|(j, &s)| (j, s))
            .collect();
        if blocks.is_empty() {
            continue;
        }
        let sched = schedule(&blocks, &pools, remaining).ok_or_else(|| Error::ScheduleInfeasible {
            dim,
            cost: schedule(&blocks, &pools, 64 * budget).map(|s| s.cost + budget - remaining),
            budget,
        })?;
        remaining -= sched.cost;
        for group in &sched.groups {
            let indices: Vec<usize> = group.iter().map(|g| g.0).collect();
            let hosts: Vec<(usize, usize)> = group.iter().map(|g| g.1).collect();
            let plan = BlockPlan::from_hosts(base, repetition, &hosts);
            factors.extend(infsim_generate(&prod, &indices, &plan, sched.m)?.factors);
        }
    }
    let sigma = UnitaryMatrix::permutation(&norm.permutation);
    for f in &mut factors {
        f.conjugator = sigma.mul(&f.conjugator);
    }
    Ok(factors)
}

/// A permutation `perm` with `perm · base · perm*` a rotation of `u`.
fn shortcut(u: &DiagonalUnitary, base: &DiagonalUnitary) -> Option<Vec<usize>> {
    let (ua, ba) = (u.angles(), base.angles());
    let mut tried: Vec<f64> = Vec::new();
    for &x in &ua {
        let lambda = wrap(ba[0] - x);
        if tried.iter().any(|&t| chord(t, lambda) <= 1e-12) {
            continue;
        }
        tried.push(lambda);
        let rotated: Vec<f64> = ua.iter().map(|a| a + lambda).collect();
        let mut used = vec![false; ua.len()];
        let perm: Option<Vec<usize>> = ba
            .iter()
            .map(|b| {
                let p = (0..rotated.len()).find(|&p| !used[p] && chord(rotated[p], *b) <= 1e-12)?;
                used[p] = true;
                Some(p)
            })
            .collect();
        if perm.is_some() {
            return perm;
        }
    }
    None
}

fn is_retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::NormalizationInfeasible { .. }
            | Error::ScheduleInfeasible { .. }
            | Error::DimensionTooSmall { .. }
            | Error::GapCondition { .. }
    )
}

/// Certificate for the diagonal `u` over the materialization of `v` at the
/// same dimension, with `m` such that `ℓ(u) ≤ m·ℓ_ess(v)`.
///
/// The balanced pipeline claims `32m` factors. If it cannot be carried out
/// at this truncation, the target is centred and split into two
/// alternating halves, each certified on the balanced pipeline with `2m`,
/// and `128m` is claimed.
pub fn certify_diag(u: &DiagonalUnitary, v: &ClusteredModel, m: usize) -> Result<Certificate> {
    certify_diag_with(u, v, m, true)
}

fn certify_diag_with(u: &DiagonalUnitary, v: &ClusteredModel, m: usize, allow_split: bool) -> Result<Certificate> {
    if m == 0 {
        return Err(Error::Malformed("m must be positive".into()));
    }
    let dim = u.dim();
    let n = v
        .repetition_for(dim)
        .ok_or(Error::DimensionMismatch { left: dim, right: v.dim(1) })?;
    let ell_u = ell(u.phases())?;
    let ell_v = ell_ess(v);
    if ell_u > m as f64 * ell_v + LENGTH_SLACK {
        return Err(Error::LengthBound { ell_u, ell_v, m, bound: m as f64 * ell_v });
    }
    let base = v.materialize(n);
    let mut cert = Certificate {
        mode: Mode::Matrix,
        dim,
        base: Operand::Diagonal(base.clone()),
        target: Operand::Diagonal(u.clone()),
        claimed_bound: BALANCED_CONSTANT * m,
        factors: Vec::new(),
        meta: Meta { m, pipeline: Pipeline::Trivial },
    };

    if ell_u <= LENGTH_SLACK {
        return Ok(cert);
    }
    if let Some(perm) = shortcut(u, &base) {
        cert.factors.push(Factor { sign: Sign::Plus, conjugator: UnitaryMatrix::permutation(&perm) });
        cert.meta.pipeline = Pipeline::Shortcut;
        return checked(cert);
    }

    match balanced_factors(u, &base, n, BALANCED_CONSTANT * m) {
        Ok(factors) => {
            cert.factors = factors;
            cert.meta.pipeline = Pipeline::Balanced;
            return checked(cert);
        }
        Err(e) if !allow_split || !is_retryable(&e) => return Err(e),
        Err(_) => {}
    }

    let beta = centering_rotations(&u.angles())[0];
    let centred: Vec<f64> = u.angles().iter().map(|t| wrap(t + beta)).collect();
    let (first, second) = split_angles(&centred);
    let half_budget = BALANCED_CONSTANT * 2 * m;
    let mut factors = Vec::new();
    for half in [first, second] {
        let w = DiagonalUnitary::from_angles(&half)?;
        if ell(w.phases())? <= LENGTH_SLACK {
            continue;
        }
        factors.extend(balanced_factors(&w, &base, n, half_budget)?);
    }
    cert.factors = factors;
    cert.claimed_bound = SPLIT_CONSTANT * m;
    cert.meta.pipeline = Pipeline::Split;
    checked(cert)
}

fn checked(cert: Certificate) -> Result<Certificate> {
    let report = verify(&cert, DECOMPOSITION_TOL);
    if report.pass {
        Ok(cert)
    } else {
        Err(Error::Internal(format!("certificate failed its own check: {report}")))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `m ≥ 1` with `ℓ_ess(u) ≤ m·ℓ_ess(v)`.
pub fn calkin_multiplier(u: &ClusteredModel, v: &ClusteredModel) -> Result<usize> {
    let (lu, lv) = (ell_ess(u), ell_ess(v));
    if lv <= LENGTH_SLACK {
        return if lu <= LENGTH_SLACK { Ok(1) } else { Err(Error::ZeroLength) };
    }
    Ok(((lu / lv - 1e-12).ceil() as usize).max(1))
}

/// Calkin-mode certificate for cluster-only models, with `m` minimal and
/// the truncation chosen among common multiples of the cluster counts up
/// to [`DEFAULT_TRUNCATION`].
pub fn certify_calkin(u: &ClusteredModel, v: &ClusteredModel) -> Result<Certificate> {
    certify_calkin_with(u, v, DEFAULT_TRUNCATION)
}

pub fn certify_calkin_with(u: &ClusteredModel, v: &ClusteredModel, max_dim: usize) -> Result<Certificate> {
    for (name, model) in [("u", u), ("v", v)] {
        if !model.is_cluster_only() {
            return Err(Error::InvalidModel(format!("{name} has exceptional phases; calkin mode needs cluster-only models")));
        }
    }
    let m = calkin_multiplier(u, v)?;
    let (ku, kv) = (u.clusters().len(), v.clusters().len());
    let step = ku / gcd(ku, kv) * kv;
    let dims: Vec<usize> = (1..).map(|k| k * step).take_while(|&d| d <= max_dim.max(step)).collect();

    let mut last = None;
    for allow_split in [false, true] {
        for &d in &dims {
            match certify_diag_with(&u.materialize(d / ku), v, m, allow_split) {
                Ok(mut cert) => {
                    cert.mode = Mode::Calkin;
                    cert.base = Operand::Model(v.clone());
                    cert.target = Operand::Model(u.clone());
                    return Ok(cert);
                }
                Err(e) if is_retryable(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
    }
    Err(last.expect("at least one dimension is tried"))
}
