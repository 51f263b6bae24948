//! The property suite behind `bngkit selftest` and the acceptance tests.
//!
//! Each criterion draws its cases from its own ChaCha stream of the given
//! seed, so results do not depend on scheduling. Criteria run on scoped
//! threads and are reported in order.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{
    arrange_gap_blocks, certify_calkin, certify_diag, infsim_generate, ng_bound, ng_bound_from_length, verify, Certificate,
    Factor, FailureClass, NgMode, Pipeline, Sign, BALANCED_CONSTANT, SPLIT_CONSTANT,
};
use crate::decomp::{greedy_order, product_decomposition_angles, torus_decomposition};
use crate::diagonal::{ClusteredModel, DiagonalUnitary};
use crate::length::{ell_matrix, ell_of_angles};
use crate::matrix::{UnitaryMatrix, C64};
use crate::oracle::{grid_ell, partial_products, su2_angle_by_trace};
use crate::phase::Phase;
use crate::sample::{dyadic_zero_sum, random_angles, random_cluster_model, random_unitary};
use crate::su2::{su2_chain, Su2Element};
use crate::typeiii::{commutator_witness, doubled_commutator, Basis, FiniteSpectrumUnitary};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Closed-form length against the grid oracle.
pub const LENGTH_ORACLE_TOL: f64 = 1e-4;
/// Fixed points of the length function.
pub const LENGTH_EXACT_TOL: f64 = 1e-12;
pub const LENGTH_GRID: usize = 100_000;
/// Partial products of the decompositions.
pub const PARTIAL_PRODUCT_TOL: f64 = 1e-12;
/// Eigenphases and products of SU(2) chains.
pub const SU2_CHAIN_TOL: f64 = 1e-8;
/// Verification of generated certificates.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Slack in `ℓ(target) ≤ k·ℓ(base)`.
pub const CONVERSE_SLACK: f64 = 1e-6;
/// Slack in `ℓ(u) ≤ 4·ℓ([u, v])`.
pub const COMMUTATOR_SLACK: f64 = 1e-9;
/// Verification of doubled commutators.
pub const DOUBLED_TOL: f64 = 1e-8;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "length oracle"),
    (2, "greedy ordering"),
    (3, "decomposition identities"),
    (4, "su2 chains"),
    (5, "block-parallel generation"),
    (6, "certificate constants"),
    (7, "converse bound"),
    (8, "commutator witness"),
    (9, "doubled commutator"),
    (10, "ng_bound fixed points"),
    (11, "verifier adversarial suite"),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    /// Largest observed value of the checked quantity, where there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:>2} {:<28} {:>5} cases", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.cases)?;
        if let Some(w) = self.worst {
            write!(f, ", worst {w:.3e}")?;
        }
        if let Some(t) = self.tolerance {
            write!(f, " (tol {t:.0e})")?;
        }
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        write!(f, " [{:.1}s]", self.seconds)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionReport>,
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let passed = self.criteria.iter().filter(|c| c.pass).count();
        write!(f, "{passed}/{} criteria passed (seed {})", self.criteria.len(), self.seed)
    }
}

/// Tracks the cases of one criterion and the first few failures.
struct Tally {
    cases: usize,
    failures: Vec<String>,
    failed: usize,
    worst: Option<f64>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: Vec::new(), failed: 0, worst: None }
    }

    fn observe(&mut self, x: f64) {
        self.worst = Some(self.worst.map_or(x, |w| w.max(x)));
    }

    fn case(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 3 {
                self.failures.push(what());
            }
        }
    }

    fn finish(self, id: u8, tolerance: Option<f64>, note: String, start: Instant) -> CriterionReport {
        let mut detail = note;
        if self.failed > 0 {
            if !detail.is_empty() {
                detail.push_str("; ");
            }
            detail.push_str(&format!("{} failing, e.g. {}", self.failed, self.failures.join(" | ")));
        }
        CriterionReport {
            id,
            name: name_of(id).to_string(),
            pass: self.failed == 0 && self.cases > 0,
            cases: self.cases,
            worst: self.worst,
            tolerance,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn name_of(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1)
}

fn rng_for(seed: u64, id: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// Runs every criterion in parallel.
pub fn run(seed: u64) -> SelftestReport {
    let criteria: Vec<CriterionReport> = std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|&(id, _)| s.spawn(move || run_criterion(id, seed))).collect();
        handles
            .into_iter()
            .zip(CRITERIA)
            .map(|(h, (id, name))| {
                h.join().unwrap_or_else(|_| CriterionReport {
                    id,
                    name: name.to_string(),
                    pass: false,
                    cases: 0,
                    worst: None,
                    tolerance: None,
                    detail: "panicked".into(),
                    seconds: 0.0,
                })
            })
            .collect()
    });
    SelftestReport { seed, pass: criteria.iter().all(|c| c.pass), criteria }
}

/// Runs a single criterion by number.
///
/// # Panics
/// If `id` is not between 1 and 11.
pub fn run_criterion(id: u8, seed: u64) -> CriterionReport {
    let mut rng = rng_for(seed, id);
    let start = Instant::now();
    match id {
        1 => length_oracle(&mut rng, start),
        2 => greedy_ordering(&mut rng, start),
        3 => decomposition_identities(&mut rng, start),
        4 => su2_chains(&mut rng, start),
        5 => block_parallel(&mut rng, start),
        6 => certificate_constants(&mut rng, start),
        7 => converse_bound(&mut rng, start),
        8 => witness(&mut rng, start),
        9 => doubled(&mut rng, start),
        10 => bound_fixed_points(start),
        11 => adversarial(&mut rng, start),
        _ => panic!("no criterion {id}"),
    }
}

/// A phase multiset: uniform, drawn from a few values, or inside an arc.
fn random_multiset(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => random_angles(rng, len),
        1 => {
            let len = rng.random_range(1..=4);
        let values = random_angles(rng, len);
            (0..len).map(|_| *values.choose(rng).expect("nonempty")).collect()
        }
        _ => {
            let (centre, width) = (rng.random_range(-PI..PI), rng.random_range(0.0..TAU));
            (0..len)
                .map(|_| Phase::new(centre + width * (rng.random::<f64>() - 0.5)).expect("finite").value())
                .collect()
        }
    }
}

fn length_oracle(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    for (angles, want) in [(vec![0.0], 0.0), (vec![0.0, PI], SQRT_2)] {
        let got = ell_of_angles(&angles).expect("nonempty");
        t.case((got - want).abs() <= LENGTH_EXACT_TOL, || format!("ell{angles:?} = {got}, expected {want}"));
    }
    for _ in 0..500 {
        let len = rng.random_range(1..=64);
        let angles = random_multiset(rng, len);
        let closed = ell_of_angles(&angles).expect("nonempty");
        let grid = grid_ell(&angles, LENGTH_GRID);
        let err = (closed - grid).abs();
        t.observe(err);
        t.case(err <= LENGTH_ORACLE_TOL, || format!("{} phases: closed {closed}, grid {grid}", angles.len()));
    }
    t.finish(1, Some(LENGTH_ORACLE_TOL), String::new(), start)
}

fn greedy_ordering(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    for _ in 0..1000 {
        let len = rng.random_range(1..=100);
        let alphas = dyadic_zero_sum(rng, len);
        let bound = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let order = match greedy_order(&alphas) {
            Ok(o) => o,
            Err(e) => {
                t.case(false, || format!("rejected: {e}"));
                continue;
            }
        };
        let mut seen = order.permutation.clone();
        seen.sort_unstable();
        let is_perm = seen.iter().copied().eq(0..alphas.len());
        let worst = order.prefix_sums(&alphas).iter().fold(0.0f64, |m, s| m.max(s.abs()));
        t.case(is_perm && order.stalls == 0 && worst <= bound, || {
            format!("len {}: prefix {worst} vs max {bound}, stalls {}", alphas.len(), order.stalls)
        });
    }
    t.finish(2, None, "prefix sums compared exactly".into(), start)
}

/// Largest entry-wise distance between complex vectors.
fn max_entry_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn decomposition_identities(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    for _ in 0..500 {
        let d = rng.random_range(2..=128);
        let raw = random_angles(rng, d);
        let mean = raw.iter().sum::<f64>() / d as f64;
        let theta: Vec<f64> = raw.iter().map(|a| a - mean).collect();
        let unit = |x: f64| C64::from_polar(1.0, x);

        // product: after n factors, θ_k for k < n, then -(θ_0 + … + θ_{n-1})
        let mut worst = 0.0f64;
        match product_decomposition_angles(&theta) {
            Ok(seq) => {
                let partial = partial_products(&seq.factors.iter().map(|f| f.angles()).collect::<Vec<_>>());
                let mut s = 0.0;
                for (n, got) in (1..).zip(&partial) {
                    s += theta[n - 1];
                    let want: Vec<C64> = (0..d)
                        .map(|k| unit(if k < n { theta[k] } else if k == n { -s } else { 0.0 }))
                        .collect();
                    worst = worst.max(max_entry_diff(got, &want));
                }
            }
            Err(e) => {
                t.case(false, || format!("product rejected: {e}"));
                continue;
            }
        }

        // torus: after n factors, θ_k for k < n and θ_{n-1} from there on
        let u = DiagonalUnitary::from_angles(&theta).expect("finite");
        let seq = torus_decomposition(&u);
        let partial = partial_products(&seq.factors.iter().map(|f| f.angles()).collect::<Vec<_>>());
        for (n, got) in (1..).zip(&partial) {
            let want: Vec<C64> = (0..d).map(|k| unit(theta[k.min(n - 1)])).collect();
            worst = worst.max(max_entry_diff(got, &want));
        }
        t.observe(worst);
        t.case(worst <= PARTIAL_PRODUCT_TOL, || format!("D = {d}: deviation {worst:e}"));
    }
    t.finish(3, Some(PARTIAL_PRODUCT_TOL), String::new(), start)
}

fn su2_chains(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    for m in [2, 4, 6, 8] {
        for _ in 0..200 {
            let theta = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let phi = rng.random_range(-1.0..=1.0) * m as f64 * theta.abs();
            let chain = match su2_chain(theta, phi, m) {
                Ok(c) => c,
                Err(e) => {
                    t.case(false, || format!("m = {m}, θ = {theta}, φ = {phi}: {e}"));
                    continue;
                }
            };
            let factors = chain.factors();
            let phase_err = factors
                .iter()
                .map(|f| (su2_angle_by_trace(f.matrix().trace().re) - theta.abs()).abs())
                .fold(0.0, f64::max);
            let product = factors.iter().fold(Su2Element::identity(), |acc, f| acc.mul(f));
            let want = nalgebra::Matrix2::new(C64::from_polar(1.0, phi), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, -phi));
            let product_err = (product.matrix() - want).norm();
            let err = phase_err.max(product_err);
            t.observe(err);
            t.case(factors.len() == m && err <= SU2_CHAIN_TOL, || {
                format!("m = {m}, θ = {theta}, φ = {phi}: {} factors, error {err:e}", factors.len())
            });
        }
    }
    t.finish(4, Some(SU2_CHAIN_TOL), String::new(), start)
}

/// A zero-sum angle sequence of length `d` whose prefix sums are at most
/// `limit` in absolute value.
fn bounded_prefix_angles(rng: &mut ChaCha8Rng, d: usize, limit: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = raw.iter().sum::<f64>() / d as f64;
    let mut theta: Vec<f64> = raw.iter().map(|a| a - mean).collect();
    let top = theta.iter().scan(0.0, |s, a| {
        *s += a;
        Some(f64::abs(*s))
    });
    let top = top.fold(0.0, f64::max);
    if top > 0.0 {
        let scale = limit / top;
        theta.iter_mut().for_each(|a| *a *= scale);
    }
    theta
}

fn block_parallel(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let sep = 0.5;
    for _ in 0..100 {
        let k = rng.random_range(2..=4);
        let v = random_cluster_model(rng, k, sep);
        let d = k * rng.random_range(4usize.div_ceil(k)..=64 / k);
        let m = 2 * rng.random_range(1..=4);
        let theta = bounded_prefix_angles(rng, d, 0.99 * m as f64 * sep);
        let seq = product_decomposition_angles(&theta).expect("zero sum");
        let blocks = d / 4;

        let mut counts = Vec::new();
        let mut worst = 0.0f64;
        let mut errors = Vec::new();
        for count in [1, blocks] {
            let indices: Vec<usize> = (0..count).map(|b| 2 * b).collect();
            let result = arrange_gap_blocks(&v, sep, count, d).and_then(|plan| infsim_generate(&seq, &indices, &plan, m));
            match result {
                Ok(cert) => {
                    let report = verify(&cert, CERTIFICATE_TOL);
                    worst = worst.max(report.product_residual.unwrap_or(f64::INFINITY));
                    if !report.pass {
                        errors.push(format!("{count} blocks: {report}"));
                    }
                    counts.push(cert.len());
                }
                Err(e) => errors.push(format!("{count} blocks: {e}")),
            }
        }
        t.observe(worst);
        let ok = errors.is_empty() && counts.len() == 2 && counts[0] == counts[1] && counts[0] <= 4 * m;
        t.case(ok, || format!("D = {d}, m = {m}: counts {counts:?}, {}", errors.join(", ")));
    }
    t.finish(5, Some(CERTIFICATE_TOL), String::new(), start)
}

/// A cluster-only model with `k` clusters spread over an arc of random width.
fn arc_model(rng: &mut ChaCha8Rng, k: usize, min_width: f64) -> ClusteredModel {
    let centre = rng.random_range(-PI..PI);
    let width = rng.random_range(min_width..TAU);
    loop {
        let angles: Vec<f64> = (0..k).map(|_| centre + width * (rng.random::<f64>() - 0.5)).collect();
        if let Ok(model) = ClusteredModel::from_clusters(&angles) {
            return model;
        }
    }
}

fn check_constant(cert: &Certificate) -> std::result::Result<f64, String> {
    let m = cert.meta.m;
    let limit = match cert.meta.pipeline {
        Pipeline::Split => SPLIT_CONSTANT * m,
        _ => BALANCED_CONSTANT * m,
    };
    let report = verify(cert, CERTIFICATE_TOL);
    if !report.pass {
        return Err(format!("verification: {report}"));
    }
    if cert.len() > limit || cert.claimed_bound > limit {
        return Err(format!("{:?} with m = {m}: {} factors, limit {limit}", cert.meta.pipeline, cert.len()));
    }
    Ok(report.product_residual.unwrap_or(0.0))
}

fn certificate_constants(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let mut tally = [0usize; 4];
    let mut max_m = 0;
    while t.cases < 100 {
        let len = rng.random_range(2..=4);
        let u = arc_model(rng, len, 0.0);
        let len = rng.random_range(2..=4);
        let v = arc_model(rng, len, 0.3);
        let m = crate::certify::calkin_multiplier(&u, &v).expect("v has positive length");
        if m > 8 {
            continue;
        }
        max_m = max_m.max(m);
        match certify_calkin(&u, &v) {
            Ok(cert) => {
                tally[pipeline_slot(cert.meta.pipeline)] += 1;
                let r = check_constant(&cert);
                if let Ok(x) = r {
                    t.observe(x);
                }
                t.case(cert.dim <= 64 && r.is_ok(), || format!("dim {}: {}", cert.dim, r.err().unwrap_or_default()));
            }
            Err(e) => t.case(false, || format!("calkin u = {:?}, v = {:?}: {e}", u.clusters(), v.clusters())),
        }
    }
    let mut split_runs = 0;
    for _ in 0..25 {
        let v = random_cluster_model(rng, 2, 1.0);
        let kv = 2;
        let d = kv * rng.random_range(6..=32);
        // all phases at zero except one large outlier: one-sided after centring
        let mut angles = vec![0.0; d];
        let outliers = rng.random_range(1..=2);
        for a in angles.iter_mut().take(outliers) {
            *a = rng.random_range(2.0..PI);
        }
        angles.shuffle(rng);
        let u = DiagonalUnitary::from_angles(&angles).expect("finite");
        let m = ((ell_of_angles(&angles).expect("nonempty") / crate::length::ell_ess(&v) - 1e-12).ceil() as usize).max(1);
        match certify_diag(&u, &v, m) {
            Ok(cert) => {
                if cert.meta.pipeline == Pipeline::Split {
                    split_runs += 1;
                }
                tally[pipeline_slot(cert.meta.pipeline)] += 1;
                let r = check_constant(&cert);
                if let Ok(x) = r {
                    t.observe(x);
                }
                t.case(r.is_ok(), || r.err().unwrap_or_default());
            }
            Err(e) => t.case(false, || format!("one-sided D = {d}: {e}")),
        }
    }
    if split_runs == 0 {
        t.case(false, || "no one-sided run took the split path".into());
    }
    let note = format!(
        "pipelines trivial/shortcut/balanced/split = {}/{}/{}/{}, max m {max_m}",
        tally[0], tally[1], tally[2], tally[3]
    );
    t.finish(6, Some(CERTIFICATE_TOL), note, start)
}

fn pipeline_slot(p: Pipeline) -> usize {
    match p {
        Pipeline::Trivial => 0,
        Pipeline::Shortcut => 1,
        Pipeline::Split => 3,
        _ => 2,
    }
}

/// `ℓ(target) - k·ℓ(base)`, from matrices materialized at the certificate
/// dimension.
fn converse_excess(cert: &Certificate) -> Option<f64> {
    let base = cert.base.to_matrix(cert.dim).ok()?;
    let target = cert.target.to_matrix(cert.dim).ok()?;
    Some(ell_matrix(&target) - cert.len() as f64 * ell_matrix(&base))
}

fn converse_bound(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let mut pool: Vec<Certificate> = Vec::new();
    while pool.len() < 40 {
        let len = rng.random_range(1..=4);
        let u = arc_model(rng, len, 0.0);
        let len = rng.random_range(2..=3);
        let v = arc_model(rng, len, 0.5);
        if crate::certify::calkin_multiplier(&u, &v).is_ok_and(|m| m <= 4) {
            if let Ok(c) = certify_calkin(&u, &v) {
                pool.push(c);
            }
        }
    }
    for _ in 0..30 {
        let v = random_cluster_model(rng, 2, 0.8);
        let d = 2 * rng.random_range(3..=16);
        let m = 2 * rng.random_range(1..=2);
        let theta = bounded_prefix_angles(rng, d, 0.99 * m as f64 * 0.8);
        let seq = product_decomposition_angles(&theta).expect("zero sum");
        let indices: Vec<usize> = (0..d / 4).map(|b| 2 * b).collect();
        if let Ok(c) = arrange_gap_blocks(&v, 0.8, indices.len(), d).and_then(|plan| infsim_generate(&seq, &indices, &plan, m)) {
            pool.push(c);
        }
    }
    for _ in 0..30 {
        let n = rng.random_range(1..=6);
        if let Ok((_, c)) = doubled_commutator(&random_unitary(rng, n), &random_unitary(rng, n)) {
            pool.push(c);
        }
    }
    let mut checked = 0;
    for cert in &pool {
        if !verify(cert, CERTIFICATE_TOL).pass {
            continue;
        }
        checked += 1;
        match converse_excess(cert) {
            Some(excess) => {
                t.observe(excess);
                t.case(excess <= CONVERSE_SLACK, || format!("{:?}: ℓ(target) exceeds k·ℓ(base) by {excess:e}", cert.meta.pipeline));
            }
            None => t.case(false, || "operands unreadable".into()),
        }
    }
    t.finish(7, Some(CONVERSE_SLACK), format!("{checked} verified certificates"), start)
}

/// A finite-spectrum unitary of dimension at most 32 whose two most distant
/// eigenphases have multiplicity at least 2.
fn random_finite_spectrum(rng: &mut ChaCha8Rng) -> FiniteSpectrumUnitary {
    loop {
        let k = rng.random_range(2..=6);
        let model = random_cluster_model(rng, k, 0.05);
        let mut list: Vec<(Phase, usize)> = model.clusters().iter().map(|&p| (p, rng.random_range(1..=5))).collect();
        let mut pair = (0, 1);
        let mut widest = -1.0;
        for i in 0..k {
            for j in i + 1..k {
                let c = list[i].0.chord(list[j].0);
                if c > widest + 1e-15 {
                    widest = c;
                    pair = (i, j);
                }
            }
        }
        for idx in [pair.0, pair.1] {
            list[idx].1 = list[idx].1.max(2);
        }
        let dim: usize = list.iter().map(|e| e.1).sum();
        if dim > 32 {
            continue;
        }
        let basis = if rng.random_bool(0.5) { Basis::Canonical } else { Basis::Matrix(random_unitary(rng, dim)) };
        return FiniteSpectrumUnitary::new(list, basis).expect("valid spectrum");
    }
}

fn witness(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let example = FiniteSpectrumUnitary::canonical(vec![(Phase::ZERO, 2), (Phase::new(PI).expect("finite"), 2)]).expect("valid");
    match commutator_witness(&example) {
        Ok(w) => {
            let want = [-1.0, 1.0, -1.0, 1.0];
            let m = w.commutator.matrix();
            let exact = (0..4).all(|r| {
                (0..4).all(|c| {
                    let x = if r == c { want[r] } else { 0.0 };
                    m[(r, c)].re.round() == x && (m[(r, c)] - C64::new(x, 0.0)).norm() <= 1e-15
                })
            });
            t.case(exact, || format!("worked example gave {m}"));
        }
        Err(e) => t.case(false, || format!("worked example: {e}")),
    }
    for _ in 0..200 {
        let u = random_finite_spectrum(rng);
        match commutator_witness(&u) {
            Ok(w) => {
                let um = u.to_matrix();
                let comm = um.mul(&w.v).mul(&um.adjoint()).mul(&w.v.adjoint());
                let ell_u = ell_matrix(&um);
                let ell_c = ell_matrix(&comm);
                let excess = ell_u - 4.0 * ell_c;
                t.observe(excess);
                t.case(excess <= COMMUTATOR_SLACK, || format!("D = {}: ℓ(u) = {ell_u}, ℓ([u,v]) = {ell_c}", u.dim()));
            }
            Err(e) => t.case(false, || format!("D = {}: {e}", u.dim())),
        }
    }
    t.finish(8, Some(COMMUTATOR_SLACK), "worst is ℓ(u) - 4ℓ([u,v])".into(), start)
}

fn doubled(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let mut collapses = 0;
    for case in 0..100 {
        let n = rng.random_range(1..=8);
        let v0 = random_unitary(rng, n);
        // every tenth pair commutes, so that the commutator collapses
        let w0 = match case % 10 {
            0 => v0.mul(&v0),
            5 => UnitaryMatrix::identity(n),
            _ => random_unitary(rng, n),
        };
        match doubled_commutator(&v0, &w0) {
            Ok((target, cert)) => {
                let comm = v0.mul(&w0).mul(&v0.adjoint()).mul(&w0.adjoint());
                let mut want = DMatrix::<C64>::zeros(2 * n, 2 * n);
                want.view_mut((0, 0), (n, n)).copy_from(comm.matrix());
                want.view_mut((n, n), (n, n)).copy_from(&comm.matrix().adjoint());
                let target_err = (target.matrix() - want).norm();
                if (comm.matrix() - DMatrix::<C64>::identity(n, n)).norm() < 1e-9 {
                    collapses += 1;
                }
                let report = verify(&cert, DOUBLED_TOL);
                let residual = report.product_residual.unwrap_or(f64::INFINITY);
                t.observe(residual.max(target_err));
                t.case(cert.len() == 4 && report.pass && target_err <= DOUBLED_TOL, || {
                    format!("n = {n}: {} factors, {report}, target error {target_err:e}", cert.len())
                });
            }
            Err(e) => t.case(false, || format!("n = {n}: {e}")),
        }
    }
    if collapses == 0 {
        t.case(false, || "no collapse case was exercised".into());
    }
    t.finish(9, Some(DOUBLED_TOL), format!("{collapses} collapse cases"), start)
}

fn bound_fixed_points(start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let cases = [
        (2.0, NgMode::Calkin, 32),
        (2.0, NgMode::Typeiii, 1024),
        (1.0, NgMode::Calkin, 64),
        (1.0, NgMode::Typeiii, 2048),
    ];
    for (len, mode, want) in cases {
        let got = ng_bound_from_length(len, mode);
        t.case(got.as_ref().is_ok_and(|&g| g == want), || format!("{mode:?} at {len}: {got:?}, expected {want}"));
    }
    let antipodal = ClusteredModel::from_clusters(&[0.0, PI]).expect("valid");
    let got = ng_bound(&antipodal);
    t.case(got.as_ref().is_ok_and(|&g| g == 46), || format!("clusters {{0, π}}: {got:?}, expected 46"));
    t.finish(10, None, String::new(), start)
}

#[derive(Clone, Copy, Debug)]
enum Tamper {
    Conjugator,
    Sign,
    Count,
}

fn source_certificate(rng: &mut ChaCha8Rng, case: usize) -> Option<Certificate> {
    if case.is_multiple_of(2) {
        let n = rng.random_range(2..=5);
        doubled_commutator(&random_unitary(rng, n), &random_unitary(rng, n)).ok().map(|(_, c)| c)
    } else {
        let v = random_cluster_model(rng, 2, 1.0);
        let d = 2 * rng.random_range(2..=8);
        let u = DiagonalUnitary::from_angles(&random_angles(rng, d)).ok()?;
        let m = ((ell_of_angles(&u.angles()).ok()? / crate::length::ell_ess(&v) - 1e-12).ceil() as usize).max(1);
        certify_diag(&u, &v, m).ok()
    }
}

fn adversarial(rng: &mut ChaCha8Rng, start: Instant) -> CriterionReport {
    let mut t = Tally::new();
    let kinds = [Tamper::Conjugator, Tamper::Sign, Tamper::Count];
    let mut case = 0;
    while t.cases < 100 {
        case += 1;
        let Some(mut cert) = source_certificate(rng, case) else { continue };
        if cert.is_empty() || !verify(&cert, CERTIFICATE_TOL).pass {
            continue;
        }
        let kind = kinds[t.cases % 3];
        let index = rng.random_range(0..cert.len());
        let expected = match kind {
            Tamper::Conjugator => {
                let mut g = cert.factors[index].conjugator.clone().into_matrix();
                let (r, c) = (rng.random_range(0..cert.dim), rng.random_range(0..cert.dim));
                g[(r, c)] += C64::from_polar(1e-3, rng.random_range(0.0..TAU));
                cert.factors[index].conjugator = UnitaryMatrix::new_unchecked(g);
                FailureClass::Factor
            }
            Tamper::Sign => {
                // only meaningful when the base is not an involution
                let base = cert.base.to_matrix(cert.dim).expect("readable");
                if (base.mul(&base).matrix() - DMatrix::<C64>::identity(cert.dim, cert.dim)).norm() < 1e-6 {
                    continue;
                }
                cert.factors[index].sign = cert.factors[index].sign.flipped();
                FailureClass::Product
            }
            Tamper::Count => {
                // cancelling pairs leave the product intact
                let g = random_unitary(rng, cert.dim);
                while cert.len() <= cert.claimed_bound {
                    cert.factors.push(Factor { sign: Sign::Plus, conjugator: g.clone() });
                    cert.factors.push(Factor { sign: Sign::Minus, conjugator: g.clone() });
                }
                FailureClass::Count
            }
        };
        let report = verify(&cert, CERTIFICATE_TOL);
        let indexed = match kind {
            Tamper::Conjugator => report.failures.iter().any(|f| f.class == FailureClass::Factor && f.index == Some(index)),
            _ => true,
        };
        t.case(!report.pass && report.has(expected) && indexed, || format!("{kind:?} at {index}: {report}"));
    }
    t.finish(11, None, "tampering cycles conjugator, sign, count".into(), start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_criterion_passes() {
        let r = run_criterion(10, DEFAULT_SEED);
        assert!(r.pass, "{r}");
        assert_eq!(r.cases, 5);
    }

    #[test]
    fn criteria_are_deterministic() {
        let a = run_criterion(2, 7);
        let b = run_criterion(2, 7);
        assert_eq!((a.pass, a.cases, a.worst), (b.pass, b.cases, b.worst));
    }

    #[test]
    #[should_panic(expected = "no criterion")]
    fn unknown_criterion_panics() {
        run_criterion(12, 0);
    }
}
