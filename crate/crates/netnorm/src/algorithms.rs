//! The estimation algorithms: bipartite h_Sep (direct and sparsified),
//! multipartite h_Sep, S₁→B norms, and injective A→B norms with a bounded
//! ℓ₁ factorization.
//!
//! Every estimator scans Δ_n(k), runs the feasibility solver per net point,
//! evaluates ‖q‖_{B,Y} at the feasibility witnesses, and keeps the maximum
//! with ties broken toward the smallest colex rank. Scans partition the
//! rank range across workers; merging only compares candidates and adds
//! counters, so reports are identical at every thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feascheck::{
    check_feasible_general, Domain, DomainPoint, FeasError, FeasStatus, Functionals, SolverConfig,
};
use crate::jsonio::MatrixJson;
use crate::matlib::{top_eigenpair, HermitianMatrix, MatError};
use crate::model::{
    operator_norm_descriptor, BElements, BanachDescriptor, GeneralDecomposition, ModelError,
    MultipartiteLocc, OneWayLocc, Violation,
};
use crate::nets::{self, NetError, NetRange};
use crate::scalar::Scalar;
use crate::sparsify::{locc_sample_size, sparsify_locc, SparsifyError, SparsifyStats};
use crate::tol;

/// Hard cap on assembled operator dimension; larger instances need a
/// smaller dimension or fewer parties.
pub const ASSEMBLY_DIM_CAP: usize = 256;

const SCAN_CHUNK: u128 = 256;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("input failed validation: {0:?}")]
    InvalidInput(Vec<Violation>),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Feas(#[from] FeasError),
    #[error(transparent)]
    Sparsify(#[from] SparsifyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("no net point was feasible; retry with a larger delta or budget")]
    NoFeasiblePoint,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Witnesses attached to a report, in the wire matrix encoding.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WitnessSet<T> {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alphas: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_point: Option<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_p: Option<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_q: Option<Vec<T>>,
}

impl<T> Default for WitnessSet<T> {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: None,
            alphas: None,
            input_point: None,
            best_p: None,
            best_q: None,
        }
    }
}

/// Outcome of one estimation run: the value, its witnesses, the accuracy
/// actually delivered, and full net/solver statistics for reproduction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateReport<T> {
    pub value: T,
    pub requested_delta: T,
    /// End-to-end additive guarantee actually delivered: net radius plus
    /// solver slack plus the indeterminate inflation (plus sparsification
    /// error where applicable).
    pub attained_delta: T,
    /// Covering-radius component of `attained_delta`.
    pub net_delta: T,
    /// Feasibility radius ε used by this scan's convention.
    pub epsilon: T,
    pub k_requested: usize,
    pub k_used: usize,
    pub budget_capped: bool,
    pub net_points: u64,
    pub scanned: u64,
    pub feasible: u64,
    pub infeasible: u64,
    pub indeterminate: u64,
    /// Points skipped because their value ceiling could not beat an
    /// already-certified witness; lossless for the result.
    pub pruned: u64,
    pub indeterminate_inflation: T,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub winner_rank: Option<u64>,
    pub witness: WitnessSet<T>,
    pub solver_tol: T,
    pub solver_iterations: u64,
    pub seed: u64,
    pub wall_time_ms: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sparsify: Option<SparsifyStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub factorization_estimate: Option<T>,
}

impl<T: Scalar> EstimateReport<T> {
    pub(crate) fn base(requested_delta: T, cfg: &SolverConfig<T>) -> Self {
        Self {
            value: T::zero(),
            requested_delta,
            attained_delta: T::zero(),
            net_delta: T::zero(),
            epsilon: T::zero(),
            k_requested: 0,
            k_used: 0,
            budget_capped: false,
            net_points: 0,
            scanned: 0,
            feasible: 0,
            infeasible: 0,
            indeterminate: 0,
            pruned: 0,
            indeterminate_inflation: T::zero(),
            winner_rank: None,
            witness: WitnessSet::default(),
            solver_tol: cfg.tol_solver,
            solver_iterations: 0,
            seed: cfg.seed,
            wall_time_ms: 0,
            notes: Vec::new(),
            sparsify: None,
            factorization_estimate: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ScanCounts {
    scanned: u64,
    feasible: u64,
    infeasible: u64,
    indeterminate: u64,
    pruned: u64,
    iterations: u64,
}

impl ScanCounts {
    fn absorb(&mut self, other: ScanCounts) {
        self.scanned += other.scanned;
        self.feasible += other.feasible;
        self.infeasible += other.infeasible;
        self.indeterminate += other.indeterminate;
        self.pruned += other.pruned;
        self.iterations += other.iterations;
    }
}

#[derive(Debug, Clone)]
struct ScanBest<T> {
    value: T,
    rank: u128,
    p: Vec<T>,
    q: Vec<T>,
    witness: DomainPoint<T>,
}

fn better<T: Scalar>(a: &Option<ScanBest<T>>, b: &Option<ScanBest<T>>) -> bool {
    // Is b better than a? Larger value wins; ties go to the smaller rank.
    match (a, b) {
        (_, None) => false,
        (None, Some(_)) => true,
        (Some(x), Some(y)) => y.value > x.value || (y.value == x.value && y.rank < x.rank),
    }
}

struct ScanParams<'a, T: Scalar> {
    n: usize,
    k: usize,
    funcs: &'a Functionals<T>,
    domain: Domain,
    ys: &'a BElements<T>,
    desc: &'a BanachDescriptor<T>,
    eps: T,
    cfg: &'a SolverConfig<T>,
    /// Enumerate signed coefficient vectors (symbols ±1..±n) instead of
    /// probability vectors; needed when S_X reaches outside the simplex.
    signed: bool,
}

/// Number of net symbols a scan enumerates over.
fn symbol_count(n: usize, signed: bool) -> usize {
    if signed {
        2 * n
    } else {
        n
    }
}

/// Coefficient vector of a net point; under the signed mapping symbol
/// i ≥ n contributes −1/k to coordinate i−n.
fn coefficients<T: Scalar>(point: &nets::NetPoint, n: usize, signed: bool) -> Vec<T> {
    if !signed {
        return point.probability_vector::<T>();
    }
    let mut c = vec![T::zero(); n];
    let w = T::one() / T::from_count(point.k);
    for &s in &point.indices {
        if s < n {
            c[s] += w;
        } else {
            c[s - n] -= w;
        }
    }
    c
}

/// Nets up to this size run the best-first scan (norms for every point are
/// materialized and sorted); larger nets stream in rank order.
const SORTED_SCAN_LIMIT: u128 = 2_000_000;
const SORTED_BLOCK: usize = 64;

/// Solve one net point and fold it into the chunk state.
fn classify_point<T: Scalar>(
    params: &ScanParams<'_, T>,
    rank: u128,
    p: &[T],
    counts: &mut ScanCounts,
    best: &mut Option<ScanBest<T>>,
) {
    let res = check_feasible_general(
        p,
        params.funcs,
        params.domain,
        params.ys,
        params.desc,
        params.eps,
        params.cfg,
        rank as u64,
    )
    .expect("net points are valid coefficient vectors");
    counts.scanned += 1;
    counts.iterations += res.iterations as u64;
    match res.status {
        FeasStatus::Feasible => {
            counts.feasible += 1;
            let value = crate::model::weighted_norm(&res.q, params.ys, params.desc);
            let cand = Some(ScanBest {
                value,
                rank,
                p: p.to_vec(),
                q: res.q,
                witness: res.witness,
            });
            if better(best, &cand) {
                *best = cand;
            }
        }
        FeasStatus::Infeasible => counts.infeasible += 1,
        FeasStatus::Indeterminate => counts.indeterminate += 1,
    }
}

/// Scan the whole net, keeping the best feasibility witness by ‖q‖_{B,Y}.
///
/// Nets within the sorting limit run best-first: points are ordered by
/// their value ceiling ‖p‖_{B,Y} + ε + tol and the scan stops once no
/// remaining ceiling can beat the best certified witness. Every skipped
/// point's achievable value lies strictly below the reported maximum, so
/// the value and winner equal the full scan's; the block boundaries come
/// from the deterministic ordering, so reports are identical at every
/// worker count. Skipped points are reported as `pruned`.
fn scan_net<T: Scalar>(params: &ScanParams<'_, T>) -> (ScanCounts, Option<ScanBest<T>>) {
    let n_sym = symbol_count(params.n, params.signed);
    let total = nets::multiset_count(n_sym, params.k);
    if total <= SORTED_SCAN_LIMIT {
        scan_net_sorted(params, n_sym, total)
    } else {
        scan_net_streamed(params, n_sym, total)
    }
}

fn scan_net_sorted<T: Scalar>(
    params: &ScanParams<'_, T>,
    n_sym: usize,
    total: u128,
) -> (ScanCounts, Option<ScanBest<T>>) {
    let chunks = ((total + SCAN_CHUNK - 1) / SCAN_CHUNK) as u64;
    let mut order: Vec<(T, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * SCAN_CHUNK;
            let end = (start + SCAN_CHUNK).min(total);
            let mut out = Vec::with_capacity((end - start) as usize);
            for (rank, point) in NetRange::new(n_sym, params.k, start, end) {
                let p = coefficients::<T>(&point, params.n, params.signed);
                let norm = crate::model::weighted_norm(&p, params.ys, params.desc);
                out.push((norm, rank as u64));
            }
            out
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    order.par_sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let slack = params.eps + params.cfg.tol_solver;
    let mut counts = ScanCounts::default();
    let mut best: Option<ScanBest<T>> = None;
    let mut cursor = 0usize;
    while cursor < order.len() {
        // Stop once even the best remaining ceiling cannot win.
        if let Some(b) = &best {
            if order[cursor].0 + slack < b.value {
                counts.pruned += (order.len() - cursor) as u64;
                break;
            }
        }
        let block_end = (cursor + SORTED_BLOCK).min(order.len());
        let (block_counts, block_best) = order[cursor..block_end]
            .par_iter()
            .map(|&(_, rank)| {
                let point = nets::unrank(n_sym, params.k, rank as u128);
                let p = coefficients::<T>(&point, params.n, params.signed);
                let mut c = ScanCounts::default();
                let mut b = None;
                classify_point(params, rank as u128, &p, &mut c, &mut b);
                (c, b)
            })
            .reduce(
                || (ScanCounts::default(), None),
                |(mut ca, ba), (cb, bb)| {
                    ca.absorb(cb);
                    let merged = if better(&ba, &bb) { bb } else { ba };
                    (ca, merged)
                },
            );
        counts.absorb(block_counts);
        if better(&best, &block_best) {
            best = block_best;
        }
        cursor = block_end;
    }
    (counts, best)
}

fn scan_net_streamed<T: Scalar>(
    params: &ScanParams<'_, T>,
    n_sym: usize,
    total: u128,
) -> (ScanCounts, Option<ScanBest<T>>) {
    let chunks = ((total + SCAN_CHUNK - 1) / SCAN_CHUNK) as u64;
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * SCAN_CHUNK;
            let end = (start + SCAN_CHUNK).min(total);
            let mut counts = ScanCounts::default();
            let mut best: Option<ScanBest<T>> = None;
            for (rank, point) in NetRange::new(n_sym, params.k, start, end) {
                let p = coefficients::<T>(&point, params.n, params.signed);
                classify_point(params, rank, &p, &mut counts, &mut best);
            }
            (counts, best)
        })
        .reduce(
            || (ScanCounts::default(), None),
            |(mut ca, ba), (cb, bb)| {
                ca.absorb(cb);
                let merged = if better(&ba, &bb) { bb } else { ba };
                (ca, merged)
            },
        )
}

fn indeterminate_inflation<T: Scalar>(counts: &ScanCounts, max_y: T) -> T {
    if counts.scanned == 0 {
        return T::zero();
    }
    let rate =
        T::from_count(counts.indeterminate as usize) / T::from_count(counts.scanned as usize);
    rate * max_y
}

fn fill_counts<T: Scalar>(report: &mut EstimateReport<T>, counts: &ScanCounts) {
    report.scanned = counts.scanned;
    report.feasible = counts.feasible;
    report.infeasible = counts.infeasible;
    report.indeterminate = counts.indeterminate;
    report.pruned = counts.pruned;
    report.solver_iterations = counts.iterations;
}

/// Orthonormal basis of the joint support of the functionals, with the
/// functionals compressed into it, when the support is a proper subspace.
///
/// Densities restricted to the support realize (after slack completion)
/// the same coefficient vectors q as full-space densities: off-support
/// mass contributes nothing to any qᵢ and rescaling within the support
/// recovers it.
fn support_reduction<T: Scalar>(
    xs: &[HermitianMatrix<T>],
    dim: usize,
) -> Option<(Vec<HermitianMatrix<T>>, crate::matlib::CMatrix<T>)> {
    if xs.is_empty() {
        return None;
    }
    let mut sum = HermitianMatrix::zeros(dim);
    for x in xs {
        sum = sum.add(x);
    }
    let (w, v) = sum.eigh();
    let cut = T::c(1e-12) * w.last().map(|x| x.abs()).unwrap_or(T::one()).max(T::one());
    let kept: Vec<usize> = (0..dim).filter(|&i| w[i] > cut).collect();
    if kept.len() >= dim || kept.is_empty() {
        return None;
    }
    let r = kept.len();
    let mut u = crate::matlib::CMatrix::zeros(dim, r);
    for (col, &i) in kept.iter().enumerate() {
        for row in 0..dim {
            u.set(row, col, v.get(row, i));
        }
    }
    let ud = u.adjoint();
    let reduced = xs
        .iter()
        .map(|x| HermitianMatrix::new_unchecked(ud.matmul(x.as_cmatrix()).matmul(&u)))
        .collect();
    Some((reduced, u))
}

/// Append the POVM slack term (I − ΣX, Y = 0) when ΣX ≺ I, so that S_X
/// meets the probability simplex the net enumerates. The assembled
/// operator and all coefficient norms are unchanged (the slack carries a
/// zero Y element). Returns whether a term was added.
fn pad_povm_slack<T: Scalar>(xs: &mut Vec<HermitianMatrix<T>>, ys: &mut BElements<T>) -> bool {
    if xs.is_empty() {
        return false;
    }
    let dim = xs[0].dim();
    let mut sum = HermitianMatrix::zeros(dim);
    for x in xs.iter() {
        sum = sum.add(x);
    }
    let slack = HermitianMatrix::identity(dim).sub(&sum);
    if slack.max_eigenvalue() <= T::c(1e-12) {
        return false;
    }
    xs.push(slack);
    match ys {
        BElements::Matrices(v) => {
            let ydim = v.first().map(|y| y.dim()).unwrap_or(1);
            v.push(HermitianMatrix::zeros(ydim));
        }
        BElements::Vectors(v) => {
            let ydim = v.first().map(|y| y.len()).unwrap_or(1);
            v.push(vec![T::zero(); ydim]);
        }
    }
    true
}

/// h_Sep estimate for a one-way LOCC measurement by direct net scan.
///
/// k = ⌈9·ln(d₂)/δ²⌉ (budget-capped, reported), feasibility radius δ/2,
/// winner value ‖q‖_Y at the witness, β the top eigenprojector of ΣqᵢYᵢ.
/// The reported value is certified by recomputing tr[M(α⊗β)] from scratch.
pub fn hsep_basic<T: Scalar>(
    m: &OneWayLocc<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    let start = Instant::now();
    if delta <= T::zero() || delta > T::one() {
        return Err(EstimateError::Parameter("delta must lie in (0, 1]".into()));
    }
    let violations = m.validate();
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    if m.d1 * m.d2 > ASSEMBLY_DIM_CAP {
        return Err(EstimateError::Parameter(format!(
            "assembled dimension {} exceeds the cap {ASSEMBLY_DIM_CAP}",
            m.d1 * m.d2
        )));
    }
    let mut report = EstimateReport::base(delta, cfg);
    if m.n() == 0 {
        report.notes.push("empty measurement: value 0".into());
        report.wall_time_ms = start.elapsed().as_millis() as u64;
        return Ok(report);
    }

    let k_req = nets::choose_k_basic(m.d2, delta)?;
    let mut xs = m.xs();
    let mut ys = BElements::Matrices(m.ys());
    let padded = pad_povm_slack(&mut xs, &mut ys);
    let n = xs.len();
    let (k, net_points) = nets::cap_k(n, k_req, budget)?;
    let desc = operator_norm_descriptor::<T>(m.d2);
    let funcs = Functionals::Herm(xs);
    let eps = delta / T::c(2.0);
    let params = ScanParams {
        n,
        k,
        funcs: &funcs,
        domain: Domain::Density { dim: m.d1 },
        ys: &ys,
        desc: &desc,
        eps,
        cfg,
        signed: false,
    };
    let (counts, best) = scan_net(&params);
    let mut best = best.ok_or(EstimateError::NoFeasiblePoint)?;
    if padded {
        best.p.truncate(m.n());
        best.q.truncate(m.n());
        report.notes.push("slack term appended (ΣX ≺ I)".into());
    }

    // β from the winning witness: top eigenprojector of Σ qᵢYᵢ.
    let alpha = best.witness.as_herm().expect("density domain").clone();
    let sum_y = HermitianMatrix::weighted_sum(&m.ys(), &best.q);
    let (_, v) = top_eigenpair(&sum_y);
    let beta = HermitianMatrix::new_unchecked(v.outer());

    // Certify against the assembled operator.
    let assembled = m.assemble();
    let cert = crate::matlib::product_expectation(&assembled, &alpha, &beta)?;
    if (cert - best.value).abs() > T::c(tol::WITNESS_CERT) {
        return Err(EstimateError::Internal(format!(
            "witness certification mismatch: scan {:?} vs recomputed {:?}",
            best.value, cert
        )));
    }

    let max_y = ys.max_norm(&desc);
    report.value = best.value;
    report.k_requested = k_req;
    report.k_used = k;
    report.budget_capped = k < k_req;
    report.net_points = net_points.min(u64::MAX as u128) as u64;
    report.net_delta = nets::attained_delta_basic(m.d2, k);
    report.epsilon = eps;
    fill_counts(&mut report, &counts);
    report.indeterminate_inflation = indeterminate_inflation(&counts, max_y);
    report.attained_delta =
        report.net_delta + T::c(2.0) * cfg.tol_solver + report.indeterminate_inflation;
    report.winner_rank = Some(best.rank as u64);
    report.witness = WitnessSet {
        alpha: Some(MatrixJson::from_hermitian(&alpha)),
        beta: Some(MatrixJson::from_hermitian(&beta)),
        alphas: None,
        input_point: None,
        best_p: Some(best.p),
        best_q: Some(best.q),
    };
    if report.budget_capped {
        report
            .notes
            .push(format!("k capped by budget: requested {k_req}, used {k}"));
    }
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// h_Sep with sparsification preprocessing: replace M by M′ with verified
/// ‖M−M′‖ ≤ δ/2 and few distinct terms, then run the direct scan at δ/2.
/// When n is already below the sample-size formula the sparsification is an
/// identity and the result equals the direct scan at δ/2.
pub fn hsep_sparse<T: Scalar>(
    m: &OneWayLocc<T>,
    delta: T,
    seed: u64,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    let start = Instant::now();
    if delta <= T::zero() || delta > T::one() {
        return Err(EstimateError::Parameter("delta must lie in (0, 1]".into()));
    }
    let violations = m.validate();
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    let eps_sparse = delta / T::c(2.0);
    let n_target = locc_sample_size(m.d1, m.d2, eps_sparse.to_f64().unwrap());
    let (m_used, stats) = if m.n() <= n_target {
        (m.clone(), SparsifyStats::skipped(m.n()))
    } else {
        sparsify_locc(m, eps_sparse, seed, 64)?
    };
    let mut report = hsep_basic(&m_used, eps_sparse, budget, cfg)?;
    report.requested_delta = delta;
    if !stats.skipped {
        // Re-certify the witness value against the original operator and
        // account for the sparsification error in the guarantee.
        let alpha = report
            .witness
            .alpha
            .as_ref()
            .expect("hsep witness")
            .to_hermitian::<T>()?;
        let beta = report
            .witness
            .beta
            .as_ref()
            .expect("hsep witness")
            .to_hermitian::<T>()?;
        let value_orig = crate::matlib::product_expectation(&m.assemble(), &alpha, &beta)?;
        report.value = value_orig;
        report.attained_delta = report.attained_delta + T::c(stats.final_deviation);
        report.notes.push(format!(
            "sparsified {} → {} distinct terms (‖M−M′‖ = {:.3e})",
            stats.n_input, stats.n_output, stats.final_deviation
        ));
    } else {
        report.notes.push(format!(
            "sparsification skipped (n = {} ≤ n′ = {n_target})",
            m.n()
        ));
    }
    report.sparsify = Some(stats);
    report.seed = seed;
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Best candidate of a multipartite scan level.
#[derive(Debug, Clone)]
struct MultiBest<T> {
    /// tr[M(β₁⊗…⊗β_l)] on this level's assembled operator.
    value: T,
    rank: u128,
    witnesses: Vec<HermitianMatrix<T>>,
    q_top: Vec<T>,
    p_top: Vec<T>,
}

/// h_Sep for fully one-way LOCC measurements on l parties.
///
/// Two-party trees delegate to `hsep_basic` on the flattened decomposition.
/// Deeper trees scan Δ_{n₁}(k) with k = ⌈9·l²·ln(d)/δ²⌉ and feasibility
/// radius δ/2l (both fixed from the root l and d = max dims), contract the
/// tree with the witness q, recurse, and keep the candidate maximizing the
/// exactly evaluated tr[M(β₁⊗…⊗β_l)].
pub fn hsep_multipartite<T: Scalar>(
    t: &MultipartiteLocc<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    let start = Instant::now();
    if delta <= T::zero() || delta > T::one() {
        return Err(EstimateError::Parameter("delta must lie in (0, 1]".into()));
    }
    let l = t.parties();
    if l < 2 {
        return Err(EstimateError::Parameter(
            "multipartite estimation needs at least 2 parties".into(),
        ));
    }
    let violations = t.validate();
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    if t.total_dim() > ASSEMBLY_DIM_CAP {
        return Err(EstimateError::Parameter(format!(
            "assembled dimension {} exceeds the cap {ASSEMBLY_DIM_CAP}; reduce dims or parties",
            t.total_dim()
        )));
    }

    if l == 2 {
        let flat = t.flatten_bipartite()?;
        let mut report = hsep_basic(&flat, delta, budget, cfg)?;
        let alpha = report.witness.alpha.take();
        let beta = report.witness.beta.take();
        report.witness.alphas = Some(vec![
            alpha.expect("bipartite witness"),
            beta.expect("bipartite witness"),
        ]);
        report
            .notes
            .push("two-party tree: delegated to the flattened bipartite scan".into());
        report.wall_time_ms = start.elapsed().as_millis() as u64;
        return Ok(report);
    }

    let d_max = *t.dims.iter().max().unwrap();
    let k_req = nets::choose_k_multipartite(d_max, l, delta)?;
    // One k for every level: cap by the tightest branching count.
    let mut k = k_req;
    let mut net_points_top = 0u128;
    for (level, &n_level) in t.counts.iter().enumerate().take(l - 1) {
        let (k_level, pts) = nets::cap_k(n_level, k_req, budget)?;
        k = k.min(k_level);
        if level == 0 {
            net_points_top = pts;
        }
    }
    let eps_level = delta / (T::c(2.0) * T::from_count(l));

    let (counts, best) = scan_multi_level(t, k, eps_level, cfg)?;
    let best = best.ok_or(EstimateError::NoFeasiblePoint)?;

    let mut report = EstimateReport::base(delta, cfg);
    report.value = best.value;
    report.k_requested = k_req;
    report.k_used = k;
    report.budget_capped = k < k_req;
    report.net_points = net_points_top.min(u64::MAX as u128) as u64;
    report.net_delta = nets::attained_delta_multipartite(d_max, l, k);
    report.epsilon = eps_level;
    fill_counts(&mut report, &counts);
    report.indeterminate_inflation = indeterminate_inflation(&counts, T::one());
    // Each of the l−1 scanned levels contributes its net radius, its
    // feasibility radius, and solver slack.
    let per_level = report.net_delta + eps_level + T::c(2.0) * cfg.tol_solver;
    report.attained_delta = T::from_count(l - 1) * per_level + report.indeterminate_inflation;
    report.winner_rank = Some(best.rank as u64);
    report.witness = WitnessSet {
        alpha: None,
        beta: None,
        alphas: Some(
            best.witnesses
                .iter()
                .map(MatrixJson::from_hermitian)
                .collect(),
        ),
        input_point: None,
        best_p: Some(best.p_top),
        best_q: Some(best.q_top),
    };
    if report.budget_capped {
        report
            .notes
            .push(format!("k capped by budget: requested {k_req}, used {k}"));
    }
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// One level of the multipartite recursion. Returns aggregated counts from
/// this and all deeper levels plus the best candidate (certified on this
/// level's assembled operator).
fn scan_multi_level<T: Scalar>(
    t: &MultipartiteLocc<T>,
    k: usize,
    eps_level: T,
    cfg: &SolverConfig<T>,
) -> Result<(ScanCounts, Option<MultiBest<T>>), EstimateError> {
    let l = t.parties();
    debug_assert!(l >= 2);
    let n1 = t.counts[0];
    let branches: Vec<HermitianMatrix<T>> = (0..n1).map(|i| t.assemble_branch(i)).collect();
    let branch_dim = branches[0].dim();
    let mut xs = t.levels[0].clone();
    let mut ys = BElements::Matrices(branches);
    let padded = pad_povm_slack(&mut xs, &mut ys);
    let n_scan = xs.len();
    let desc = operator_norm_descriptor::<T>(branch_dim);
    let funcs = Functionals::Herm(xs);
    let assembled = t.assemble();

    let total = nets::multiset_count(n_scan, k);
    let chunks = ((total + SCAN_CHUNK - 1) / SCAN_CHUNK) as u64;
    let results: Result<Vec<(ScanCounts, Option<MultiBest<T>>)>, EstimateError> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * SCAN_CHUNK;
            let end = (start + SCAN_CHUNK).min(total);
            let mut counts = ScanCounts::default();
            let mut best: Option<MultiBest<T>> = None;
            for (rank, point) in NetRange::new(n_scan, k, start, end) {
                let p = point.probability_vector::<T>();
                let res = check_feasible_general(
                    &p,
                    &funcs,
                    Domain::Density { dim: t.dims[0] },
                    &ys,
                    &desc,
                    eps_level,
                    cfg,
                    rank as u64,
                )?;
                counts.scanned += 1;
                counts.iterations += res.iterations as u64;
                match res.status {
                    FeasStatus::Feasible => counts.feasible += 1,
                    FeasStatus::Infeasible => {
                        counts.infeasible += 1;
                        continue;
                    }
                    FeasStatus::Indeterminate => {
                        counts.indeterminate += 1;
                        continue;
                    }
                }
                let beta1 = res.witness.as_herm().expect("density domain").clone();
                // Contraction weights: the slack coordinate corresponds to
                // the discarded completion term and is dropped.
                let mut q_real = res.q.clone();
                if padded {
                    q_real.truncate(n1);
                }
                let contracted = t.contract_first(&q_real);
                let mut witnesses = vec![beta1];
                if contracted.parties() == 1 {
                    // Base case: max over β of tr[(ΣᵢX̃ᵢ)β] is the top
                    // eigenprojector.
                    let mut sum = HermitianMatrix::zeros(contracted.dims[0]);
                    for op in &contracted.levels[0] {
                        sum = sum.add(op);
                    }
                    let (_, v) = top_eigenpair(&sum);
                    witnesses.push(HermitianMatrix::new_unchecked(v.outer()));
                } else {
                    let (sub_counts, sub_best) = scan_multi_level(&contracted, k, eps_level, cfg)?;
                    counts.absorb(sub_counts);
                    match sub_best {
                        Some(sb) => witnesses.extend(sb.witnesses),
                        None => continue, // no feasible continuation below
                    }
                }
                // Certify on this level's assembled operator.
                let mut product = witnesses[0].clone();
                for w in &witnesses[1..] {
                    product = product.kron(w);
                }
                let value = assembled.hs_inner_re(&product);
                let mut p_real = p;
                if padded {
                    p_real.truncate(n1);
                }
                let cand = MultiBest {
                    value,
                    rank,
                    witnesses,
                    q_top: q_real,
                    p_top: p_real,
                };
                let take = match &best {
                    None => true,
                    Some(b) => {
                        cand.value > b.value || (cand.value == b.value && cand.rank < b.rank)
                    }
                };
                if take {
                    best = Some(cand);
                }
            }
            Ok((counts, best))
        })
        .collect();

    let mut counts = ScanCounts::default();
    let mut best: Option<MultiBest<T>> = None;
    for (c, b) in results? {
        counts.absorb(c);
        let take = match (&best, &b) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(x), Some(y)) => y.value > x.value || (y.value == x.value && y.rank < x.rank),
        };
        if take {
            best = b;
        }
    }
    Ok((counts, best))
}

/// Optional sparsification pass ahead of the general-space scan.
#[derive(Debug, Clone)]
pub struct SparsifyPlan<T> {
    pub delta: T,
    pub seed: u64,
    pub c_const: f64,
    pub max_retries: usize,
    pub oracle_restarts: usize,
}

/// max_{p∈S_X} ‖p‖_{B,Y} for a general decomposition into the descriptor's
/// space: k = ⌈(2C^γ·maxY^γ/δ^γ)^{1/(γ−1)}⌉, feasibility radius δ, value
/// ‖q‖_{B,Y} at the witness.
///
/// `max_y_override` substitutes an external bound on maxᵢ‖Yᵢ‖_B in the k
/// formula (the restricted-measurement regime); the actual maximum is used
/// when it is `None`.
pub fn s1_to_banach<T: Scalar>(
    g: &GeneralDecomposition<T>,
    desc: &BanachDescriptor<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
    sparsify: Option<&SparsifyPlan<T>>,
    max_y_override: Option<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    let start = Instant::now();
    if delta <= T::zero() {
        return Err(EstimateError::Parameter("delta must be positive".into()));
    }
    let violations = g.validate(desc);
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    let mut report = EstimateReport::base(delta, cfg);
    if g.n() == 0 {
        report.notes.push("empty decomposition: value 0".into());
        report.wall_time_ms = start.elapsed().as_millis() as u64;
        return Ok(report);
    }

    let mut sparsify_stats: Option<SparsifyStats> = None;
    let mut sparsify_error = T::zero();
    let owned;
    let g_used: &GeneralDecomposition<T> = match sparsify {
        Some(plan) => {
            let (gs, stats) = crate::sparsify::sparsify_general(
                g,
                desc,
                plan.delta,
                plan.seed,
                plan.c_const,
                plan.max_retries,
                plan.oracle_restarts,
            )?;
            sparsify_error = plan.delta;
            report.notes.push(format!(
                "sparsified {} → {} terms (heuristic deviation estimate {:.3e})",
                stats.n_input, stats.n_output, stats.dev_assembled
            ));
            sparsify_stats = Some(stats);
            owned = gs;
            &owned
        }
        None => g,
    };

    let max_y_actual = g_used.ys.max_norm(desc);
    if max_y_actual <= T::zero() {
        report.notes.push("all Y terms vanish: value 0".into());
        report.wall_time_ms = start.elapsed().as_millis() as u64;
        return Ok(report);
    }
    let max_y = max_y_override.unwrap_or(max_y_actual);
    let k_req = nets::choose_k_general(desc, delta, max_y)?;
    // Restrict the input states to the joint support of the functionals;
    // with the slack completion in place the reachable q set is unchanged,
    // and low-rank instances get much cheaper projections.
    let (mut xs, basis) = match support_reduction(&g_used.xs, g_used.d1) {
        Some((reduced, u)) => (reduced, Some(u)),
        None => (g_used.xs.clone(), None),
    };
    let scan_dim = xs.first().map(|x| x.dim()).unwrap_or(g_used.d1);
    let mut ys_scan = g_used.ys.clone();
    let padded = pad_povm_slack(&mut xs, &mut ys_scan);
    let n = xs.len();
    let (k, net_points) = nets::cap_k(n, k_req, budget)?;
    let funcs = Functionals::Herm(xs);
    let eps = delta;
    let params = ScanParams {
        n,
        k,
        funcs: &funcs,
        domain: Domain::Density { dim: scan_dim },
        ys: &ys_scan,
        desc,
        eps,
        cfg,
        signed: false,
    };
    let (counts, best) = scan_net(&params);
    let mut best = best.ok_or(EstimateError::NoFeasiblePoint)?;
    if padded {
        best.p.truncate(g_used.n());
        best.q.truncate(g_used.n());
        report.notes.push("slack term appended (ΣX ≺ I)".into());
    }

    // Map the witness back to the full space and re-derive the value from
    // it alone.
    let alpha_scan = best.witness.as_herm().expect("density domain").clone();
    let alpha = match &basis {
        Some(u) => {
            report
                .notes
                .push(format!("input support reduced to dimension {scan_dim}"));
            HermitianMatrix::new_unchecked(u.matmul(alpha_scan.as_cmatrix()).matmul(&u.adjoint()))
        }
        None => alpha_scan,
    };
    let q_fresh: Vec<T> = g_used.xs.iter().map(|x| x.hs_inner_re(&alpha)).collect();
    let cert = crate::model::weighted_norm(&q_fresh, &g_used.ys, desc);
    if (cert - best.value).abs() > T::c(tol::WITNESS_CERT) {
        return Err(EstimateError::Internal(format!(
            "witness certification mismatch: scan {:?} vs recomputed {:?}",
            best.value, cert
        )));
    }

    report.value = best.value;
    report.k_requested = k_req;
    report.k_used = k;
    report.budget_capped = k < k_req;
    report.net_points = net_points.min(u64::MAX as u128) as u64;
    report.net_delta = nets::attained_delta_general(desc, k, max_y);
    report.epsilon = eps;
    fill_counts(&mut report, &counts);
    report.indeterminate_inflation = indeterminate_inflation(&counts, max_y_actual);
    report.attained_delta = report.net_delta
        + eps
        + T::c(2.0) * cfg.tol_solver
        + report.indeterminate_inflation
        + sparsify_error;
    report.winner_rank = Some(best.rank as u64);
    report.witness = WitnessSet {
        alpha: Some(MatrixJson::from_hermitian(&alpha)),
        beta: None,
        alphas: None,
        input_point: None,
        best_p: Some(best.p),
        best_q: Some(best.q),
    };
    report.sparsify = sparsify_stats;
    if report.budget_capped {
        report
            .notes
            .push(format!("k capped by budget: requested {k_req}, used {k}"));
    }
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Input-space family for the injective-norm scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFamily {
    S1,
    L1,
    L2,
}

/// ‖Λ‖_{A→B} for Λ = Σᵢ yᵢ·xᵢ* with Σᵢ|xᵢ*(a)| ≤ 1 on B(A) and
/// ‖yᵢ‖_B ≤ 1: net scan with k = ⌈(2λ/δ)^{γ/(γ−1)}⌉ and feasibility over
/// B(A) by projected subgradient with the family's projection.
///
/// The factorization bound is validated heuristically (exactly for PSD S₁
/// functionals, ℓ₁, and small-n ℓ₂) and recorded in the report. A = S₁
/// with PSD functionals routes through the density-domain scan, where the
/// supremum over B(S₁) is attained.
pub fn injective_norm<T: Scalar>(
    xstar: &Functionals<T>,
    ys: &BElements<T>,
    a_family: InputFamily,
    a_dim: usize,
    desc_b: &BanachDescriptor<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    let start = Instant::now();
    if delta <= T::zero() {
        return Err(EstimateError::Parameter("delta must be positive".into()));
    }
    if xstar.len() != ys.len() {
        return Err(EstimateError::Parameter(
            "functional/Y term count mismatch".into(),
        ));
    }
    // max‖y‖_B ≤ 1 is checked exactly.
    let mut violations = Vec::new();
    for i in 0..ys.len() {
        let n = ys.norm_of(i, desc_b);
        if n > T::one() + T::c(1e-9) {
            violations.push(Violation {
                rule: "‖y‖_B ≤ 1".into(),
                index: Some(i),
                magnitude: (n - T::one()).to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    let fact = factorization_bound_estimate(xstar, a_family, a_dim, cfg.seed);

    match (a_family, xstar) {
        (InputFamily::S1, Functionals::Herm(xs)) => {
            // PSD functionals with ΣX ⪯ I: the supremum over B(S₁) is
            // attained on density matrices, so reuse the S₁→B scan with the
            // injective k selection.
            let g = GeneralDecomposition::new(a_dim, xs.clone(), ys.clone())?;
            let mut report = injective_density_scan(&g, desc_b, delta, budget, cfg)?;
            report.factorization_estimate = Some(fact);
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            Ok(report)
        }
        (InputFamily::S1, _) => Err(EstimateError::Parameter(
            "S₁ input space expects Hermitian functionals".into(),
        )),
        (InputFamily::L1, Functionals::Real(_)) | (InputFamily::L2, Functionals::Real(_)) => {
            let domain = match a_family {
                InputFamily::L1 => Domain::L1Ball { dim: a_dim },
                _ => Domain::L2Ball { dim: a_dim },
            };
            let k_req = nets::choose_k_injective(desc_b, delta)?;
            // The optimal coefficient vector can carry signs here, so the
            // net runs over the 2n signed symbols covering the ℓ₁ ball.
            let (k, net_points) = nets::cap_k(symbol_count(xstar.len(), true), k_req, budget)?;
            let eps = delta;
            let params = ScanParams {
                n: xstar.len(),
                k,
                funcs: xstar,
                domain,
                ys,
                desc: desc_b,
                eps,
                cfg,
                signed: true,
            };
            let (counts, best) = scan_net(&params);
            let best = best.ok_or(EstimateError::NoFeasiblePoint)?;
            let a_point = best.witness.as_real().expect("vector domain").to_vec();
            let q_fresh = xstar.apply(&best.witness);
            let cert = crate::model::weighted_norm(&q_fresh, ys, desc_b);
            if (cert - best.value).abs() > T::c(tol::WITNESS_CERT) {
                return Err(EstimateError::Internal(
                    "witness certification mismatch in the injective scan".into(),
                ));
            }
            let max_y_actual = ys.max_norm(desc_b);
            let mut report = EstimateReport::base(delta, cfg);
            report.value = best.value;
            report.k_requested = k_req;
            report.k_used = k;
            report.budget_capped = k < k_req;
            report.net_points = net_points.min(u64::MAX as u128) as u64;
            report.net_delta = nets::attained_delta_injective(desc_b, k);
            report.epsilon = eps;
            fill_counts(&mut report, &counts);
            report.indeterminate_inflation = indeterminate_inflation(&counts, max_y_actual);
            report.attained_delta = report.net_delta
                + eps
                + T::c(2.0) * cfg.tol_solver
                + report.indeterminate_inflation;
            report.winner_rank = Some(best.rank as u64);
            report.witness = WitnessSet {
                alpha: None,
                beta: None,
                alphas: None,
                input_point: Some(a_point),
                best_p: Some(best.p),
                best_q: Some(best.q),
            };
            report.factorization_estimate = Some(fact);
            if report.budget_capped {
                report
                    .notes
                    .push(format!("k capped by budget: requested {k_req}, used {k}"));
            }
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            Ok(report)
        }
        _ => Err(EstimateError::Parameter(
            "ℓ input spaces expect real vector functionals".into(),
        )),
    }
}

/// S₁ route of the injective scan: density domain, injective k selection.
fn injective_density_scan<T: Scalar>(
    g: &GeneralDecomposition<T>,
    desc: &BanachDescriptor<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    // Identical to the S₁→B scan; the k selection matches it because the
    // factorization hypotheses pin max‖Y‖_B to 1.
    s1_to_banach(g, desc, delta, budget, cfg, None, Some(T::one()))
}

/// Heuristic validation of sup_{a∈B(A)} Σᵢ|xᵢ*(a)|.
///
/// Exact for PSD Hermitian functionals (top eigenvalue of the sum), for ℓ₁
/// (max absolute column sum), and for ℓ₂ with n ≤ 16 (exact sign
/// enumeration); multi-start ascent otherwise.
pub fn factorization_bound_estimate<T: Scalar>(
    xstar: &Functionals<T>,
    family: InputFamily,
    a_dim: usize,
    seed: u64,
) -> T {
    match (family, xstar) {
        (InputFamily::S1, Functionals::Herm(xs)) => {
            let all_psd = xs
                .iter()
                .all(|x| x.min_eigenvalue() >= T::c(tol::PSD_FLOOR));
            if all_psd {
                let mut sum = HermitianMatrix::zeros(a_dim);
                for x in xs {
                    sum = sum.add(x);
                }
                sum.max_eigenvalue()
            } else {
                // Multi-start pure-state ascent of Σ|⟨ψ|Xᵢ|ψ⟩|.
                let desc = operator_norm_descriptor::<T>(1);
                let ys = BElements::Vectors(vec![vec![T::one()]; xs.len()]);
                let _ = desc;
                // Σ|qᵢ| is ‖q‖_{ℓ₁}: reuse the pure ascent with ℓ₁ target.
                let l1 = crate::model::banach_constants(
                    crate::model::NormFamily::Ell,
                    crate::matlib::Exponent::Finite(T::c(1.0 + 1e-9)),
                    xs.len(),
                )
                .expect("exponent just above 1");
                let basis: Vec<Vec<T>> = (0..xs.len())
                    .map(|i| {
                        let mut e = vec![T::zero(); xs.len()];
                        e[i] = T::one();
                        e
                    })
                    .collect();
                let _ = ys;
                crate::oracle::s1_to_b_pure_ascent(
                    xs,
                    &BElements::Vectors(basis),
                    &l1,
                    50,
                    200,
                    seed,
                )
            }
        }
        (InputFamily::L1, Functionals::Real(xs)) => {
            let mut best = T::zero();
            for j in 0..a_dim {
                let col: T = xs.iter().map(|x| x[j].abs()).fold(T::zero(), |a, b| a + b);
                best = best.max(col);
            }
            best
        }
        (InputFamily::L2, Functionals::Real(xs)) => {
            let n = xs.len();
            if n <= 16 {
                let mut best = T::zero();
                for pattern in 0..(1usize << n) {
                    let mut acc = vec![T::zero(); a_dim];
                    for (i, x) in xs.iter().enumerate() {
                        let s = if pattern >> i & 1 == 1 {
                            -T::one()
                        } else {
                            T::one()
                        };
                        for (aj, xj) in acc.iter_mut().zip(x) {
                            *aj += s * *xj;
                        }
                    }
                    let norm = acc.iter().map(|v| *v * *v).sum::<T>().sqrt();
                    best = best.max(norm);
                }
                best
            } else {
                // Alternating sign/point ascent from seeded starts.
                let mut best = T::zero();
                for r in 0..20u64 {
                    let mut rng = crate::rng::rng_from(crate::rng::derive_seed(seed, &[r]));
                    let mut a: Vec<T> = (0..a_dim)
                        .map(|_| T::c(crate::rng::standard_normal(&mut rng)))
                        .collect();
                    for _ in 0..50 {
                        let norm = a.iter().map(|v| *v * *v).sum::<T>().sqrt();
                        if norm <= T::zero() {
                            break;
                        }
                        for v in a.iter_mut() {
                            *v /= norm;
                        }
                        // d/da Σ|⟨xᵢ,a⟩| = Σ sign(⟨xᵢ,a⟩)·xᵢ.
                        let mut dir = vec![T::zero(); a_dim];
                        for x in xs {
                            let ip: T = x.iter().zip(&a).map(|(u, v)| *u * *v).sum();
                            let s = if ip < T::zero() { -T::one() } else { T::one() };
                            for (dj, xj) in dir.iter_mut().zip(x) {
                                *dj += s * *xj;
                            }
                        }
                        a = dir;
                    }
                    let norm = a.iter().map(|v| *v * *v).sum::<T>().sqrt();
                    if norm > T::zero() {
                        let val: T = xs
                            .iter()
                            .map(|x| {
                                x.iter()
                                    .zip(&a)
                                    .map(|(u, v)| *u * *v / norm)
                                    .sum::<T>()
                                    .abs()
                            })
                            .fold(T::zero(), |acc, v| acc + v);
                        best = best.max(val);
                    }
                }
                best
            }
        }
        _ => T::nan(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::CVector;
    use crate::model::LoccTerm;
    use crate::rng::{random_contraction, random_povm, rng_from};
    use approx::assert_abs_diff_eq;

    fn projector(dim: usize, i: usize) -> HermitianMatrix<f64> {
        HermitianMatrix::new_unchecked(CVector::basis(dim, i).outer())
    }

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    #[test]
    fn single_projector_instance() {
        let m = OneWayLocc::new(
            2,
            2,
            vec![LoccTerm {
                x: projector(2, 0),
                y: projector(2, 0),
            }],
        )
        .unwrap();
        let report = hsep_basic(&m, 0.5, 1_000_000, &cfg()).unwrap();
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-7);
        // ΣX ≺ I here, so the scan ran over the slack-padded decomposition.
        assert_eq!(
            report.net_points as u128,
            nets::multiset_count(2, report.k_used)
        );
        assert!(report.feasible >= 1);
        // Witness α must reproduce q.
        let alpha = report
            .witness
            .alpha
            .as_ref()
            .unwrap()
            .to_hermitian::<f64>()
            .unwrap();
        assert_abs_diff_eq!(projector(2, 0).hs_inner_re(&alpha), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn classical_diagonal_instance() {
        // X_i = |i⟩⟨i|, Y_i = |i⟩⟨i|: value 1 at α = β = |0⟩⟨0|.
        let m = OneWayLocc::new(
            2,
            2,
            vec![
                LoccTerm {
                    x: projector(2, 0),
                    y: projector(2, 0),
                },
                LoccTerm {
                    x: projector(2, 1),
                    y: projector(2, 1),
                },
            ],
        )
        .unwrap();
        let report = hsep_basic(&m, 0.4, 1_000_000, &cfg()).unwrap();
        let (oracle, _, _) = crate::oracle::hsep_alternating(&m.assemble(), 2, 2, 50, 200, 0);
        assert_abs_diff_eq!(oracle, 1.0, epsilon = 1e-9);
        assert!(report.value <= oracle + 2.0 * report.solver_tol);
        assert!(report.value >= oracle - report.attained_delta);
    }

    #[test]
    fn halved_diagonal_instance() {
        // X_i = |i⟩⟨i|, Y_i = ½|i⟩⟨i|: value 1/2.
        let m = OneWayLocc::new(
            2,
            2,
            vec![
                LoccTerm {
                    x: projector(2, 0),
                    y: projector(2, 0).scale(0.5),
                },
                LoccTerm {
                    x: projector(2, 1),
                    y: projector(2, 1).scale(0.5),
                },
            ],
        )
        .unwrap();
        let report = hsep_basic(&m, 0.4, 1_000_000, &cfg()).unwrap();
        assert!(report.value <= 0.5 + 2e-4);
        assert!(report.value >= 0.5 - report.attained_delta);
    }

    #[test]
    fn sparse_skip_equals_basic_at_half_delta() {
        let mut rng = rng_from(3);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let terms: Vec<LoccTerm<f64>> = xs
            .into_iter()
            .map(|x| LoccTerm {
                x,
                y: random_contraction::<f64>(2, &mut rng),
            })
            .collect();
        let m = OneWayLocc::new(2, 2, terms).unwrap();
        let sparse = hsep_sparse(&m, 0.6, 11, 1_000_000, &cfg()).unwrap();
        let basic = hsep_basic(&m, 0.3, 1_000_000, &cfg()).unwrap();
        assert!(sparse.sparsify.as_ref().unwrap().skipped);
        assert_abs_diff_eq!(sparse.value, basic.value, epsilon = 1e-12);
        assert_eq!(sparse.k_used, basic.k_used);
    }

    #[test]
    fn multipartite_two_party_matches_flat() {
        let mut rng = rng_from(8);
        for trial in 0..3 {
            let xs = random_povm::<f64>(2, 2, &mut rng);
            let leaves: Vec<HermitianMatrix<f64>> = (0..2)
                .map(|_| random_contraction::<f64>(2, &mut rng))
                .collect();
            let tree =
                MultipartiteLocc::new(vec![2, 2], vec![2, 1], vec![xs.clone(), leaves.clone()])
                    .unwrap();
            let flat = tree.flatten_bipartite().unwrap();
            let rt = hsep_multipartite(&tree, 0.5, 1_000_000, &cfg()).unwrap();
            let rf = hsep_basic(&flat, 0.5, 1_000_000, &cfg()).unwrap();
            assert_abs_diff_eq!(rt.value, rf.value, epsilon = 1e-9);
            let _ = trial;
        }
    }

    #[test]
    fn multipartite_product_projector_chain() {
        // Three parties, one branch each: M = |0⟩⟨0|^{⊗3}.
        let tree = MultipartiteLocc::new(
            vec![2, 2, 2],
            vec![1, 1, 1],
            vec![
                vec![projector(2, 0)],
                vec![projector(2, 0)],
                vec![projector(2, 0)],
            ],
        )
        .unwrap();
        let report = hsep_multipartite(&tree, 0.5, 1_000_000, &cfg()).unwrap();
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-6);
        assert_eq!(report.witness.alphas.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn s1_to_banach_constant_y() {
        // All Yᵢ equal to a fixed unit-norm Y₀: value ‖Y₀‖ for every p.
        let desc = crate::model::banach_constants::<f64>(
            crate::model::NormFamily::Schatten,
            crate::matlib::Exponent::Finite(2.0),
            2,
        )
        .unwrap();
        let y0 = projector(2, 0); // ‖Y₀‖₂ = 1
        let mut rng = rng_from(4);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let g =
            GeneralDecomposition::new(2, xs, BElements::Matrices(vec![y0.clone(), y0.clone(), y0]))
                .unwrap();
        let report = s1_to_banach(&g, &desc, 0.3, 1_000_000, &cfg(), None, None).unwrap();
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn s1_to_banach_inf_matches_hsep() {
        let mut rng = rng_from(14);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let ys: Vec<HermitianMatrix<f64>> = (0..3)
            .map(|_| random_contraction::<f64>(2, &mut rng))
            .collect();
        let m = OneWayLocc::new(
            2,
            2,
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| LoccTerm {
                    x: x.clone(),
                    y: y.clone(),
                })
                .collect(),
        )
        .unwrap();
        let delta = 0.4;
        let basic = hsep_basic(&m, delta, 1_000_000, &cfg()).unwrap();
        // Same instance through the general path with B = S_∞ and matched
        // net/feasibility parameters.
        let desc = operator_norm_descriptor::<f64>(2);
        let g = GeneralDecomposition::new(2, xs, BElements::Matrices(ys)).unwrap();
        let funcs = Functionals::Herm(g.xs.clone());
        let params = ScanParams {
            n: g.n(),
            k: basic.k_used,
            funcs: &funcs,
            domain: Domain::Density { dim: 2 },
            ys: &g.ys,
            desc: &desc,
            eps: delta / 2.0,
            cfg: &cfg(),
            signed: false,
        };
        let (_, best) = scan_net(&params);
        assert_abs_diff_eq!(best.unwrap().value, basic.value, epsilon = 1e-9);
    }

    #[test]
    fn injective_s1_consistent_with_s1_to_banach() {
        let mut rng = rng_from(6);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let ys: Vec<HermitianMatrix<f64>> = (0..3)
            .map(|_| {
                let y = random_contraction::<f64>(2, &mut rng);
                let n = crate::matlib::schatten_norm(
                    y.as_cmatrix(),
                    crate::matlib::Exponent::Finite(2.0),
                )
                .unwrap();
                y.scale(1.0 / n)
            })
            .collect();
        let desc = crate::model::banach_constants::<f64>(
            crate::model::NormFamily::Schatten,
            crate::matlib::Exponent::Finite(2.0),
            2,
        )
        .unwrap();
        let g = GeneralDecomposition::new(2, xs.clone(), BElements::Matrices(ys.clone())).unwrap();
        let inj = injective_norm(
            &Functionals::Herm(xs),
            &BElements::Matrices(ys),
            InputFamily::S1,
            2,
            &desc,
            0.3,
            1_000_000,
            &cfg(),
        )
        .unwrap();
        let direct = injective_density_scan(&g, &desc, 0.3, 1_000_000, &cfg()).unwrap();
        assert_abs_diff_eq!(inj.value, direct.value, epsilon = 1e-9);
        assert!(inj.factorization_estimate.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn injective_dual_norming_pair() {
        // n=1: x₁* = e₁ on ℓ₂, y₁ a unit vector of ℓ₄ → value 1.
        let desc = crate::model::banach_constants::<f64>(
            crate::model::NormFamily::Ell,
            crate::matlib::Exponent::Finite(4.0),
            3,
        )
        .unwrap();
        let xstar = Functionals::Real(vec![vec![1.0, 0.0, 0.0]]);
        let ys = BElements::Vectors(vec![vec![1.0, 0.0, 0.0]]);
        let report = injective_norm(
            &xstar,
            &ys,
            InputFamily::L2,
            3,
            &desc,
            0.3,
            1_000_000,
            &cfg(),
        )
        .unwrap();
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(report.factorization_estimate.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn determinism_across_thread_counts() {
        let mut rng = rng_from(10);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let terms: Vec<LoccTerm<f64>> = xs
            .into_iter()
            .map(|x| LoccTerm {
                x,
                y: random_contraction::<f64>(2, &mut rng),
            })
            .collect();
        let m = OneWayLocc::new(2, 2, terms).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| hsep_basic(&m, 0.45, 1_000_000, &cfg()).unwrap())
        };
        let mut a = run(1);
        let mut b = run(8);
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn sparse_merges_adversarial_duplicates() {
        // The same term repeated 100 times: the sampler must merge draws
        // by multiplicity and preserve the assembled operator.
        let term = LoccTerm {
            x: projector(2, 0).scale(0.01),
            y: projector(2, 0),
        };
        let m = OneWayLocc::new(2, 2, vec![term; 100]).unwrap();
        let (out, stats) = crate::sparsify::sparsify_locc(&m, 0.3, 9, 64).unwrap();
        assert!(out.n() <= 100);
        assert!(!stats.skipped);
        assert!(out.assemble().sub(&m.assemble()).op_norm() <= 0.3);
        let (v_orig, _, _) = crate::oracle::hsep_alternating(&m.assemble(), 2, 2, 20, 100, 1);
        let (v_sparse, _, _) = crate::oracle::hsep_alternating(&out.assemble(), 2, 2, 20, 100, 1);
        assert!((v_orig - v_sparse).abs() <= 0.3 + 1e-6);
    }

    #[test]
    fn sparse_large_n_end_to_end() {
        let mut rng = rng_from(19);
        let xs = random_povm::<f64>(2, 200, &mut rng);
        let terms: Vec<LoccTerm<f64>> = xs
            .into_iter()
            .map(|x| LoccTerm {
                x,
                y: random_contraction::<f64>(2, &mut rng),
            })
            .collect();
        let m = OneWayLocc::new(2, 2, terms).unwrap();
        let report = hsep_sparse(&m, 0.6, 23, 3_000, &cfg()).unwrap();
        let (oracle_v, _, _) = crate::oracle::hsep_alternating(&m.assemble(), 2, 2, 50, 200, 23);
        assert!(report.value <= oracle_v + 2.0 * report.solver_tol);
        assert!(oracle_v - report.value <= report.attained_delta);
        assert!(report.budget_capped);
    }

    #[test]
    fn low_rank_bound_mode() {
        // Frobenius-bounded Y with the S₂ descriptor and a user-supplied
        // maxY: the S₂ value dominates the operator-norm value.
        let mut rng = rng_from(29);
        let xs = random_povm::<f64>(2, 3, &mut rng);
        let ys: Vec<HermitianMatrix<f64>> = (0..3)
            .map(|_| random_contraction::<f64>(2, &mut rng))
            .collect();
        let r = ys.iter().map(|y| y.frobenius_norm()).fold(0.0f64, f64::max);
        let m = OneWayLocc::new(
            2,
            2,
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| LoccTerm {
                    x: x.clone(),
                    y: y.clone(),
                })
                .collect(),
        )
        .unwrap();
        let desc2 = crate::model::banach_constants::<f64>(
            crate::model::NormFamily::Schatten,
            crate::matlib::Exponent::Finite(2.0),
            2,
        )
        .unwrap();
        let g = GeneralDecomposition::new(2, xs, BElements::Matrices(ys)).unwrap();
        let s2 = s1_to_banach(&g, &desc2, 0.3, 1_000_000, &cfg(), None, Some(r)).unwrap();
        let hsep = hsep_basic(&m, 0.3, 1_000_000, &cfg()).unwrap();
        assert!(s2.value >= hsep.value - 1e-6);
        assert_eq!(
            s2.k_requested,
            nets::choose_k_general(&desc2, 0.3, r).unwrap()
        );
    }

    #[test]
    fn injective_l2_against_ball_ascent_oracle() {
        let mut rng = rng_from(33);
        let desc = crate::model::banach_constants::<f64>(
            crate::model::NormFamily::Ell,
            crate::matlib::Exponent::Finite(4.0),
            3,
        )
        .unwrap();
        // Random factorization with Σ|xᵢ*(a)| ≤ 1 on the ℓ₂ ball.
        let raw: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..3)
                    .map(|_| crate::rng::standard_normal(&mut rng) * 0.3)
                    .collect()
            })
            .collect();
        let bound =
            factorization_bound_estimate(&Functionals::Real(raw.clone()), InputFamily::L2, 3, 1);
        // Normalize to a tight factorization so coefficient values span up
        // to ~1 and the best-first scan prunes effectively.
        let xstar_vecs: Vec<Vec<f64>> = raw
            .iter()
            .map(|x| x.iter().map(|v| v / bound).collect())
            .collect();
        let ys: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let v: Vec<f64> = (0..3)
                    .map(|_| crate::rng::standard_normal(&mut rng))
                    .collect();
                let n = crate::matlib::power_mean_norm(
                    &v.iter().map(|x| x.abs()).collect::<Vec<_>>(),
                    crate::matlib::Exponent::Finite(4.0),
                );
                v.into_iter().map(|x| x / n).collect()
            })
            .collect();
        let xstar = Functionals::Real(xstar_vecs.clone());
        let yel = BElements::Vectors(ys.clone());
        let report = injective_norm(
            &xstar,
            &yel,
            InputFamily::L2,
            3,
            &desc,
            0.8,
            10_000_000,
            &cfg(),
        )
        .unwrap();

        // Multi-start projected gradient ascent over the unit ball.
        let objective = |a: &[f64]| -> f64 {
            let q: Vec<f64> = xstar_vecs
                .iter()
                .map(|x| x.iter().zip(a).map(|(u, v)| u * v).sum())
                .collect();
            crate::model::weighted_norm(&q, &yel, &desc)
        };
        let mut oracle_v = 0.0f64;
        for r in 0..100u64 {
            let mut prng = rng_from(crate::rng::derive_seed(77, &[r]));
            let mut a: Vec<f64> = (0..3)
                .map(|_| crate::rng::standard_normal(&mut prng))
                .collect();
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            a.iter_mut().for_each(|x| *x /= norm);
            let mut f = objective(&a);
            let mut eta = 0.5;
            for _ in 0..200 {
                let h = 1e-6;
                let mut grad = vec![0.0; 3];
                for j in 0..3 {
                    let mut ap = a.clone();
                    ap[j] += h;
                    grad[j] = (objective(&ap) - f) / h;
                }
                let gn = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
                if gn < 1e-12 {
                    break;
                }
                let mut improved = false;
                for _ in 0..20 {
                    let cand: Vec<f64> =
                        a.iter().zip(&grad).map(|(x, g)| x + eta * g / gn).collect();
                    let cn = cand.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
                    let cand: Vec<f64> = cand.into_iter().map(|x| x / cn).collect();
                    let fc = objective(&cand);
                    if fc > f {
                        a = cand;
                        f = fc;
                        eta *= 1.5;
                        improved = true;
                        break;
                    }
                    eta *= 0.5;
                }
                if !improved {
                    break;
                }
            }
            oracle_v = oracle_v.max(f);
        }
        assert!(
            report.value <= oracle_v + 2.0 * report.solver_tol + 1e-9,
            "scan {} exceeds ball-ascent oracle {}",
            report.value,
            oracle_v
        );
        assert!(
            oracle_v - report.value <= report.attained_delta,
            "scan {} vs oracle {} beyond δ_att {}",
            report.value,
            oracle_v,
            report.attained_delta
        );
    }
}
