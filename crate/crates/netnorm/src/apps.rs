//! Application entry points: maximum output Schatten-α norms of
//! entanglement-breaking channels and 2→q matrix norms (direct and even-q
//! multipartite reductions).

use crate::algorithms::{
    hsep_basic, hsep_multipartite, s1_to_banach, EstimateError, EstimateReport,
};
use crate::feascheck::SolverConfig;
use crate::jsonio::MatrixJson;
use crate::matlib::{schatten_norm, CMatrix, Exponent, HermitianMatrix};
use crate::model::{banach_constants, EbChannel, MultipartiteLocc, NormFamily};
use crate::scalar::{Scalar, C};

/// max_ρ ‖Λ(ρ)‖_α of an entanglement-breaking channel, through the
/// S₁→S_α reduction.
pub fn eb_channel_max_output_norm<T: Scalar>(
    ch: &EbChannel<T>,
    alpha: Exponent<T>,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    if let Exponent::Finite(a) = alpha {
        if a <= T::one() {
            return Err(EstimateError::Parameter(
                "alpha must exceed 1: the net approach degenerates as alpha approaches 1".into(),
            ));
        }
    }
    let violations = ch.validate();
    if !violations.is_empty() {
        return Err(EstimateError::InvalidInput(violations));
    }
    let desc = banach_constants(NormFamily::Schatten, alpha, ch.d2)?;
    let g = ch.as_general();
    s1_to_banach(&g, &desc, delta, budget, cfg, None, None)
}

/// ‖A‖²_{2→q} estimate for q ≥ 2 via Xᵢ = A†|i⟩⟨i|A/‖A‖²_{2→2} and the
/// ℓ_{q/2} coefficient norm. Returns x with
/// ‖A‖²_{2→q} ≥ x ≥ ‖A‖²_{2→q} − δ_att·‖A‖²_{2→2}; the report's value and
/// accuracy fields are already scaled by ‖A‖²_{2→2}.
pub fn two_to_q_norm<T: Scalar>(
    a: &CMatrix<T>,
    q: T,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    if q < T::c(2.0) {
        return Err(EstimateError::Parameter("q must be ≥ 2".into()));
    }
    let norm22 = schatten_norm(a, Exponent::Infinity)?;
    if norm22 <= T::zero() {
        return Err(EstimateError::Parameter("A must be nonzero".into()));
    }
    let scale = norm22 * norm22;

    if q == T::c(2.0) {
        // ‖p‖₁ is 1 over all of S_X, so x collapses to the exact square of
        // the top singular value; the witness is the top right-singular
        // projector.
        let gram = HermitianMatrix::new_unchecked(a.adjoint().matmul(a));
        let (_, top) = crate::matlib::top_eigenpair(&gram);
        let mut report = EstimateReport::<T>::base(delta, cfg);
        report.value = scale;
        report.net_points = 1;
        report.scanned = 1;
        report.feasible = 1;
        report.witness.alpha = Some(MatrixJson::from_hermitian(&HermitianMatrix::new_unchecked(
            top.outer(),
        )));
        report
            .notes
            .push("q = 2: exact spectral path (the coefficient ℓ₁ norm is constant on S_X)".into());
        return Ok(report);
    }

    let (xs, n) = row_gram_functionals(a, scale);
    let half_q = q / T::c(2.0);
    let desc = banach_constants(NormFamily::Ell, Exponent::Finite(half_q), n)?;
    let basis: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            e
        })
        .collect();
    let g = crate::model::GeneralDecomposition::new(
        a.cols(),
        xs,
        crate::model::BElements::Vectors(basis),
    )?;
    let mut report = s1_to_banach(&g, &desc, delta, budget, cfg, None, None)?;
    report.value = report.value * scale;
    report.attained_delta = report.attained_delta * scale;
    report.net_delta = report.net_delta * scale;
    report
        .notes
        .push(format!("scaled by ‖A‖²_{{2→2}} = {:?}", scale.to_f64()));
    Ok(report)
}

/// ‖A‖^q_{2→q} estimate for even q ≥ 4 through the multipartite reduction
/// with Yᵢ = (A†|i⟩⟨i|A/‖A‖²_{2→∞})^{⊗(q/2−1)}. Returns x with
/// ‖A‖^q_{2→q} ≥ x ≥ ‖A‖^q_{2→q} − δ_att·‖A‖²_{2→2}·‖A‖^{q−2}_{2→∞};
/// value and accuracy fields are scaled accordingly. Odd or small q routes
/// to `two_to_q_norm`.
pub fn two_to_q_even<T: Scalar>(
    a: &CMatrix<T>,
    q: usize,
    delta: T,
    budget: u64,
    cfg: &SolverConfig<T>,
) -> Result<EstimateReport<T>, EstimateError> {
    if q % 2 != 0 || q < 4 {
        return two_to_q_norm(a, T::from_count(q), delta, budget, cfg);
    }
    let norm22 = schatten_norm(a, Exponent::Infinity)?;
    if norm22 <= T::zero() {
        return Err(EstimateError::Parameter("A must be nonzero".into()));
    }
    let norm2inf = max_row_norm(a);
    let l = q / 2;
    let (xs, _) = row_gram_functionals(a, norm22 * norm22);
    let (bs, n) = row_gram_functionals(a, norm2inf * norm2inf);

    let mut counts = vec![1usize; l];
    counts[0] = n;
    let mut levels = Vec::with_capacity(l);
    levels.push(xs);
    for _ in 1..l {
        levels.push(bs.clone());
    }
    let tree = MultipartiteLocc::new(vec![a.cols(); l], counts, levels)?;
    let mut report = if l == 2 {
        let flat = tree.flatten_bipartite()?;
        hsep_basic(&flat, delta, budget, cfg)?
    } else {
        hsep_multipartite(&tree, delta, budget, cfg)?
    };
    let scale = norm22 * norm22 * norm2inf.powf(T::from_count(q - 2));
    report.value = report.value * scale;
    report.attained_delta = report.attained_delta * scale;
    report.net_delta = report.net_delta * scale;
    report.notes.push(format!(
        "scaled by ‖A‖²_{{2→2}}·‖A‖^{{q−2}}_{{2→∞}} = {:?}",
        scale.to_f64()
    ));
    Ok(report)
}

/// Xᵢ = A†|i⟩⟨i|A / scale, one PSD functional per row of A.
fn row_gram_functionals<T: Scalar>(a: &CMatrix<T>, scale: T) -> (Vec<HermitianMatrix<T>>, usize) {
    let rows = a.rows();
    let cols = a.cols();
    let inv = T::one() / scale;
    let xs = (0..rows)
        .map(|i| {
            let mut m = CMatrix::zeros(cols, cols);
            for j in 0..cols {
                for k in 0..cols {
                    let v = a.get(i, j).conj() * a.get(i, k);
                    m.set(j, k, v * C::new(inv, T::zero()));
                }
            }
            HermitianMatrix::new_unchecked(m)
        })
        .collect();
    (xs, rows)
}

/// ‖A‖_{2→∞}: the largest row ℓ₂ norm.
fn max_row_norm<T: Scalar>(a: &CMatrix<T>) -> T {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| a.get(i, j).norm_sqr())
                .fold(T::zero(), |x, y| x + y)
                .sqrt()
        })
        .fold(T::zero(), T::max)
}
