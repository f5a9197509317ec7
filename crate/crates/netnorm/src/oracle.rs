//! Independent brute-force references and empirical concentration checks.
//!
//! These are the ground truth the estimators are tested against. They are
//! local-search based and can under-report, so acceptance-style comparisons
//! treat them as high-confidence lower references: the estimator must never
//! exceed them by more than solver slack, and must reach them minus the
//! reported guarantee on a high fraction of instances.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::matlib::{
    contract_a, contract_b, power_mean_norm, product_expectation, schatten_norm, top_eigenpair,
    CMatrix, CVector, DensityMatrix, Exponent, HermitianMatrix,
};
use crate::model::{BElements, BanachDescriptor, NormFamily};
use crate::rng::{
    derive_seed, random_contraction, random_hermitian, random_unit_vector, rng_from, uniform,
};
use crate::scalar::{c_re, Scalar};

/// Alternating-ascent reference for max tr[M(α⊗β)] over product states.
///
/// Each half step replaces one side with the top eigenprojector of the
/// contracted operator, which never decreases the objective. Best value
/// over `restarts` seeded initializations wins.
pub fn hsep_alternating<T: Scalar>(
    m: &HermitianMatrix<T>,
    d1: usize,
    d2: usize,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> (T, DensityMatrix<T>, DensityMatrix<T>) {
    assert_eq!(m.dim(), d1 * d2, "operator dimension mismatch");
    let mut best: Option<(T, DensityMatrix<T>, DensityMatrix<T>)> = None;
    for r in 0..restarts.max(1) {
        let mut beta = if r == 0 {
            DensityMatrix::maximally_mixed(d2)
        } else {
            let mut rng = rng_from(derive_seed(seed, &[r as u64]));
            DensityMatrix::pure(&random_unit_vector(d2, &mut rng))
        };
        let mut alpha = DensityMatrix::maximally_mixed(d1);
        let mut value = T::neg_infinity();
        for _ in 0..iters.max(1) {
            let ka = contract_b(m, beta.as_herm(), d1, d2).expect("dims");
            let (_, va) = top_eigenpair(&ka);
            alpha = DensityMatrix::pure(&va);
            let kb = contract_a(m, alpha.as_herm(), d1, d2).expect("dims");
            let (_, vb) = top_eigenpair(&kb);
            beta = DensityMatrix::pure(&vb);
            let now = product_expectation(m, alpha.as_herm(), beta.as_herm()).expect("dims");
            assert!(
                now >= value - T::c(1e-12),
                "alternating ascent moved down: {value:?} -> {now:?}"
            );
            if now - value <= T::c(1e-12) {
                value = now;
                break;
            }
            value = now;
        }
        let better = match &best {
            None => true,
            Some((v, _, _)) => value > *v,
        };
        if better {
            best = Some((value, alpha, beta));
        }
    }
    best.expect("at least one restart")
}

/// Multi-start projected gradient ascent of ‖Ax‖_q on the unit sphere.
///
/// For q = 2 the exact answer (top singular value) is available from the
/// spectrum; ascent is cross-validated against it and the exact value is
/// returned.
pub fn two_to_q_gradient<T: Scalar>(
    a: &CMatrix<T>,
    q: T,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> T {
    assert!(q >= T::c(2.0), "q must be ≥ 2");
    let mut best = T::zero();
    for r in 0..restarts.max(1) {
        let mut rng = rng_from(derive_seed(seed, &[r as u64]));
        let x0 = random_unit_vector::<T>(a.cols(), &mut rng);
        let v = ascend_two_to_q(a, q, x0, iters);
        best = best.max(v);
    }
    if q == T::c(2.0) {
        let exact = schatten_norm(a, Exponent::Infinity).expect("alpha ≥ 1");
        assert!(
            best <= exact + T::c(1e-8),
            "ascent exceeded the exact 2→2 norm"
        );
        return best.max(exact);
    }
    best
}

fn ascend_two_to_q<T: Scalar>(a: &CMatrix<T>, q: T, mut x: CVector<T>, iters: usize) -> T {
    let objective = |x: &CVector<T>| -> T {
        let z = a.apply(x);
        let abs: Vec<T> = z.data.iter().map(|c| c.norm()).collect();
        power_mean_norm(&abs, Exponent::Finite(q))
    };
    let mut f = objective(&x);
    let mut eta = T::one();
    for _ in 0..iters {
        let z = a.apply(&x);
        // Ascent direction A†(|z|^{q−2} ∘ z).
        let mut u = CVector::zeros(z.dim());
        for (ui, zi) in u.data.iter_mut().zip(&z.data) {
            let mag = zi.norm();
            if mag > T::zero() {
                *ui = *zi * c_re(mag.powf(q - T::c(2.0)));
            }
        }
        let g = a.adjoint().apply(&u);
        let gnorm = g.norm();
        if gnorm <= T::epsilon() {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut cand = x.clone();
            for (ci, gi) in cand.data.iter_mut().zip(&g.data) {
                *ci = *ci + *gi * c_re(eta / gnorm);
            }
            let cand = cand.normalized();
            let fc = objective(&cand);
            if fc > f {
                x = cand;
                f = fc;
                eta = (eta * T::c(1.5)).min(T::c(1e6));
                improved = true;
                break;
            }
            eta = eta * T::c(0.5);
        }
        if !improved {
            break;
        }
    }
    f
}

/// Multi-start ascent of ‖Σᵢ tr[Xᵢ ψψ†]·Yᵢ‖_B over pure states.
///
/// Oracle-grade reference for S₁→B norms of decompositions (and of
/// decomposition differences, via signed X terms); not certified.
pub fn s1_to_b_pure_ascent<T: Scalar>(
    xs: &[HermitianMatrix<T>],
    ys: &BElements<T>,
    desc: &BanachDescriptor<T>,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> T {
    assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return T::zero();
    }
    let d = xs[0].dim();
    let objective = |psi: &CVector<T>| -> T {
        let rho = HermitianMatrix::new_unchecked(psi.outer());
        let q: Vec<T> = xs.iter().map(|x| x.hs_inner_re(&rho)).collect();
        crate::model::weighted_norm(&q, ys, desc)
    };
    let mut best = T::zero();
    for r in 0..restarts.max(1) {
        let mut rng = rng_from(derive_seed(seed, &[r as u64]));
        let mut psi = random_unit_vector::<T>(d, &mut rng);
        let mut f = objective(&psi);
        let mut eta = T::one();
        for _ in 0..iters {
            // Ascent along (Σ wᵢXᵢ)ψ with w from the norming dual.
            let rho = HermitianMatrix::new_unchecked(psi.outer());
            let q: Vec<T> = xs.iter().map(|x| x.hs_inner_re(&rho)).collect();
            let w = norming_weights(&q, ys, desc);
            let dir_op = HermitianMatrix::weighted_sum(xs, &w);
            let g = dir_op.as_cmatrix().apply(&psi);
            let gnorm = g.norm();
            if gnorm <= T::epsilon() {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let mut cand = psi.clone();
                for (ci, gi) in cand.data.iter_mut().zip(&g.data) {
                    *ci = *ci + *gi * c_re(eta / gnorm);
                }
                let cand = cand.normalized();
                let fc = objective(&cand);
                if fc > f {
                    psi = cand;
                    f = fc;
                    eta = (eta * T::c(1.5)).min(T::c(1e6));
                    improved = true;
                    break;
                }
                eta = eta * T::c(0.5);
            }
            if !improved {
                break;
            }
        }
        best = best.max(f);
    }
    best
}

/// ⟨G, Yᵢ⟩ for a norming dual G at Σ qᵢYᵢ.
fn norming_weights<T: Scalar>(q: &[T], ys: &BElements<T>, desc: &BanachDescriptor<T>) -> Vec<T> {
    match ys {
        BElements::Matrices(v) => {
            let s = HermitianMatrix::weighted_sum(v, q);
            let (w, vecs) = s.eigh();
            let abs: Vec<T> = w.iter().map(|x| x.abs()).collect();
            let norm = power_mean_norm(&abs, desc.exponent);
            if norm <= T::zero() {
                return vec![T::one(); q.len()];
            }
            let coeffs: Vec<T> = match desc.exponent {
                Exponent::Infinity => {
                    let last = w.len() - 1;
                    let (idx, sign) = if w[last] >= -w[0] {
                        (last, T::one())
                    } else {
                        (0, -T::one())
                    };
                    let mut c = vec![T::zero(); w.len()];
                    c[idx] = sign;
                    c
                }
                Exponent::Finite(alpha) => w
                    .iter()
                    .map(|&lam| {
                        let mag = (lam.abs() / norm).powf(alpha - T::one());
                        if lam < T::zero() {
                            -mag
                        } else {
                            mag
                        }
                    })
                    .collect(),
            };
            let g = HermitianMatrix::new_unchecked(
                vecs.matmul(&CMatrix::diag(&coeffs)).matmul(&vecs.adjoint()),
            );
            v.iter().map(|y| g.hs_inner_re(y)).collect()
        }
        BElements::Vectors(v) => {
            let dim = v[0].len();
            let mut s = vec![T::zero(); dim];
            for (coeff, y) in q.iter().zip(v) {
                for (sj, yj) in s.iter_mut().zip(y) {
                    *sj += *coeff * *yj;
                }
            }
            let abs: Vec<T> = s.iter().map(|x| x.abs()).collect();
            let norm = power_mean_norm(&abs, desc.exponent);
            if norm <= T::zero() {
                return vec![T::one(); q.len()];
            }
            let g: Vec<T> = match desc.exponent {
                Exponent::Infinity => {
                    let mut bestj = 0usize;
                    for (j, vj) in abs.iter().enumerate() {
                        if *vj > abs[bestj] {
                            bestj = j;
                        }
                    }
                    let mut g = vec![T::zero(); dim];
                    g[bestj] = if s[bestj] < T::zero() {
                        -T::one()
                    } else {
                        T::one()
                    };
                    g
                }
                Exponent::Finite(alpha) => s
                    .iter()
                    .map(|&x| {
                        let mag = (x.abs() / norm).powf(alpha - T::one());
                        if x < T::zero() {
                            -mag
                        } else {
                            mag
                        }
                    })
                    .collect(),
            };
            v.iter()
                .map(|y| y.iter().zip(&g).map(|(a, b)| *a * *b).sum())
                .collect()
        }
    }
}

/// One row of a tail-check table.
#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub delta: f64,
    pub empirical: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical matrix-Hoeffding check: tails of ‖(1/k)ΣZᵢ‖ for independent
/// zero-mean Hermitian Zᵢ with ‖Zᵢ‖ ≤ λ against d·exp(−kδ²/8λ²).
///
/// Z draws are symmetrized ±(λ/2)-scaled random rank-one projectors.
pub fn hoeffding_tail_check(
    d: usize,
    k: usize,
    lambda: f64,
    trials: usize,
    deltas: &[f64],
    seed: u64,
) -> Vec<TailRow> {
    let mut exceed = vec![0usize; deltas.len()];
    for t in 0..trials {
        let mut rng = rng_from(derive_seed(seed, &[t as u64]));
        let mut sum = HermitianMatrix::<f64>::zeros(d);
        for _ in 0..k {
            sum = sum.add(&random_bounded_zero_mean(d, lambda, &mut rng));
        }
        let norm = sum.scale(1.0 / k as f64).op_norm();
        for (j, &delta) in deltas.iter().enumerate() {
            if norm >= delta {
                exceed[j] += 1;
            }
        }
    }
    deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let empirical = exceed[j] as f64 / trials as f64;
            let bound = d as f64 * (-(k as f64) * delta * delta / (8.0 * lambda * lambda)).exp();
            TailRow {
                delta,
                empirical,
                bound,
                pass: empirical <= bound,
            }
        })
        .collect()
}

fn random_bounded_zero_mean(d: usize, lambda: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix<f64> {
    let p1 = random_unit_vector::<f64>(d, rng).outer();
    let p2 = random_unit_vector::<f64>(d, rng).outer();
    let s1 = if uniform(rng) < 0.5 { -1.0 } else { 1.0 };
    let s2 = if uniform(rng) < 0.5 { -1.0 } else { 1.0 };
    let m = p1
        .scale_re(s1 * lambda / 2.0)
        .sub(&p2.scale_re(s2 * lambda / 2.0));
    HermitianMatrix::new_unchecked(m)
}

/// Result of the Rademacher type-constant check.
#[derive(Debug, Clone, Serialize)]
pub struct TypeCheckResult {
    pub max_ratio: f64,
    pub c_gamma: f64,
    pub mc_sigma: f64,
    pub pass: bool,
    pub exact_signs: bool,
}

/// Empirical type-γ check: max over trials of E_ε‖Σεᵢ Zᵢ‖^γ / Σ‖Zᵢ‖^γ,
/// with the sign expectation exact for k ≤ 12 and sampled otherwise.
pub fn type_constant_check<T: Scalar>(
    desc: &BanachDescriptor<T>,
    k: usize,
    trials: usize,
    seed: u64,
) -> TypeCheckResult {
    let gamma = desc.gamma.to_f64().unwrap();
    let c_gamma = desc.type_constant.to_f64().unwrap().powf(gamma);
    let exact = k <= 12;
    let mut max_ratio = 0.0f64;
    let mut sigma_worst = 0.0f64;
    for t in 0..trials {
        let mut rng = rng_from(derive_seed(seed, &[t as u64]));
        let zs = random_unit_elements(desc, k, &mut rng);
        let denom: f64 = norms_of(&zs, desc).iter().map(|x| x.powf(gamma)).sum();
        let (mean, sigma) = sign_expectation(&zs, desc, gamma, exact, &mut rng);
        let ratio = mean / denom;
        if ratio > max_ratio {
            max_ratio = ratio;
            sigma_worst = sigma / denom;
        }
    }
    let pass = max_ratio <= c_gamma * (1.0 + 3.0 * sigma_worst) + 1e-9;
    TypeCheckResult {
        max_ratio,
        c_gamma,
        mc_sigma: sigma_worst,
        pass,
        exact_signs: exact,
    }
}

fn norms_of<T: Scalar>(zs: &BElements<T>, desc: &BanachDescriptor<T>) -> Vec<f64> {
    (0..zs.len())
        .map(|i| zs.norm_of(i, desc).to_f64().unwrap())
        .collect()
}

/// Random norm-one elements of the descriptor's space.
fn random_unit_elements<T: Scalar>(
    desc: &BanachDescriptor<T>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> BElements<T> {
    match desc.family {
        NormFamily::Schatten => {
            let items: Vec<HermitianMatrix<T>> = (0..k)
                .map(|_| {
                    let h = random_hermitian::<T>(desc.dim, rng);
                    let n = schatten_norm(h.as_cmatrix(), desc.exponent).unwrap();
                    h.scale(T::one() / n)
                })
                .collect();
            BElements::Matrices(items)
        }
        NormFamily::Ell => {
            let items: Vec<Vec<T>> = (0..k)
                .map(|_| {
                    let v: Vec<T> = (0..desc.dim)
                        .map(|_| T::c(crate::rng::standard_normal(rng)))
                        .collect();
                    let abs: Vec<T> = v.iter().map(|x| x.abs()).collect();
                    let n = power_mean_norm(&abs, desc.exponent);
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect();
            BElements::Vectors(items)
        }
    }
}

/// E_ε ‖Σ εᵢZᵢ‖^γ, exactly over all sign patterns or by sampling.
/// Returns (mean, standard error of the mean; 0 when exact).
fn sign_expectation<T: Scalar>(
    zs: &BElements<T>,
    desc: &BanachDescriptor<T>,
    gamma: f64,
    exact: bool,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let k = zs.len();
    let eval = |signs: &[T]| -> f64 {
        crate::model::weighted_norm(signs, zs, desc)
            .to_f64()
            .unwrap()
            .powf(gamma)
    };
    if exact {
        let total = 1usize << k;
        let mut acc = 0.0;
        let mut signs = vec![T::one(); k];
        for pattern in 0..total {
            for (i, s) in signs.iter_mut().enumerate() {
                *s = if pattern >> i & 1 == 1 {
                    -T::one()
                } else {
                    T::one()
                };
            }
            acc += eval(&signs);
        }
        (acc / total as f64, 0.0)
    } else {
        let samples = 256usize;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        let mut signs = vec![T::one(); k];
        for _ in 0..samples {
            for s in signs.iter_mut() {
                *s = if uniform(rng) < 0.5 {
                    -T::one()
                } else {
                    T::one()
                };
            }
            let v = eval(&signs);
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / samples as f64;
        let var = (acc2 / samples as f64 - mean * mean).max(0.0);
        (mean, (var / samples as f64).sqrt())
    }
}

/// Result of the symmetrization-inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizationResult {
    pub lhs: f64,
    pub rhs_doubled: f64,
    pub sigma: f64,
    pub pass: bool,
}

/// Empirical check of E‖(1/k)ΣZ_{i_j} − E_p Z‖^γ ≤ 2·E‖(1/k)Σε_j Z_{i_j}‖^γ
/// on random unit elements and a random sampling distribution p.
pub fn symmetrization_check<T: Scalar>(
    desc: &BanachDescriptor<T>,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> SymmetrizationResult {
    let gamma = desc.gamma.to_f64().unwrap();
    let mut rng = rng_from(derive_seed(seed, &[0xbeef]));
    let zs = random_unit_elements(desc, n, &mut rng);
    let raw: Vec<f64> = (0..n).map(|_| -uniform(&mut rng).max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    let p: Vec<T> = raw.iter().map(|x| T::c(x / total)).collect();
    let cum: Vec<f64> = raw
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x / total;
            Some(*acc)
        })
        .collect();

    let mut lhs_acc = 0.0;
    let mut lhs_acc2 = 0.0;
    let mut rhs_acc = 0.0;
    let mut rhs_acc2 = 0.0;
    let inv_k = T::one() / T::from_count(k);
    for t in 0..trials {
        let mut trng = rng_from(derive_seed(seed, &[1, t as u64]));
        let mut coeff = vec![T::zero(); n];
        let mut signed = vec![T::zero(); n];
        for _ in 0..k {
            let i = crate::rng::sample_weighted(&cum, 1.0, &mut trng).unwrap_or(n - 1);
            coeff[i] += inv_k;
            let s = if uniform(&mut trng) < 0.5 {
                -T::one()
            } else {
                T::one()
            };
            signed[i] += s * inv_k;
        }
        for i in 0..n {
            coeff[i] -= p[i];
        }
        let lv = crate::model::weighted_norm(&coeff, &zs, desc)
            .to_f64()
            .unwrap()
            .powf(gamma);
        let rv = crate::model::weighted_norm(&signed, &zs, desc)
            .to_f64()
            .unwrap()
            .powf(gamma);
        lhs_acc += lv;
        lhs_acc2 += lv * lv;
        rhs_acc += rv;
        rhs_acc2 += rv * rv;
    }
    let nt = trials as f64;
    let lhs = lhs_acc / nt;
    let rhs = rhs_acc / nt;
    let lvar = (lhs_acc2 / nt - lhs * lhs).max(0.0);
    let rvar = (rhs_acc2 / nt - rhs * rhs).max(0.0);
    let sigma = (lvar / nt).sqrt() + 2.0 * (rvar / nt).sqrt();
    let rhs_doubled = 2.0 * rhs;
    SymmetrizationResult {
        lhs,
        rhs_doubled,
        sigma,
        pass: lhs <= rhs_doubled + 3.0 * sigma,
    }
}

/// Azuma-type tail check for uniformly smooth spaces: empirical tail of
/// ‖(1/k)ΣXᵢ‖_B for independent zero-mean unit-ball Xᵢ against
/// exp(s + 2 − c·kδ²).
pub fn azuma_tail_check<T: Scalar>(
    desc: &BanachDescriptor<T>,
    k: usize,
    c_const: f64,
    trials: usize,
    deltas: &[f64],
    seed: u64,
) -> Vec<TailRow> {
    let s = desc.smoothness.to_f64().unwrap();
    let mut exceed = vec![0usize; deltas.len()];
    let inv_k = T::one() / T::from_count(k);
    for t in 0..trials {
        let mut rng = rng_from(derive_seed(seed, &[2, t as u64]));
        let zs = random_unit_elements(desc, k, &mut rng);
        let mut coeff = vec![T::zero(); k];
        for c in coeff.iter_mut() {
            let sign = if uniform(&mut rng) < 0.5 {
                -T::one()
            } else {
                T::one()
            };
            *c = sign * inv_k;
        }
        let norm = crate::model::weighted_norm(&coeff, &zs, desc)
            .to_f64()
            .unwrap();
        for (j, &delta) in deltas.iter().enumerate() {
            if norm >= delta {
                exceed[j] += 1;
            }
        }
    }
    deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let empirical = exceed[j] as f64 / trials as f64;
            let bound = (s + 2.0 - c_const * k as f64 * delta * delta)
                .exp()
                .min(1.0);
            TailRow {
                delta,
                empirical,
                bound,
                pass: empirical <= bound,
            }
        })
        .collect()
}

/// Net-covering check: the exact minimum of ‖p−q‖_Y over the fully
/// enumerated net Δ_n(k) against √(9·ln(d₂)/k), on random (p, Y).
#[derive(Debug, Clone, Serialize)]
pub struct CoveringResult {
    pub trials: usize,
    pub failures: usize,
    /// Worst min-distance minus bound (negative means covered with margin).
    pub worst_margin: f64,
}

pub fn net_covering_check(trials: usize, seed: u64) -> CoveringResult {
    let mut failures = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    for t in 0..trials {
        let mut rng = rng_from(derive_seed(seed, &[3, t as u64]));
        let n = 2 + (uniform(&mut rng) * 4.0) as usize; // 2..=5
        let d2 = 2 + (uniform(&mut rng) * 3.0) as usize; // 2..=4
        let k = 4 + (uniform(&mut rng) * 17.0) as usize; // 4..=20
        let ys: Vec<HermitianMatrix<f64>> = (0..n)
            .map(|_| random_contraction::<f64>(d2, &mut rng))
            .collect();
        let ybe = BElements::Matrices(ys);
        let desc = crate::model::operator_norm_descriptor::<f64>(d2);
        let raw: Vec<f64> = (0..n).map(|_| -uniform(&mut rng).max(1e-12).ln()).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();

        let bound = crate::nets::attained_delta_basic::<f64>(d2, k);
        let mut best = f64::INFINITY;
        for (_, point) in crate::nets::NetRange::full(n, k) {
            let q = point.probability_vector::<f64>();
            let a: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x - y).collect();
            let dist = crate::model::weighted_norm(&a, &ybe, &desc);
            if dist < best {
                best = dist;
            }
        }
        let margin = best - bound;
        worst_margin = worst_margin.max(margin);
        if best > bound {
            failures += 1;
        }
    }
    CoveringResult {
        trials,
        failures,
        worst_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_gaussian_matrix;
    use approx::assert_abs_diff_eq;

    fn projector(dim: usize, i: usize) -> HermitianMatrix<f64> {
        HermitianMatrix::new_unchecked(CVector::basis(dim, i).outer())
    }

    #[test]
    fn alternating_on_product_projector() {
        let m = projector(2, 0).kron(&projector(2, 0));
        let (v, _, _) = hsep_alternating(&m, 2, 2, 10, 100, 0);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);

        let id = HermitianMatrix::<f64>::identity(4);
        let (v, _, _) = hsep_alternating(&id, 2, 2, 5, 50, 0);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn alternating_on_maximally_entangled_projector() {
        // Projector onto (|00⟩ + |11⟩)/√2: best product overlap is 1/2.
        let mut psi = CVector::<f64>::zeros(4);
        psi.data[0] = c_re(1.0 / 2f64.sqrt());
        psi.data[3] = c_re(1.0 / 2f64.sqrt());
        let m = HermitianMatrix::new_unchecked(psi.outer());
        let (v, alpha, beta) = hsep_alternating(&m, 2, 2, 20, 200, 1);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-6);
        let recheck = product_expectation(&m, alpha.as_herm(), beta.as_herm()).unwrap();
        assert_abs_diff_eq!(recheck, v, epsilon = 1e-12);
    }

    #[test]
    fn gradient_oracle_identities() {
        let id = CMatrix::<f64>::identity(3);
        assert_abs_diff_eq!(two_to_q_gradient(&id, 4.0, 10, 100, 0), 1.0, epsilon = 1e-9);
        let a = CMatrix::diag(&[2.0, 1.0]);
        assert_abs_diff_eq!(two_to_q_gradient(&a, 2.0, 10, 100, 0), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn gradient_oracle_matches_singular_value_at_q2() {
        let mut rng = rng_from(77);
        for _ in 0..100 {
            let a = random_gaussian_matrix::<f64>(3, 4, &mut rng);
            let v = two_to_q_gradient(&a, 2.0, 8, 300, 3);
            let exact = schatten_norm(&a, Exponent::Infinity).unwrap();
            assert_abs_diff_eq!(v, exact, epsilon = 1e-8 * exact.max(1.0));
        }
    }

    #[test]
    fn gradient_oracle_hadamard_q4_matches_grid() {
        // Rotation-like 2x2: cross-check against a dense grid over the
        // amplitude and relative-phase angles of the input state.
        let s = 1.0 / 2f64.sqrt();
        let mut a = CMatrix::<f64>::zeros(2, 2);
        a.set(0, 0, c_re(s));
        a.set(0, 1, c_re(s));
        a.set(1, 0, c_re(s));
        a.set(1, 1, c_re(-s));
        let got = two_to_q_gradient(&a, 4.0, 20, 300, 5);
        let mut grid_best = 0.0f64;
        let steps = 100;
        for ti in 0..=steps {
            let theta = std::f64::consts::PI * ti as f64 / steps as f64;
            for pj in 0..=steps {
                let phase = 2.0 * std::f64::consts::PI * pj as f64 / steps as f64;
                let x = CVector::new(vec![
                    c_re(theta.cos()),
                    num_complex::Complex::from_polar(theta.sin(), phase),
                ]);
                let z = a.apply(&x);
                let abs: Vec<f64> = z.data.iter().map(|c| c.norm()).collect();
                let v = power_mean_norm(&abs, Exponent::Finite(4.0));
                grid_best = grid_best.max(v);
            }
        }
        assert!(got >= grid_best - 1e-4, "ascent {got} vs grid {grid_best}");
        assert!(got <= grid_best + 1e-3);
    }

    #[test]
    fn hoeffding_edge_cases() {
        // δ = 0 is vacuous: empirical 1, bound = d ≥ 1.
        let rows = hoeffding_tail_check(2, 20, 1.0, 50, &[0.0], 0);
        assert_abs_diff_eq!(rows[0].empirical, 1.0, epsilon = 1e-12);
        assert!(rows[0].bound >= 1.0);
        assert!(rows[0].pass);
        // A single bounded term cannot exceed λ.
        let rows = hoeffding_tail_check(2, 1, 1.0, 200, &[1.5], 1);
        assert_abs_diff_eq!(rows[0].empirical, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn type_check_l2_is_exactly_one() {
        let desc = crate::model::banach_constants::<f64>(NormFamily::Ell, Exponent::Finite(2.0), 6)
            .unwrap();
        for k in [2usize, 5, 9, 12] {
            let res = type_constant_check(&desc, k, 20, 3);
            assert!(res.exact_signs);
            assert_abs_diff_eq!(res.max_ratio, 1.0, epsilon = 1e-9);
            assert!(res.pass);
        }
    }

    #[test]
    fn type_check_single_element_ratio_one() {
        let desc =
            crate::model::banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(4.0), 3)
                .unwrap();
        let res = type_constant_check(&desc, 1, 10, 4);
        assert_abs_diff_eq!(res.max_ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn azuma_tails_below_bound() {
        let desc =
            crate::model::banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(4.0), 3)
                .unwrap();
        for k in [50usize, 200] {
            let rows = azuma_tail_check(&desc, k, 1.0, 500, &[0.25, 0.5, 1.0], 66);
            for r in rows {
                assert!(
                    r.pass,
                    "k={k} δ={}: empirical {} above bound {}",
                    r.delta, r.empirical, r.bound
                );
            }
        }
    }

    #[test]
    fn covering_small_smoke() {
        let res = net_covering_check(10, 5);
        assert_eq!(res.failures, 0, "covering bound violated: {res:?}");
    }
}
