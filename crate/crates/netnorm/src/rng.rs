//! Seeded randomness.
//!
//! All randomness in the crate flows from explicit `u64` seeds through
//! ChaCha8 streams; derived seeds mix in context tags (net rank, restart
//! index, retry index) so parallel work stays deterministic regardless of
//! scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matlib::{CMatrix, CVector, DensityMatrix, HermitianMatrix};
use crate::scalar::{Scalar, C};

/// Counter-based generator for a base seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix a base seed with context tags (splitmix64 finalizer chain).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut x = seed;
    for &t in tags {
        x = splitmix(x ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    x
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in [0,1).
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>()
}

/// Standard normal via Box–Muller.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn normal_complex<T: Scalar>(rng: &mut ChaCha8Rng) -> C<T> {
    C::new(T::c(standard_normal(rng)), T::c(standard_normal(rng)))
}

/// Haar-ish random unit vector (complex Gaussian, normalized).
pub fn random_unit_vector<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> CVector<T> {
    let mut v = CVector::zeros(dim);
    for i in 0..dim {
        v.data[i] = normal_complex(rng);
    }
    v.normalized()
}

/// Random pure state |ψ⟩⟨ψ|.
pub fn random_pure_density<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<T> {
    DensityMatrix::pure(&random_unit_vector(dim, rng))
}

/// Random full-rank density matrix GG†/tr.
pub fn random_density<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<T> {
    let g = random_gaussian_matrix::<T>(dim, dim, rng);
    let psd = HermitianMatrix::new_unchecked(g.matmul(&g.adjoint()));
    let tr = psd.trace_re();
    DensityMatrix::new(psd.scale(T::one() / tr)).expect("Wishart density")
}

/// Gaussian complex matrix.
pub fn random_gaussian_matrix<T: Scalar>(
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> CMatrix<T> {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, normal_complex(rng));
        }
    }
    m
}

/// GUE-style random Hermitian, (G+G†)/2.
pub fn random_hermitian<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<T> {
    let g = random_gaussian_matrix::<T>(dim, dim, rng);
    HermitianMatrix::new_unchecked(g)
}

/// Random operator with spectrum in [0,1]: V diag(u) V† for a random basis.
pub fn random_contraction<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<T> {
    let h = random_hermitian::<T>(dim, rng);
    let (_, v) = h.eigh();
    let u: Vec<T> = (0..dim).map(|_| T::c(uniform(rng))).collect();
    HermitianMatrix::new_unchecked(v.matmul(&CMatrix::diag(&u)).matmul(&v.adjoint()))
}

/// Random POVM: PSD X₁..X_n with ΣXᵢ = I (Wishart terms whitened by the sum).
pub fn random_povm<T: Scalar>(
    dim: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<HermitianMatrix<T>> {
    let raw: Vec<HermitianMatrix<T>> = (0..n)
        .map(|_| {
            let g = random_gaussian_matrix::<T>(dim, dim, rng);
            HermitianMatrix::new_unchecked(g.matmul(&g.adjoint()))
        })
        .collect();
    let mut sum = HermitianMatrix::zeros(dim);
    for x in &raw {
        sum = sum.add(x);
    }
    let (w, v) = sum.eigh();
    let inv_sqrt: Vec<T> = w
        .iter()
        .map(|&x| T::one() / x.max(T::c(1e-300)).sqrt())
        .collect();
    let s = v.matmul(&CMatrix::diag(&inv_sqrt)).matmul(&v.adjoint());
    raw.into_iter()
        .map(|x| HermitianMatrix::new_unchecked(s.matmul(x.as_cmatrix()).matmul(&s)))
        .collect()
}

/// Sample an index from weights (need not sum to 1; the remainder is
/// returned as `None`, the null outcome).
pub fn sample_weighted(cumulative: &[f64], total_mass: f64, rng: &mut ChaCha8Rng) -> Option<usize> {
    let u: f64 = rng.gen::<f64>();
    if u >= total_mass {
        return None;
    }
    // Binary search for the first cumulative weight exceeding u.
    let mut lo = 0usize;
    let mut hi = cumulative.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cumulative[mid] <= u {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Some(lo.min(cumulative.len() - 1))
}
