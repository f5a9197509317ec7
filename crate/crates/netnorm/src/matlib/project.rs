//! Euclidean projections: probability simplex, ℓ₁ ball, density matrices,
//! trace-norm ball.

use crate::scalar::Scalar;

use super::{CMatrix, DensityMatrix, HermitianMatrix};

/// Euclidean projection onto Δ_n = {p ≥ 0, Σpᵢ = 1}.
///
/// Sort-and-threshold procedure; ties and the all-equal case resolve to the
/// symmetric answer (e.g. the zero vector projects to uniform).
pub fn simplex_project<T: Scalar>(v: &[T]) -> Vec<T> {
    let n = v.len();
    assert!(n > 0, "cannot project an empty vector");
    let mut u: Vec<T> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cssv = T::zero();
    let mut rho = 0usize;
    let mut theta = T::zero();
    for (i, &ui) in u.iter().enumerate() {
        cssv += ui;
        let t = (cssv - T::one()) / T::from_count(i + 1);
        if ui - t > T::zero() {
            rho = i + 1;
            theta = t;
        }
    }
    if rho == 0 {
        // Not reachable for finite input; keep a defined answer anyway.
        return vec![T::one() / T::from_count(n); n];
    }
    v.iter().map(|&vi| (vi - theta).max(T::zero())).collect()
}

/// Euclidean projection onto the ℓ₁ unit ball.
pub fn l1_ball_project<T: Scalar>(v: &[T]) -> Vec<T> {
    let norm1: T = v.iter().map(|x| x.abs()).fold(T::zero(), |a, b| a + b);
    if norm1 <= T::one() {
        return v.to_vec();
    }
    let abs: Vec<T> = v.iter().map(|x| x.abs()).collect();
    let proj = simplex_project(&abs);
    v.iter()
        .zip(&proj)
        .map(|(&x, &p)| if x < T::zero() { -p } else { p })
        .collect()
}

/// Frobenius projection onto the density-matrix set: eigendecompose,
/// project the spectrum onto the simplex, reassemble.
pub fn project_to_density<T: Scalar>(x: &HermitianMatrix<T>) -> DensityMatrix<T> {
    let (w, v) = x.eigh();
    let pw = simplex_project(&w);
    DensityMatrix::new_unchecked(reassemble(&v, &pw))
}

/// Frobenius projection onto {‖X‖_{S₁} ≤ 1} within the Hermitian space.
pub fn trace_ball_project<T: Scalar>(x: &HermitianMatrix<T>) -> HermitianMatrix<T> {
    let (w, v) = x.eigh();
    let pw = l1_ball_project(&w);
    reassemble(&v, &pw)
}

fn reassemble<T: Scalar>(v: &CMatrix<T>, w: &[T]) -> HermitianMatrix<T> {
    let diag = CMatrix::diag(w);
    HermitianMatrix::new_unchecked(v.matmul(&diag).matmul(&v.adjoint()))
}
