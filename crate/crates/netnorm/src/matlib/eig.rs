//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Quadratically convergent at the sizes this crate targets (dim ≤ a few
//! hundred) and fully deterministic: eigenvalues come out ascending and the
//! eigenvector for a degenerate eigenvalue is whatever the fixed sweep order
//! produces.

use crate::scalar::{c_re, c_zero, Scalar};

use super::CMatrix;

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary of matching
/// eigenvector columns. The input is assumed Hermitian; only its lower/upper
/// agreement to rounding is relied on.
pub fn jacobi_eigh<T: Scalar>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let d = m.rows();
    debug_assert!(m.is_square());
    let mut a = m.clone();
    let mut v = CMatrix::identity(d);
    if d == 1 {
        return (vec![a.get(0, 0).re], v);
    }

    let fro = a.frobenius_norm();
    let stop = fro * T::epsilon() * T::from_count(d);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off = off + a.get(p, q).norm_sqr();
            }
        }
        let off = off.sqrt();
        if off <= stop {
            break;
        }
        // Threshold sweep: rotations on entries already far below the
        // off-diagonal mass cannot advance convergence.
        let threshold = off / T::from_count(d * d);
        for p in 0..d {
            for q in (p + 1)..d {
                if a.get(p, q).norm() > threshold {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    // Diagonal of the converged matrix holds the eigenvalues.
    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<T> = (0..d).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..d {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    (values, vectors)
}

/// One complex Givens rotation zeroing the (p,q) entry: A ← J†AJ, V ← VJ.
fn rotate<T: Scalar>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let abs = apq.norm();
    if abs == T::zero() {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let phase = apq / c_re(abs);

    let tau = (aqq - app) / (T::c(2.0) * abs);
    let sign = if tau >= T::zero() {
        T::one()
    } else {
        -T::one()
    };
    let t = -sign / (tau.abs() + (T::one() + tau * tau).sqrt());
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let d = a.rows();
    // Column update: M ← M·J.
    for k in 0..d {
        let mkp = a.get(k, p);
        let mkq = a.get(k, q);
        a.set(k, p, mkp * c_re(c) + mkq * phase.conj() * c_re(s));
        a.set(k, q, mkq * c_re(c) - mkp * phase * c_re(s));
    }
    // Row update: M ← J†·M.
    for k in 0..d {
        let mpk = a.get(p, k);
        let mqk = a.get(q, k);
        a.set(p, k, mpk * c_re(c) + mqk * phase * c_re(s));
        a.set(q, k, mqk * c_re(c) - mpk * phase.conj() * c_re(s));
    }
    // Clean the zeroed pair and enforce a real diagonal.
    a.set(p, q, c_zero());
    a.set(q, p, c_zero());
    let app_new = a.get(p, p);
    let aqq_new = a.get(q, q);
    a.set(p, p, c_re(app_new.re));
    a.set(q, q, c_re(aqq_new.re));

    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c_re(c) + vkq * phase.conj() * c_re(s));
        v.set(k, q, vkq * c_re(c) - vkp * phase * c_re(s));
    }
}
