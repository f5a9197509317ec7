//! Dense Hermitian-matrix kernel.
//!
//! Schatten norms, a Jacobi eigensolver for complex Hermitian matrices,
//! Euclidean projections onto the density-matrix set and the probability
//! simplex, and partial traces. Matrices are dense and desk scale; there
//! are no sparse formats.

mod eig;
mod project;

pub use eig::jacobi_eigh;
pub use project::{l1_ball_project, project_to_density, simplex_project, trace_ball_project};

use crate::scalar::{c_re, c_zero, Scalar, C};
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e} exceeds tolerance)")]
    NotHermitian(f64),
    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Schatten/ℓ exponent: a finite value ≥ 1 or ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Exponent<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Finite value, if any.
    pub fn finite(&self) -> Option<T> {
        match self {
            Exponent::Finite(a) => Some(*a),
            Exponent::Infinity => None,
        }
    }
}

/// Complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector<T> {
    pub data: Vec<C<T>>,
}

impl<T: Scalar> CVector<T> {
    pub fn new(data: Vec<C<T>>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![c_zero(); dim],
        }
    }

    /// Computational basis vector e_i.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = c_re(T::one());
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n <= T::zero() {
            return self.clone();
        }
        self.scale(c_re(T::one() / n))
    }

    /// ⟨self|other⟩ with conjugation on `self`.
    pub fn inner(&self, other: &Self) -> C<T> {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * *b)
            .fold(c_zero(), |acc, z| acc + z)
    }

    /// Rank-one matrix |self⟩⟨self|.
    pub fn outer(&self) -> CMatrix<T> {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.data[i] * self.data[j].conj());
            }
        }
        m
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![c_zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, c_re(T::one()));
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self, MatError> {
        if data.len() != rows * cols {
            return Err(MatError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, c_re(*v));
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a + *b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a - *b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_re(&self, s: T) -> Self {
        let data = self.data.iter().map(|z| *z * c_re(s)).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == c_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(l, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        debug_assert_eq!(self.cols, v.dim());
        let mut out = CVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = c_zero();
            for j in 0..self.cols {
                acc = acc + self.get(i, j) * v.data[j];
            }
            out.data[i] = acc;
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(r1 * r2, c1 * c2);
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self.get(i1, j1);
                if a == c_zero() {
                    continue;
                }
                for i2 in 0..r2 {
                    for j2 in 0..c2 {
                        out.set(i1 * r2 + i2, j1 * c2 + j2, a * other.get(i2, j2));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        debug_assert!(self.is_square());
        (0..self.rows).fold(c_zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Max deviation from conjugate symmetry.
    pub fn hermiticity_defect(&self) -> T {
        debug_assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                let dev = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// (X + X†)/2.
    pub fn symmetrized(&self) -> Self {
        let half = c_re(T::c(0.5));
        self.add(&self.adjoint()).scale_re(half.re)
    }

    /// Real part of the Hilbert–Schmidt inner product ⟨self, other⟩.
    pub fn hs_inner_re(&self, other: &Self) -> T {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .fold(T::zero(), |x, y| x + y)
    }
}

/// Square complex matrix that equals its conjugate transpose.
///
/// Constructors symmetrize the input after checking the deviation is within
/// `tol::HERM`, so file I/O rounding cannot break exact Hermiticity
/// downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    m: CMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self, MatError> {
        if !m.is_square() {
            return Err(MatError::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if m.rows() == 0 {
            return Err(MatError::DimensionMismatch("dim must be ≥ 1".into()));
        }
        let defect = m.hermiticity_defect();
        if defect > T::c(tol::HERM) {
            return Err(MatError::NotHermitian(defect.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { m: m.symmetrized() })
    }

    /// Wrap a matrix already known to be Hermitian (weighted sums of
    /// Hermitian terms with real coefficients, projections, ...).
    pub fn new_unchecked(m: CMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        Self { m: m.symmetrized() }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim),
        }
    }

    pub fn diag(values: &[T]) -> Self {
        Self {
            m: CMatrix::diag(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn as_cmatrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_cmatrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace_re(&self) -> T {
        self.m.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: self.m.add(&other.m),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: self.m.sub(&other.m),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            m: self.m.scale_re(s),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            m: self.m.kron(&other.m),
        }
    }

    /// Σ aᵢ·termᵢ for real coefficients (Hermitian-closed).
    pub fn weighted_sum(terms: &[Self], coeffs: &[T]) -> Self {
        debug_assert_eq!(terms.len(), coeffs.len());
        debug_assert!(!terms.is_empty());
        let dim = terms[0].dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (t, &a) in terms.iter().zip(coeffs) {
            if a == T::zero() {
                continue;
            }
            acc = acc.add(&t.m.scale_re(a));
        }
        Self { m: acc }
    }

    /// Eigendecomposition; eigenvalues ascending, columns of the returned
    /// matrix are the matching orthonormal eigenvectors.
    pub fn eigh(&self) -> (Vec<T>, CMatrix<T>) {
        jacobi_eigh(&self.m)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigenvalues().last().unwrap()
    }

    /// Operator norm (largest singular value = max |eigenvalue|).
    pub fn op_norm(&self) -> T {
        let w = self.eigenvalues();
        w.iter().map(|x| x.abs()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.frobenius_norm()
    }

    pub fn hs_inner_re(&self, other: &Self) -> T {
        self.m.hs_inner_re(&other.m)
    }
}

/// PSD Hermitian matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    h: HermitianMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn new(h: HermitianMatrix<T>) -> Result<Self, MatError> {
        let min = h.min_eigenvalue();
        if min < T::c(tol::PSD_FLOOR) {
            return Err(MatError::NotDensity(format!(
                "smallest eigenvalue {:e} below floor",
                min.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let tr = h.trace_re();
        if (tr - T::one()).abs() > T::c(tol::TRACE) {
            return Err(MatError::NotDensity(format!(
                "trace {} is not 1",
                tr.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { h })
    }

    pub(crate) fn new_unchecked(h: HermitianMatrix<T>) -> Self {
        Self { h }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            h: HermitianMatrix::identity(dim).scale(T::one() / T::from_count(dim)),
        }
    }

    /// |ψ⟩⟨ψ| for a unit vector ψ (normalized here).
    pub fn pure(v: &CVector<T>) -> Self {
        let u = v.normalized();
        Self {
            h: HermitianMatrix::new_unchecked(u.outer()),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn as_herm(&self) -> &HermitianMatrix<T> {
        &self.h
    }
}

/// Which subsystem `partial_trace` traces out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    /// Trace out the first (d1) factor.
    A,
    /// Trace out the second (d2) factor.
    B,
}

/// Partial trace of an operator on C^{d1} ⊗ C^{d2}; index (i1,i2) ↦ i1·d2+i2.
pub fn partial_trace<T: Scalar>(
    m: &HermitianMatrix<T>,
    side: TraceSide,
    d1: usize,
    d2: usize,
) -> Result<HermitianMatrix<T>, MatError> {
    if m.dim() != d1 * d2 {
        return Err(MatError::DimensionMismatch(format!(
            "operator has dim {}, expected {}·{}",
            m.dim(),
            d1,
            d2
        )));
    }
    let src = m.as_cmatrix();
    let out = match side {
        TraceSide::A => {
            let mut k = CMatrix::zeros(d2, d2);
            for j in 0..d2 {
                for jp in 0..d2 {
                    let mut acc = c_zero();
                    for i in 0..d1 {
                        acc = acc + src.get(i * d2 + j, i * d2 + jp);
                    }
                    k.set(j, jp, acc);
                }
            }
            k
        }
        TraceSide::B => {
            let mut k = CMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for ip in 0..d1 {
                    let mut acc = c_zero();
                    for j in 0..d2 {
                        acc = acc + src.get(i * d2 + j, ip * d2 + j);
                    }
                    k.set(i, ip, acc);
                }
            }
            k
        }
    };
    Ok(HermitianMatrix::new_unchecked(out))
}

/// tr_B[M(I⊗β)]: the d1-dimensional operator K with ⟨K,α⟩ = tr[M(α⊗β)].
pub fn contract_b<T: Scalar>(
    m: &HermitianMatrix<T>,
    beta: &HermitianMatrix<T>,
    d1: usize,
    d2: usize,
) -> Result<HermitianMatrix<T>, MatError> {
    if m.dim() != d1 * d2 || beta.dim() != d2 {
        return Err(MatError::DimensionMismatch(
            "contract_b operand dims".into(),
        ));
    }
    let src = m.as_cmatrix();
    let b = beta.as_cmatrix();
    let mut k = CMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for ip in 0..d1 {
            let mut acc = c_zero();
            for j in 0..d2 {
                for jp in 0..d2 {
                    acc = acc + src.get(i * d2 + j, ip * d2 + jp) * b.get(jp, j);
                }
            }
            k.set(i, ip, acc);
        }
    }
    Ok(HermitianMatrix::new_unchecked(k))
}

/// tr_A[M(α⊗I)]: the d2-dimensional operator K with ⟨K,β⟩ = tr[M(α⊗β)].
pub fn contract_a<T: Scalar>(
    m: &HermitianMatrix<T>,
    alpha: &HermitianMatrix<T>,
    d1: usize,
    d2: usize,
) -> Result<HermitianMatrix<T>, MatError> {
    if m.dim() != d1 * d2 || alpha.dim() != d1 {
        return Err(MatError::DimensionMismatch(
            "contract_a operand dims".into(),
        ));
    }
    let src = m.as_cmatrix();
    let a = alpha.as_cmatrix();
    let mut k = CMatrix::zeros(d2, d2);
    for j in 0..d2 {
        for jp in 0..d2 {
            let mut acc = c_zero();
            for i in 0..d1 {
                for ip in 0..d1 {
                    acc = acc + src.get(i * d2 + j, ip * d2 + jp) * a.get(ip, i);
                }
            }
            k.set(j, jp, acc);
        }
    }
    Ok(HermitianMatrix::new_unchecked(k))
}

/// tr[M(α⊗β)] for Hermitian M, α, β.
pub fn product_expectation<T: Scalar>(
    m: &HermitianMatrix<T>,
    alpha: &HermitianMatrix<T>,
    beta: &HermitianMatrix<T>,
) -> Result<T, MatError> {
    let k = contract_b(m, beta, alpha.dim(), beta.dim())?;
    Ok(k.hs_inner_re(alpha))
}

/// Schatten-α norm of a general (possibly rectangular) matrix.
///
/// (Σ σᵢ^α)^{1/α} over singular values; for α = ∞ the largest singular
/// value. Rejects α < 1.
pub fn schatten_norm<T: Scalar>(m: &CMatrix<T>, alpha: Exponent<T>) -> Result<T, MatError> {
    if let Exponent::Finite(a) = alpha {
        if a < T::one() {
            return Err(MatError::Parameter(format!(
                "Schatten exponent must be ≥ 1, got {}",
                a.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    let sv = singular_values(m);
    Ok(power_mean_norm(&sv, alpha))
}

/// Norm of a nonnegative value vector under a finite-or-∞ exponent.
pub(crate) fn power_mean_norm<T: Scalar>(vals: &[T], alpha: Exponent<T>) -> T {
    let vmax = vals.iter().fold(T::zero(), |a, b| a.max(*b));
    match alpha {
        Exponent::Infinity => vmax,
        Exponent::Finite(a) => {
            if vmax <= T::zero() {
                return T::zero();
            }
            if a == T::one() {
                return vals.iter().fold(T::zero(), |x, y| x + *y);
            }
            // Factor out the max to avoid overflow for large exponents.
            let s = vals
                .iter()
                .map(|v| (*v / vmax).powf(a))
                .fold(T::zero(), |x, y| x + y);
            vmax * s.powf(T::one() / a)
        }
    }
}

/// Singular values (descending unspecified order) of a dense matrix.
pub fn singular_values<T: Scalar>(m: &CMatrix<T>) -> Vec<T> {
    if m.is_square() {
        let scale = m.frobenius_norm().max(T::one());
        if m.hermiticity_defect() <= T::c(tol::HERM) * scale {
            let h = HermitianMatrix::new_unchecked(m.clone());
            return h.eigenvalues().into_iter().map(|x| x.abs()).collect();
        }
    }
    // Gram route on the smaller side: σ = sqrt(eig(G)).
    let g = if m.rows() <= m.cols() {
        m.matmul(&m.adjoint())
    } else {
        m.adjoint().matmul(m)
    };
    let h = HermitianMatrix::new_unchecked(g);
    h.eigenvalues()
        .into_iter()
        .map(|x| x.max(T::zero()).sqrt())
        .collect()
}

/// Largest eigenvalue and a matching unit eigenvector.
///
/// Degenerate top eigenvalues return the deterministic vector produced by
/// the fixed-order decomposition.
pub fn top_eigenpair<T: Scalar>(x: &HermitianMatrix<T>) -> (T, CVector<T>) {
    let (w, v) = x.eigh();
    let last = w.len() - 1;
    let mut vec = CVector::zeros(x.dim());
    for i in 0..x.dim() {
        vec.data[i] = v.get(i, last);
    }
    (w[last], vec)
}
