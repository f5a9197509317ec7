//! Input objects: one-way LOCC measurements, multipartite trees,
//! entanglement-breaking channels, and the Banach-space descriptor carrying
//! type and smoothness constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matlib::{
    power_mean_norm, schatten_norm, DensityMatrix, Exponent, HermitianMatrix, MatError,
};
use crate::scalar::Scalar;
use crate::tol;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}

/// A violated invariant, reported as data rather than an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub index: Option<usize>,
    pub magnitude: f64,
}

impl Violation {
    fn new(rule: impl Into<String>, index: Option<usize>, magnitude: f64) -> Self {
        Self {
            rule: rule.into(),
            index,
            magnitude,
        }
    }
}

/// One term Xᵢ ⊗ Yᵢ of a one-way LOCC decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccTerm<T> {
    pub x: HermitianMatrix<T>,
    pub y: HermitianMatrix<T>,
}

/// Explicit decomposition M = Σᵢ Xᵢ ⊗ Yᵢ of a bipartite measurement with
/// Xᵢ ⪰ 0, ΣXᵢ ⪯ I and 0 ⪯ Yᵢ ⪯ I.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWayLocc<T> {
    pub d1: usize,
    pub d2: usize,
    pub terms: Vec<LoccTerm<T>>,
}

impl<T: Scalar> OneWayLocc<T> {
    pub fn new(d1: usize, d2: usize, terms: Vec<LoccTerm<T>>) -> Result<Self, ModelError> {
        for (i, t) in terms.iter().enumerate() {
            if t.x.dim() != d1 || t.y.dim() != d2 {
                return Err(ModelError::Inconsistent(format!(
                    "term {i}: dims ({}, {}) do not match (d1, d2) = ({d1}, {d2})",
                    t.x.dim(),
                    t.y.dim()
                )));
            }
        }
        Ok(Self { d1, d2, terms })
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    /// Assembled operator Σᵢ Xᵢ ⊗ Yᵢ on C^{d1·d2}.
    pub fn assemble(&self) -> HermitianMatrix<T> {
        let mut acc = HermitianMatrix::zeros(self.d1 * self.d2);
        for t in &self.terms {
            acc = acc.add(&t.x.kron(&t.y));
        }
        acc
    }

    pub fn xs(&self) -> Vec<HermitianMatrix<T>> {
        self.terms.iter().map(|t| t.x.clone()).collect()
    }

    pub fn ys(&self) -> Vec<HermitianMatrix<T>> {
        self.terms.iter().map(|t| t.y.clone()).collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        validate_x_side(&self.xs(), &mut out);
        for (i, t) in self.terms.iter().enumerate() {
            let w = t.y.eigenvalues();
            let min = w[0];
            let max = *w.last().unwrap();
            if min < T::c(tol::PSD_FLOOR) {
                out.push(Violation::new("Y ⪰ 0", Some(i), to_f64(-min)));
            }
            if max > T::one() + T::c(tol::POVM_SUM) {
                out.push(Violation::new("Y ⪯ I", Some(i), to_f64(max - T::one())));
            }
        }
        out
    }
}

/// X-side invariants shared by every decomposition: each Xᵢ PSD and
/// ΣXᵢ ⪯ I.
fn validate_x_side<T: Scalar>(xs: &[HermitianMatrix<T>], out: &mut Vec<Violation>) {
    if xs.is_empty() {
        return;
    }
    let dim = xs[0].dim();
    let mut sum = HermitianMatrix::zeros(dim);
    for (i, x) in xs.iter().enumerate() {
        let min = x.min_eigenvalue();
        if min < T::c(tol::PSD_FLOOR) {
            out.push(Violation::new("X ⪰ 0", Some(i), to_f64(-min)));
        }
        sum = sum.add(x);
    }
    let max = sum.max_eigenvalue();
    if max > T::one() + T::c(tol::POVM_SUM) {
        out.push(Violation::new("ΣX ⪯ I", None, to_f64(max - T::one())));
    }
}

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Target-space elements of a general decomposition: Hermitian matrices in
/// a Schatten space or real vectors in an ℓ space, homogeneous per instance.
#[derive(Debug, Clone, PartialEq)]
pub enum BElements<T> {
    Matrices(Vec<HermitianMatrix<T>>),
    Vectors(Vec<Vec<T>>),
}

impl<T: Scalar> BElements<T> {
    pub fn len(&self) -> usize {
        match self {
            BElements::Matrices(v) => v.len(),
            BElements::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Norm of element i under the descriptor's exponent.
    pub fn norm_of(&self, i: usize, desc: &BanachDescriptor<T>) -> T {
        match self {
            BElements::Matrices(v) => {
                schatten_norm(v[i].as_cmatrix(), desc.exponent).expect("exponent validated")
            }
            BElements::Vectors(v) => {
                let abs: Vec<T> = v[i].iter().map(|x| x.abs()).collect();
                power_mean_norm(&abs, desc.exponent)
            }
        }
    }

    pub fn max_norm(&self, desc: &BanachDescriptor<T>) -> T {
        (0..self.len())
            .map(|i| self.norm_of(i, desc))
            .fold(T::zero(), T::max)
    }
}

/// Decomposition Λ(ρ) = Σᵢ tr(Xᵢρ)·Yᵢ with a general target space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralDecomposition<T> {
    pub d1: usize,
    pub xs: Vec<HermitianMatrix<T>>,
    pub ys: BElements<T>,
}

impl<T: Scalar> GeneralDecomposition<T> {
    pub fn new(
        d1: usize,
        xs: Vec<HermitianMatrix<T>>,
        ys: BElements<T>,
    ) -> Result<Self, ModelError> {
        if xs.len() != ys.len() {
            return Err(ModelError::Inconsistent(format!(
                "{} X terms vs {} Y terms",
                xs.len(),
                ys.len()
            )));
        }
        for (i, x) in xs.iter().enumerate() {
            if x.dim() != d1 {
                return Err(ModelError::Inconsistent(format!(
                    "X[{i}] has dim {}, expected {d1}",
                    x.dim()
                )));
            }
        }
        Ok(Self { d1, xs, ys })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn validate(&self, desc: &BanachDescriptor<T>) -> Vec<Violation> {
        let mut out = Vec::new();
        validate_x_side(&self.xs, &mut out);
        for i in 0..self.ys.len() {
            let n = self.ys.norm_of(i, desc);
            if !n.is_finite() {
                out.push(Violation::new("‖Y‖_B finite", Some(i), f64::INFINITY));
            }
        }
        out
    }
}

/// Entanglement-breaking channel Λ(ρ) = Σᵢ tr(Xᵢρ)·Yᵢ with {Xᵢ} a POVM and
/// Yᵢ density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EbChannel<T> {
    pub d1: usize,
    pub d2: usize,
    pub terms: Vec<(HermitianMatrix<T>, DensityMatrix<T>)>,
}

impl<T: Scalar> EbChannel<T> {
    pub fn new(
        d1: usize,
        d2: usize,
        terms: Vec<(HermitianMatrix<T>, DensityMatrix<T>)>,
    ) -> Result<Self, ModelError> {
        for (i, (x, y)) in terms.iter().enumerate() {
            if x.dim() != d1 || y.dim() != d2 {
                return Err(ModelError::Inconsistent(format!("term {i} dims")));
            }
        }
        Ok(Self { d1, d2, terms })
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut sum = HermitianMatrix::zeros(self.d1);
        for (i, (x, y)) in self.terms.iter().enumerate() {
            let min = x.min_eigenvalue();
            if min < T::c(tol::PSD_FLOOR) {
                out.push(Violation::new("X ⪰ 0", Some(i), to_f64(-min)));
            }
            sum = sum.add(x);
            let tr = y.as_herm().trace_re();
            if (tr - T::one()).abs() > T::c(tol::TRACE) {
                out.push(Violation::new(
                    "tr Y = 1",
                    Some(i),
                    to_f64((tr - T::one()).abs()),
                ));
            }
        }
        let w = sum.eigenvalues();
        let dev = w
            .iter()
            .map(|&x| (x - T::one()).abs())
            .fold(T::zero(), T::max);
        if dev > T::c(tol::POVM_EQ) {
            out.push(Violation::new("ΣX = I", None, to_f64(dev)));
        }
        out
    }

    /// View as a general decomposition into the Schatten target space.
    pub fn as_general(&self) -> GeneralDecomposition<T> {
        GeneralDecomposition {
            d1: self.d1,
            xs: self.terms.iter().map(|(x, _)| x.clone()).collect(),
            ys: BElements::Matrices(
                self.terms
                    .iter()
                    .map(|(_, y)| y.as_herm().clone())
                    .collect(),
            ),
        }
    }
}

/// Fully one-way LOCC measurement on l parties, stored as per-level operator
/// tensors: level m holds X^{(m)}_{i₁..i_m}, row-major over (i₁..i_m), with a
/// uniform branching count per level so the weighted contraction over the
/// first index is well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteLocc<T> {
    pub dims: Vec<usize>,
    pub counts: Vec<usize>,
    pub levels: Vec<Vec<HermitianMatrix<T>>>,
}

impl<T: Scalar> MultipartiteLocc<T> {
    pub fn new(
        dims: Vec<usize>,
        counts: Vec<usize>,
        levels: Vec<Vec<HermitianMatrix<T>>>,
    ) -> Result<Self, ModelError> {
        let l = dims.len();
        if counts.len() != l || levels.len() != l || l == 0 {
            return Err(ModelError::Inconsistent(
                "dims, counts and levels must have one entry per party".into(),
            ));
        }
        let mut expect = 1usize;
        for m in 0..l {
            expect = expect
                .checked_mul(counts[m])
                .ok_or_else(|| ModelError::Inconsistent("index space overflow".into()))?;
            if levels[m].len() != expect {
                return Err(ModelError::Inconsistent(format!(
                    "level {m} holds {} operators, expected {expect}",
                    levels[m].len()
                )));
            }
            for (i, op) in levels[m].iter().enumerate() {
                if op.dim() != dims[m] {
                    return Err(ModelError::Inconsistent(format!(
                        "level {m} operator {i} has dim {}, expected {}",
                        op.dim(),
                        dims[m]
                    )));
                }
            }
        }
        Ok(Self {
            dims,
            counts,
            levels,
        })
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension of the assembled operator.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let l = self.parties();
        // Children of each internal node (the root included): PSD, sum ⪯ I.
        let mut prefix_count = 1usize;
        for m in 0..l {
            let nm = self.counts[m];
            for p in 0..prefix_count {
                let mut sum = HermitianMatrix::zeros(self.dims[m]);
                for i in 0..nm {
                    let op = &self.levels[m][p * nm + i];
                    let min = op.min_eigenvalue();
                    if min < T::c(tol::PSD_FLOOR) {
                        out.push(Violation::new(
                            format!("level {} X ⪰ 0", m + 1),
                            Some(p * nm + i),
                            to_f64(-min),
                        ));
                    }
                    sum = sum.add(op);
                }
                let max = sum.max_eigenvalue();
                if max > T::one() + T::c(tol::POVM_SUM) {
                    out.push(Violation::new(
                        format!("level {} ΣX ⪯ I", m + 1),
                        Some(p),
                        to_f64(max - T::one()),
                    ));
                }
            }
            prefix_count *= nm;
        }
        // Leaves additionally satisfy X ⪯ I individually.
        for (i, op) in self.levels[l - 1].iter().enumerate() {
            let max = op.max_eigenvalue();
            if max > T::one() + T::c(tol::POVM_SUM) {
                out.push(Violation::new(
                    "leaf X ⪯ I",
                    Some(i),
                    to_f64(max - T::one()),
                ));
            }
        }
        out
    }

    /// Assembled sub-operator M_{i₁} on parties 2..l for first-level index i₁:
    /// Σ_{i₂} X^{(2)}_{i₁,i₂} ⊗ Σ_{i₃} X^{(3)}_{i₁,i₂,i₃} ⊗ ⋯.
    pub fn assemble_branch(&self, i1: usize) -> HermitianMatrix<T> {
        self.assemble_from(1, i1)
    }

    /// Full assembled measurement M = Σ_{i₁} X^{(1)}_{i₁} ⊗ M_{i₁}.
    pub fn assemble(&self) -> HermitianMatrix<T> {
        let tail: usize = self.dims.iter().product();
        let mut acc = HermitianMatrix::zeros(tail);
        for i in 0..self.counts[0] {
            let sub = if self.parties() == 1 {
                self.levels[0][i].clone()
            } else {
                self.levels[0][i].kron(&self.assemble_from(1, i))
            };
            acc = acc.add(&sub);
        }
        acc
    }

    fn assemble_from(&self, level: usize, prefix: usize) -> HermitianMatrix<T> {
        let l = self.parties();
        let nm = self.counts[level];
        let tail_dim: usize = self.dims[level..].iter().product();
        let mut acc = HermitianMatrix::zeros(tail_dim);
        for i in 0..nm {
            let idx = prefix * nm + i;
            let op = &self.levels[level][idx];
            let term = if level + 1 == l {
                op.clone()
            } else {
                op.kron(&self.assemble_from(level + 1, idx))
            };
            acc = acc.add(&term);
        }
        acc
    }

    /// Contract the first level with weights q: X̃^{(m−1)}_{i₂..} = Σ_{i₁} q_{i₁} X^{(m)}_{i₁,i₂..}.
    pub fn contract_first(&self, q: &[T]) -> MultipartiteLocc<T> {
        debug_assert_eq!(q.len(), self.counts[0]);
        let l = self.parties();
        debug_assert!(l >= 2);
        let n1 = self.counts[0];
        let mut levels = Vec::with_capacity(l - 1);
        for m in 1..l {
            let block = self.levels[m].len() / n1;
            let mut contracted = Vec::with_capacity(block);
            for j in 0..block {
                let mut acc = HermitianMatrix::zeros(self.dims[m]);
                for i1 in 0..n1 {
                    if q[i1] == T::zero() {
                        continue;
                    }
                    acc = acc.add(&self.levels[m][i1 * block + j].scale(q[i1]));
                }
                contracted.push(acc);
            }
            levels.push(contracted);
        }
        MultipartiteLocc {
            dims: self.dims[1..].to_vec(),
            counts: self.counts[1..].to_vec(),
            levels,
        }
    }

    /// Bipartite trees flatten to a plain one-way LOCC decomposition with
    /// Yᵢ = Σ_{i₂} X^{(2)}_{i,i₂}.
    pub fn flatten_bipartite(&self) -> Result<OneWayLocc<T>, ModelError> {
        if self.parties() != 2 {
            return Err(ModelError::Inconsistent(
                "flatten_bipartite requires exactly 2 parties".into(),
            ));
        }
        let n1 = self.counts[0];
        let n2 = self.counts[1];
        let mut terms = Vec::with_capacity(n1);
        for i in 0..n1 {
            let mut y = HermitianMatrix::zeros(self.dims[1]);
            for j in 0..n2 {
                y = y.add(&self.levels[1][i * n2 + j]);
            }
            terms.push(LoccTerm {
                x: self.levels[0][i].clone(),
                y,
            });
        }
        OneWayLocc::new(self.dims[0], self.dims[1], terms)
    }
}

/// Norm family of the target space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    Schatten,
    Ell,
}

/// Norm family tag with dimension, Rademacher type data and smoothness
/// coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct BanachDescriptor<T> {
    pub family: NormFamily,
    pub exponent: Exponent<T>,
    pub dim: usize,
    pub gamma: T,
    pub type_constant: T,
    pub smoothness: T,
}

/// Type/smoothness constants of S_α and ℓ_α spaces.
///
/// α ≥ 2: type-2 constant √(α−1) and smoothness (α−1)/2. 1 < α ≤ 2: type-α
/// constant 1 with the quadratic-smoothness coefficient fixed at 1/2 by
/// convention. α = ∞: type-2 constant √(2·ln dim) (floored at 1) and
/// smoothness ln(dim). ℓ spaces share the Schatten constants through the
/// diagonal embedding. α ≤ 1 is rejected; the estimation problem degenerates
/// there.
pub fn banach_constants<T: Scalar>(
    family: NormFamily,
    exponent: Exponent<T>,
    dim: usize,
) -> Result<BanachDescriptor<T>, ModelError> {
    if dim == 0 {
        return Err(ModelError::Unsupported("dimension must be ≥ 1".into()));
    }
    let two = T::c(2.0);
    let (gamma, type_constant, smoothness) = match exponent {
        Exponent::Infinity => {
            let ln_d = T::from_count(dim).ln();
            (two, (two * ln_d).sqrt().max(T::one()), ln_d.max(T::c(0.5)))
        }
        Exponent::Finite(a) => {
            if a <= T::one() {
                return Err(ModelError::Unsupported(
                    "exponent must be > 1: net-based estimation degenerates as the exponent approaches 1"
                        .into(),
                ));
            }
            if a >= two {
                (two, (a - T::one()).sqrt(), (a - T::one()) / two)
            } else {
                (a, T::one(), T::c(0.5))
            }
        }
    };
    Ok(BanachDescriptor {
        family,
        exponent,
        dim,
        gamma,
        type_constant,
        smoothness,
    })
}

/// Schatten-∞ descriptor used by the h_Sep scans.
pub fn operator_norm_descriptor<T: Scalar>(dim: usize) -> BanachDescriptor<T> {
    banach_constants(NormFamily::Schatten, Exponent::Infinity, dim).expect("∞ is supported")
}

/// Drop zero-Y terms and rescale so every ‖Yᵢ‖ = 1, preserving the
/// assembled operator: (Xᵢ, Yᵢ) ↦ (‖Yᵢ‖·Xᵢ, Yᵢ/‖Yᵢ‖).
pub fn normalize_locc<T: Scalar>(m: &OneWayLocc<T>) -> OneWayLocc<T> {
    let mut terms = Vec::with_capacity(m.terms.len());
    for t in &m.terms {
        let ny = t.y.op_norm();
        if ny < T::c(tol::Y_ZERO) {
            continue;
        }
        terms.push(LoccTerm {
            x: t.x.scale(ny),
            y: t.y.scale(T::one() / ny),
        });
    }
    let out = OneWayLocc {
        d1: m.d1,
        d2: m.d2,
        terms,
    };
    debug_assert!(
        m.assemble().sub(&out.assemble()).op_norm() <= T::c(tol::REBUILD),
        "normalization drifted the assembled operator"
    );
    out
}

/// ‖a‖_B of a weighted sum Σ aᵢYᵢ in the descriptor's space.
pub fn weighted_norm<T: Scalar>(a: &[T], ys: &BElements<T>, desc: &BanachDescriptor<T>) -> T {
    debug_assert_eq!(a.len(), ys.len());
    match ys {
        BElements::Matrices(v) => {
            if v.is_empty() {
                return T::zero();
            }
            let s = HermitianMatrix::weighted_sum(v, a);
            schatten_norm(s.as_cmatrix(), desc.exponent).expect("exponent validated")
        }
        BElements::Vectors(v) => {
            if v.is_empty() {
                return T::zero();
            }
            let dim = v[0].len();
            let mut s = vec![T::zero(); dim];
            for (coeff, y) in a.iter().zip(v) {
                for (sj, yj) in s.iter_mut().zip(y) {
                    *sj += *coeff * *yj;
                }
            }
            let abs: Vec<T> = s.iter().map(|x| x.abs()).collect();
            power_mean_norm(&abs, desc.exponent)
        }
    }
}

#[allow(unused_imports)]
use crate::matlib::CVector;
