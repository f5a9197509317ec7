//! netnorm: estimators for generalized operator norms by brute-force
//! enumeration over covering nets.
//!
//! The library estimates, to a requested additive accuracy δ:
//!
//! - the separable-state support value h_Sep of a one-way LOCC measurement
//!   given as an explicit decomposition Σᵢ Xᵢ ⊗ Yᵢ (bipartite and
//!   multipartite),
//! - maximum output Schatten-α norms of entanglement-breaking channels,
//! - 2→q matrix norms for q ≥ 2,
//! - injective S₁→B and A→ℓ₁ⁿ→B operator norms.
//!
//! Every estimator scans the covering net Δ_n(k) of k-sample empirical
//! distributions, decides a convex feasibility subproblem per net point by
//! projected subgradient, and certifies the reported value by re-evaluating
//! the returned witnesses. Independent brute-force oracles and empirical
//! concentration checks live in [`oracle`].
//!
//! The numeric core is generic over the real scalar (`f32`/`f64`) via
//! [`scalar::Scalar`]; the concrete `f64` aliases below are what the CLI
//! and the stated tolerances use.

pub mod algorithms;
pub mod apps;
pub mod feascheck;
pub mod jsonio;
pub mod matlib;
pub mod model;
pub mod nets;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod sparsify;
pub mod tol;

pub use scalar::Scalar;

/// Concrete `f64` aliases for the common types.
pub type CMatrix64 = matlib::CMatrix<f64>;
pub type CVector64 = matlib::CVector<f64>;
pub type HermitianMatrix64 = matlib::HermitianMatrix<f64>;
pub type DensityMatrix64 = matlib::DensityMatrix<f64>;
pub type OneWayLocc64 = model::OneWayLocc<f64>;
pub type EbChannel64 = model::EbChannel<f64>;
pub type GeneralDecomposition64 = model::GeneralDecomposition<f64>;
pub type MultipartiteLocc64 = model::MultipartiteLocc<f64>;
pub type BanachDescriptor64 = model::BanachDescriptor<f64>;
pub type SolverConfig64 = feascheck::SolverConfig<f64>;
pub type EstimateReport64 = algorithms::EstimateReport<f64>;
