//! The covering net Δ_n(k): size-k multisets over [n] in colexicographic
//! order, with rank/unrank for deterministic parallel partitions, and the
//! k-selection formulas of the three scan variants.

use thiserror::Error;

use crate::model::BanachDescriptor;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(
        "net budget exceeded: |Δ_n(k)| = {count} points exceeds budget {budget} even at k = 1; \
         attained δ at the largest affordable k ({largest_k}) would be {attained_delta}"
    )]
    BudgetExceeded {
        count: u128,
        budget: u64,
        largest_k: usize,
        attained_delta: f64,
    },
}

/// C(n, k) with saturation at u128::MAX.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        let num = (n - k + i) as u128;
        acc = match acc.checked_mul(num) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// |Δ_n(k)| = C(n+k−1, k).
pub fn multiset_count(n: usize, k: usize) -> u128 {
    binomial((n + k - 1) as u64, k as u64)
}

/// A point of Δ_n(k): a sorted size-k multiset of indices in [0, n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetPoint {
    pub indices: Vec<usize>,
    pub n: usize,
    pub k: usize,
}

impl NetPoint {
    pub fn first(n: usize, k: usize) -> Self {
        Self {
            indices: vec![0; k],
            n,
            k,
        }
    }

    /// The probability vector p with pᵢ = countᵢ/k.
    pub fn probability_vector<T: Scalar>(&self) -> Vec<T> {
        let mut p = vec![T::zero(); self.n];
        let w = T::one() / T::from_count(self.k);
        for &i in &self.indices {
            p[i] += w;
        }
        p
    }

    /// Colexicographic rank via the multiset combinadic.
    pub fn rank(&self) -> u128 {
        self.indices
            .iter()
            .enumerate()
            .map(|(pos, &a)| binomial((a + pos) as u64, (pos + 1) as u64))
            .sum()
    }

    /// Advance to the colex successor in place; false once exhausted.
    pub fn advance(&mut self) -> bool {
        let k = self.k;
        for j in 0..k {
            let can_grow = if j + 1 < k {
                self.indices[j] < self.indices[j + 1]
            } else {
                self.indices[j] + 1 < self.n
            };
            if can_grow {
                self.indices[j] += 1;
                for t in 0..j {
                    self.indices[t] = 0;
                }
                return true;
            }
        }
        false
    }
}

/// Inverse of `NetPoint::rank`.
pub fn unrank(n: usize, k: usize, mut rank: u128) -> NetPoint {
    let mut indices = vec![0usize; k];
    for pos in (0..k).rev() {
        let j = (pos + 1) as u64;
        // Largest b with C(b, pos+1) ≤ rank, b in [pos, n+pos−1].
        let mut lo = pos as u64;
        let mut hi = (n + pos - 1) as u64;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if binomial(mid, j) <= rank {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        rank -= binomial(lo, j);
        indices[pos] = lo as usize - pos;
    }
    NetPoint { indices, n, k }
}

/// Deterministic stream over a colex rank range of Δ_n(k).
pub struct NetRange {
    next_rank: u128,
    end: u128,
    current: Option<NetPoint>,
}

impl NetRange {
    pub fn new(n: usize, k: usize, start: u128, end: u128) -> Self {
        let total = multiset_count(n, k);
        let end = end.min(total);
        let current = if start < end {
            Some(unrank(n, k, start))
        } else {
            None
        };
        Self {
            next_rank: start,
            end,
            current,
        }
    }

    pub fn full(n: usize, k: usize) -> Self {
        Self::new(n, k, 0, multiset_count(n, k))
    }
}

impl Iterator for NetRange {
    type Item = (u128, NetPoint);

    fn next(&mut self) -> Option<Self::Item> {
        let point = self.current.take()?;
        let rank = self.next_rank;
        self.next_rank += 1;
        if self.next_rank < self.end {
            let mut successor = point.clone();
            let ok = successor.advance();
            debug_assert!(ok);
            self.current = Some(successor);
        }
        Some((rank, point))
    }
}

/// Enumerate all of Δ_n(k), refusing nets above the point budget.
pub fn enumerate_net(n: usize, k: usize, budget: u64) -> Result<NetRange, NetError> {
    if n == 0 || k == 0 {
        return Err(NetError::Parameter("n ≥ 1 and k ≥ 1 required".into()));
    }
    let count = multiset_count(n, k);
    if count > budget as u128 {
        let (largest_k, _) = cap_k(n, k, budget)?;
        return Err(NetError::BudgetExceeded {
            count,
            budget,
            largest_k,
            attained_delta: f64::NAN,
        });
    }
    Ok(NetRange::full(n, k))
}

/// Largest k' ≤ k_req with |Δ_n(k')| within budget, plus the point count.
pub fn cap_k(n: usize, k_req: usize, budget: u64) -> Result<(usize, u128), NetError> {
    if multiset_count(n, 1) > budget as u128 {
        return Err(NetError::BudgetExceeded {
            count: multiset_count(n, 1),
            budget,
            largest_k: 0,
            attained_delta: f64::INFINITY,
        });
    }
    let mut lo = 1usize;
    let mut hi = k_req.max(1);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if multiset_count(n, mid) <= budget as u128 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok((lo, multiset_count(n, lo)))
}

/// k = ⌈9·ln(d₂)/δ²⌉ for the basic bipartite scan.
pub fn choose_k_basic<T: Scalar>(d2: usize, delta: T) -> Result<usize, NetError> {
    if d2 < 2 {
        return Err(NetError::Parameter("d2 must be ≥ 2".into()));
    }
    if delta <= T::zero() {
        return Err(NetError::Parameter("delta must be positive".into()));
    }
    let raw = T::c(9.0) * T::from_count(d2).ln() / (delta * delta);
    Ok(ceil_at_least_one(raw))
}

/// k = ⌈(2C^γ·maxY^γ/δ^γ)^{1/(γ−1)}⌉ for the general-space scan.
pub fn choose_k_general<T: Scalar>(
    desc: &BanachDescriptor<T>,
    delta: T,
    max_y: T,
) -> Result<usize, NetError> {
    if delta <= T::zero() || max_y <= T::zero() {
        return Err(NetError::Parameter(
            "delta and maxY must be positive".into(),
        ));
    }
    let gamma = desc.gamma;
    if gamma <= T::one() {
        return Err(NetError::Parameter("descriptor gamma must exceed 1".into()));
    }
    let base = T::c(2.0) * (desc.type_constant * max_y / delta).powf(gamma);
    let raw = base.powf(T::one() / (gamma - T::one()));
    Ok(ceil_at_least_one(raw))
}

/// k = ⌈9·l²·ln(d)/δ²⌉ for the multipartite scan.
pub fn choose_k_multipartite<T: Scalar>(d: usize, l: usize, delta: T) -> Result<usize, NetError> {
    if d < 2 {
        return Err(NetError::Parameter("d must be ≥ 2".into()));
    }
    if l < 2 {
        return Err(NetError::Parameter(
            "l must be ≥ 2 (use the basic selection for a single pair)".into(),
        ));
    }
    if delta <= T::zero() {
        return Err(NetError::Parameter("delta must be positive".into()));
    }
    let l_t = T::from_count(l);
    let raw = T::c(9.0) * l_t * l_t * T::from_count(d).ln() / (delta * delta);
    Ok(ceil_at_least_one(raw))
}

/// k = ⌈(2λ/δ)^{γ/(γ−1)}⌉ for the injective-norm scan.
pub fn choose_k_injective<T: Scalar>(
    desc: &BanachDescriptor<T>,
    delta: T,
) -> Result<usize, NetError> {
    if delta <= T::zero() {
        return Err(NetError::Parameter("delta must be positive".into()));
    }
    let gamma = desc.gamma;
    if gamma <= T::one() {
        return Err(NetError::Parameter("descriptor gamma must exceed 1".into()));
    }
    let raw = (T::c(2.0) * desc.type_constant / delta).powf(gamma / (gamma - T::one()));
    Ok(ceil_at_least_one(raw))
}

fn ceil_at_least_one<T: Scalar>(raw: T) -> usize {
    // Guard against powf landing a hair above an exact integer.
    let adjusted = raw - raw.abs() * T::c(1e-12);
    let c = adjusted.ceil();
    if c <= T::one() {
        return 1;
    }
    c.to_usize().unwrap_or(usize::MAX)
}

/// Covering radius √(9·ln(d₂)/k) delivered by a basic scan at sample size k.
pub fn attained_delta_basic<T: Scalar>(d2: usize, k: usize) -> T {
    (T::c(9.0) * T::from_count(d2).ln() / T::from_count(k)).sqrt()
}

/// Covering radius (2C^γ·maxY^γ/k^{γ−1})^{1/γ} of the general scan.
pub fn attained_delta_general<T: Scalar>(desc: &BanachDescriptor<T>, k: usize, max_y: T) -> T {
    let gamma = desc.gamma;
    let num = T::c(2.0) * (desc.type_constant * max_y).powf(gamma);
    (num / T::from_count(k).powf(gamma - T::one())).powf(T::one() / gamma)
}

/// Covering radius √(9·l²·ln(d)/k) of the multipartite scan.
pub fn attained_delta_multipartite<T: Scalar>(d: usize, l: usize, k: usize) -> T {
    let l_t = T::from_count(l);
    (T::c(9.0) * l_t * l_t * T::from_count(d).ln() / T::from_count(k)).sqrt()
}

/// Radius 2λ/k^{(γ−1)/γ} delivered by the injective-norm scan.
pub fn attained_delta_injective<T: Scalar>(desc: &BanachDescriptor<T>, k: usize) -> T {
    let gamma = desc.gamma;
    T::c(2.0) * desc.type_constant / T::from_count(k).powf((gamma - T::one()) / gamma)
}
