//! Closed-form rank and apparent-count bounds.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::gauge::SplittingType;
use crate::system::ceil_rat;

/// Inputs shared by the bound evaluators. `R` and `K` are always recomputed from the lists.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundInputs {
    pub p: usize,
    pub n: usize,
    /// Minimal Poincaré ranks `r₁, …, r_n`.
    pub ranks: Vec<i64>,
    /// Katz ranks `K₁, …, K_n`.
    pub katz: Vec<BigRational>,
    pub m_bound: i64,
    pub splitting: Option<SplittingType>,
    pub degree: Option<i64>,
}

impl BoundInputs {
    pub fn new(p: usize, ranks: Vec<i64>) -> Self {
        BoundInputs {
            p,
            n: ranks.len(),
            ranks,
            katz: Vec::new(),
            m_bound: 1,
            splitting: None,
            degree: None,
        }
    }

    pub fn with_katz(p: usize, katz: Vec<BigRational>) -> Self {
        BoundInputs {
            p,
            n: katz.len(),
            ranks: Vec::new(),
            katz,
            m_bound: 1,
            splitting: None,
            degree: None,
        }
    }

    /// `R = Σ rᵢ`.
    pub fn r_total(&self) -> i64 {
        self.ranks.iter().sum()
    }

    /// `K = Σ ⌈Kᵢ⌉`.
    pub fn k_total(&self) -> i64 {
        self.katz.iter().map(ceil_rat).sum()
    }

    fn r1(&self) -> Result<i64> {
        self.ranks
            .first()
            .copied()
            .ok_or_else(|| Error::Precondition("rank list is empty".into()))
    }
}

/// `r₁ + (p−1)(n+R−1)`.
pub fn theorem1_bound(b: &BoundInputs) -> Result<i64> {
    Ok(b.r1()? + (b.p as i64 - 1) * (b.n as i64 + b.r_total() - 1))
}

/// `r₁ + (p−1)(n+R−2)`, requiring `R > 0`.
pub fn remark2_bound(b: &BoundInputs) -> Result<i64> {
    if b.r_total() <= 0 {
        return Err(Error::Precondition("R = 0: every point is regular".into()));
    }
    Ok(b.r1()? + (b.p as i64 - 1) * (b.n as i64 + b.r_total() - 2))
}

/// Every gap `k_j − k_{j+1} ≤ (n+R)M − 1`.
pub fn prop1_check(k: &SplittingType, n: usize, r_total: i64, m: i64) -> Result<bool> {
    if m < 1 {
        return Err(Error::Precondition(format!("M = {m} < 1")));
    }
    let cap = (n as i64 + r_total) * m - 1;
    Ok(k.gaps().all(|g| g <= cap))
}

/// `r₁ + k₁ − k_p`.
pub fn forms_o_rank_bound(r1: i64, k: &SplittingType) -> i64 {
    r1 + k.k()[0] - k.k()[k.k().len() - 1]
}

pub(crate) fn theorem2_value(p: usize, n: usize, k_total: i64) -> i64 {
    (k_total + n as i64 + 1) * (p * (p - 1) / 2) as i64 + 1
}

/// `(K+n+1) p(p−1)/2 + 1` with `K = Σ ⌈Kᵢ⌉`.
pub fn theorem2_bound(b: &BoundInputs) -> i64 {
    theorem2_value(b.p, b.n, b.k_total())
}

/// `r⁰ ≤ r/p` as exact rationals.
pub fn corollary1_predicate(r0: i64, r: i64, p: usize) -> Result<bool> {
    if p == 0 {
        return Err(Error::Precondition("p = 0".into()));
    }
    if r0 > r {
        return Err(Error::Precondition(format!("r0 = {r0} exceeds r = {r}")));
    }
    Ok(BigRational::from_integer(BigInt::from(r0)) <= BigRational::new(BigInt::from(r), BigInt::from(p as i64)))
}

/// The largest splitting gap sum allowed by the gap bound: `(p−1)((n+R)M − 1)`.
pub fn extremal_gap(p: usize, n: usize, r_total: i64, m: i64) -> i64 {
    (p as i64 - 1) * ((n as i64 + r_total) * m - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem1_examples() {
        assert_eq!(theorem1_bound(&BoundInputs::new(2, vec![1, 0])).unwrap(), 3);
        assert_eq!(theorem1_bound(&BoundInputs::new(3, vec![0, 0, 0])).unwrap(), 4);
        assert_eq!(remark2_bound(&BoundInputs::new(3, vec![2])).unwrap(), 4);
        assert!(remark2_bound(&BoundInputs::new(2, vec![0, 0])).is_err());
    }
}
