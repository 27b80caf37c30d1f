//! Gauge transformations `y' = Γ(z) y`, admissible matrices and degree bookkeeping.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{ConstMatrix, Order, Point, RatMatrix, RationalFunction, Scalar};
use crate::system::LinearSystem;

/// An invertible rational matrix `Γ(z)`.
#[derive(Clone, PartialEq, Eq)]
pub struct GaugeTransform {
    gamma: RatMatrix,
    det: RationalFunction,
}

impl GaugeTransform {
    pub fn new(gamma: RatMatrix) -> Result<Self> {
        let det = gamma.det()?;
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(GaugeTransform { gamma, det })
    }

    pub fn identity(p: usize) -> Self {
        GaugeTransform {
            gamma: RatMatrix::identity(p),
            det: RationalFunction::one(),
        }
    }

    /// Constant invertible matrix.
    pub fn constant(m: &ConstMatrix) -> Result<Self> {
        Self::new(m.to_rat())
    }

    /// `diag(t^{d_1}, …, t^{d_p})` with `t = z − a`, or `t = 1/z` at `∞`.
    pub fn shear(a: &Point, d: &[i64]) -> Self {
        let t = match a {
            Point::Finite(a) => RationalFunction::power_at(Scalar::one(), a, 1),
            Point::Infinity => RationalFunction::monomial(Scalar::one(), -1),
        };
        let diag: Vec<RationalFunction> = d.iter().map(|&k| t.pow(k)).collect();
        Self::new(RatMatrix::diagonal(&diag)).expect("diagonal powers are invertible")
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.gamma
    }

    pub fn det(&self) -> &RationalFunction {
        &self.det
    }

    pub fn dim(&self) -> usize {
        self.gamma.rows()
    }

    pub fn inverse(&self) -> Self {
        GaugeTransform {
            gamma: self.gamma.inverse().expect("det is nonzero"),
            det: self.det.inv().expect("det is nonzero"),
        }
    }

    /// `then.Γ · self.Γ`: apply `self` first, then `then`.
    pub fn then(&self, then: &GaugeTransform) -> Self {
        GaugeTransform {
            gamma: then.gamma.mul(&self.gamma),
            det: &then.det * &self.det,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.gamma.to_json()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        Self::new(RatMatrix::from_json(v)?)
    }
}

impl fmt::Debug for GaugeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gamma = {}", self.gamma)
    }
}

/// `B' = Γ' Γ⁻¹ + Γ B Γ⁻¹`.
pub fn apply_gauge(s: &LinearSystem, g: &GaugeTransform) -> Result<LinearSystem> {
    if g.dim() != s.dim() {
        return Err(Error::Dimension(format!("gauge of size {} on a system of size {}", g.dim(), s.dim())));
    }
    let inv = g.gamma.inverse()?;
    let b = g.gamma.derivative().mul(&inv).add(&g.gamma.mul(s.matrix()).mul(&inv));
    LinearSystem::new(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeClass {
    Holomorphic,
    Meromorphic,
}

impl GaugeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GaugeClass::Holomorphic => "holomorphic",
            GaugeClass::Meromorphic => "meromorphic",
        }
    }
}

/// Holomorphic at `a` iff every entry is holomorphic there and `det Γ(a) ≠ 0`.
pub fn classify_gauge(g: &GaugeTransform, a: &Point) -> GaugeClass {
    let entries_ok = g.gamma.order_at(a) >= Order::Finite(0);
    let det_ok = g.det.order_at(a) == Order::Finite(0);
    if entries_ok && det_ok {
        GaugeClass::Holomorphic
    } else {
        GaugeClass::Meromorphic
    }
}

/// One block of a local partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub size: usize,
    pub ramified: bool,
}

/// Integer diagonal `Λ` with a block partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleMatrix {
    lambda: Vec<i64>,
    blocks: Vec<Block>,
}

impl AdmissibleMatrix {
    /// Checks that the partition covers `Λ`. Scalarity on ramified blocks is decided by [`is_admissible`].
    pub fn new(lambda: Vec<i64>, blocks: Vec<Block>) -> Result<Self> {
        let total: usize = blocks.iter().map(|b| b.size).sum();
        if total != lambda.len() || blocks.iter().any(|b| b.size == 0) {
            return Err(Error::PartitionMismatch(format!(
                "blocks cover {total} entries, Lambda has {}",
                lambda.len()
            )));
        }
        Ok(AdmissibleMatrix { lambda, blocks })
    }

    /// A single unramified block.
    pub fn unramified(lambda: Vec<i64>) -> Self {
        let n = lambda.len();
        AdmissibleMatrix {
            lambda,
            blocks: vec![Block { size: n, ramified: false }],
        }
    }

    pub fn zero(p: usize) -> Self {
        Self::unramified(vec![0; p])
    }

    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn trace(&self) -> i64 {
        self.lambda.iter().sum()
    }

    fn ranges(&self) -> Vec<(std::ops::Range<usize>, Block)> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.size;
                start += b.size;
                (r, *b)
            })
            .collect()
    }
}

fn check_shape(l: &AdmissibleMatrix, e: &ConstMatrix, partition: &[Block]) -> Result<()> {
    if l.blocks != partition {
        return Err(Error::PartitionMismatch("Lambda and E carry different partitions".into()));
    }
    if !e.is_square() || e.rows() != l.lambda.len() {
        return Err(Error::PartitionMismatch(format!(
            "E is {}x{}, Lambda has {} entries",
            e.rows(),
            e.cols(),
            l.lambda.len()
        )));
    }
    Ok(())
}

/// Within unramified blocks every nonzero `E_kl` (`k ≠ l`) needs `λ_k ≥ λ_l`; ramified blocks need scalar `Λ`.
pub fn is_admissible(l: &AdmissibleMatrix, e: &ConstMatrix, partition: &[Block]) -> Result<bool> {
    check_shape(l, e, partition)?;
    for (r, b) in l.ranges() {
        if b.ramified {
            if l.lambda[r.clone()].windows(2).any(|w| w[0] != w[1]) {
                return Ok(false);
            }
            continue;
        }
        for k in r.clone() {
            for m in r.clone() {
                if k != m && !e.get(k, m).is_zero() && l.lambda[k] < l.lambda[m] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `Σᵢ tr(Λᵢ + Eᵢ)`.
pub fn connection_degree(pairs: &[(AdmissibleMatrix, ConstMatrix)]) -> Result<Scalar> {
    let mut total = Scalar::zero();
    for (i, (l, e)) in pairs.iter().enumerate() {
        if !is_admissible(l, e, l.blocks())? {
            return Err(Error::Inadmissible(format!("pair {i} is not admissible")));
        }
        total = &(&total + &Scalar::from_int(l.trace())) + &e.trace();
    }
    Ok(total)
}

/// `k₁ ≥ … ≥ k_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingType(Vec<i64>);

impl SplittingType {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::Dimension("empty splitting type".into()));
        }
        if k.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!("splitting type {k:?} is not weakly decreasing")));
        }
        Ok(SplittingType(k))
    }

    pub fn k(&self) -> &[i64] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn gaps(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.windows(2).map(|w| w[0] - w[1])
    }
}

/// Outcome of `Σ k_j = deg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCheck {
    pub ok: bool,
    pub diagnostic: Option<String>,
}

pub fn splitting_degree_check(k: &SplittingType, deg: &Scalar) -> DegreeCheck {
    match deg.to_i64() {
        Some(d) if deg.is_integer() => DegreeCheck {
            ok: k.degree() == d,
            diagnostic: (k.degree() != d).then(|| format!("sum of k is {}, degree is {d}", k.degree())),
        },
        _ => DegreeCheck {
            ok: false,
            diagnostic: Some(format!("degree {deg} is not an integer")),
        },
    }
}

/// `β_j = λ_j + ρ_j`, pairing `Λ` with the diagonal of the (block upper-triangular) `E`.
pub fn formal_exponents(l: &AdmissibleMatrix, e: &ConstMatrix) -> Result<Vec<Scalar>> {
    check_shape(l, e, l.blocks())?;
    if !e.is_upper_triangular() {
        return Err(Error::Precondition("E must be upper-triangular".into()));
    }
    Ok(l.lambda
        .iter()
        .enumerate()
        .map(|(j, &lam)| &Scalar::from_int(lam) + e.get(j, j))
        .collect())
}
