//! Truncated Laurent series `Σ_{k=v}^{N} c_k tᵏ + O(t^{N+1})` in a local coordinate.

use std::fmt;

use num_traits::{One, Zero};

use super::{Point, Scalar};

/// A Laurent series at `point` known exactly through order `order` (inclusive).
///
/// The local coordinate is `t = z − a` at a finite point and `t = 1/z` at infinity.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedLaurent {
    point: Point,
    valuation: i64,
    coeffs: Vec<Scalar>,
    order: i64,
}

impl TruncatedLaurent {
    /// Identically zero through `order`.
    pub fn zero(point: Point, order: i64) -> Self {
        TruncatedLaurent {
            point,
            valuation: order,
            coeffs: vec![Scalar::zero()],
            order,
        }
    }

    /// Builds `Σ coeffs[k] t^{start+k}` known through `start + len − 1`, normalizing the valuation.
    pub fn from_parts(point: Point, start: i64, coeffs: Vec<Scalar>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient list");
        let order = start + coeffs.len() as i64 - 1;
        match coeffs.iter().position(|c| !c.is_zero()) {
            None => TruncatedLaurent::zero(point, order),
            Some(k) => TruncatedLaurent {
                point,
                valuation: start + k as i64,
                coeffs: coeffs[k..].to_vec(),
                order,
            },
        }
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// Highest exponent known exactly.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Valuation, or `order + 1` when the series vanishes through its truncation order.
    pub fn effective_valuation(&self) -> i64 {
        if self.is_zero() {
            self.order + 1
        } else {
            self.valuation
        }
    }

    /// Coefficient of `tᵏ`; zero below the valuation. Panics above the truncation order.
    pub fn coeff(&self, k: i64) -> Scalar {
        assert!(k <= self.order, "coefficient {k} beyond truncation order {}", self.order);
        if k < self.valuation {
            Scalar::zero()
        } else {
            self.coeffs[(k - self.valuation) as usize].clone()
        }
    }

    /// Coefficients for exponents `from..=to`, zero below the valuation.
    pub fn window(&self, from: i64, to: i64) -> Vec<Scalar> {
        (from..=to).map(|k| self.coeff(k)).collect()
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        if order < self.valuation {
            return TruncatedLaurent::zero(self.point.clone(), order);
        }
        TruncatedLaurent::from_parts(self.point.clone(), self.valuation, self.window(self.valuation, order))
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let start = self.valuation.min(o.valuation).min(order);
        let coeffs = (start..=order)
            .map(|k| &self.coeff(k) + &o.coeff(k))
            .collect();
        TruncatedLaurent::from_parts(self.point.clone(), start, coeffs)
    }

    pub fn neg(&self) -> Self {
        TruncatedLaurent {
            point: self.point.clone(),
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            order: self.order,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        TruncatedLaurent::from_parts(
            self.point.clone(),
            self.valuation,
            self.coeffs.iter().map(|a| a * c).collect(),
        )
    }

    /// Product; precision is limited by the factor with the smaller relative precision.
    pub fn mul(&self, o: &Self) -> Self {
        let order = (self.order + o.effective_valuation()).min(o.order + self.effective_valuation());
        if self.is_zero() || o.is_zero() {
            return TruncatedLaurent::zero(self.point.clone(), order);
        }
        let v = self.valuation + o.valuation;
        let n = (order - v + 1).max(1) as usize;
        let mut out = vec![Scalar::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                let t = a * b;
                out[i + j] += &t;
            }
        }
        TruncatedLaurent::from_parts(self.point.clone(), v, out)
    }

    /// Multiplication by `tᵏ`.
    pub fn shift(&self, k: i64) -> Self {
        TruncatedLaurent {
            point: self.point.clone(),
            valuation: self.valuation + k,
            coeffs: self.coeffs.clone(),
            order: self.order + k,
        }
    }

    /// Derivative with respect to the local coordinate `t`.
    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return TruncatedLaurent::zero(self.point.clone(), self.order - 1);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * &Scalar::from_int(self.valuation + k as i64))
            .collect();
        TruncatedLaurent::from_parts(self.point.clone(), self.valuation - 1, coeffs)
    }

    /// Series with a single term: `c·tᵏ`, exact through `order`.
    pub fn monomial(point: Point, c: Scalar, k: i64, order: i64) -> Self {
        if k > order {
            return TruncatedLaurent::zero(point, order);
        }
        let mut coeffs = vec![Scalar::zero(); (order - k + 1) as usize];
        coeffs[0] = c;
        TruncatedLaurent::from_parts(point, k, coeffs)
    }

    pub fn one(point: Point, order: i64) -> Self {
        TruncatedLaurent::monomial(point, Scalar::one(), 0, order)
    }
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})t^{}", self.valuation + k as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.order + 1)
    }
}

impl fmt::Debug for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} at {}", self.point)
    }
}
