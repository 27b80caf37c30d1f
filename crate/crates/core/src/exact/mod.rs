//! Exact arithmetic over `ℚ(i)`: scalars, polynomials, rational functions,
//! truncated Laurent series and matrices over these.

mod laurent;
mod matrix;
mod poly;
mod ratfn;
mod roots;
mod scalar;

use std::fmt;

pub use laurent::TruncatedLaurent;
pub use matrix::{ConstMatrix, Field, Matrix, RatMatrix};
pub use poly::Poly;
pub use ratfn::RationalFunction;
pub use roots::{numeric_roots, split_roots, RootSplit};
pub(crate) use roots::numeric_roots_c;
pub use scalar::Scalar;

pub(crate) use scalar::{fmt_rat, rat_to_f64};

use crate::error::Result;

/// A point of the Riemann sphere with finite coordinate in `ℚ(i)`.
///
/// Finite points sort before infinity; finite points sort lexicographically by `(re, im)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Finite(Scalar),
    Infinity,
}

impl Point {
    pub fn zero() -> Self {
        Point::Finite(num_traits::Zero::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Point::Finite(Scalar::from_int(n))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            Point::Finite(a) => Some(a),
            Point::Infinity => None,
        }
    }

    /// Name of the local chart used at this point.
    pub fn chart(&self) -> &'static str {
        match self {
            Point::Finite(_) => "t = z - a",
            Point::Infinity => "w = 1/z",
        }
    }

    /// `"inf"` or an exact scalar.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Point::Finite(a) => a.to_json(),
            Point::Infinity => serde_json::Value::String("inf".into()),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) if s == "inf" => Ok(Point::Infinity),
            other => Ok(Point::Finite(Scalar::from_json(other)?)),
        }
    }
}

impl std::str::FromStr for Point {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Point::Infinity),
            other => Ok(Point::Finite(other.parse()?)),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(a) => write!(f, "{a}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Order of vanishing: an integer, or `+∞` for the zero function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(i64),
    Infinity,
}

impl Order {
    pub fn finite(self) -> Option<i64> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinity => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinity => write!(f, "+inf"),
        }
    }
}

/// Order of `f` at `a` (free-function form of [`RationalFunction::order_at`]).
pub fn order_at(f: &RationalFunction, a: &Point) -> Order {
    f.order_at(a)
}

/// Laurent expansion of `f` at `a` through order `upto`.
pub fn laurent_expand(f: &RationalFunction, a: &Point, upto: i64) -> Result<TruncatedLaurent> {
    f.laurent_expand(a, upto)
}

/// Exact inverse of a square rational-function matrix.
pub fn mat_inverse(m: &RatMatrix) -> Result<RatMatrix> {
    m.inverse()
}

/// Default working truncation: `max(2·(pole order) + 4, 8)` terms past the valuation.
pub fn default_truncation(pole_order: usize) -> usize {
    (2 * pole_order + 4).max(8)
}
