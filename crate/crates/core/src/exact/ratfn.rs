//! Reduced rational functions `num/den` over `ℚ(i)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Order, Point, Poly, Scalar, TruncatedLaurent};
use crate::error::{Error, Result};

/// `num/den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    /// Reduces `num/den`. Fails on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Parse("rational function with zero denominator".into()));
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RationalFunction::zero();
        }
        let lc = den.lc();
        if den.is_constant() {
            let inv = lc.inv().unwrap();
            return RationalFunction {
                num: num.scale(&inv),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g), den.exact_div(&g))
        };
        let inv = den.lc().inv().unwrap();
        RationalFunction {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunction {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Scalar::from_int(n))
    }

    /// `z`.
    pub fn z() -> Self {
        Self::from_poly(Poly::x())
    }

    /// `c·(z − a)^k` for any integer `k`.
    pub fn power_at(c: Scalar, a: &Scalar, k: i64) -> Self {
        let lin = Poly::linear_root(a);
        if k >= 0 {
            Self::from_poly(lin.pow(k as u32).scale(&c))
        } else {
            Self::reduce(Poly::constant(c), lin.pow((-k) as u32))
        }
    }

    /// `c·z^k` for any integer `k`.
    pub fn monomial(c: Scalar, k: i64) -> Self {
        Self::power_at(c, &Scalar::zero(), k)
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        (self.den.is_one() && self.num.is_constant()).then(|| self.num.coeff(0))
    }

    pub fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            None
        } else {
            Some(Self::reduce(self.den.clone(), self.num.clone()))
        }
    }

    pub fn derivative(&self) -> Self {
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative());
        }
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::reduce(n, &self.den * &self.den)
    }

    /// Value at a finite point; `None` at a pole.
    pub fn eval(&self, x: &Scalar) -> Option<Scalar> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(&self.num.eval(x) / &d)
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        RationalFunction {
            num: base.num.pow(e.unsigned_abs() as u32),
            den: base.den.pow(e.unsigned_abs() as u32),
        }
    }

    /// Order of vanishing at `a`: negative for poles, `Order::Infinity` for the zero function.
    /// At `∞` it is `deg den − deg num`.
    pub fn order_at(&self, a: &Point) -> Order {
        if self.num.is_zero() {
            return Order::Infinity;
        }
        match a {
            Point::Finite(a) => {
                Order::Finite(self.num.multiplicity(a) as i64 - self.den.multiplicity(a) as i64)
            }
            Point::Infinity => Order::Finite(
                self.den.degree().unwrap() as i64 - self.num.degree().unwrap() as i64,
            ),
        }
    }

    /// The function in the local coordinate `t` at `a`: `f(a + t)`, or `f(1/t)` at `∞`.
    pub fn local(&self, a: &Point) -> Self {
        match a {
            Point::Finite(a) if a.is_zero() => self.clone(),
            Point::Finite(a) => RationalFunction {
                num: self.num.shift(a),
                den: self.den.shift(a),
            },
            Point::Infinity => {
                if self.num.is_zero() {
                    return Self::zero();
                }
                let dn = self.num.degree().unwrap();
                let dd = self.den.degree().unwrap();
                let d = dn.max(dd);
                // num(1/t)/den(1/t) = t^{d-dn} rev(num) / (t^{d-dd} rev(den))
                let num = &self.num.reversed(dn) * &Poly::monomial(Scalar::one(), d - dn);
                let den = &self.den.reversed(dd) * &Poly::monomial(Scalar::one(), d - dd);
                Self::reduce(num, den)
            }
        }
    }

    /// Laurent expansion at `a` through order `upto` (inclusive).
    pub fn laurent_expand(&self, a: &Point, upto: i64) -> Result<TruncatedLaurent> {
        let local = self.local(a);
        let val = match local.order_at(&Point::zero()) {
            Order::Infinity => return Ok(TruncatedLaurent::zero(a.clone(), upto)),
            Order::Finite(v) => v,
        };
        if upto < val {
            return Err(Error::TruncationBelowValuation {
                upto,
                valuation: val,
            });
        }
        let nv = local.num.low_order().unwrap();
        let dv = local.den.low_order().unwrap();
        let n = (upto - val) as usize + 1;
        let num: Vec<Scalar> = (0..n).map(|k| local.num.coeff(nv + k)).collect();
        let den: Vec<Scalar> = (0..n).map(|k| local.den.coeff(dv + k)).collect();
        let coeffs = series_div(&num, &den, n);
        Ok(TruncatedLaurent::from_parts(a.clone(), val, coeffs))
    }

    /// Residue of `f(z) dz` at `a` (at `∞` this includes the `−dt/t²` of the chart).
    pub fn residue(&self, a: &Point) -> Scalar {
        let g = match a {
            Point::Finite(_) => self.local(a),
            Point::Infinity => &self.local(a) * &RationalFunction::monomial(-Scalar::one(), -2),
        };
        match g.laurent_expand(&Point::zero(), -1) {
            Ok(s) => s.coeff(-1),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "num": self.num.to_json(), "den": self.den.to_json() })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| {
            Error::Parse(format!("rational function must be {{\"num\",\"den\"}}, got {v}"))
        })?;
        if obj.keys().any(|k| k != "num" && k != "den") {
            return Err(Error::Parse(format!("unexpected keys in rational function {v}")));
        }
        let num = Poly::from_json(
            obj.get("num")
                .ok_or_else(|| Error::Parse("rational function without `num`".into()))?,
        )?;
        let den = match obj.get("den") {
            Some(d) => Poly::from_json(d)?,
            None => Poly::one(),
        };
        RationalFunction::new(num, den)
    }
}

/// First `n` coefficients of `num/den` as power series; `den[0] ≠ 0`.
pub(crate) fn series_div(num: &[Scalar], den: &[Scalar], n: usize) -> Vec<Scalar> {
    let inv0 = den[0].inv().expect("series division by a series with zero constant term");
    let mut out: Vec<Scalar> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = num.get(k).cloned().unwrap_or_else(Scalar::zero);
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            if den[j].is_zero() {
                continue;
            }
            let t = &den[j] * &out[k - j];
            acc -= &t;
        }
        out.push(&acc * &inv0);
    }
    out
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        RationalFunction::from_poly(Poly::one())
    }
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RationalFunction::reduce(&self.num + &o.num, self.den.clone());
        }
        if self.den.is_one() {
            return RationalFunction::reduce(&(&self.num * &o.den) + &o.num, o.den.clone());
        }
        if o.den.is_one() {
            return RationalFunction::reduce(&self.num + &(&o.num * &self.den), self.den.clone());
        }
        // Combine over lcm(den₁, den₂).
        let g = self.den.gcd(&o.den);
        let a = self.den.exact_div(&g);
        let b = o.den.exact_div(&g);
        let num = &(&self.num * &b) + &(&o.num * &a);
        RationalFunction::reduce(num, &a * &o.den)
    }
}

impl<'a> Sub<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() || o.is_zero() {
            return RationalFunction::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RationalFunction::from_poly(&self.num * &o.num);
        }
        // Cross-cancel before multiplying.
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let n1 = self.num.exact_div(&g1);
        let d2 = o.den.exact_div(&g1);
        let n2 = o.num.exact_div(&g2);
        let d1 = self.den.exact_div(&g2);
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let inv = den.lc().inv().unwrap();
        RationalFunction {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }
}

impl<'a> Div<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn div(self, o: &RationalFunction) -> RationalFunction {
        self * &o.inv().expect("division of a rational function by zero")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: RationalFunction) -> RationalFunction { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: &RationalFunction) -> RationalFunction { (&self).$m(o) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl From<Scalar> for RationalFunction {
    fn from(c: Scalar) -> Self {
        RationalFunction::constant(c)
    }
}

impl From<Poly> for RationalFunction {
    fn from(p: Poly) -> Self {
        RationalFunction::from_poly(p)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(Poly::from_ints(num), Poly::from_ints(den)).unwrap()
    }

    #[test]
    fn order_examples() {
        assert_eq!(rf(&[1], &[0, 0, 1]).order_at(&Point::zero()), Order::Finite(-2));
        assert_eq!(RationalFunction::zero().order_at(&Point::from_int(1)), Order::Infinity);
        // z^3/(z-1) at infinity: substitute w = 1/z, valuation -2.
        assert_eq!(rf(&[0, 0, 0, 1], &[-1, 1]).order_at(&Point::Infinity), Order::Finite(-2));
        let local = rf(&[0, 0, 0, 1], &[-1, 1]).local(&Point::Infinity);
        assert_eq!(local.order_at(&Point::zero()), Order::Finite(-2));
    }

    #[test]
    fn laurent_examples() {
        let s = rf(&[1], &[1, -1]).laurent_expand(&Point::zero(), 2).unwrap();
        assert_eq!(s.valuation(), 0);
        assert_eq!(s.coeffs(), &[Scalar::one(), Scalar::one(), Scalar::one()]);

        let s = rf(&[1], &[0, 1]).laurent_expand(&Point::zero(), 0).unwrap();
        assert_eq!(s.valuation(), -1);
        assert_eq!(s.coeff(-1), Scalar::one());
        assert_eq!(s.coeff(0), Scalar::zero());

        // z/(z-1) = 1/(z-1) + 1
        let s = rf(&[0, 1], &[-1, 1]).laurent_expand(&Point::from_int(1), 0).unwrap();
        assert_eq!(s.valuation(), -1);
        assert_eq!(s.coeff(-1), Scalar::one());
        assert_eq!(s.coeff(0), Scalar::one());

        assert!(matches!(
            rf(&[1], &[0, 1]).laurent_expand(&Point::zero(), -2),
            Err(Error::TruncationBelowValuation { .. })
        ));
    }

    #[test]
    fn reduced_form() {
        let f = rf(&[-1, 0, 1], &[-2, 2]); // (z²−1)/(2z−2) = (z+1)/2
        assert!(f.is_polynomial());
        assert_eq!(f.num(), &Poly::new(vec![Scalar::from_frac(1, 2), Scalar::from_frac(1, 2)]));
    }

    #[test]
    fn arithmetic() {
        let a = rf(&[1], &[0, 1]);
        let b = rf(&[1], &[-1, 1]);
        let s = &a - &b; // 1/z − 1/(z−1) = −1/(z(z−1))
        assert_eq!(s, rf(&[-1], &[0, -1, 1]));
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(a.derivative(), rf(&[-1], &[0, 0, 1]));
    }

    #[test]
    fn residues() {
        let f = rf(&[1], &[0, 1]);
        assert_eq!(f.residue(&Point::zero()), Scalar::one());
        assert_eq!(f.residue(&Point::Infinity), -Scalar::one());
    }
}
