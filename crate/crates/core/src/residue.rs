//! Fraction-free arithmetic in `ℚ(i)[x]/(f)` for monic squarefree `f`.
//!
//! An element is a Gaussian-integer coefficient vector over one positive common
//! denominator, so products and sums never normalize individual rationals.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact::{Poly, Scalar};

type G = Complex<BigInt>;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Elem {
    num: Vec<G>,
    den: BigInt,
}

impl Elem {
    pub(crate) fn zero() -> Self {
        Elem { num: Vec::new(), den: BigInt::one() }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }
}

/// `f` is zero divisor–aware: tests that meet a proper factor report it.
pub(crate) enum Test {
    Zero,
    Unit,
    Split(Poly),
}

pub(crate) struct Ring {
    f: Poly,
    d: usize,
    /// `f = x^d + (1/fd) Σ low[i] x^i`.
    low: Vec<G>,
    fd: BigInt,
}

// A prime ≡ 1 mod 4 and a square root of −1 modulo it: ℤ[i] → F_P, i ↦ ι.
const P: u64 = 2_305_843_009_213_693_921;
const IOTA: u64 = 583_529_827_753_931_384;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn int_mod(n: &BigInt) -> u64 {
    let m = n.mod_floor(&BigInt::from(P));
    m.iter_u64_digits().next().unwrap_or(0)
}

fn gauss_mod(z: &G) -> u64 {
    (int_mod(&z.re) + mulmod(IOTA, int_mod(&z.im))) % P
}

/// Degree of `gcd(a, b)` over `F_P` (coefficients lowest first).
fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> Option<usize> {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a ← a mod b
        let inv = powmod(*b.last().unwrap(), P - 2);
        while a.len() >= b.len() {
            let q = mulmod(*a.last().unwrap(), inv);
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + P - mulmod(q, *c)) % P;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().checked_sub(1)
}

fn lcm_den(s: &Scalar) -> BigInt {
    s.re().denom().lcm(s.im().denom())
}

fn scaled(s: &Scalar, den: &BigInt) -> G {
    let part = |r: &BigRational| r.numer() * (den / r.denom());
    Complex::new(part(s.re()), part(s.im()))
}

fn gscale(z: &G, k: &BigInt) -> G {
    Complex::new(&z.re * k, &z.im * k)
}

impl Ring {
    pub(crate) fn new(f: &Poly) -> Self {
        let f = f.monic();
        let d = f.degree().expect("nonzero modulus");
        let fd = f.coeffs()[..d].iter().fold(BigInt::one(), |acc, c| acc.lcm(&lcm_den(c)));
        let low = f.coeffs()[..d].iter().map(|c| scaled(c, &fd)).collect();
        Ring { f, d, low, fd }
    }

    pub(crate) fn modulus(&self) -> &Poly {
        &self.f
    }

    pub(crate) fn lift(&self, p: &Poly) -> Elem {
        let den = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(&lcm_den(c)));
        let num = p.coeffs().iter().map(|c| scaled(c, &den)).collect();
        self.reduce(num, den)
    }

    pub(crate) fn int(&self, n: i64) -> Elem {
        self.normalize(vec![Complex::new(BigInt::from(n), BigInt::zero())], BigInt::one())
    }

    pub(crate) fn to_poly(&self, e: &Elem) -> Poly {
        let den = BigRational::from_integer(e.den.clone());
        Poly::new(
            e.num
                .iter()
                .map(|z| {
                    Scalar::new(
                        BigRational::from_integer(z.re.clone()) / &den,
                        BigRational::from_integer(z.im.clone()) / &den,
                    )
                })
                .collect(),
        )
    }

    fn reduce(&self, mut num: Vec<G>, mut den: BigInt) -> Elem {
        while num.len() > self.d {
            let k = num.len() - 1;
            let t = num.pop().expect("nonempty");
            if t.is_zero() {
                continue;
            }
            // D x^d ≡ −Σ low[i] x^i
            if !self.fd.is_one() {
                for c in num.iter_mut() {
                    *c = gscale(c, &self.fd);
                }
                den *= &self.fd;
            }
            for (i, l) in self.low.iter().enumerate() {
                num[k - self.d + i] -= &t * l;
            }
        }
        self.normalize(num, den)
    }

    fn normalize(&self, mut num: Vec<G>, mut den: BigInt) -> Elem {
        while num.last().is_some_and(Zero::is_zero) {
            num.pop();
        }
        if num.is_empty() {
            return Elem::zero();
        }
        let mut g = den.clone();
        for z in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(&z.re).gcd(&z.im);
        }
        if den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for z in num.iter_mut() {
                z.re /= &g;
                z.im /= &g;
            }
            den /= &g;
        }
        Elem { num, den }
    }

    pub(crate) fn add(&self, a: &Elem, b: &Elem) -> Elem {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let g = a.den.gcd(&b.den);
        let fa = &b.den / &g;
        let fb = &a.den / &g;
        let n = a.num.len().max(b.num.len());
        let mut num = vec![G::zero(); n];
        for (i, z) in a.num.iter().enumerate() {
            num[i] = gscale(z, &fa);
        }
        for (i, z) in b.num.iter().enumerate() {
            num[i] += gscale(z, &fb);
        }
        self.normalize(num, &a.den * &fa)
    }

    pub(crate) fn neg(&self, a: &Elem) -> Elem {
        Elem { num: a.num.iter().map(|z| -z).collect(), den: a.den.clone() }
    }

    pub(crate) fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub(crate) fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::zero();
        }
        let mut num = vec![G::zero(); a.num.len() + b.num.len() - 1];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                num[i + j] += x * y;
            }
        }
        self.reduce(num, &a.den * &b.den)
    }

    pub(crate) fn scale_int(&self, a: &Elem, k: i64) -> Elem {
        let k = BigInt::from(k);
        self.normalize(a.num.iter().map(|z| gscale(z, &k)).collect(), a.den.clone())
    }

    pub(crate) fn div_int(&self, a: &Elem, k: i64) -> Elem {
        let mut num = a.num.clone();
        let mut den = &a.den * BigInt::from(k);
        if den.is_negative() {
            den = -den;
            num = num.into_iter().map(|z| -z).collect();
        }
        self.normalize(num, den)
    }

    pub(crate) fn test(&self, g: &Elem) -> Test {
        if g.is_zero() {
            return Test::Zero;
        }
        if self.d == 1 || self.unit_mod_p(g) {
            return Test::Unit;
        }
        let h = self.to_poly(g).gcd(&self.f);
        if h.is_constant() {
            Test::Unit
        } else {
            Test::Split(h)
        }
    }

    /// A constant gcd modulo `P` certifies a unit whenever `P` keeps the degree of `f`.
    fn unit_mod_p(&self, g: &Elem) -> bool {
        let lead = int_mod(&self.fd);
        if lead == 0 {
            return false;
        }
        let mut f: Vec<u64> = self.low.iter().map(gauss_mod).collect();
        f.push(lead);
        let g: Vec<u64> = g.num.iter().map(gauss_mod).collect();
        gcd_degree_mod(f, g) == Some(0)
    }

    /// Inverse of a unit, or the test outcome explaining why there is none.
    pub(crate) fn inv(&self, g: &Elem) -> Result<Elem, Test> {
        if g.is_zero() {
            return Err(Test::Zero);
        }
        let (h, s, _) = self.to_poly(g).xgcd(&self.f);
        if !h.is_constant() {
            return Err(Test::Split(h));
        }
        let s = s.scale(&h.coeff(0).inv().expect("nonzero gcd"));
        Ok(self.lift(&s))
    }
}
