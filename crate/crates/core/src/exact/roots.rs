//! Roots of polynomials: numeric approximations and exact roots in `ℚ(i)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Poly, Scalar};

/// Exact roots found in `ℚ(i)` together with the cofactor that has none.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSplit {
    /// Distinct exact roots with multiplicities, sorted.
    pub exact: Vec<(Scalar, usize)>,
    /// Monic cofactor without roots in `ℚ(i)`.
    pub residual: Poly,
}

/// All complex roots of `p` (with multiplicity) by Aberth iteration in double precision.
pub fn numeric_roots(p: &Poly) -> Vec<Complex64> {
    let Some(d) = p.degree() else {
        return Vec::new();
    };
    if d == 0 {
        return Vec::new();
    }
    let c: Vec<Complex64> = p.monic().coeffs().iter().map(|x| x.to_complex()).collect();
    aberth(&c)
}

/// Roots of a polynomial with complex coefficients (lowest degree first, nonzero leading term).
pub(crate) fn numeric_roots_c(c: &[Complex64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() == 0.0 {
        c.pop();
    }
    if c.len() < 2 {
        return Vec::new();
    }
    let lead = *c.last().unwrap();
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    aberth(&monic)
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::zero();
    let mut dv = Complex64::zero();
    for a in c.iter().rev() {
        dv = dv * x + v;
        v = v * x + a;
    }
    (v, dv)
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let bound = 1.0 + c[..d].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4;
            Complex64::from_polar(0.5 * bound, th)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (v, dv) = horner(c, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::zero()
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let w = ratio / (Complex64::one() - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn polish(c: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (v, dv) = horner(c, x);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
fn convergents(x: f64, max_den: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        let Some(ai) = BigInt::from_f64_exact(a) else {
            break;
        };
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2.abs() > BigInt::from(max_den) {
            break;
        }
        out.push(BigRational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = v - a;
        if frac.abs() < 1e-14 {
            break;
        }
        v = 1.0 / frac;
    }
    out
}

trait FromF64Exact: Sized {
    fn from_f64_exact(x: f64) -> Option<Self>;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> Option<Self> {
        if x.abs() > 1e15 {
            return None;
        }
        x.to_i64().map(BigInt::from)
    }
}

fn candidates(x: f64) -> Vec<BigRational> {
    let mut c = convergents(x, 1_000_000);
    c.reverse();
    c.truncate(6);
    if x.abs() < 1e-7 {
        c.insert(0, BigRational::zero());
    }
    c
}

/// Splits off every root of `p` lying in `ℚ(i)`, exactly.
pub fn split_roots(p: &Poly) -> RootSplit {
    let mut exact: Vec<(Scalar, usize)> = Vec::new();
    if p.is_zero() || p.is_constant() {
        return RootSplit {
            exact,
            residual: if p.is_zero() { p.clone() } else { Poly::one() },
        };
    }
    let mut sf = p.squarefree().monic();
    let mut found: Vec<Scalar> = Vec::new();
    let mut changed = true;
    while changed && sf.degree().unwrap_or(0) > 0 {
        changed = false;
        if sf.degree() == Some(1) {
            found.push(-&(&sf.coeff(0) / &sf.coeff(1)));
            break;
        }
        let c: Vec<Complex64> = sf.coeffs().iter().map(|x| x.to_complex()).collect();
        for approx in numeric_roots(&sf) {
            let x = polish(&c, approx);
            let res = candidates(x.re);
            let ims = candidates(x.im);
            'search: for re in &res {
                for im in &ims {
                    let s = Scalar::new(re.clone(), im.clone());
                    if sf.eval(&s).is_zero() {
                        sf = sf.exact_div(&Poly::linear_root(&s));
                        found.push(s);
                        changed = true;
                        break 'search;
                    }
                }
            }
            if changed {
                break;
            }
        }
    }
    found.sort();
    found.dedup();
    let mut residual = p.monic();
    for a in found {
        let m = p.multiplicity(&a);
        residual = residual.exact_div(&Poly::linear_root(&a).pow(m as u32));
        exact.push((a, m));
    }
    RootSplit { exact, residual }
}
