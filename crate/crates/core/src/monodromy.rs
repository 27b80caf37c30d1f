//! Numeric analytic continuation of fundamental matrices and loop monodromy.
//!
//! Transport follows `Y(end) = T · Y(start)` with `Y(start) = I`, so the matrix attached to a
//! loop is the continued fundamental matrix at the base point. For `B = A/z` and a positive loop
//! around 0 this gives `exp(2πiA)`; composing `γ` then `δ` gives `T_δ T_γ`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
pub use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{numeric_roots, rat_to_f64, Point, RatMatrix};
use crate::scalarize::ApparentLocus;
use crate::system::{companion_matrix, LinearSystem, ScalarEquation};

pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_TERMS: usize = 80;
const CIRCLE_VERTICES: usize = 48;

/// `B = N(z)/d(z)` with complex coefficients, ready for Taylor re-expansion.
#[derive(Clone, Debug)]
pub struct NumericSystem {
    p: usize,
    den: Vec<Cdd>,
    num: Vec<Vec<Cdd>>,
    singular: Vec<Complex64>,
}

fn to_c(p: &crate::exact::Poly) -> Vec<Cdd> {
    p.coeffs().iter().map(|c| Cdd { re: Dd::from_rat(c.re()), im: Dd::from_rat(c.im()) }).collect()
}

/// Double-double real: `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from_rat(x: &BigRational) -> Dd {
        let hi = rat_to_f64(x);
        let rest = x - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
        Dd { hi, lo: rat_to_f64(&rest) }
    }

    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (o.hi - bb) + self.lo + o.lo;
        let hi = s + e;
        Dd { hi, lo: e - (hi - s) }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        let hi = p + e;
        Dd { hi, lo: e - (hi - p) }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from_c(z: Complex64) -> Cdd {
        Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn to_c(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

impl NumericSystem {
    pub fn from_matrix(b: &RatMatrix) -> Self {
        let d = b.common_denominator();
        let num = b
            .entries()
            .iter()
            .map(|e| to_c(&(e.num() * &d.exact_div(e.den()))))
            .collect();
        NumericSystem {
            p: b.rows(),
            den: to_c(&d),
            num,
            singular: numeric_roots(&d.squarefree()),
        }
    }

    pub fn from_system(s: &LinearSystem) -> Self {
        Self::from_matrix(s.matrix())
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Finite singular points (numeric).
    pub fn singular_points(&self) -> &[Complex64] {
        &self.singular
    }

    /// Half the minimal pairwise distance among finite singular points, capped at 0.5.
    pub fn safety_radius(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.singular.iter().enumerate() {
            for b in &self.singular[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        (d / 2.0).min(0.5)
    }

    fn distance(&self, z: Complex64) -> f64 {
        self.singular.iter().map(|a| (z - a).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let d = horner(&self.den, z);
        CMatrix::from_fn(self.p, self.p, |i, j| horner(&self.num[i * self.p + j], z) / d)
    }

    /// Taylor coefficients of `Y(z0 + h)` solving `d Y' = N Y`, `Y(z0) = y0`, evaluated at `h`.
    /// Returns `None` when the tail has not decayed below `tol`.
    fn taylor_step(&self, z0: Complex64, y0: &CMatrix, h: Complex64, tol: f64) -> Option<CMatrix> {
        let d = shifted(&self.den, z0);
        let n: Vec<CMatrix> = {
            let ent: Vec<Vec<Complex64>> = self.num.iter().map(|c| shifted(c, z0)).collect();
            let len = ent.iter().map(Vec::len).max().unwrap_or(0);
            (0..len)
                .map(|k| {
                    CMatrix::from_fn(self.p, self.p, |i, j| {
                        ent[i * self.p + j].get(k).copied().unwrap_or_default()
                    })
                })
                .collect()
        };
        let scale = 1.0 + inf_norm(y0);
        let mut ys: Vec<CMatrix> = vec![y0.clone()];
        let mut out = y0.clone();
        let mut hk = Complex64::new(1.0, 0.0);
        let mut small = 0;
        for m in 0..MAX_TERMS {
            let mut rhs = CMatrix::zeros(self.p, self.p);
            for (k, nk) in n.iter().enumerate().take(m + 1) {
                rhs += nk * &ys[m - k];
            }
            for k in 1..d.len().min(m + 2) {
                rhs -= &ys[m + 1 - k] * (d[k] * (m + 1 - k) as f64);
            }
            let next = rhs / (d[0] * (m + 1) as f64);
            hk *= h;
            let term = &next * hk;
            out += &term;
            ys.push(next);
            if inf_norm(&term) <= tol * scale * 1e-3 {
                small += 1;
                if small >= 2 {
                    return Some(out);
                }
            } else {
                small = 0;
            }
        }
        None
    }

    /// `T` with `Y(end) = T Y(start)` along the polygon `path`.
    pub fn transport(&self, path: &[Complex64], tol: f64) -> Result<CMatrix> {
        self.transport_with_clearance(path, tol, self.safety_radius() / 2.0)
    }

    fn transport_with_clearance(&self, path: &[Complex64], tol: f64, clearance: f64) -> Result<CMatrix> {
        for w in path.windows(2) {
            for a in &self.singular {
                let dist = segment_distance(w[0], w[1], *a);
                if dist < clearance {
                    return Err(Error::SafetyRadius { distance: dist, radius: clearance });
                }
            }
        }
        let mut y = CMatrix::identity(self.p, self.p);
        for w in path.windows(2) {
            let (mut z, end) = (w[0], w[1]);
            while (end - z).norm() > 0.0 {
                let rem = end - z;
                let rho = self.distance(z);
                let mut len = rem.norm().min(rho / 2.0);
                loop {
                    let h = rem / rem.norm() * len;
                    let h = if len >= rem.norm() { rem } else { h };
                    if let Some(next) = self.taylor_step(z, &y, h, tol) {
                        y = next;
                        z = if len >= rem.norm() { end } else { z + h };
                        break;
                    }
                    len /= 2.0;
                    if len < 1e-12 * (1.0 + z.norm()) {
                        return Err(Error::StepUnderflow(format!("near {z}")));
                    }
                }
            }
        }
        Ok(y)
    }
}

fn horner(c: &[Cdd], z: Complex64) -> Complex64 {
    let z = Cdd::from_c(z);
    c.iter().rev().fold(Cdd::default(), |acc, x| acc.mul(z).add(*x)).to_c()
}

/// Coefficients of `q(z0 + h)` in `h`, shifted in double-double so that clustered roots do not cancel.
fn shifted(c: &[Cdd], z0: Complex64) -> Vec<Complex64> {
    let z0 = Cdd::from_c(z0);
    let mut a = c.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            a[j] = a[j].add(a[j + 1].mul(z0));
        }
    }
    a.into_iter().map(Cdd::to_c).collect()
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn segment_distance(a: Complex64, b: Complex64, x: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a) * ab.conj()).re / l2;
    (x - (a + ab * t.clamp(0.0, 1.0))).norm()
}

fn circle(center: Complex64, radius: f64, start: f64, sign: f64) -> Vec<Complex64> {
    (0..=CIRCLE_VERTICES)
        .map(|k| center + Complex64::from_polar(radius, start + sign * 2.0 * PI * k as f64 / CIRCLE_VERTICES as f64))
        .collect()
}

/// A closed polygon based at an ordinary point enclosing one singular point.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    pub base: Complex64,
    pub vertices: Vec<Complex64>,
    /// `None` for the point at infinity.
    pub encloses: Option<Complex64>,
    pub label: String,
}

/// Generators of the monodromy representation at a common base point.
#[derive(Clone, Debug)]
pub struct MonodromyRep {
    pub base: Complex64,
    pub labels: Vec<String>,
    pub loops: Vec<Loop>,
    pub matrices: Vec<CMatrix>,
    pub conditions: Vec<f64>,
    /// `‖G_last ⋯ G_1 − I‖∞`.
    pub product_residual: f64,
    pub tol: f64,
}

pub const CONVENTION: &str = "Y(end) = G Y(base) with Y(base) = I; finite points ordered counterclockwise by angle \
from the base starting at the infinity connector, infinity last; relation G_last ... G_1 = I";

impl MonodromyRep {
    pub fn product(&self) -> CMatrix {
        let p = self.matrices.first().map_or(0, |m| m.nrows());
        self.matrices.iter().fold(CMatrix::identity(p, p), |acc, g| g * acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": [self.base.re, self.base.im],
            "convention": CONVENTION,
            "points": self.labels,
            "matrices": self.matrices.iter().map(cmatrix_json).collect::<Vec<_>>(),
            "condition_numbers": self.conditions,
            "product_residual": self.product_residual,
            "tol": self.tol,
        })
    }
}

pub fn cmatrix_json(m: &CMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect(),
                )
            })
            .collect(),
    )
}

pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

struct Layout {
    base: Complex64,
    radius: f64,
    phi: f64,
    big: f64,
}

fn arg_from(base: Complex64, a: Complex64, phi: f64) -> f64 {
    ((a - base).arg() - phi).rem_euclid(2.0 * PI)
}

/// Checks that connectors and the infinity ray keep clear of every other point.
fn layout_at(ns: &NumericSystem, base: Complex64) -> Option<Layout> {
    let pts = ns.singular_points();
    let radius = ns.safety_radius();
    if pts.iter().any(|a| (a - base).norm() < 2.0 * radius) {
        return None;
    }
    let mut angles: Vec<f64> = pts.iter().map(|a| (a - base).arg().rem_euclid(2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    let phi = if angles.is_empty() {
        0.0
    } else {
        let mut best = (angles[0] + 2.0 * PI - angles[angles.len() - 1], angles[angles.len() - 1]);
        for w in angles.windows(2) {
            if w[1] - w[0] > best.0 {
                best = (w[1] - w[0], w[0]);
            }
        }
        best.1 + best.0 / 2.0
    };
    let big = pts.iter().map(|a| (a - base).norm()).fold(0.0, f64::max) + 2.0 * radius + 1.0;
    let ray_end = base + Complex64::from_polar(big, phi);
    if pts.iter().any(|a| segment_distance(base, ray_end, *a) < radius) {
        return None;
    }
    for (i, a) in pts.iter().enumerate() {
        let entry = a + (base - a) / (base - a).norm() * radius;
        for (j, b) in pts.iter().enumerate() {
            if i != j && segment_distance(base, entry, *b) < radius {
                return None;
            }
        }
    }
    let mut rel: Vec<f64> = pts.iter().map(|a| arg_from(base, *a, phi)).collect();
    rel.sort_by(f64::total_cmp);
    if rel.windows(2).any(|w| w[1] - w[0] < 1e-6) {
        return None;
    }
    Some(Layout { base, radius, phi, big })
}

fn auto_layout(ns: &NumericSystem) -> Result<Layout> {
    let pts = ns.singular_points();
    let n = pts.len().max(1) as f64;
    let c = pts.iter().sum::<Complex64>() / n;
    let l = pts.iter().map(|a| (a - c).norm()).fold(1.0, f64::max);
    for scale in [0.37, 1.3, 2.1, 3.7, 0.81, 5.3] {
        for j in 0..17 {
            let theta = 0.3 + 2.0 * PI * j as f64 / 17.0;
            if let Some(lay) = layout_at(ns, c + Complex64::from_polar(l * scale, theta)) {
                return Ok(lay);
            }
        }
    }
    Err(Error::Precondition("no admissible base point found".into()))
}

fn point_loop(lay: &Layout, a: Complex64, label: String) -> Loop {
    let u = (lay.base - a) / (lay.base - a).norm();
    let entry = a + u * lay.radius;
    let mut v = vec![lay.base];
    v.extend(circle(a, lay.radius, u.arg(), 1.0));
    v[1] = entry;
    *v.last_mut().unwrap() = entry;
    v.push(lay.base);
    Loop { base: lay.base, vertices: v, encloses: Some(a), label }
}

fn infinity_loop(lay: &Layout) -> Loop {
    let mut v = vec![lay.base];
    v.extend(circle(lay.base, lay.big, lay.phi, -1.0));
    let start = v[1];
    *v.last_mut().unwrap() = start;
    v.push(lay.base);
    Loop { base: lay.base, vertices: v, encloses: None, label: "inf".into() }
}

fn label_of(a: Complex64, exact: &[Point]) -> String {
    exact
        .iter()
        .filter_map(|p| p.finite().map(|s| (p, s.to_complex())))
        .find(|(_, c)| (c - a).norm() < 1e-9)
        .map_or_else(|| format!("{:.12}{:+.12}i", a.re, a.im), |(p, _)| p.to_string())
}

/// Builds loops around every singular point and transports along them concurrently.
pub fn monodromy_rep(s: &LinearSystem, base: Option<Complex64>, tol: f64) -> Result<MonodromyRep> {
    let ns = NumericSystem::from_system(s);
    let lay = match base {
        Some(b) => layout_at(&ns, b)
            .ok_or_else(|| Error::Precondition(format!("base point {b} is too close to the singular locus")))?,
        None => auto_layout(&ns)?,
    };
    let mut pts: Vec<Complex64> = ns.singular_points().to_vec();
    pts.sort_by(|a, b| arg_from(lay.base, *a, lay.phi).total_cmp(&arg_from(lay.base, *b, lay.phi)));
    let mut loops: Vec<Loop> = pts
        .iter()
        .map(|a| point_loop(&lay, *a, label_of(*a, s.singular_locus())))
        .collect();
    if s.is_singular(&Point::Infinity) {
        loops.push(infinity_loop(&lay));
    }
    let matrices: Vec<CMatrix> = loops
        .par_iter()
        .map(|l| ns.transport(&l.vertices, tol))
        .collect::<Result<_>>()?;
    let p = s.dim();
    let mut rep = MonodromyRep {
        base: lay.base,
        labels: loops.iter().map(|l| l.label.clone()).collect(),
        conditions: matrices.iter().map(condition_number).collect(),
        loops,
        matrices,
        product_residual: 0.0,
        tol,
    };
    if !rep.matrices.is_empty() {
        rep.product_residual = inf_norm(&(rep.product() - CMatrix::identity(p, p)));
    }
    Ok(rep)
}

/// Matrix of a single positive loop around `a` (finite or infinite) for a numeric system.
///
/// Finite points get a circle of an eighth of the distance to the nearest other pole, which keeps
/// the loop away from the growth of nearby irregular solutions.
fn local_monodromy(ns: &NumericSystem, a: Option<Complex64>, tol: f64) -> Result<CMatrix> {
    match a {
        Some(a) => {
            let near = ns
                .singular_points()
                .iter()
                .map(|x| (x - a).norm())
                .filter(|d| *d > 1e-9 * (1.0 + a.norm()))
                .fold(f64::INFINITY, f64::min);
            let radius = (near / 8.0).min(0.5);
            ns.transport_with_clearance(&circle(a, radius, 0.0, 1.0), tol, radius / 2.0)
        }
        None => {
            let radius = ns.safety_radius();
            let r = ns.singular_points().iter().map(|x| x.norm()).fold(0.0, f64::max) + 2.0 * radius + 1.0;
            ns.transport(&circle(Complex64::new(0.0, 0.0), r, 0.0, -1.0), tol)
        }
    }
}

/// `‖G_a − I‖∞` for a singular point of a system.
pub fn trivial_residual(s: &LinearSystem, a: &Point, tol: f64) -> Result<f64> {
    if !s.is_singular(a) {
        return Err(Error::NotSingular(Box::new(a.clone())));
    }
    let ns = NumericSystem::from_system(s);
    let g = local_monodromy(&ns, a.finite().map(|x| x.to_complex()), tol)?;
    Ok(inf_norm(&(g - CMatrix::identity(s.dim(), s.dim()))))
}

pub fn verify_trivial(s: &LinearSystem, a: &Point, tol: f64) -> Result<bool> {
    Ok(trivial_residual(s, a, tol)? <= tol)
}

/// Residuals `‖G − I‖∞` at every point of an apparent locus of an equation, via its companion.
pub fn equation_trivial_residuals(e: &ScalarEquation, locus: &ApparentLocus, tol: f64) -> Result<Vec<f64>> {
    let ns = NumericSystem::from_matrix(&companion_matrix(e));
    locus
        .numeric_points()
        .into_iter()
        .map(|a| {
            let target = match a {
                Some(z) => Some(
                    *ns.singular_points()
                        .iter()
                        .min_by(|x, y| (*x - z).norm().total_cmp(&(*y - z).norm()))
                        .ok_or_else(|| Error::Precondition("apparent point is not a pole".into()))?,
                ),
                None => None,
            };
            let g = local_monodromy(&ns, target, tol)?;
            Ok(inf_norm(&(g - CMatrix::identity(e.order(), e.order()))))
        })
        .collect()
}

pub fn verify_trivial_equation(e: &ScalarEquation, locus: &ApparentLocus, tol: f64) -> Result<bool> {
    Ok(equation_trivial_residuals(e, locus, tol)?.iter().all(|r| *r <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ConstMatrix, Poly, RationalFunction, Scalar};

    fn euler(a: &ConstMatrix) -> LinearSystem {
        let zinv = RationalFunction::new(<Poly as num_traits::One>::one(), Poly::x()).unwrap();
        let b = a.to_rat().map(|x| x * &zinv);
        LinearSystem::new(b).unwrap()
    }

    #[test]
    fn zero_system_transport_is_identity() {
        let s = LinearSystem::new(RatMatrix::zeros(2, 2)).unwrap();
        let ns = NumericSystem::from_system(&s);
        let t = ns
            .transport(&[Complex64::new(0.0, 0.0), Complex64::new(3.0, 1.0)], DEFAULT_TOL)
            .unwrap();
        assert!(inf_norm(&(t - CMatrix::identity(2, 2))) < 1e-14);
        assert!(monodromy_rep(&s, None, DEFAULT_TOL).unwrap().matrices.is_empty());
    }

    #[test]
    fn half_exponent_loop() {
        let a = ConstMatrix::diagonal(&[Scalar::from_frac(1, 2), Scalar::from_int(0)]);
        let s = euler(&a);
        let rep = monodromy_rep(&s, None, DEFAULT_TOL).unwrap();
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert!(inf_norm(&(&rep.matrices[0] - &want)) < 1e-8);
        assert!(inf_norm(&(&rep.matrices[1] - want.try_inverse().unwrap())) < 1e-8);
        assert!(rep.product_residual < 1e-8);
    }

    #[test]
    fn constant_segment_is_exponential() {
        let a = ConstMatrix::from_rows(vec![
            vec![Scalar::from_int(0), Scalar::from_int(1)],
            vec![Scalar::from_int(-1), Scalar::from_int(0)],
        ])
        .unwrap();
        let s = LinearSystem::new(a.to_rat()).unwrap();
        let ns = NumericSystem::from_system(&s);
        let dz = Complex64::new(1.5, 0.5);
        let t = ns.transport(&[Complex64::new(0.0, 0.0), dz], DEFAULT_TOL).unwrap();
        let want = (a.to_complex() * dz).exp();
        assert!(inf_norm(&(t - want)) < 1e-9);
    }
}
