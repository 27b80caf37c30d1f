//! Cyclic-vector scalarization, apparent singularities and the apparent-count bound.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::residue::{Elem, Ring, Test};
use crate::exact::{fmt_rat, numeric_roots, split_roots, Point, Poly, RatMatrix, RationalFunction, Scalar};
use crate::system::{ceil_rat, LinearSystem, ScalarEquation};

/// Maximum number of candidates tried by [`cyclic_vector`].
pub const CYCLIC_ATTEMPTS: usize = 64;
const SCHEDULE_SEED: u64 = 0x5eed_c1c1;
const FROBENIUS_CAP: usize = 512;

/// A cyclic vector `c(z)` with its matrix `W = [v₀; …; v_{p−1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicVector {
    pub c: Vec<Poly>,
    pub label: String,
    pub w: RatMatrix,
    pub det_w: RationalFunction,
}

impl CyclicVector {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "candidate": self.label,
            "c": self.c.iter().map(Poly::to_json).collect::<Vec<_>>(),
            "det_w": self.det_w.to_json(),
        })
    }
}

/// The candidate schedule: `e₁`, `(1, z, …, z^{p−1})`, then seeded small-integer polynomial vectors.
pub fn candidate_schedule(p: usize) -> Vec<(String, Vec<Poly>)> {
    let mut out = Vec::with_capacity(CYCLIC_ATTEMPTS);
    let mut e1 = vec![Poly::zero(); p];
    e1[0] = Poly::one();
    out.push(("e1".to_string(), e1));
    if p > 1 {
        out.push((
            "powers".to_string(),
            (0..p).map(|k| Poly::monomial(Scalar::one(), k)).collect(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SCHEDULE_SEED ^ p as u64);
    let mut k = 0;
    while out.len() < CYCLIC_ATTEMPTS {
        let c: Vec<Poly> = (0..p)
            .map(|_| Poly::new((0..p).map(|_| Scalar::from_int(rng.gen_range(-2..=2))).collect()))
            .collect();
        if c.iter().all(|x| x.is_zero()) {
            continue;
        }
        out.push((format!("random#{k}"), c));
        k += 1;
    }
    out
}

/// Tries one candidate; `None` when it is not cyclic.
pub fn cyclic_vector_with(s: &LinearSystem, c: &[Poly], label: &str) -> Result<Option<(CyclicVector, ScalarEquation)>> {
    let p = s.dim();
    if c.len() != p {
        return Err(Error::Dimension(format!("candidate of length {} for p = {p}", c.len())));
    }
    let b = s.matrix();
    let mut rows: Vec<Vec<RationalFunction>> = vec![c.iter().map(|x| RationalFunction::from_poly(x.clone())).collect()];
    for k in 0..p {
        let v = &rows[k];
        let vb = b.vec_mul(v);
        rows.push(v.iter().zip(&vb).map(|(x, y)| &x.derivative() + y).collect());
    }
    let w = RatMatrix::from_rows(rows[..p].to_vec())?;
    let det_w = w.det()?;
    if det_w.is_zero() {
        return Ok(None);
    }
    // x W = −v_p with x_k the coefficient of v_k, so b_j = x_{p−j}.
    let rhs: Vec<RationalFunction> = rows[p].iter().map(|x| -x).collect();
    let x = w.solve_left(&rhs).ok_or_else(|| Error::Internal("cyclic W not invertible".into()))?;
    let coeffs = (1..=p).map(|j| x[p - j].clone()).collect();
    let cv = CyclicVector {
        c: c.to_vec(),
        label: label.to_string(),
        w,
        det_w,
    };
    Ok(Some((cv, ScalarEquation::new(coeffs)?)))
}

/// First cyclic candidate of the default schedule and its scalar equation.
pub fn cyclic_vector(s: &LinearSystem) -> Result<(CyclicVector, ScalarEquation)> {
    let mut tried = Vec::new();
    for (label, c) in candidate_schedule(s.dim()) {
        if let Some(found) = cyclic_vector_with(s, &c, &label)? {
            return Ok(found);
        }
        tried.push(label);
    }
    Err(Error::CyclicSearchExhausted { tried })
}

/// Where an apparent-point certificate applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApparentLocus {
    Exact(Point),
    /// All roots of a squarefree polynomial with no roots in `ℚ(i)`.
    Cluster(Poly),
}

impl ApparentLocus {
    /// Number of distinct points.
    pub fn count(&self) -> usize {
        match self {
            ApparentLocus::Exact(_) => 1,
            ApparentLocus::Cluster(f) => f.degree().unwrap_or(0),
        }
    }

    /// Numeric positions (`None` for `∞`).
    pub fn numeric_points(&self) -> Vec<Option<Complex64>> {
        match self {
            ApparentLocus::Exact(Point::Finite(a)) => vec![Some(a.to_complex())],
            ApparentLocus::Exact(Point::Infinity) => vec![None],
            ApparentLocus::Cluster(f) => numeric_roots(f).into_iter().map(Some).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ApparentLocus::Exact(a) => serde_json::json!({ "point": a.to_json() }),
            ApparentLocus::Cluster(f) => serde_json::json!({ "roots_of": f.to_json() }),
        }
    }
}

/// Integer exponents and the truncation used by the Frobenius construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApparentCertificate {
    pub locus: ApparentLocus,
    pub exponents: Vec<i64>,
    pub truncation: usize,
}

impl ApparentCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "locus": self.locus.to_json(),
            "count": self.locus.count(),
            "exponents": self.exponents,
            "truncation": self.truncation,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Apparent(ApparentCertificate),
    NotApparent(String),
}

impl Verdict {
    pub fn certificate(&self) -> Option<&ApparentCertificate> {
        match self {
            Verdict::Apparent(c) => Some(c),
            Verdict::NotApparent(_) => None,
        }
    }
}

/// Raised when a zero divisor shows `f` factors as `g · (f/g)`.
struct SplitAt(Poly);

fn is_zero(ring: &Ring, g: &Elem) -> std::result::Result<bool, SplitAt> {
    match ring.test(g) {
        Test::Zero => Ok(true),
        Test::Unit => Ok(false),
        Test::Split(h) => Err(SplitAt(h)),
    }
}

fn invert(ring: &Ring, g: &Elem) -> std::result::Result<Elem, SplitAt> {
    match ring.inv(g) {
        Ok(x) => Ok(x),
        Err(Test::Split(h)) => Err(SplitAt(h)),
        Err(_) => Err(SplitAt(ring.modulus().clone())),
    }
}

/// `(g^{(k)}/k!)(x)` in the ring.
fn taylor_coeff(ring: &Ring, g: &Poly, k: usize) -> Elem {
    let coeffs = g
        .coeffs()
        .iter()
        .enumerate()
        .skip(k)
        .map(|(i, c)| c * &Scalar::from_int(binom(i, k)))
        .collect();
    ring.lift(&Poly::new(coeffs))
}

fn binom(n: usize, k: usize) -> i64 {
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r as i64
}

fn falling(s: i64, k: usize) -> i64 {
    (0..k as i64).map(|i| s - i).product()
}

enum Outcome {
    Decided(Verdict),
    Undecided(usize),
}

/// Frobenius test over `ℚ(i)[x]/(f)` at `z = x`, for an equation given by its coefficients.
fn frobenius(coeffs: &[RationalFunction], f: &Poly, locus: ApparentLocus) -> std::result::Result<Outcome, SplitAt> {
    let ring = Ring::new(f);
    let p = coeffs.len();

    // Denominator valuations.
    let mut dens = Vec::with_capacity(p);
    let mut any_pole = false;
    for b in coeffs {
        if b.is_zero() {
            dens.push(None);
            continue;
        }
        let mut v = 0;
        while is_zero(&ring, &taylor_coeff(&ring, b.den(), v))? {
            v += 1;
        }
        any_pole |= v > 0;
        dens.push(Some(v));
    }
    if !any_pole {
        return Ok(Outcome::Decided(Verdict::NotApparent("not a pole".into())));
    }

    // Leading denominator coefficients are units by the choice of v_j.
    let mut lead_inv = Vec::with_capacity(p);
    for (b, v) in coeffs.iter().zip(&dens) {
        lead_inv.push(match v {
            Some(v) => Some(invert(&ring, &taylor_coeff(&ring, b.den(), *v))?),
            None => None,
        });
    }

    // b_j = t^{−v_j} (n(t)/d(t)); local series of the quotient.
    let series = |j: usize, len: usize| -> Vec<Elem> {
        let b = &coeffs[j];
        let v = dens[j].unwrap();
        let d: Vec<Elem> = (0..len).map(|k| taylor_coeff(&ring, b.den(), v + k)).collect();
        let inv0 = lead_inv[j].as_ref().unwrap();
        let mut q: Vec<Elem> = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = taylor_coeff(&ring, b.num(), k);
            for i in 1..=k {
                acc = ring.sub(&acc, &ring.mul(&d[i], &q[k - i]));
            }
            q.push(ring.mul(&acc, inv0));
        }
        q
    };

    // Fuchs condition: coefficients of t^e with e < −j vanish.
    let mut beta0: Vec<Vec<Elem>> = Vec::with_capacity(p);
    for j in 0..p {
        let Some(v) = dens[j] else {
            beta0.push(Vec::new());
            continue;
        };
        let jj = j + 1;
        let q = series(j, v + 1);
        for (m, qm) in q.iter().enumerate() {
            if (m as i64) - (v as i64) < -(jj as i64) && !is_zero(&ring, qm)? {
                return Ok(Outcome::Decided(Verdict::NotApparent(format!(
                    "coefficient b_{jj} has a pole of order {} > {jj}",
                    v - m
                ))));
            }
        }
        beta0.push(q);
    }

    // β_{j,k} is the coefficient of t^{k−j} in b_j.
    let beta = |q: &[Elem], j: usize, k: usize| -> Elem {
        let v = dens[j - 1].unwrap() as i64;
        let idx = k as i64 - j as i64 + v;
        if idx < 0 || idx as usize >= q.len() {
            Elem::zero()
        } else {
            q[idx as usize].clone()
        }
    };
    let b00: Vec<Elem> = (1..=p)
        .map(|j| if dens[j - 1].is_none() { Elem::zero() } else { beta(&beta0[j - 1], j, 0) })
        .collect();
    // Indicial polynomial I(s) = Σ_j β_{j,0} [s]_{p−j}.
    let indicial_at = |s: i64| -> Elem {
        let mut acc = ring.int(falling(s, p));
        for j in 1..=p {
            acc = ring.add(&acc, &ring.scale_int(&b00[j - 1], falling(s, p - j)));
        }
        acc
    };

    let b00_poly: Vec<Poly> = b00.iter().map(|e| ring.to_poly(e)).collect();
    let candidates = indicial_candidates(&b00_poly, ring.modulus(), p);
    let mut roots = Vec::new();
    for e in candidates {
        if is_zero(&ring, &indicial_at(e))? {
            roots.push(e);
        }
    }
    if roots.len() < p {
        return Ok(Outcome::Decided(Verdict::NotApparent(format!(
            "indicial equation has {} distinct integer roots, need {p}",
            roots.len()
        ))));
    }
    let spread = (roots[p - 1] - roots[0]) as usize;
    let n_trunc = spread + p + 4;
    if spread > FROBENIUS_CAP {
        return Ok(Outcome::Undecided(FROBENIUS_CAP));
    }

    // Full local series through t^{n_trunc − j}.
    let mut full: Vec<Vec<Elem>> = Vec::with_capacity(p);
    for j in 0..p {
        match dens[j] {
            None => full.push(Vec::new()),
            Some(v) => full.push(series(j, v + n_trunc + 1)),
        }
    }
    let betas: Vec<Vec<Elem>> = (0..=n_trunc)
        .map(|k| {
            (1..=p)
                .map(|j| if dens[j - 1].is_none() { Elem::zero() } else { beta(&full[j - 1], j, k) })
                .collect()
        })
        .collect();
    let phi = |k: usize, s: i64| -> Elem {
        let mut acc = if k == 0 { ring.int(falling(s, p)) } else { Elem::zero() };
        for j in 1..=p {
            let b = &betas[k][j - 1];
            if !b.is_zero() {
                acc = ring.add(&acc, &ring.scale_int(b, falling(s, p - j)));
            }
        }
        acc
    };

    for &e in &roots {
        let mut c: Vec<Elem> = vec![ring.int(1)];
        for n in 1..=n_trunc {
            let mut rhs = Elem::zero();
            for k in 1..=n {
                if c[n - k].is_zero() {
                    continue;
                }
                rhs = ring.sub(&rhs, &ring.mul(&c[n - k], &phi(k, e + (n - k) as i64)));
            }
            let s = e + n as i64;
            if roots.contains(&s) {
                if !is_zero(&ring, &rhs)? {
                    return Ok(Outcome::Decided(Verdict::NotApparent(format!(
                        "logarithmic term at exponent {s} (resonance with {e})"
                    ))));
                }
                c.push(Elem::zero());
            } else {
                c.push(ring.div_int(&rhs, roots.iter().map(|r| s - r).product::<i64>()));
            }
        }
    }
    Ok(Outcome::Decided(Verdict::Apparent(ApparentCertificate {
        locus,
        exponents: roots,
        truncation: n_trunc,
    })))
}

/// Candidate integer roots of the indicial polynomial across all conjugates.
fn indicial_candidates(b00: &[Poly], f: &Poly, p: usize) -> Vec<i64> {
    // Falling factorials [s]_k in the monomial basis.
    let ff: Vec<Poly> = (0..=p)
        .map(|k| (0..k).fold(Poly::one(), |acc, i| &acc * &Poly::from_ints(&[-(i as i64), 1])))
        .collect();
    let mut out = Vec::new();
    if f.degree() == Some(1) {
        let x = -&(&f.coeff(0) / &f.coeff(1));
        let mut ip = ff[p].clone();
        for j in 1..=p {
            ip = &ip + &ff[p - j].scale(&b00[j - 1].eval(&x));
        }
        for (r, _) in split_roots(&ip).exact {
            if let Some(v) = r.to_i64() {
                out.push(v);
            }
        }
    } else {
        for xi in numeric_roots(f) {
            let mut ip = vec![Complex64::zero(); p + 1];
            for j in 0..=p {
                let w = if j == 0 {
                    Complex64::one()
                } else {
                    eval_c(&b00[j - 1], xi)
                };
                for (k, c) in ff[p - j].coeffs().iter().enumerate() {
                    ip[k] += w * c.to_complex();
                }
            }
            for r in roots_c(&ip) {
                let k = r.re.round();
                if (r - Complex64::new(k, 0.0)).norm() < 1e-6 && k.abs() < 1e9 {
                    out.push(k as i64);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn eval_c(p: &Poly, x: Complex64) -> Complex64 {
    p.coeffs().iter().rev().fold(Complex64::zero(), |acc, c| acc * x + c.to_complex())
}

/// Roots of a monic complex polynomial (coefficients lowest first).
fn roots_c(c: &[Complex64]) -> Vec<Complex64> {
    crate::exact::numeric_roots_c(c)
}

/// Decides whether the finite exact point or `∞` is an apparent singularity of `e`.
pub fn is_apparent(e: &ScalarEquation, a: &Point) -> Result<Verdict> {
    if !e.is_singular(a) {
        return Err(Error::NotAPole(Box::new(a.clone())));
    }
    let (coeffs, f) = match a {
        Point::Finite(x) => (e.coeffs().to_vec(), Poly::linear_root(x)),
        Point::Infinity => (e.at_infinity().coeffs().to_vec(), Poly::x()),
    };
    match frobenius(&coeffs, &f, ApparentLocus::Exact(a.clone())) {
        Ok(Outcome::Decided(v)) => Ok(v),
        Ok(Outcome::Undecided(n)) => Err(Error::Undecided(n)),
        Err(_) => Err(Error::Internal("zero divisor in Q(i)".into())),
    }
}

/// Decides apparentness at all roots of a squarefree `f`, splitting `f` where the roots behave differently.
pub fn is_apparent_cluster(e: &ScalarEquation, f: &Poly) -> Result<Vec<Verdict>> {
    let mut work = vec![f.monic()];
    let mut out = Vec::new();
    while let Some(g) = work.pop() {
        if g.is_constant() {
            continue;
        }
        match frobenius(e.coeffs(), &g, ApparentLocus::Cluster(g.clone())) {
            Ok(Outcome::Decided(v)) => out.push(v),
            Ok(Outcome::Undecided(n)) => return Err(Error::Undecided(n)),
            Err(SplitAt(h)) => {
                let h = h.monic();
                work.push(g.exact_div(&h));
                work.push(h);
            }
        }
    }
    Ok(out)
}

/// Result of scalarizing a system and certifying its new singular points.
#[derive(Clone, Debug)]
pub struct ScalarizationReport {
    pub cyclic: CyclicVector,
    pub equation: ScalarEquation,
    pub original: Vec<Point>,
    /// Katz rank of the scalar equation at each original singular point.
    pub katz: Vec<(Point, BigRational)>,
    pub apparent: Vec<ApparentCertificate>,
    pub m: usize,
    pub r_total: i64,
    pub bound: i64,
    pub satisfied: bool,
}

impl ScalarizationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cyclic_vector": self.cyclic.to_json(),
            "equation": self.equation.to_json(),
            "original_singular_points": self.original.iter().map(Point::to_json).collect::<Vec<_>>(),
            "katz_ranks": self.katz.iter().map(|(a, k)| serde_json::json!({"point": a.to_json(), "katz_rank": fmt_rat(k)})).collect::<Vec<_>>(),
            "apparent_points": self.apparent.iter().map(ApparentCertificate::to_json).collect::<Vec<_>>(),
            "m": self.m,
            "counting": "distinct points",
            "R": self.r_total,
            "bound": self.bound,
            "bound_satisfied": self.satisfied,
        })
    }
}

/// Poles of `e` outside `original`, as exact points and irrational clusters.
pub fn new_poles(e: &ScalarEquation, original: &[Point]) -> Vec<ApparentLocus> {
    let poles = e.poles();
    let mut out: Vec<ApparentLocus> = poles
        .exact
        .into_iter()
        .filter(|a| !original.contains(a))
        .map(ApparentLocus::Exact)
        .collect();
    if !poles.cluster.is_constant() {
        out.push(ApparentLocus::Cluster(poles.cluster));
    }
    if !original.contains(&Point::Infinity) && e.is_singular(&Point::Infinity) {
        out.push(ApparentLocus::Exact(Point::Infinity));
    }
    out
}

/// Certifies every new pole of `e` as apparent; a failing point is a hard error.
pub fn certify_new_poles(e: &ScalarEquation, original: &[Point]) -> Result<Vec<ApparentCertificate>> {
    let mut certs = Vec::new();
    for locus in new_poles(e, original) {
        let verdicts = match &locus {
            ApparentLocus::Exact(a) => vec![is_apparent(e, a)?],
            ApparentLocus::Cluster(f) => is_apparent_cluster(e, f)?,
        };
        for v in verdicts {
            match v {
                Verdict::Apparent(c) => certs.push(c),
                Verdict::NotApparent(why) => {
                    return Err(Error::CertificationFailed(format!("{}: {why}", locus.to_json())))
                }
            }
        }
    }
    Ok(certs)
}

/// `(R + n + 1) p(p−1)/2`.
pub fn intermediate_bound(r_total: i64, n: usize, p: usize) -> i64 {
    (r_total + n as i64 + 1) * (p * (p - 1) / 2) as i64
}

/// Scalarizes with the default schedule, certifies the new poles and checks `m ≤ (R+n+1)p(p−1)/2`.
pub fn scalarize_and_count(s: &LinearSystem) -> Result<ScalarizationReport> {
    let (cv, eq) = cyclic_vector(s)?;
    report_for(s, cv, eq)
}

pub(crate) fn report_for(s: &LinearSystem, cv: CyclicVector, eq: ScalarEquation) -> Result<ScalarizationReport> {
    let original = s.singular_locus().to_vec();
    let katz: Vec<(Point, BigRational)> = original.iter().map(|a| (a.clone(), eq.katz_rank(a))).collect();
    let r_total: i64 = katz.iter().map(|(_, k)| ceil_rat(k)).sum();
    let apparent = certify_new_poles(&eq, &original)?;
    let m = apparent.iter().map(|c| c.locus.count()).sum();
    let bound = intermediate_bound(r_total, original.len(), s.dim());
    Ok(ScalarizationReport {
        cyclic: cv,
        equation: eq,
        original,
        katz,
        apparent,
        m,
        r_total,
        bound,
        satisfied: (m as i64) <= bound,
    })
}

/// Theorem-2 accounting: `(K + n + 1) p(p−1)/2 + 1` against `m`.
#[derive(Clone, Debug)]
pub struct Theorem2Report {
    pub p: usize,
    pub n: usize,
    pub katz: Vec<(Point, BigRational)>,
    pub k_total: i64,
    pub bound: i64,
    pub m: usize,
    /// Auxiliary point of the realization argument; generated instances need none.
    pub auxiliary: usize,
    pub within: bool,
    pub scalarization: ScalarizationReport,
}

impl Theorem2Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "n": self.n,
            "katz_ranks": self.katz.iter().map(|(a, k)| serde_json::json!({"point": a.to_json(), "katz_rank": fmt_rat(k)})).collect::<Vec<_>>(),
            "K": self.k_total,
            "bound": self.bound,
            "m": self.m,
            "auxiliary_points": self.auxiliary,
            "within_bound": self.within,
        })
    }
}

pub fn theorem2_pipeline(s: &LinearSystem) -> Result<Theorem2Report> {
    let sc = scalarize_and_count(s)?;
    Ok(theorem2_from(s, sc))
}

pub(crate) fn theorem2_from(s: &LinearSystem, sc: ScalarizationReport) -> Theorem2Report {
    let k_total: i64 = sc.katz.iter().map(|(_, k)| ceil_rat(k)).sum();
    let n = sc.original.len();
    let bound = crate::bounds::theorem2_value(s.dim(), n, k_total);
    Theorem2Report {
        p: s.dim(),
        n,
        katz: sc.katz.clone(),
        k_total,
        bound,
        m: sc.m,
        auxiliary: 0,
        within: (sc.m as i64) <= bound,
        scalarization: sc,
    }
}
