//! Seeded instance generation and end-to-end verification reports.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bounds::{corollary1_predicate, remark2_bound, theorem1_bound, theorem2_bound, BoundInputs};
use crate::error::{Error, Result};
use crate::exact::{ConstMatrix, Order, Point, RatMatrix, RationalFunction, Scalar};
use crate::gauge::{apply_gauge, GaugeTransform};
use crate::local::{formal_data_unramified, moser_reduce, LocalAnalyzer};
use crate::monodromy::{equation_trivial_residuals, inf_norm, monodromy_rep, DEFAULT_TOL};
use crate::scalarize::{report_for, theorem2_from};
use crate::system::{Classification, LinearSystem, ScalarEquation};

pub const SCHEMA: &str = "singular-forge/1";
/// Tolerance for the product relation and for trivial monodromy at apparent points.
pub const RELATION_TOL: f64 = 1e-8;
pub const DEFAULT_TRUNC: usize = 8;
const MAX_REROLLS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidueKind {
    /// Arbitrary small Gaussian-rational coefficients.
    Generic,
    /// Simple poles whose residues are conjugates of real diagonal matrices.
    Fuchsian,
}

/// Recipe for a random system.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceProfile {
    pub p: usize,
    pub finite_points: usize,
    /// Pole order at each finite point.
    pub pole_orders: Vec<u32>,
    /// Fixed positions; drawn from the seed when empty.
    pub points: Vec<Scalar>,
    pub include_infinity: bool,
    /// Poincaré rank at `∞` when it is included.
    pub infinity_rank: u32,
    pub coeff_bound: i64,
    pub kind: ResidueKind,
    pub seed: u64,
}

impl InstanceProfile {
    /// The per-seed mixed profile used by batch verification.
    pub fn mixed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let p = 1 + (seed % 3) as usize;
        let finite_points = rng.gen_range(1..=2);
        let mut pole_orders: Vec<u32> = (0..finite_points).map(|_| rng.gen_range(1..=2)).collect();
        if p == 3 && pole_orders.iter().filter(|&&o| o == 2).count() > 1 {
            pole_orders[1] = 1;
        }
        let include_infinity = rng.gen_bool(0.8) || (finite_points == 1 && pole_orders[0] == 1);
        let infinity_rank = if include_infinity && p < 3 { rng.gen_range(0..=1) } else { 0 };
        InstanceProfile {
            p,
            finite_points,
            pole_orders,
            points: Vec::new(),
            include_infinity,
            infinity_rank,
            coeff_bound: 2,
            kind: ResidueKind::Generic,
            seed,
        }
    }

    /// Simple poles only, regular at every point.
    pub fn fuchsian(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0c5);
        let finite_points = rng.gen_range(1..=3);
        InstanceProfile {
            p: 1 + (seed % 3) as usize,
            finite_points,
            pole_orders: vec![1; finite_points],
            points: Vec::new(),
            include_infinity: finite_points == 1 || rng.gen_bool(0.7),
            infinity_rank: 0,
            coeff_bound: 2,
            kind: ResidueKind::Fuchsian,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        InstanceProfile { seed, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.p) {
            return Err(Error::Parse(format!("dimension {} outside 1..=3", self.p)));
        }
        if self.pole_orders.len() != self.finite_points {
            return Err(Error::Parse("pole_orders must list one order per finite point".into()));
        }
        if !self.points.is_empty() && self.points.len() != self.finite_points {
            return Err(Error::Parse("points must list one position per finite point".into()));
        }
        if self.pole_orders.contains(&0) || self.coeff_bound < 1 {
            return Err(Error::Parse("pole orders and coefficient bound must be positive".into()));
        }
        if self.kind == ResidueKind::Fuchsian && self.pole_orders.iter().any(|&o| o != 1) {
            return Err(Error::Parse("fuchsian profiles need simple poles".into()));
        }
        if !self.include_infinity && self.finite_points == 1 && self.pole_orders[0] == 1 {
            return Err(Error::Parse("a single simple pole forces a pole at infinity".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "finite_points": self.finite_points,
            "pole_orders": self.pole_orders,
            "points": self.points.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "include_infinity": self.include_infinity,
            "infinity_rank": self.infinity_rank,
            "coeff_bound": self.coeff_bound,
            "kind": match self.kind { ResidueKind::Generic => "generic", ResidueKind::Fuchsian => "fuchsian" },
            "seed": self.seed,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("profile must be an object".into()))?;
        let uint = |k: &str, d: Option<u64>| -> Result<u64> {
            match obj.get(k) {
                Some(x) => x.as_u64().ok_or_else(|| Error::Parse(format!("{k} must be a non-negative integer"))),
                None => d.ok_or_else(|| Error::Parse(format!("missing field {k}"))),
            }
        };
        let p = uint("p", None)? as usize;
        let pole_orders: Vec<u32> = match obj.get("pole_orders") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| x.as_u64().map(|o| o as u32).ok_or_else(|| Error::Parse("bad pole order".into())))
                .collect::<Result<_>>()?,
            Some(_) => return Err(Error::Parse("pole_orders must be an array".into())),
            None => vec![1; uint("finite_points", None)? as usize],
        };
        let points = match obj.get("points") {
            Some(Value::Array(a)) => a.iter().map(Scalar::from_json).collect::<Result<_>>()?,
            Some(_) => return Err(Error::Parse("points must be an array".into())),
            None => Vec::new(),
        };
        let kind = match obj.get("kind").and_then(Value::as_str) {
            None | Some("generic") => ResidueKind::Generic,
            Some("fuchsian") => ResidueKind::Fuchsian,
            Some(k) => return Err(Error::Parse(format!("unknown kind {k}"))),
        };
        let prof = InstanceProfile {
            p,
            finite_points: uint("finite_points", Some(pole_orders.len() as u64))? as usize,
            pole_orders,
            points,
            include_infinity: obj.get("include_infinity").map_or(Ok(true), |x| {
                x.as_bool().ok_or_else(|| Error::Parse("include_infinity must be boolean".into()))
            })?,
            infinity_rank: uint("infinity_rank", Some(0))? as u32,
            coeff_bound: uint("coeff_bound", Some(2))? as i64,
            kind,
            seed: uint("seed", Some(0))?,
        };
        prof.validate()?;
        Ok(prof)
    }
}

fn small_scalar(rng: &mut ChaCha8Rng, bound: i64) -> Scalar {
    let re = Scalar::from_frac(rng.gen_range(-bound..=bound), rng.gen_range(1..=2));
    if rng.gen_bool(0.2) {
        &re + &(&Scalar::i() * &Scalar::from_int(rng.gen_range(-1..=1)))
    } else {
        re
    }
}

fn small_matrix(rng: &mut ChaCha8Rng, p: usize, bound: i64, density: f64) -> ConstMatrix {
    let mut m = ConstMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            if rng.gen_bool(density) {
                m.set(i, j, small_scalar(rng, bound));
            }
        }
    }
    m
}

fn nonzero_matrix(rng: &mut ChaCha8Rng, p: usize, bound: i64) -> ConstMatrix {
    loop {
        let m = small_matrix(rng, p, bound, 0.6);
        if !m.is_zero() {
            return m;
        }
    }
}

/// `L U` with unit diagonals and entries in `{−1, 0, 1}`, so `det = 1`.
pub fn unimodular(rng: &mut ChaCha8Rng, p: usize) -> ConstMatrix {
    let mut l = ConstMatrix::identity(p);
    let mut u = ConstMatrix::identity(p);
    for i in 0..p {
        for j in 0..i {
            l.set(i, j, Scalar::from_int(rng.gen_range(-1..=1)));
            u.set(j, i, Scalar::from_int(rng.gen_range(-1..=1)));
        }
    }
    l.mul(&u)
}

/// `P D P⁻¹` with real rational diagonal `D`.
fn real_spectrum_matrix(rng: &mut ChaCha8Rng, p: usize, distinct: bool) -> ConstMatrix {
    let mut d: Vec<Scalar> = Vec::with_capacity(p);
    while d.len() < p {
        let x = Scalar::from_frac(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        if !distinct || !d.contains(&x) {
            d.push(x);
        }
    }
    let pm = unimodular(rng, p);
    pm.mul(&ConstMatrix::diagonal(&d)).mul(&pm.inverse().expect("unimodular"))
}

fn draw_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Scalar> {
    let mut pts: Vec<Scalar> = Vec::with_capacity(n);
    while pts.len() < n {
        let re = Scalar::from_int(rng.gen_range(-3..=3));
        let a = if rng.gen_bool(0.25) {
            &re + &(&Scalar::i() * &Scalar::from_int(rng.gen_range(-2..=2)))
        } else {
            re
        };
        if !pts.contains(&a) {
            pts.push(a);
        }
    }
    pts
}

fn pole_term(c: &ConstMatrix, a: &Scalar, k: u32) -> RatMatrix {
    let f = RationalFunction::power_at(Scalar::one(), a, -(k as i64));
    c.to_rat().map(|x| x * &f)
}

/// A system with the requested pole structure; degenerate draws are re-rolled.
pub fn generate_instance(profile: &InstanceProfile) -> Result<LinearSystem> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let p = profile.p;
    let bound = profile.coeff_bound;
    for _ in 0..MAX_REROLLS {
        let pts = if profile.points.is_empty() {
            draw_points(&mut rng, profile.finite_points)
        } else {
            profile.points.clone()
        };
        let mut residues: Vec<ConstMatrix> = Vec::new();
        let mut b = RatMatrix::zeros(p, p);
        for (a, &ord) in pts.iter().zip(&profile.pole_orders) {
            let res = match profile.kind {
                ResidueKind::Fuchsian => real_spectrum_matrix(&mut rng, p, false),
                ResidueKind::Generic if ord == 1 => nonzero_matrix(&mut rng, p, bound),
                ResidueKind::Generic => small_matrix(&mut rng, p, bound, 0.6),
            };
            residues.push(res);
            for k in 2..=ord {
                let c = if k == ord {
                    nonzero_matrix(&mut rng, p, bound)
                } else {
                    small_matrix(&mut rng, p, bound, 0.5)
                };
                b = b.add(&pole_term(&c, a, k));
            }
        }
        if !profile.include_infinity {
            let last = residues.len() - 1;
            let sum = residues[..last].iter().fold(ConstMatrix::zeros(p, p), |acc, r| acc.add(r));
            residues[last] = sum.neg();
        }
        for (a, r) in pts.iter().zip(&residues) {
            b = b.add(&pole_term(r, a, 1));
        }
        if profile.include_infinity && profile.infinity_rank > 0 {
            for k in 0..profile.infinity_rank {
                let c = if k + 1 == profile.infinity_rank {
                    nonzero_matrix(&mut rng, p, bound)
                } else {
                    small_matrix(&mut rng, p, bound, 0.5)
                };
                let zk = RationalFunction::monomial(Scalar::one(), k as i64);
                b = b.add(&c.to_rat().map(|x| x * &zk));
            }
        }
        let s = LinearSystem::new(b)?;
        let attained = pts
            .iter()
            .zip(&profile.pole_orders)
            .all(|(a, &o)| s.chart_order(&Point::Finite(a.clone())) == Order::Finite(-(o as i64)));
        let inf_ok = s.is_singular(&Point::Infinity) == profile.include_infinity
            && (!profile.include_infinity
                || s.chart_order(&Point::Infinity) == Order::Finite(-(profile.infinity_rank as i64) - 1));
        if attained && inf_ok {
            return Ok(s);
        }
    }
    Err(Error::Internal(format!("no admissible draw after {MAX_REROLLS} attempts")))
}

/// `A` for an Euler system `B = A/z`: real rational spectrum, non-semisimple when a value repeats.
pub fn euler_matrix(seed: u64) -> ConstMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe0e0);
    let p = 1 + (seed % 3) as usize;
    let mut d: Vec<Scalar> = (0..p).map(|_| Scalar::from_frac(rng.gen_range(-4..=4), rng.gen_range(2..=5))).collect();
    let mut m = ConstMatrix::diagonal(&d);
    if p >= 2 && rng.gen_bool(0.3) {
        d[1] = d[0].clone();
        m = ConstMatrix::diagonal(&d);
        m.set(0, 1, Scalar::one());
    }
    let pm = unimodular(&mut rng, p);
    pm.mul(&m).mul(&pm.inverse().expect("unimodular"))
}

pub fn euler_system(a: &ConstMatrix) -> LinearSystem {
    let zinv = RationalFunction::monomial(Scalar::one(), -1);
    LinearSystem::new(a.to_rat().map(|x| x * &zinv)).expect("Euler systems have exact poles")
}

/// An irregular point at 0 of rank 1 or 2 whose leading matrix has distinct eigenvalues.
pub fn distinct_leading_instance(seed: u64) -> LinearSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15c);
    let p = 2 + (seed % 2) as usize;
    let r = 1 + ((seed / 2) % 2) as u32;
    let a0 = real_spectrum_matrix(&mut rng, p, true);
    let zero = Scalar::zero();
    let mut b = pole_term(&a0, &zero, r + 1);
    for k in 1..=r {
        b = b.add(&pole_term(&small_matrix(&mut rng, p, 2, 0.5), &zero, k));
    }
    if rng.gen_bool(0.5) {
        b = b.add(&small_matrix(&mut rng, p, 1, 0.4).to_rat());
    }
    if rng.gen_bool(0.5) {
        b = b.add(&pole_term(&small_matrix(&mut rng, p, 1, 0.4), &Scalar::one(), 1));
    }
    LinearSystem::new(b).expect("exact poles")
}

/// A scalar equation of order 1 to 3, Fuchsian at its finite poles when `fuchsian` is set.
pub fn random_equation(seed: u64, fuchsian: bool) -> ScalarEquation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe9);
    let p = 1 + (seed % 3) as usize;
    let n = rng.gen_range(1..=2);
    let pts = draw_points(&mut rng, n);
    let coeffs: Vec<RationalFunction> = (1..=p)
        .map(|j| {
            let mut b = RationalFunction::zero();
            for a in &pts {
                let top = if fuchsian { j as i64 } else { j as i64 + rng.gen_range(0..=2) };
                for k in 1..=top {
                    if rng.gen_bool(0.6) {
                        b = &b + &RationalFunction::power_at(small_scalar(&mut rng, 2), a, -k);
                    }
                }
            }
            if !fuchsian && rng.gen_bool(0.3) {
                b = &b + &RationalFunction::constant(small_scalar(&mut rng, 2));
            }
            b
        })
        .collect();
    ScalarEquation::new(coeffs).expect("consistent order")
}

/// A random meromorphic gauge: constant, elementary polynomial and shear factors.
pub fn random_gauge(rng: &mut ChaCha8Rng, s: &LinearSystem) -> GaugeTransform {
    let p = s.dim();
    let mut g = GaugeTransform::constant(&unimodular(rng, p)).expect("unimodular");
    for _ in 0..rng.gen_range(1..=2) {
        let step = match rng.gen_range(0..3) {
            0 if p > 1 => {
                let i = rng.gen_range(0..p);
                let j = (i + rng.gen_range(1..p)) % p;
                let a = Scalar::from_int(rng.gen_range(-2..=2));
                let k = rng.gen_range(1..=2);
                let mut m = RatMatrix::identity(p);
                m.set(i, j, RationalFunction::power_at(small_scalar(rng, 1), &a, k));
                GaugeTransform::new(m).expect("unipotent")
            }
            1 => {
                let loc = s.singular_locus();
                let a = if !loc.is_empty() && rng.gen_bool(0.7) {
                    loc[rng.gen_range(0..loc.len())].clone()
                } else {
                    Point::Finite(Scalar::from_frac(rng.gen_range(-3..=3), rng.gen_range(1..=2)))
                };
                let d: Vec<i64> = (0..p).map(|_| rng.gen_range(-1..=1)).collect();
                GaugeTransform::shear(&a, &d)
            }
            _ => GaugeTransform::constant(&unimodular(rng, p)).expect("unimodular"),
        };
        g = g.then(&step);
    }
    g
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub tol: f64,
    pub trunc: usize,
    pub monodromy: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol: DEFAULT_TOL, trunc: DEFAULT_TRUNC, monodromy: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Property {
    pub name: String,
    pub invariant: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Property {
    fn new(name: impl Into<String>, invariant: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Property { name: name.into(), invariant, pass, detail: detail.into() }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "invariant": self.invariant, "pass": self.pass, "detail": self.detail })
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub system: Value,
    pub points: Vec<Value>,
    pub moser: Vec<Value>,
    pub formal: Vec<Value>,
    pub scalarization: Option<Value>,
    pub theorem2: Option<Value>,
    pub monodromy: Option<Value>,
    pub apparent_residuals: Vec<f64>,
    pub bounds: Value,
    pub properties: Vec<Property>,
    pub findings: Vec<String>,
    pub options: VerifyOptions,
    /// Number of certified apparent points.
    pub m: Option<usize>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.findings.is_empty() && self.properties.iter().all(|p| p.pass)
    }

    pub fn property(&self, name: &str) -> impl Iterator<Item = &Property> {
        let name = name.to_string();
        self.properties.iter().filter(move |p| p.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "tolerances": tolerances(&self.options),
            "system": self.system,
            "singular_points": self.points,
            "moser": self.moser,
            "formal_data": self.formal,
            "scalarization": self.scalarization,
            "theorem2": self.theorem2,
            "monodromy": self.monodromy,
            "apparent_monodromy_residuals": self.apparent_residuals,
            "bounds": self.bounds,
            "properties": self.properties.iter().map(Property::to_json).collect::<Vec<_>>(),
            "findings": self.findings,
            "pass": self.pass(),
        })
    }
}

pub fn tolerances(o: &VerifyOptions) -> Value {
    json!({
        "transport_tol": o.tol,
        "product_relation_tol": RELATION_TOL,
        "apparent_trivial_tol": RELATION_TOL,
        "series_truncation": o.trunc,
    })
}

fn finding(step: &str, e: &Error) -> String {
    format!("{step}: {}: {e}", e.kind())
}

/// Runs every check on one system; step errors become findings.
pub fn run_verification(s: &LinearSystem, opts: &VerifyOptions) -> VerificationReport {
    let mut rep = VerificationReport {
        system: s.to_json(),
        points: Vec::new(),
        moser: Vec::new(),
        formal: Vec::new(),
        scalarization: None,
        theorem2: None,
        monodromy: None,
        apparent_residuals: Vec::new(),
        bounds: Value::Null,
        properties: Vec::new(),
        findings: Vec::new(),
        options: opts.clone(),
        m: None,
    };
    let trace = s.residue_trace_sum();
    rep.properties.push(Property::new(
        "residue_trace_sum",
        "system_model: residue traces over the locus sum to zero",
        trace.is_zero(),
        trace.to_string(),
    ));

    let an = LocalAnalyzer::new(s);
    let mut reports = Vec::new();
    for a in s.singular_locus() {
        match an.report(a) {
            Ok(r) => reports.push(r),
            Err(e) => rep.findings.push(finding(&format!("analyze {a}"), &e)),
        }
    }
    for r in &reports {
        rep.points.push(r.to_json());
        let kappa_ok = r.katz_rank <= BigRational::from_integer((r.poincare_rank as i64).into());
        rep.properties.push(Property::new(
            format!("katz_le_poincare@{}", r.point),
            "local_analysis: Katz rank never exceeds the Poincare rank",
            kappa_ok,
            format!("{} <= {}", crate::exact::fmt_rat(&r.katz_rank), r.poincare_rank),
        ));
        if r.classification == Classification::Fuchsian {
            continue;
        }
        match moser_reduce(s, &r.point) {
            Ok(red) => {
                let reapplied = apply_gauge(s, &red.gauge).map(|t| t == red.system).unwrap_or(false);
                rep.properties.push(Property::new(
                    format!("moser_minimal@{}", r.point),
                    "local_analysis: reduced rank equals the ceiling of the Katz rank",
                    red.rank_after == r.minimal_rank,
                    format!("{} -> {} (minimal {})", red.rank_before, red.rank_after, r.minimal_rank),
                ));
                rep.properties.push(Property::new(
                    format!("moser_gauge@{}", r.point),
                    "gauge_transform: returned gauge reproduces the reduced system",
                    reapplied,
                    format!("{} steps", red.steps),
                ));
                rep.moser.push(json!({
                    "point": r.point.to_json(),
                    "rank_before": red.rank_before,
                    "rank_after": red.rank_after,
                    "steps": red.steps,
                    "gauge": red.gauge.to_json(),
                }));
                if r.classification == Classification::IrregularUnramified && red.rank_after == r.poincare_rank {
                    match formal_data_unramified(s, &r.point, opts.trunc) {
                        Ok(fd) => {
                            rep.properties.push(Property::new(
                                format!("formal_q_degree@{}", r.point),
                                "local_analysis: exponential part has degree equal to the Poincare rank",
                                fd.max_q_degree() == fd.poincare_rank,
                                format!("{} vs {}", fd.max_q_degree(), fd.poincare_rank),
                            ));
                            rep.formal.push(fd.to_json());
                        }
                        Err(Error::NonGenericLeading(_)) | Err(Error::UnsupportedScalarField(_)) => {}
                        Err(e) => rep.findings.push(finding(&format!("formal data {}", r.point), &e)),
                    }
                }
            }
            Err(e) => rep.findings.push(finding(&format!("moser {}", r.point), &e)),
        }
    }

    let scal = an
        .scalarization()
        .map(|(cv, eq)| (cv.clone(), eq.clone()))
        .and_then(|(cv, eq)| report_for(s, cv, eq));
    let mut apparent = Vec::new();
    let mut equation = None;
    match scal {
        Ok(sc) => {
            rep.properties.push(Property::new(
                "apparent_count",
                "scalarization: apparent points number at most (R+n+1)p(p-1)/2",
                sc.satisfied,
                format!("m = {} <= {}", sc.m, sc.bound),
            ));
            rep.m = Some(sc.m);
            rep.scalarization = Some(sc.to_json());
            apparent = sc.apparent.clone();
            equation = Some(sc.equation.clone());
            let t2 = theorem2_from(s, sc);
            rep.properties.push(Property::new(
                "theorem2_count",
                "bounds: apparent points number at most (K+n+1)p(p-1)/2 + 1",
                t2.within,
                format!("m = {} <= {}", t2.m, t2.bound),
            ));
            rep.theorem2 = Some(t2.to_json());
        }
        Err(e) => rep.findings.push(finding("scalarize", &e)),
    }

    if opts.monodromy {
        let all_fuchsian = !reports.is_empty() && reports.iter().all(|r| r.poincare_rank == 0);
        match monodromy_rep(s, None, opts.tol) {
            Ok(mr) => {
                if all_fuchsian {
                    // Complex exponents make generators ill-conditioned; judge the residual relative to Π‖G_i‖.
                    let scale = mr.matrices.iter().map(inf_norm).product::<f64>().max(1.0);
                    rep.properties.push(Property::new(
                        "product_relation",
                        "monodromy_numeric: ordered product of loop matrices is the identity",
                        mr.product_residual <= RELATION_TOL * scale,
                        format!("{:e} (scale {:e})", mr.product_residual, scale),
                    ));
                }
                rep.monodromy = Some(mr.to_json());
            }
            Err(e) if all_fuchsian => rep.findings.push(finding("monodromy", &e)),
            Err(e) => rep.monodromy = Some(json!({ "skipped": format!("{}: {e}", e.kind()) })),
        }
        if let Some(eq) = &equation {
            for c in &apparent {
                match equation_trivial_residuals(eq, &c.locus, opts.tol) {
                    Ok(res) => {
                        let worst = res.iter().copied().fold(0.0, f64::max);
                        rep.apparent_residuals.extend(res);
                        rep.properties.push(Property::new(
                            "apparent_trivial",
                            "monodromy_numeric: monodromy at a certified apparent point is trivial",
                            worst <= RELATION_TOL,
                            format!("{worst:e}"),
                        ));
                    }
                    Err(e) => rep.findings.push(finding("apparent monodromy", &e)),
                }
            }
        }
    }

    rep.bounds = bounds_json(s.dim(), &reports);
    rep
}

fn bounds_json(p: usize, reports: &[crate::system::SingularPointReport]) -> Value {
    if reports.is_empty() {
        return json!({});
    }
    let ranks: Vec<i64> = reports.iter().map(|r| r.minimal_rank as i64).collect();
    let mut inputs = BoundInputs::new(p, ranks);
    inputs.katz = reports.iter().map(|r| r.katz_rank.clone()).collect();
    let cor: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "point": r.point.to_json(),
                "r0": r.minimal_rank,
                "r": r.poincare_rank,
                "birkhoff_guaranteed": corollary1_predicate(r.minimal_rank as i64, r.poincare_rank as i64, p).ok(),
            })
        })
        .collect();
    json!({
        "ranks": inputs.ranks,
        "R": inputs.r_total(),
        "K": inputs.k_total(),
        "theorem1": theorem1_bound(&inputs).ok(),
        "remark2": remark2_bound(&inputs).ok(),
        "theorem2": theorem2_bound(&inputs),
        "corollary1": cor,
    })
}

/// One report per seed, in seed order.
pub struct BatchReport {
    pub seeds: Vec<u64>,
    pub profile: Option<InstanceProfile>,
    pub options: VerifyOptions,
    pub entries: Vec<(u64, std::result::Result<VerificationReport, String>)>,
}

impl BatchReport {
    pub fn failed(&self) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|(_, r)| !matches!(r, Ok(v) if v.pass()))
            .map(|(s, _)| *s)
            .collect()
    }

    pub fn pass(&self) -> bool {
        self.failed().is_empty()
    }

    pub fn to_json(&self) -> Value {
        let failed = self.failed();
        json!({
            "schema": SCHEMA,
            "tolerances": tolerances(&self.options),
            "profile": self.profile.as_ref().map_or(Value::String("mixed".into()), InstanceProfile::to_json),
            "total": self.entries.len(),
            "passed": self.entries.len() - failed.len(),
            "failed_seeds": failed,
            "pass": failed.is_empty(),
            "reports": self.entries.iter().map(|(seed, r)| match r {
                Ok(v) => json!({ "seed": seed, "report": v.to_json() }),
                Err(e) => json!({ "seed": seed, "generation_error": e }),
            }).collect::<Vec<_>>(),
        })
    }
}

pub fn profile_for(seed: u64, profile: Option<&InstanceProfile>) -> InstanceProfile {
    profile.map_or_else(|| InstanceProfile::mixed(seed), |p| p.with_seed(seed))
}

pub fn verify_batch(seeds: &[u64], profile: Option<&InstanceProfile>, opts: &VerifyOptions) -> BatchReport {
    let entries = seeds
        .par_iter()
        .map(|&seed| {
            let r = generate_instance(&profile_for(seed, profile))
                .map(|s| run_verification(&s, opts))
                .map_err(|e| format!("{}: {e}", e.kind()));
            (seed, r)
        })
        .collect();
    BatchReport { seeds: seeds.to_vec(), profile: profile.cloned(), options: opts.clone(), entries }
}
