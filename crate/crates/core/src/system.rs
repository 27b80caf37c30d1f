//! Linear systems `dy/dz = B(z) y`, scalar equations, singular loci and ranks.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{split_roots, ConstMatrix, Order, Point, Poly, RatMatrix, RationalFunction, Scalar, TruncatedLaurent};

/// `dy/dz = B(z) y` with `B` a `p × p` matrix of rational functions.
#[derive(Clone, PartialEq, Eq)]
pub struct LinearSystem {
    b: RatMatrix,
    locus: Vec<Point>,
}

impl LinearSystem {
    /// Builds the system and its singular locus. Poles outside `ℚ(i)` are rejected.
    pub fn new(b: RatMatrix) -> Result<Self> {
        if !b.is_square() || b.rows() == 0 {
            return Err(Error::Dimension(format!("B must be square and nonempty, got {}x{}", b.rows(), b.cols())));
        }
        let den = b.common_denominator();
        let split = split_roots(&den);
        if !split.residual.is_constant() {
            return Err(Error::UnsupportedScalarField(format!(
                "poles at the roots of {} are not in Q(i)",
                split.residual
            )));
        }
        let mut locus: Vec<Point> = split.exact.into_iter().map(|(a, _)| Point::Finite(a)).collect();
        if b.order_at(&Point::Infinity) < Order::Finite(2) {
            locus.push(Point::Infinity);
        }
        locus.sort();
        Ok(LinearSystem { b, locus })
    }

    pub fn dim(&self) -> usize {
        self.b.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.b
    }

    /// Sorted, duplicate-free poles of `B(z) dz` on the sphere.
    pub fn singular_locus(&self) -> &[Point] {
        &self.locus
    }

    pub fn is_singular(&self, a: &Point) -> bool {
        self.locus.binary_search(a).is_ok()
    }

    /// Minimal entry order of the chart matrix at `a` (`B` itself, or `−w⁻²B(1/w)` at `∞`).
    pub fn chart_order(&self, a: &Point) -> Order {
        match (self.b.order_at(a), a) {
            (Order::Finite(v), Point::Infinity) => Order::Finite(v - 2),
            (o, _) => o,
        }
    }

    /// The chart matrix as rational functions of the local coordinate.
    pub fn chart_matrix(&self, a: &Point) -> RatMatrix {
        match a {
            Point::Finite(_) => self.b.local(a),
            Point::Infinity => {
                let f = RationalFunction::monomial(-Scalar::one(), -2);
                self.b.local(a).map(|x| x * &f)
            }
        }
    }

    /// Entrywise chart expansions at `a` through order `upto`.
    pub fn chart_series(&self, a: &Point, upto: i64) -> Vec<TruncatedLaurent> {
        match a {
            Point::Finite(_) => self.b.laurent(a, upto),
            Point::Infinity => self
                .b
                .laurent(a, upto + 2)
                .into_iter()
                .map(|s| s.shift(-2).neg())
                .collect(),
        }
    }

    /// Chart coefficient matrices `B_k`, `k = from..=upto`, of `B̃(t) = Σ B_k tᵏ`.
    pub fn chart_coefficients(&self, a: &Point, from: i64, upto: i64) -> Vec<ConstMatrix> {
        let p = self.dim();
        let series = self.chart_series(a, upto.max(from));
        (from..=upto)
            .map(|k| ConstMatrix::new(p, p, series.iter().map(|s| s.coeff(k)).collect()).expect("square"))
            .collect()
    }

    /// `r = −(minimal chart order) − 1` at a singular point.
    pub fn poincare_rank(&self, a: &Point) -> Result<usize> {
        if !self.is_singular(a) {
            return Err(Error::NotSingular(Box::new(a.clone())));
        }
        match self.chart_order(a) {
            Order::Finite(v) if v < 0 => Ok((-v - 1) as usize),
            _ => Err(Error::Internal(format!("locus point {a} has no pole"))),
        }
    }

    /// Residue matrix of `B(z) dz` at `a` (coefficient of `t⁻¹` in the chart).
    pub fn residue(&self, a: &Point) -> ConstMatrix {
        self.chart_coefficients(a, -1, -1).pop().unwrap()
    }

    /// `Σ res tr B(z) dz` over all singular points, including `∞`.
    pub fn residue_trace_sum(&self) -> Scalar {
        let tr = self.b.trace();
        self.locus
            .iter()
            .fold(Scalar::zero(), |acc, a| &acc + &tr.residue(a))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "B": self.b.to_json() })
    }

    /// Accepts `{"B": [[…]]}` or a bare matrix.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let m = v.get("B").unwrap_or(v);
        LinearSystem::new(RatMatrix::from_json(m)?)
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dy/dz = {} y", self.b)
    }
}

impl fmt::Debug for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `u⁽ᵖ⁾ + b₁ u⁽ᵖ⁻¹⁾ + … + b_p u = 0`.
#[derive(Clone, PartialEq, Eq)]
pub struct ScalarEquation {
    coeffs: Vec<RationalFunction>,
}

/// Finite poles of an equation: exact points plus a squarefree cofactor whose roots lie outside `ℚ(i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    pub exact: Vec<Point>,
    pub cluster: Poly,
}

impl ScalarEquation {
    /// `coeffs = [b₁, …, b_p]`.
    pub fn new(coeffs: Vec<RationalFunction>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("scalar equation of order 0".into()));
        }
        Ok(ScalarEquation { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RationalFunction] {
        &self.coeffs
    }

    /// `b_j`, `1 ≤ j ≤ p`.
    pub fn b(&self, j: usize) -> &RationalFunction {
        &self.coeffs[j - 1]
    }

    /// The equation for `u` as a function of `w = 1/z`, normalized to leading coefficient 1.
    pub fn at_infinity(&self) -> ScalarEquation {
        let p = self.order();
        // d/dz = −w² d/dw; dᵏ/dzᵏ = Σ_j c[k][j] ∂_wʲ.
        let mw2 = RationalFunction::monomial(-Scalar::one(), 2);
        let mut c: Vec<Vec<RationalFunction>> = vec![vec![RationalFunction::one()]];
        for k in 0..p {
            let prev = &c[k];
            let mut next = vec![RationalFunction::zero(); k + 2];
            for (j, cj) in prev.iter().enumerate() {
                next[j] = &next[j] + &(&mw2 * &cj.derivative());
                next[j + 1] = &next[j + 1] + &(&mw2 * cj);
            }
            c.push(next);
        }
        // Σ_k b_{p−k}(1/w) D^k with b_0 = 1.
        let bw: Vec<RationalFunction> = std::iter::once(RationalFunction::one())
            .chain(self.coeffs.iter().map(|b| b.local(&Point::Infinity)))
            .collect();
        let mut a = vec![RationalFunction::zero(); p + 1];
        for k in 0..=p {
            let bk = &bw[p - k];
            if bk.is_zero() {
                continue;
            }
            for (j, ckj) in c[k].iter().enumerate() {
                a[j] = &a[j] + &(bk * ckj);
            }
        }
        let lead = a[p].inv().expect("leading coefficient (−w²)^p");
        let coeffs = (1..=p).map(|j| &a[p - j] * &lead).collect();
        ScalarEquation { coeffs }
    }

    /// Order of `b_j` at `a`, computed in the chart at `∞`.
    pub fn coeff_order(&self, j: usize, a: &Point) -> Order {
        match a {
            Point::Finite(_) => self.b(j).order_at(a),
            Point::Infinity => self.at_infinity().b(j).order_at(&Point::zero()),
        }
    }

    fn chart_orders(&self, a: &Point) -> Vec<Order> {
        match a {
            Point::Finite(_) => self.coeffs.iter().map(|b| b.order_at(a)).collect(),
            Point::Infinity => {
                let e = self.at_infinity();
                e.coeffs.iter().map(|b| b.order_at(&Point::zero())).collect()
            }
        }
    }

    pub fn is_singular(&self, a: &Point) -> bool {
        self.chart_orders(a).iter().any(|o| *o < Order::Finite(0))
    }

    /// Finite poles of the coefficients.
    pub fn poles(&self) -> PoleSet {
        let den = self.coeffs.iter().fold(Poly::one(), |acc, b| {
            let g = acc.gcd(b.den());
            (&acc * &b.den().exact_div(&g)).monic()
        });
        let split = split_roots(&den);
        PoleSet {
            exact: split.exact.into_iter().map(|(a, _)| Point::Finite(a)).collect(),
            cluster: split.residual.squarefree().monic(),
        }
    }

    /// Newton polygon at `a` built from the points `(j, −ord b_j − j)` and `(0, 0)`.
    pub fn newton_polygon(&self, a: &Point) -> NewtonPolygon {
        let pts: Vec<(usize, i64)> = self
            .chart_orders(a)
            .into_iter()
            .enumerate()
            .filter_map(|(i, o)| o.finite().map(|v| (i + 1, -v - (i as i64 + 1))))
            .collect();
        NewtonPolygon::from_points(&pts)
    }

    /// Largest Newton-polygon slope at `a`, clamped at 0. Zero at ordinary points.
    pub fn katz_rank(&self, a: &Point) -> BigRational {
        self.newton_polygon(a).katz_rank()
    }

    /// `ord_a b_j ≥ −j` for all `j`.
    pub fn is_fuchsian_at(&self, a: &Point) -> bool {
        self.chart_orders(a)
            .iter()
            .enumerate()
            .all(|(i, o)| *o >= Order::Finite(-(i as i64 + 1)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "b": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>() })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v
            .get("b")
            .unwrap_or(v)
            .as_array()
            .ok_or_else(|| Error::Parse("scalar equation must be {\"b\": [b1, …, bp]}".into()))?;
        ScalarEquation::new(arr.iter().map(RationalFunction::from_json).collect::<Result<_>>()?)
    }
}

impl fmt::Display for ScalarEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u^({})", self.order())?;
        for (j, b) in self.coeffs.iter().enumerate() {
            if !b.is_zero() {
                write!(f, " + ({b}) u^({})", self.order() - j - 1)?;
            }
        }
        write!(f, " = 0")
    }
}

impl fmt::Debug for ScalarEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Companion matrix of `E`: ones on the superdiagonal, last row `(−b_p, …, −b₁)`.
pub fn companion_matrix(e: &ScalarEquation) -> RatMatrix {
    let p = e.order();
    let mut b = RatMatrix::zeros(p, p);
    for i in 0..p - 1 {
        b.set(i, i + 1, RationalFunction::one());
    }
    for j in 1..=p {
        b.set(p - 1, p - j, -e.b(j));
    }
    b
}

/// Companion system; fails when some pole of `E` lies outside `ℚ(i)`.
pub fn companion(e: &ScalarEquation) -> Result<LinearSystem> {
    LinearSystem::new(companion_matrix(e))
}

/// `K = max(0, max_j (−ord_a b_j − j)/j)`.
pub fn equation_katz_rank(e: &ScalarEquation, a: &Point) -> BigRational {
    e.katz_rank(a)
}

pub fn fuchsian_check(e: &ScalarEquation, a: &Point) -> bool {
    e.is_fuchsian_at(a)
}

/// An edge of the upper Newton polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slope {
    pub value: BigRational,
    /// Indices `j` lying on the edge (left endpoint excluded).
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub points: Vec<(usize, i64)>,
    pub slopes: Vec<Slope>,
}

impl NewtonPolygon {
    /// Upper hull starting at `(0, 0)`.
    pub fn from_points(pts: &[(usize, i64)]) -> Self {
        let mut slopes = Vec::new();
        let (mut cx, mut cy) = (0usize, 0i64);
        loop {
            let mut best: Option<BigRational> = None;
            for &(j, h) in pts.iter().filter(|(j, _)| *j > cx) {
                let s = BigRational::new(BigInt::from(h - cy), BigInt::from((j - cx) as i64));
                if best.as_ref().is_none_or(|b| s > *b) {
                    best = Some(s);
                }
            }
            let Some(s) = best else { break };
            let on: Vec<usize> = pts
                .iter()
                .filter(|(j, h)| {
                    *j > cx && BigRational::new(BigInt::from(h - cy), BigInt::from((*j - cx) as i64)) == s
                })
                .map(|(j, _)| *j)
                .collect();
            let last = *on.last().unwrap();
            cy = pts.iter().find(|(j, _)| *j == last).unwrap().1;
            cx = last;
            slopes.push(Slope { value: s, indices: on });
        }
        NewtonPolygon {
            points: pts.to_vec(),
            slopes,
        }
    }

    pub fn katz_rank(&self) -> BigRational {
        self.slopes
            .first()
            .map(|s| s.value.clone())
            .filter(|v| v.is_positive())
            .unwrap_or_else(BigRational::zero)
    }

    /// Some positive slope is not an integer.
    pub fn has_fractional_positive_slope(&self) -> bool {
        self.slopes
            .iter()
            .any(|s| s.value.is_positive() && !s.value.is_integer())
    }

    /// Indices attaining the maximal slope.
    pub fn attaining(&self) -> Vec<usize> {
        self.slopes.first().map(|s| s.indices.clone()).unwrap_or_default()
    }
}

/// Exact ceiling of a rational.
pub fn ceil_rat(x: &BigRational) -> i64 {
    use num_traits::ToPrimitive;
    x.ceil().to_integer().to_i64().expect("rank fits in i64")
}

/// Local type of a singular point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    Fuchsian,
    RegularNonFuchsian,
    IrregularUnramified,
    IrregularRamified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Fuchsian => "fuchsian",
            Classification::RegularNonFuchsian => "regular-non-fuchsian",
            Classification::IrregularUnramified => "irregular-unramified",
            Classification::IrregularRamified => "irregular-ramified",
        }
    }

    pub fn is_regular(self) -> bool {
        matches!(self, Classification::Fuchsian | Classification::RegularNonFuchsian)
    }

    /// Class modulo meromorphic gauge: regular, unramified or ramified.
    pub fn gauge_class(self) -> &'static str {
        match self {
            Classification::Fuchsian | Classification::RegularNonFuchsian => "regular",
            Classification::IrregularUnramified => "irregular-unramified",
            Classification::IrregularRamified => "irregular-ramified",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-point summary.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularPointReport {
    pub point: Point,
    pub poincare_rank: usize,
    pub katz_rank: BigRational,
    pub minimal_rank: usize,
    pub classification: Classification,
    pub residue: ConstMatrix,
    pub residue_trace: Scalar,
    /// Indices `j` attaining the maximal Newton-polygon slope.
    pub attaining: Vec<usize>,
}

impl SingularPointReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "point": self.point.to_json(),
            "chart": self.point.chart(),
            "poincare_rank": self.poincare_rank,
            "katz_rank": crate::exact::fmt_rat(&self.katz_rank),
            "minimal_rank": self.minimal_rank,
            "classification": self.classification.as_str(),
            "residue": self.residue.to_json(),
            "residue_trace": self.residue_trace.to_json(),
            "attaining_indices": self.attaining,
        })
    }
}
