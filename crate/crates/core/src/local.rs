//! Katz rank, classification, Moser reduction and formal local data at singular points.

use std::cell::OnceCell;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{split_roots, ConstMatrix, Order, Point, Scalar, TruncatedLaurent};
use crate::gauge::{apply_gauge, GaugeTransform};
use crate::scalarize::{cyclic_vector, CyclicVector};
use crate::system::{ceil_rat, Classification, LinearSystem, ScalarEquation, SingularPointReport};

/// Caches the scalarization of one system so that per-point queries share it.
pub struct LocalAnalyzer<'a> {
    system: &'a LinearSystem,
    scalar: OnceCell<Result<(CyclicVector, ScalarEquation)>>,
}

impl<'a> LocalAnalyzer<'a> {
    pub fn new(system: &'a LinearSystem) -> Self {
        LocalAnalyzer {
            system,
            scalar: OnceCell::new(),
        }
    }

    pub fn system(&self) -> &LinearSystem {
        self.system
    }

    pub fn scalarization(&self) -> Result<&(CyclicVector, ScalarEquation)> {
        self.scalar
            .get_or_init(|| cyclic_vector(self.system))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn require_singular(&self, a: &Point) -> Result<()> {
        if self.system.is_singular(a) {
            Ok(())
        } else {
            Err(Error::NotSingular(Box::new(a.clone())))
        }
    }

    pub fn katz_rank(&self, a: &Point) -> Result<BigRational> {
        self.require_singular(a)?;
        Ok(self.scalarization()?.1.katz_rank(a))
    }

    pub fn minimal_rank(&self, a: &Point) -> Result<usize> {
        Ok(ceil_rat(&self.katz_rank(a)?) as usize)
    }

    pub fn classify(&self, a: &Point) -> Result<Classification> {
        let r = self.system.poincare_rank(a)?;
        if r == 0 {
            return Ok(Classification::Fuchsian);
        }
        let np = self.scalarization()?.1.newton_polygon(a);
        Ok(if np.katz_rank().is_zero() {
            Classification::RegularNonFuchsian
        } else if np.has_fractional_positive_slope() {
            Classification::IrregularRamified
        } else {
            Classification::IrregularUnramified
        })
    }

    pub fn report(&self, a: &Point) -> Result<SingularPointReport> {
        let r = self.system.poincare_rank(a)?;
        let eq = &self.scalarization()?.1;
        let np = eq.newton_polygon(a);
        let katz = np.katz_rank();
        let residue = self.system.residue(a);
        Ok(SingularPointReport {
            point: a.clone(),
            poincare_rank: r,
            minimal_rank: ceil_rat(&katz) as usize,
            katz_rank: katz,
            classification: self.classify(a)?,
            residue_trace: residue.trace(),
            residue,
            attaining: np.attaining(),
        })
    }

    /// Reports for every point of the singular locus.
    pub fn reports(&self) -> Result<Vec<SingularPointReport>> {
        self.system.singular_locus().iter().map(|a| self.report(a)).collect()
    }
}

/// Katz rank of the system at `a`, via its scalar equation.
pub fn katz_rank_system(s: &LinearSystem, a: &Point) -> Result<BigRational> {
    LocalAnalyzer::new(s).katz_rank(a)
}

/// `⌈κ⌉`.
pub fn minimal_poincare_rank(s: &LinearSystem, a: &Point) -> Result<usize> {
    LocalAnalyzer::new(s).minimal_rank(a)
}

pub fn classify_singularity(s: &LinearSystem, a: &Point) -> Result<Classification> {
    LocalAnalyzer::new(s).classify(a)
}

/// Output of [`moser_reduce`].
#[derive(Clone, Debug)]
pub struct MoserReduction {
    pub system: LinearSystem,
    pub gauge: GaugeTransform,
    pub steps: usize,
    pub rank_before: usize,
    pub rank_after: usize,
    /// Poincaré ranks at the other points before and after (`None` when regular there).
    pub other_ranks: Vec<(Point, Option<usize>, Option<usize>)>,
}

fn chart_rank(s: &LinearSystem, a: &Point) -> Option<usize> {
    match s.chart_order(a) {
        Order::Finite(v) if v < 0 => Some((-v - 1) as usize),
        _ => None,
    }
}

fn columns(vs: &[Vec<Scalar>], rows: usize) -> ConstMatrix {
    let mut m = ConstMatrix::zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m.set(i, j, x.clone());
        }
    }
    m
}

/// One shearing step, or `None` when the leading pencil is regular (Moser-irreducible).
fn moser_step(s: &LinearSystem, a: &Point) -> Result<Option<GaugeTransform>> {
    let Some(r) = chart_rank(s, a) else {
        return Ok(None);
    };
    if r == 0 {
        return Ok(None);
    }
    let p = s.dim();
    let c = s.chart_coefficients(a, -(r as i64) - 1, -(r as i64));
    let (a0, a1) = (&c[0], &c[1]);
    let ker = a0.kernel();
    let k = ker.len();
    if k == 0 {
        return Ok(None);
    }
    let kmat = columns(&ker, p);
    let y = ConstMatrix::from_rows(a0.left_kernel())?;
    let phi = y.mul(&kmat);
    let psi = y.mul(a1).mul(&kmat);
    let d = phi.rows();

    // Minimal chain (Ψ + λΦ) Σ v_i λⁱ = 0.
    let mut chain: Option<Vec<Vec<Scalar>>> = None;
    for eps in 0..k {
        let mut m = ConstMatrix::zeros((eps + 2) * d, (eps + 1) * k);
        for blk in 0..=eps + 1 {
            for i in 0..d {
                for j in 0..k {
                    if blk <= eps {
                        m.set(blk * d + i, blk * k + j, psi.get(i, j).clone());
                    }
                    if blk >= 1 {
                        m.set(blk * d + i, (blk - 1) * k + j, phi.get(i, j).clone());
                    }
                }
            }
        }
        if let Some(x) = m.kernel().into_iter().next() {
            chain = Some(x.chunks(k).map(|ch| ch.to_vec()).collect());
            break;
        }
    }
    let Some(chain) = chain else {
        return Ok(None);
    };

    let vecs: Vec<Vec<Scalar>> = chain.iter().map(|v| kmat.mul_vec(v)).collect();
    let (echelon, pivots) = ConstMatrix::from_rows(vecs)?.rref();
    let dim_v = pivots.len();
    let basis: Vec<Vec<Scalar>> = (0..dim_v).map(|i| echelon.row(i)).collect();

    // dim(Im A0 + V + A1 V) < rank A0 + dim V.
    let mut span: Vec<Vec<Scalar>> = (0..p).map(|j| a0.col(j)).collect();
    span.extend(basis.iter().cloned());
    span.extend(basis.iter().map(|v| a1.mul_vec(v)));
    let lhs = ConstMatrix::from_rows(span)?.rank();
    if lhs >= a0.rank() + dim_v {
        return Err(Error::Internal(format!("Moser chain at {a} does not lower the leading rank")));
    }

    let mut mcols: Vec<Vec<Scalar>> = (0..p)
        .map(|j| {
            let mut e = vec![Scalar::zero(); p];
            e[j] = Scalar::one();
            e
        })
        .collect();
    for (b, &piv) in basis.iter().zip(&pivots) {
        mcols[piv] = b.clone();
    }
    let change = columns(&mcols, p).inverse()?;
    let d: Vec<i64> = (0..p).map(|j| i64::from(pivots.contains(&j))).collect();
    let step = GaugeTransform::constant(&change)?.then(&GaugeTransform::shear(a, &d));
    Ok(Some(step))
}

/// Reduces the Poincaré rank at `a` to its minimum by constant changes and shears.
pub fn moser_reduce(s: &LinearSystem, a: &Point) -> Result<MoserReduction> {
    let r0 = s.poincare_rank(a)?;
    let cap = s.dim() * (r0 + 1) * 4;
    let mut cur = s.clone();
    let mut gauge = GaugeTransform::identity(s.dim());
    let mut steps = 0;
    while let Some(step) = moser_step(&cur, a)? {
        steps += 1;
        if steps > cap {
            return Err(Error::IterationCap { cap, steps });
        }
        cur = apply_gauge(&cur, &step)?;
        gauge = gauge.then(&step);
    }
    let other_ranks = s
        .singular_locus()
        .iter()
        .chain(cur.singular_locus())
        .filter(|b| *b != a)
        .fold(Vec::<Point>::new(), |mut acc, b| {
            if !acc.contains(b) {
                acc.push(b.clone());
            }
            acc
        })
        .into_iter()
        .map(|b| {
            let before = chart_rank(s, &b);
            let after = chart_rank(&cur, &b);
            (b, before, after)
        })
        .collect();
    Ok(MoserReduction {
        rank_after: chart_rank(&cur, a).unwrap_or(0),
        system: cur,
        gauge,
        steps,
        rank_before: r0,
        other_ranks,
    })
}

/// Splits `A` as `T U T⁻¹` with `U` upper-triangular, eigenvalues ascending along the diagonal.
pub fn triangularize(m: &ConstMatrix) -> Result<(ConstMatrix, ConstMatrix)> {
    let split = split_roots(&m.charpoly());
    if !split.residual.is_constant() {
        return Err(Error::UnsupportedScalarField(format!(
            "eigenvalues are roots of {}",
            split.residual
        )));
    }
    let mut eig: Vec<Scalar> = Vec::new();
    for (x, mult) in split.exact {
        eig.extend(std::iter::repeat_n(x, mult));
    }
    let t = triangularize_with(m, &eig)?;
    let u = t.inverse()?.mul(m).mul(&t);
    Ok((t, u))
}

fn triangularize_with(m: &ConstMatrix, eig: &[Scalar]) -> Result<ConstMatrix> {
    let n = m.rows();
    if n <= 1 {
        return Ok(ConstMatrix::identity(n));
    }
    let shifted = m.sub(&ConstMatrix::identity(n).scale(&eig[0]));
    let v = shifted
        .kernel()
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("eigenvalue without eigenvector".into()))?;
    let k = v.iter().position(|x| !x.is_zero()).unwrap();
    let mut cols = vec![v];
    for j in 0..n {
        if j != k {
            let mut e = vec![Scalar::zero(); n];
            e[j] = Scalar::one();
            cols.push(e);
        }
    }
    let basis = columns(&cols, n);
    let a = basis.inverse()?.mul(m).mul(&basis);
    let mut sub = ConstMatrix::zeros(n - 1, n - 1);
    for i in 1..n {
        for j in 1..n {
            sub.set(i - 1, j - 1, a.get(i, j).clone());
        }
    }
    let t2 = triangularize_with(&sub, &eig[1..])?;
    let mut ext = ConstMatrix::identity(n);
    for i in 1..n {
        for j in 1..n {
            ext.set(i, j, t2.get(i - 1, j - 1).clone());
        }
    }
    Ok(basis.mul(&ext))
}

fn floor_re(x: &Scalar) -> i64 {
    x.floor_re().to_i64().expect("exponent fits in i64")
}

/// Exponent data at a Fuchsian point.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularLocalData {
    pub point: Point,
    /// Upper-triangularized residue with eigenvalues shifted into `0 ≤ Re ρ < 1`.
    pub e: ConstMatrix,
    /// Integer parts removed from each diagonal entry (a diagonal `Λ` candidate).
    pub shifts: Vec<i64>,
    /// Residue eigenvalues before normalization, in diagonal order.
    pub eigenvalues: Vec<Scalar>,
    /// Two eigenvalues differ by a nonzero integer.
    pub resonant: bool,
    pub diagonalizable: bool,
    pub transform: ConstMatrix,
}

impl RegularLocalData {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "point": self.point.to_json(),
            "E": self.e.to_json(),
            "shifts": self.shifts,
            "eigenvalues": self.eigenvalues.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "resonant": self.resonant,
            "diagonalizable": self.diagonalizable,
        })
    }
}

pub fn regular_exponents(s: &LinearSystem, a: &Point) -> Result<RegularLocalData> {
    let r = s.poincare_rank(a)?;
    if r != 0 {
        return Err(Error::Precondition(format!("{a} has Poincare rank {r}, not Fuchsian")));
    }
    let res = s.residue(a);
    let (t, u) = triangularize(&res)?;
    let p = s.dim();
    let eigenvalues: Vec<Scalar> = (0..p).map(|i| u.get(i, i).clone()).collect();
    let shifts: Vec<i64> = eigenvalues.iter().map(floor_re).collect();
    let mut e = u.clone();
    for (i, sh) in shifts.iter().enumerate() {
        e.set(i, i, u.get(i, i) - &Scalar::from_int(*sh));
    }
    let resonant = eigenvalues.iter().enumerate().any(|(i, x)| {
        eigenvalues[i + 1..].iter().any(|y| {
            let d = x - y;
            d.is_integer() && !d.is_zero()
        })
    });
    let mut distinct = eigenvalues.clone();
    distinct.sort();
    distinct.dedup();
    let geometric: usize = distinct
        .iter()
        .map(|x| res.sub(&ConstMatrix::identity(p).scale(x)).kernel().len())
        .sum();
    Ok(RegularLocalData {
        point: a.clone(),
        e,
        shifts,
        eigenvalues,
        resonant,
        diagonalizable: geometric == p,
        transform: t,
    })
}

/// Formal invariants `F̂ (z−a)^E e^Q` at an unramified point with distinct leading eigenvalues.
#[derive(Clone, Debug)]
pub struct FormalLocalData {
    pub point: Point,
    pub poincare_rank: usize,
    /// `q_j` as coefficients of `t⁻¹, …, t⁻ʳ`, each with multiplicity one.
    pub q: Vec<Vec<Scalar>>,
    pub multiplicities: Vec<usize>,
    /// Diagonal, `0 ≤ Re ρ < 1`.
    pub e: ConstMatrix,
    pub lambda_shift: Vec<i64>,
    /// `F̂` entries, row-major.
    pub f_hat: Vec<TruncatedLaurent>,
    pub truncation: usize,
    /// Per column: the defect vanishes through this exponent.
    pub certified: Vec<i64>,
    pub ramified: bool,
}

impl FormalLocalData {
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `max_j deg q_j` in `1/t`.
    pub fn max_q_degree(&self) -> usize {
        self.q
            .iter()
            .map(|q| q.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn certified_order(&self) -> i64 {
        self.certified.iter().copied().min().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "point": self.point.to_json(),
            "chart": self.point.chart(),
            "poincare_rank": self.poincare_rank,
            "q": self.q.iter().map(|q| q.iter().map(Scalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "q_basis": "coefficients of t^-1, ..., t^-r",
            "multiplicities": self.multiplicities,
            "E": self.e.to_json(),
            "lambda_shift": self.lambda_shift,
            "truncation": self.truncation,
            "certified_order": self.certified,
            "ramified": self.ramified,
        })
    }
}

fn diag_of(m: &ConstMatrix) -> Vec<Scalar> {
    (0..m.rows()).map(|i| m.get(i, i).clone()).collect()
}

/// Order-by-order diagonalization at an irregular point whose leading matrix has distinct eigenvalues.
pub fn formal_data_unramified(s: &LinearSystem, a: &Point, truncation: usize) -> Result<FormalLocalData> {
    let r = s.poincare_rank(a)?;
    if r == 0 {
        return Err(Error::Precondition(format!("{a} is Fuchsian; use regular exponents")));
    }
    let p = s.dim();
    let n = truncation as i64;
    let kmax = truncation + r;
    let bhat = s.chart_coefficients(a, -(r as i64) - 1, kmax as i64 - r as i64 - 1);

    let split = split_roots(&bhat[0].charpoly());
    if !split.residual.is_constant() {
        return Err(Error::UnsupportedScalarField(format!(
            "leading eigenvalues are roots of {}",
            split.residual
        )));
    }
    if split.exact.iter().any(|(_, m)| *m > 1) {
        return Err(Error::NonGenericLeading(format!("repeated eigenvalues {:?}", split.exact)));
    }
    let lam0: Vec<Scalar> = split.exact.iter().map(|(x, _)| x.clone()).collect();
    let vecs: Vec<Vec<Scalar>> = lam0
        .iter()
        .map(|x| bhat[0].sub(&ConstMatrix::identity(p).scale(x)).kernel().remove(0))
        .collect();
    let t0 = columns(&vecs, p);
    let t0i = t0.inverse()?;
    let bh: Vec<ConstMatrix> = bhat.iter().map(|m| t0i.mul(m).mul(&t0)).collect();

    // (k − r) F_{k−r} + Σ F_j Λ_{k−j} = Σ B_j F_{k−j}.
    let mut f: Vec<ConstMatrix> = vec![ConstMatrix::identity(p)];
    let mut lam: Vec<Vec<Scalar>> = vec![lam0.clone()];
    for k in 1..=kmax {
        let mut rk = bh[k].clone();
        for j in 1..k {
            rk = rk.add(&bh[j].mul(&f[k - j]));
            let fl = f[j].mul(&ConstMatrix::diagonal(&lam[k - j]));
            rk = rk.sub(&fl);
        }
        if k > r {
            rk = rk.sub(&f[k - r].scale(&Scalar::from_int((k - r) as i64)));
        }
        let lk = diag_of(&rk);
        let mut fk = ConstMatrix::zeros(p, p);
        for i in 0..p {
            for l in 0..p {
                if i != l {
                    fk.set(i, l, -(rk.get(i, l) / &(&lam0[i] - &lam0[l])));
                }
            }
        }
        lam.push(lk);
        f.push(fk);
    }

    let q: Vec<Vec<Scalar>> = (0..p)
        .map(|j| {
            (1..=r)
                .map(|m| &lam[r - m][j] / &Scalar::from_int(-(m as i64)))
                .collect()
        })
        .collect();
    let rho_raw = &lam[r];
    let shift: Vec<i64> = rho_raw.iter().map(floor_re).collect();
    let rho: Vec<Scalar> = rho_raw
        .iter()
        .zip(&shift)
        .map(|(x, s)| x - &Scalar::from_int(*s))
        .collect();

    // G_j = exp(Σ_{k>r} Λ_k[j] t^{k−r}/(k−r)) through t^N.
    let g: Vec<Vec<Scalar>> = (0..p)
        .map(|j| {
            let h: Vec<Scalar> = (0..=truncation)
                .map(|m| {
                    if m == 0 {
                        Scalar::zero()
                    } else {
                        &lam[r + m][j] / &Scalar::from_int(m as i64)
                    }
                })
                .collect();
            let mut out = vec![Scalar::one()];
            for nn in 1..=truncation {
                let mut acc = Scalar::zero();
                for m in 1..=nn {
                    acc += &(&(&h[m] * &Scalar::from_int(m as i64)) * &out[nn - m]);
                }
                out.push(&acc / &Scalar::from_int(nn as i64));
            }
            out
        })
        .collect();

    // F̂ = T0 · F · G · t^{shift}.
    let mut f_hat = Vec::with_capacity(p * p);
    for i in 0..p {
        for l in 0..p {
            let coeffs: Vec<Scalar> = (0..=truncation)
                .map(|k| {
                    let mut acc = Scalar::zero();
                    for m in 0..p {
                        if t0.get(i, m).is_zero() {
                            continue;
                        }
                        let mut fg = Scalar::zero();
                        for kk in 0..=k {
                            let x = f[kk].get(m, l);
                            if !x.is_zero() {
                                fg += &(x * &g[l][k - kk]);
                            }
                        }
                        acc += &(t0.get(i, m) * &fg);
                    }
                    acc
                })
                .collect();
            f_hat.push(TruncatedLaurent::from_parts(a.clone(), shift[l], coeffs));
        }
    }

    let certified = formal_defect_orders(s, a, r, &q, &rho, &f_hat, n, &shift)?;
    Ok(FormalLocalData {
        point: a.clone(),
        poincare_rank: r,
        q,
        multiplicities: vec![1; p],
        e: ConstMatrix::diagonal(&rho),
        lambda_shift: shift,
        f_hat,
        truncation,
        certified,
        ramified: false,
    })
}

/// Checks `F̂' + F̂(E/t + Q') − B̃ F̂ = 0` column by column through `N + shift_l − r − 1`.
#[allow(clippy::too_many_arguments)]
fn formal_defect_orders(
    s: &LinearSystem,
    a: &Point,
    r: usize,
    q: &[Vec<Scalar>],
    rho: &[Scalar],
    f_hat: &[TruncatedLaurent],
    n: i64,
    shift: &[i64],
) -> Result<Vec<i64>> {
    let p = s.dim();
    let b = s.chart_series(a, n + 2);
    let big = n + shift.iter().copied().max().unwrap_or(0) + 4 * (r as i64) + 16;
    let mut certified = Vec::with_capacity(p);
    for l in 0..p {
        let c = n + shift[l] - r as i64 - 1;
        // E/t + Q' for column l as an exact Laurent polynomial.
        let lo = -(r as i64) - 1;
        let mut coeffs = vec![Scalar::zero(); (big - lo + 1) as usize];
        for (m, qm) in q[l].iter().enumerate() {
            let m = m as i64 + 1;
            coeffs[(-m - 1 - lo) as usize] = qm * &Scalar::from_int(-m);
        }
        coeffs[(-1 - lo) as usize] = &coeffs[(-1 - lo) as usize] + &rho[l];
        let w = TruncatedLaurent::from_parts(a.clone(), lo, coeffs);
        for i in 0..p {
            let fil = &f_hat[i * p + l];
            let mut d = fil.derivative().add(&fil.mul(&w));
            for m in 0..p {
                d = d.sub(&b[i * p + m].mul(&f_hat[m * p + l]));
            }
            if d.order() < c {
                return Err(Error::Internal(format!("defect known only through {} < {c}", d.order())));
            }
            if (d.valuation()..=c).any(|k| !d.coeff(k).is_zero()) && !d.is_zero() {
                return Err(Error::Internal(format!(
                    "formal solution defect at {a}: column {l} fails below order {c}"
                )));
            }
        }
        certified.push(c);
    }
    Ok(certified)
}

/// Rational `n/d` helper for tests and reports.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
