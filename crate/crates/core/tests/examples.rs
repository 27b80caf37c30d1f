use num_rational::BigRational;
use num_traits::{One, Zero};
use singular_forge::exact::{laurent_expand, mat_inverse, order_at, Order, Point, Poly, RatMatrix, RationalFunction, Scalar};
use singular_forge::gauge::{
    apply_gauge, classify_gauge, connection_degree, formal_exponents, is_admissible, splitting_degree_check, AdmissibleMatrix, Block,
    GaugeClass, GaugeTransform, SplittingType,
};
use singular_forge::local::{classify_singularity, katz_rank_system, minimal_poincare_rank, moser_reduce, rat, regular_exponents};
use singular_forge::scalarize::{cyclic_vector, cyclic_vector_with, is_apparent, scalarize_and_count, theorem2_pipeline, Verdict};
use singular_forge::system::{companion, equation_katz_rank, fuchsian_check, Classification, LinearSystem, ScalarEquation};
use singular_forge::Error;

fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
    RationalFunction::new(Poly::from_ints(num), Poly::from_ints(den)).unwrap()
}

fn c(n: i64) -> RationalFunction {
    RationalFunction::from_int(n)
}

fn mat(rows: Vec<Vec<RationalFunction>>) -> RatMatrix {
    RatMatrix::from_rows(rows).unwrap()
}

fn sys(rows: Vec<Vec<RationalFunction>>) -> LinearSystem {
    LinearSystem::new(mat(rows)).unwrap()
}

fn eq(coeffs: Vec<RationalFunction>) -> ScalarEquation {
    ScalarEquation::new(coeffs).unwrap()
}

fn s(n: i64, d: i64) -> Scalar {
    Scalar::from_frac(n, d)
}

fn cmat(rows: &[&[Scalar]]) -> singular_forge::exact::ConstMatrix {
    singular_forge::exact::ConstMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

// exact arithmetic

#[test]
fn orders() {
    assert_eq!(order_at(&rf(&[1], &[0, 0, 1]), &Point::zero()), Order::Finite(-2));
    assert_eq!(order_at(&c(0), &Point::from_int(1)), Order::Infinity);
    assert_eq!(order_at(&rf(&[0, 0, 0, 1], &[-1, 1]), &Point::Infinity), Order::Finite(-2));
}

#[test]
fn laurent_examples() {
    let g = laurent_expand(&rf(&[1], &[1, -1]), &Point::zero(), 2).unwrap();
    assert_eq!(g.valuation(), 0);
    assert_eq!(g.window(0, 2), vec![Scalar::one(); 3]);

    let h = laurent_expand(&rf(&[1], &[0, 1]), &Point::zero(), 0).unwrap();
    assert_eq!(h.valuation(), -1);
    assert_eq!(h.window(-1, 0), vec![Scalar::one(), Scalar::zero()]);

    let k = laurent_expand(&rf(&[0, 1], &[-1, 1]), &Point::from_int(1), 0).unwrap();
    assert_eq!(k.valuation(), -1);
    assert_eq!(k.window(-1, 0), vec![Scalar::one(), Scalar::one()]);

    assert!(matches!(
        laurent_expand(&rf(&[1], &[0, 0, 1]), &Point::zero(), -3),
        Err(Error::TruncationBelowValuation { .. })
    ));
}

#[test]
fn inverse_examples() {
    let z = RationalFunction::z();
    let d = mat(vec![vec![z.clone(), c(0)], vec![c(0), c(1)]]);
    assert_eq!(mat_inverse(&d).unwrap(), mat(vec![vec![rf(&[1], &[0, 1]), c(0)], vec![c(0), c(1)]]));

    let u = mat(vec![vec![c(1), z.clone()], vec![c(0), c(1)]]);
    assert_eq!(mat_inverse(&u).unwrap(), mat(vec![vec![c(1), -z.clone()], vec![c(0), c(1)]]));

    let w = mat(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![c(1), c(0)]]);
    let wi = mat_inverse(&w).unwrap();
    assert_eq!(wi, mat(vec![vec![c(0), c(1)], vec![rf(&[0, 0, 1], &[1]), c(0)]]));
    assert_eq!(w.mul(&wi), RatMatrix::identity(2));

    let sing = mat(vec![vec![z.clone(), z.clone()], vec![c(1), c(1)]]);
    assert!(matches!(mat_inverse(&sing), Err(Error::SingularMatrix)));
}

// systems and equations

#[test]
fn singular_loci() {
    let n = sys(vec![vec![c(0), c(1)], vec![c(0), c(0)]]);
    assert_eq!(n.singular_locus(), &[Point::Infinity]);
    assert_eq!(n.poincare_rank(&Point::Infinity).unwrap(), 1);

    // A/z − A/(z−1) = −A/(z(z−1)) is holomorphic at ∞.
    let f = rf(&[-1], &[0, -1, 1]);
    let two = sys(vec![vec![f.clone(), f.clone() * c(2)], vec![c(0), f.clone() * c(3)]]);
    assert_eq!(two.singular_locus(), &[Point::zero(), Point::from_int(1)]);
    assert!(two.residue_trace_sum().is_zero());

    let zero = sys(vec![vec![c(0)]]);
    assert!(zero.singular_locus().is_empty());
    assert!(zero.residue_trace_sum().is_zero());
}

#[test]
fn poincare_ranks_and_residues() {
    let a = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![c(0), c(0)]]);
    assert_eq!(a.poincare_rank(&Point::zero()).unwrap(), 1);
    let f = sys(vec![vec![rf(&[1], &[0, 2]), c(0)], vec![c(0), rf(&[1], &[0, 3])]]);
    assert_eq!(f.poincare_rank(&Point::zero()).unwrap(), 0);

    let d = sys(vec![vec![rf(&[1], &[0, 1]), c(0)], vec![c(0), c(0)]]);
    assert_eq!(d.singular_locus(), &[Point::zero(), Point::Infinity]);
    assert_eq!(d.residue(&Point::Infinity).trace(), Scalar::from_int(-1));
    assert!(d.residue_trace_sum().is_zero());
    assert!(matches!(d.poincare_rank(&Point::from_int(5)), Err(Error::NotSingular(_))));
}

#[test]
fn companions() {
    let s0 = companion(&eq(vec![c(0), c(0)])).unwrap();
    assert_eq!(s0.matrix(), &mat(vec![vec![c(0), c(1)], vec![c(0), c(0)]]));
    let s1 = companion(&eq(vec![rf(&[1], &[0, 1]), c(0)])).unwrap();
    assert_eq!(s1.matrix(), &mat(vec![vec![c(0), c(1)], vec![c(0), rf(&[-1], &[0, 1])]]));
    let s2 = companion(&eq(vec![rf(&[3], &[0, 1]), rf(&[5], &[0, 0, 1])])).unwrap();
    assert_eq!(s2.matrix(), &mat(vec![vec![c(0), c(1)], vec![rf(&[-5], &[0, 0, 1]), rf(&[-3], &[0, 1])]]));
}

#[test]
fn equation_katz_ranks() {
    let euler = eq(vec![rf(&[3], &[0, 1]), rf(&[5], &[0, 0, 1])]);
    assert!(equation_katz_rank(&euler, &Point::zero()).is_zero());
    assert!(fuchsian_check(&euler, &Point::zero()));

    let first = eq(vec![rf(&[-1], &[0, 0, 1])]);
    assert_eq!(equation_katz_rank(&first, &Point::zero()), BigRational::one());
    assert!(!fuchsian_check(&first, &Point::zero()));

    let airy = eq(vec![c(0), rf(&[0, -1], &[1])]);
    assert_eq!(equation_katz_rank(&airy, &Point::Infinity), rat(3, 2));
    assert!(!fuchsian_check(&airy, &Point::Infinity));

    // ordinary point: total
    assert!(equation_katz_rank(&euler, &Point::from_int(2)).is_zero());
}

// gauge transforms

#[test]
fn gauge_examples() {
    let z = RationalFunction::z();
    let b = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![c(0), c(0)]]);
    assert_eq!(&apply_gauge(&b, &GaugeTransform::identity(2)).unwrap(), &b);

    let g = GaugeTransform::new(mat(vec![vec![z.clone(), c(0)], vec![c(0), c(1)]])).unwrap();
    let out = apply_gauge(&b, &g).unwrap();
    assert_eq!(out.matrix(), &mat(vec![vec![rf(&[1], &[0, 1]), rf(&[1], &[0, 1])], vec![c(0), c(0)]]));

    let diag = sys(vec![vec![rf(&[1], &[0, 0, 1]), c(0)], vec![c(0), z.clone()]]);
    let out = apply_gauge(&diag, &GaugeTransform::shear(&Point::zero(), &[2, -1])).unwrap();
    assert_eq!(out.matrix(), &mat(vec![vec![rf(&[1], &[0, 0, 1]) + rf(&[2], &[0, 1]), c(0)], vec![c(0), z + rf(&[-1], &[0, 1])]]));

    assert!(GaugeTransform::new(mat(vec![vec![c(1), c(1)], vec![c(1), c(1)]])).is_err());
}

#[test]
fn gauge_classes() {
    let z = RationalFunction::z();
    assert_eq!(classify_gauge(&GaugeTransform::identity(2), &Point::from_int(3)), GaugeClass::Holomorphic);
    let d = GaugeTransform::new(mat(vec![vec![z, c(0)], vec![c(0), c(1)]])).unwrap();
    assert_eq!(classify_gauge(&d, &Point::zero()), GaugeClass::Meromorphic);
    assert_eq!(classify_gauge(&d, &Point::from_int(1)), GaugeClass::Holomorphic);
    let u = GaugeTransform::new(mat(vec![vec![c(1), rf(&[1], &[0, 1])], vec![c(0), c(1)]])).unwrap();
    assert_eq!(classify_gauge(&u, &Point::zero()), GaugeClass::Meromorphic);
}

#[test]
fn admissibility() {
    let one = Scalar::one();
    let o = Scalar::zero();
    let e = cmat(&[&[o.clone(), one.clone()], &[o.clone(), o.clone()]]);
    let un = vec![Block { size: 2, ramified: false }];
    assert!(is_admissible(&AdmissibleMatrix::unramified(vec![2, 1]), &e, &un).unwrap());
    assert!(!is_admissible(&AdmissibleMatrix::unramified(vec![0, 1]), &e, &un).unwrap());
    assert!(is_admissible(&AdmissibleMatrix::zero(2), &e, &un).unwrap());

    let ram = vec![Block { size: 2, ramified: true }];
    let e0 = cmat(&[&[o.clone(), o.clone()], &[o.clone(), o.clone()]]);
    assert!(is_admissible(&AdmissibleMatrix::new(vec![3, 3], ram.clone()).unwrap(), &e0, &ram).unwrap());
    let bad = AdmissibleMatrix::new(vec![3, 2], ram.clone());
    assert!(bad.is_err() || !is_admissible(&bad.unwrap(), &e0, &ram).unwrap());

    let three = vec![Block { size: 3, ramified: false }];
    assert!(matches!(
        is_admissible(&AdmissibleMatrix::unramified(vec![0, 0]), &e, &three),
        Err(Error::PartitionMismatch(_))
    ));
}

#[test]
fn degrees_and_exponents() {
    let o = Scalar::zero();
    let half = s(1, 2);
    let e = cmat(&[&[o.clone(), o.clone()], &[o.clone(), half.clone()]]);
    let pairs = vec![(AdmissibleMatrix::zero(2), e.clone()), (AdmissibleMatrix::zero(2), e.clone())];
    assert_eq!(connection_degree(&pairs).unwrap(), Scalar::one());

    let traceless = cmat(&[&[o.clone(), o.clone()], &[o.clone(), o.clone()]]);
    assert!(connection_degree(&[(AdmissibleMatrix::unramified(vec![1, -1]), traceless)]).unwrap().is_zero());

    assert!(splitting_degree_check(&SplittingType::new(vec![3, 0]).unwrap(), &Scalar::from_int(3)).ok);
    assert!(!splitting_degree_check(&SplittingType::new(vec![1, 1]).unwrap(), &Scalar::from_int(3)).ok);
    assert!(splitting_degree_check(&SplittingType::new(vec![0, 0, 0]).unwrap(), &Scalar::zero()).ok);
    let frac = splitting_degree_check(&SplittingType::new(vec![0, 0]).unwrap(), &half);
    assert!(!frac.ok && frac.diagnostic.is_some());
    assert!(SplittingType::new(vec![0, 1]).is_err());

    assert_eq!(formal_exponents(&AdmissibleMatrix::zero(2), &e).unwrap(), vec![o.clone(), half]);
    let nil = cmat(&[&[o.clone(), Scalar::one()], &[o.clone(), o.clone()]]);
    assert_eq!(formal_exponents(&AdmissibleMatrix::unramified(vec![2, 1]), &nil).unwrap(), vec![Scalar::from_int(2), Scalar::one()]);
    let thirds = cmat(&[&[s(1, 3), o.clone()], &[o.clone(), s(2, 3)]]);
    assert_eq!(formal_exponents(&AdmissibleMatrix::unramified(vec![1, 1]), &thirds).unwrap(), vec![s(4, 3), s(5, 3)]);
}

// local analysis

#[test]
fn katz_and_classification() {
    let z0 = Point::zero();
    let shear_case = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![c(0), c(0)]]);
    assert!(katz_rank_system(&shear_case, &z0).unwrap().is_zero());
    assert_eq!(classify_singularity(&shear_case, &z0).unwrap(), Classification::RegularNonFuchsian);

    let diag = sys(vec![vec![rf(&[1], &[0, 0, 1]), c(0)], vec![c(0), c(0)]]);
    assert_eq!(katz_rank_system(&diag, &z0).unwrap(), BigRational::one());
    assert_eq!(classify_singularity(&diag, &z0).unwrap(), Classification::IrregularUnramified);

    let ram = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![rf(&[1], &[0, 0, 0, 1]), c(0)]]);
    assert_eq!(katz_rank_system(&ram, &z0).unwrap(), rat(3, 2));
    assert_eq!(minimal_poincare_rank(&ram, &z0).unwrap(), 2);
    assert_eq!(classify_singularity(&ram, &z0).unwrap(), Classification::IrregularRamified);

    let fuchs = sys(vec![vec![rf(&[1], &[0, 2]), rf(&[1], &[0, 1])], vec![c(0), c(0)]]);
    assert_eq!(classify_singularity(&fuchs, &z0).unwrap(), Classification::Fuchsian);
    assert!(katz_rank_system(&fuchs, &Point::from_int(7)).is_err());
}

#[test]
fn moser_examples() {
    let z0 = Point::zero();
    let b = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![c(0), c(0)]]);
    let red = moser_reduce(&b, &z0).unwrap();
    assert_eq!(red.system.matrix(), &mat(vec![vec![rf(&[1], &[0, 1]), rf(&[1], &[0, 1])], vec![c(0), c(0)]]));
    assert_eq!(red.gauge.matrix(), &mat(vec![vec![RationalFunction::z(), c(0)], vec![c(0), c(1)]]));
    assert_eq!(apply_gauge(&b, &red.gauge).unwrap(), red.system);
    assert_eq!(red.rank_after, 0);

    let ram = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![rf(&[1], &[0, 0, 0, 1]), c(0)]]);
    let red = moser_reduce(&ram, &z0).unwrap();
    assert_eq!(red.steps, 0);
    assert_eq!(red.system, ram);
    assert_eq!(red.gauge.matrix(), &RatMatrix::identity(2));
}

#[test]
fn regular_exponent_examples() {
    let z0 = Point::zero();
    let d = sys(vec![vec![rf(&[1], &[0, 3]), c(0)], vec![c(0), rf(&[1], &[0, 2])]]);
    let r = regular_exponents(&d, &z0).unwrap();
    let mut ev = r.eigenvalues.clone();
    ev.sort();
    assert_eq!(ev, vec![s(1, 3), s(1, 2)]);
    assert_eq!(r.shifts, vec![0, 0]);

    let n = sys(vec![vec![c(0), rf(&[1], &[0, 1])], vec![c(0), c(0)]]);
    let r = regular_exponents(&n, &z0).unwrap();
    assert_eq!(r.eigenvalues, vec![Scalar::zero(), Scalar::zero()]);
    assert!(!r.diagonalizable);

    let big = sys(vec![vec![rf(&[5], &[0, 2])]]);
    let r = regular_exponents(&big, &z0).unwrap();
    assert_eq!(r.eigenvalues, vec![s(5, 2)]);
    assert_eq!(r.e.get(0, 0), &s(1, 2));
    assert_eq!(r.shifts, vec![2]);
}

// scalarization

#[test]
fn cyclic_vector_examples() {
    let e = eq(vec![rf(&[1], &[0, 1]), rf(&[2], &[0, 0, 1])]);
    let (_, back) = cyclic_vector(&companion(&e).unwrap()).unwrap();
    assert_eq!(back, e);

    let d = sys(vec![vec![c(0), c(0)], vec![c(0), rf(&[1], &[0, 1])]]);
    let one = Poly::from_ints(&[1]);
    let (cv, e) = cyclic_vector_with(&d, &[one.clone(), one.clone()], "ones").unwrap().unwrap();
    assert_eq!(e, eq(vec![c(0), c(0)]));
    assert_eq!(cv.det_w, rf(&[1], &[0, 1]));

    let nz = sys(vec![vec![c(0), RationalFunction::z()], vec![c(0), c(0)]]);
    let (cv, e) = cyclic_vector(&nz).unwrap();
    assert_eq!(e, eq(vec![rf(&[-1], &[0, 1]), c(0)]));
    assert_eq!(cv.det_w, RationalFunction::z());
}

#[test]
fn apparent_examples() {
    let z0 = Point::zero();
    let e = eq(vec![rf(&[-1], &[0, 1]), c(0)]);
    match is_apparent(&e, &z0).unwrap() {
        Verdict::Apparent(cert) => {
            let mut x = cert.exponents.clone();
            x.sort();
            assert_eq!(x, vec![0, 2]);
        }
        v => panic!("expected a certificate, got {v:?}"),
    }
    let complex_exp = eq(vec![rf(&[1], &[0, 1]), rf(&[1], &[0, 0, 1])]);
    assert!(matches!(is_apparent(&complex_exp, &z0).unwrap(), Verdict::NotApparent(_)));
    assert!(matches!(is_apparent(&eq(vec![c(0), c(0)]), &z0), Err(Error::NotAPole(_))));
}

#[test]
fn counting_examples() {
    let euler = eq(vec![rf(&[3], &[0, 1]), rf(&[-4], &[0, 0, 1])]);
    let r = scalarize_and_count(&companion(&euler).unwrap()).unwrap();
    assert_eq!((r.m, r.bound, r.satisfied), (0, 3, true));

    let nz = sys(vec![vec![c(0), RationalFunction::z()], vec![c(0), c(0)]]);
    let r = scalarize_and_count(&nz).unwrap();
    assert_eq!(r.m, 1);
    assert_eq!(r.equation, eq(vec![rf(&[-1], &[0, 1]), c(0)]));
    let t = theorem2_pipeline(&nz).unwrap();
    assert!(t.within);
    assert_eq!(t.m, 1);

    // K = ⌈3/2⌉ + 0 at the ramified example plus ∞.
    let ram = sys(vec![vec![c(0), rf(&[1], &[0, 0, 1])], vec![rf(&[1], &[0, 0, 0, 1]), c(0)]]);
    let t = theorem2_pipeline(&ram).unwrap();
    assert_eq!(t.n, ram.singular_locus().len());
    assert_eq!(t.bound, (t.k_total + t.n as i64 + 1) + 1);
}
