use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singular_forge::bounds::{prop1_check, remark2_bound, theorem1_bound, BoundInputs};
use singular_forge::exact::{mat_inverse, Order, Point, Poly, RatMatrix, RationalFunction, Scalar};
use singular_forge::gauge::{apply_gauge, SplittingType};
use singular_forge::monodromy::{inf_norm, monodromy_rep, CMatrix, Complex64, NumericSystem, DEFAULT_TOL};
use singular_forge::verify::{euler_matrix, euler_system, generate_instance, random_gauge, InstanceProfile};

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(-4i64..=4, 1..5).prop_map(|c| Poly::from_ints(&c))
}

fn nonzero_poly() -> impl Strategy<Value = Poly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn ratfn() -> impl Strategy<Value = RationalFunction> {
    (nonzero_poly(), nonzero_poly()).prop_map(|(n, d)| RationalFunction::new(n, d).unwrap())
}

fn point() -> impl Strategy<Value = Point> {
    prop_oneof![
        4 => (-3i64..=3).prop_map(Point::from_int),
        1 => Just(Point::Infinity),
    ]
}

fn ratmatrix(p: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(ratfn(), p * p).prop_map(move |e| RatMatrix::new(p, p, e).unwrap())
}

fn reconstruct(coeffs: &[Scalar], start: i64, a: &Point) -> RationalFunction {
    let mut acc = RationalFunction::zero();
    for (i, c) in coeffs.iter().enumerate() {
        let k = start + i as i64;
        let term = match a {
            Point::Finite(x) => RationalFunction::power_at(c.clone(), x, k),
            Point::Infinity => RationalFunction::monomial(c.clone(), -k),
        };
        acc = acc + term;
    }
    acc
}

/// `tr(G^k)` for `k = 1..p` determines the spectrum of `G`.
fn power_traces(g: &CMatrix) -> Vec<Complex64> {
    let mut acc = g.clone();
    let mut out = Vec::new();
    for _ in 0..g.nrows() {
        out.push(acc.trace());
        acc = &acc * g;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_is_additive(f in ratfn(), g in ratfn(), a in point()) {
        let (Order::Finite(x), Order::Finite(y)) = (f.order_at(&a), g.order_at(&a)) else { unreachable!() };
        prop_assert_eq!((f * g).order_at(&a), Order::Finite(x + y));
    }

    #[test]
    fn laurent_reconstruction_residual(f in ratfn(), a in point(), extra in 0i64..5) {
        let v = f.order_at(&a).finite().unwrap();
        let upto = v + extra;
        let series = f.laurent_expand(&a, upto).unwrap();
        prop_assert_eq!(series.valuation(), v);
        let back = reconstruct(&series.window(v, upto), v, &a);
        let diff = f - back;
        prop_assert!(diff.order_at(&a) > Order::Finite(upto));
    }

    #[test]
    fn inverse_is_involution(m in ratmatrix(2)) {
        prop_assume!(!m.det().unwrap().is_zero());
        let inv = mat_inverse(&m).unwrap();
        prop_assert_eq!(m.mul(&inv), RatMatrix::identity(2));
        prop_assert_eq!(mat_inverse(&inv).unwrap(), m);
    }

    #[test]
    fn principal_divisor_has_degree_zero(
        factors in prop::collection::vec((-3i64..=3, -3i64..=3), 0..5),
        lead in prop_oneof![-3i64..=-1, 1i64..=3],
    ) {
        let mut num = Poly::from_ints(&[lead]);
        let mut den = Poly::from_ints(&[1]);
        let mut roots = BTreeMap::new();
        for (r, e) in factors {
            if e == 0 { continue; }
            *roots.entry(r).or_insert(0) += e;
            let lin = Poly::linear_root(&Scalar::from_int(r)).pow(e.unsigned_abs() as u32);
            if e > 0 { num = num * lin } else { den = den * lin }
        }
        let f = RationalFunction::new(num, den).unwrap();
        let mut total = f.order_at(&Point::Infinity).finite().unwrap();
        for r in roots.keys() {
            total += f.order_at(&Point::from_int(*r)).finite().unwrap();
        }
        prop_assert_eq!(total, 0);
    }

    #[test]
    fn bounds_relations(p in 1usize..6, ranks in prop::collection::vec(0i64..5, 1..5), m in 1i64..5, gaps in prop::collection::vec(0i64..12, 0..5)) {
        let b = BoundInputs::new(p, ranks.clone());
        if b.r_total() > 0 {
            prop_assert_eq!(theorem1_bound(&b).unwrap() - remark2_bound(&b).unwrap(), p as i64 - 1);
        } else {
            prop_assert!(remark2_bound(&b).is_err());
        }
        let mut k = vec![0i64];
        for g in gaps.iter().rev() {
            k.push(k[k.len() - 1] + g);
        }
        k.reverse();
        let k = SplittingType::new(k).unwrap();
        if prop1_check(&k, ranks.len(), b.r_total(), m).unwrap() {
            prop_assert!(prop1_check(&k, ranks.len(), b.r_total(), m + 1).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_composes_and_inverts(seed in 0u64..500, gseed in any::<u64>()) {
        let s = generate_instance(&InstanceProfile::mixed(seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(gseed);
        let g1 = random_gauge(&mut rng, &s);
        let g2 = random_gauge(&mut rng, &s);
        let stepwise = apply_gauge(&apply_gauge(&s, &g1).unwrap(), &g2).unwrap();
        prop_assert_eq!(&stepwise, &apply_gauge(&s, &g1.then(&g2)).unwrap());
        let composed = g1.then(&g2);
        prop_assert_eq!(composed.matrix(), &g2.matrix().mul(g1.matrix()));
        let back = apply_gauge(&apply_gauge(&s, &g1).unwrap(), &g1.inverse()).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reversed_transport_is_inverse(seed in 0u64..1000, r in 0.6f64..2.5, t0 in 0.0f64..6.2, t1 in 0.3f64..2.8) {
        let ns = NumericSystem::from_system(&euler_system(&euler_matrix(seed)));
        let start = Complex64::from_polar(r, t0);
        let mid = Complex64::from_polar(r + 0.5, t0 + t1 / 2.0);
        let end = Complex64::from_polar(r, t0 + t1);
        let path = vec![start, mid, end];
        let back: Vec<_> = path.iter().rev().copied().collect();
        let Ok(fwd) = ns.transport(&path, DEFAULT_TOL) else { return Ok(()) };
        let rev = ns.transport(&back, DEFAULT_TOL).unwrap();
        let id = CMatrix::identity(ns.dim(), ns.dim());
        prop_assert!(inf_norm(&(&rev * &fwd - &id)) <= 10.0 * DEFAULT_TOL * (1.0 + inf_norm(&fwd) * inf_norm(&rev)));
    }

    #[test]
    fn base_change_preserves_spectra(seed in 0u64..200) {
        let s = generate_instance(&InstanceProfile::fuchsian(seed)).unwrap();
        let a = monodromy_rep(&s, Some(Complex64::new(0.31, 2.7)), DEFAULT_TOL);
        let b = monodromy_rep(&s, Some(Complex64::new(-2.2, -1.9)), DEFAULT_TOL);
        // a base point too close to the locus is rejected up front
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        // spectra are only meaningful where the representation itself is numerically sound
        prop_assume!(a.product_residual <= 1e-6 && b.product_residual <= 1e-6);
        prop_assert_eq!(a.labels.len(), b.labels.len());
        for (i, label) in a.labels.iter().enumerate() {
            let j = b.labels.iter().position(|l| l == label).unwrap();
            let scale = 1.0 + inf_norm(&a.matrices[i]).powi(a.matrices[i].nrows() as i32);
            for (x, y) in power_traces(&a.matrices[i]).iter().zip(power_traces(&b.matrices[j])) {
                prop_assert!((x - y).norm() <= 1e-7 * scale, "{label}: {x} vs {y}");
            }
        }
    }
}
