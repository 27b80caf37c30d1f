//! End-to-end acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line on the real stdout so the verdicts survive output capture.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;

use num_traits::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singular_forge::bounds::{
    corollary1_predicate, extremal_gap, forms_o_rank_bound, prop1_check, remark2_bound, theorem1_bound, theorem2_bound,
    BoundInputs,
};
use singular_forge::exact::{Point, Poly, RatMatrix, RationalFunction, Scalar, TruncatedLaurent};
use singular_forge::gauge::{apply_gauge, classify_gauge, GaugeClass, SplittingType};
use singular_forge::local::{formal_data_unramified, minimal_poincare_rank, moser_reduce, rat, LocalAnalyzer};
use singular_forge::monodromy::{equation_trivial_residuals, inf_norm, monodromy_rep, CMatrix, Complex64, DEFAULT_TOL};
use singular_forge::scalarize::{cyclic_vector_with, scalarize_and_count, ScalarizationReport};
use singular_forge::system::{ceil_rat, companion, LinearSystem};
use singular_forge::verify::{
    distinct_leading_instance, euler_matrix, euler_system, generate_instance, random_equation, random_gauge,
    InstanceProfile, DEFAULT_TRUNC,
};

const RELATION_TOL: f64 = 1e-8;

fn verdict(n: u32, name: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n:>2} {status} {name}: {detail}");
    for f in failures.iter().take(10) {
        let _ = writeln!(out, "    {f}");
    }
    assert!(failures.is_empty(), "criterion {n} ({name}) failed: {failures:?}");
}

fn mixed(seed: u64) -> LinearSystem {
    generate_instance(&InstanceProfile::mixed(seed)).expect("generator output")
}

/// Scalarizations of mixed seeds 0–199, shared by the counting and apparent-point criteria.
fn scalarizations() -> &'static Vec<(u64, Result<ScalarizationReport, String>)> {
    static CELL: OnceLock<Vec<(u64, Result<ScalarizationReport, String>)>> = OnceLock::new();
    CELL.get_or_init(|| (0..200).map(|seed| (seed, scalarize_and_count(&mixed(seed)).map_err(|e| e.to_string()))).collect())
}

#[test]
fn c01_residue_identity() {
    let mut failures = Vec::new();
    for seed in 0..500 {
        let s = mixed(seed);
        let t = s.residue_trace_sum();
        if !t.is_zero() {
            failures.push(format!("seed {seed}: trace sum {t}"));
        }
    }
    verdict(1, "residue trace sum is exactly zero", &failures, "500 mixed seeds");
}

#[test]
fn c02_rank_relations() {
    let mut failures = Vec::new();
    let mut points = 0;
    for seed in 0..500 {
        let s = mixed(seed);
        let an = LocalAnalyzer::new(&s);
        for a in s.singular_locus() {
            points += 1;
            let r = s.poincare_rank(a).unwrap();
            let kappa = match an.katz_rank(a) {
                Ok(k) => k,
                Err(e) => {
                    failures.push(format!("seed {seed} at {a}: {e}"));
                    continue;
                }
            };
            if kappa > rat(r as i64, 1) {
                failures.push(format!("seed {seed} at {a}: katz {kappa} > poincare {r}"));
            }
            let min = an.minimal_rank(a).unwrap();
            if min as i64 != ceil_rat(&kappa) {
                failures.push(format!("seed {seed} at {a}: minimal {min} vs ceil katz {kappa}"));
            }
            // Independent route: the rank Moser reduction actually reaches.
            match moser_reduce(&s, a) {
                Ok(red) if red.rank_after as i64 == ceil_rat(&kappa) => {}
                Ok(red) => failures.push(format!("seed {seed} at {a}: moser reaches {} vs ceil katz {kappa}", red.rank_after)),
                Err(e) => failures.push(format!("seed {seed} at {a}: moser {e}")),
            }
        }
    }
    verdict(2, "katz <= poincare and minimal rank = ceil(katz)", &failures, &format!("{points} points on 500 seeds"));
}

#[test]
fn c03_gauge_invariance() {
    let mut failures = Vec::new();
    let mut checks = 0;
    for seed in 0..100 {
        let s = mixed(seed);
        let an_s = LocalAnalyzer::new(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00ac_ce55);
        for k in 0..3 {
            let g = random_gauge(&mut rng, &s);
            let t = apply_gauge(&s, &g).expect("invertible gauge");
            let an_t = LocalAnalyzer::new(&t);
            let pts: BTreeSet<Point> = s.singular_locus().iter().chain(t.singular_locus()).cloned().collect();
            for a in &pts {
                checks += 1;
                let tag = format!("seed {seed} gauge {k} at {a}");
                let side = |an: &LocalAnalyzer, sys: &LinearSystem| {
                    if sys.is_singular(a) {
                        let kappa = an.katz_rank(a).map_err(|e| e.to_string())?;
                        let class = an.classify(a).map_err(|e| e.to_string())?.gauge_class();
                        Ok::<_, String>((kappa, class))
                    } else {
                        Ok((rat(0, 1), "regular"))
                    }
                };
                match (side(&an_s, &s), side(&an_t, &t)) {
                    (Ok(x), Ok(y)) if x == y => {}
                    (Ok(x), Ok(y)) => failures.push(format!("{tag}: {x:?} vs {y:?}")),
                    (Err(e), _) | (_, Err(e)) => failures.push(format!("{tag}: {e}")),
                }
                if classify_gauge(&g, a) == GaugeClass::Holomorphic {
                    let before = s.poincare_rank(a).ok();
                    let after = t.poincare_rank(a).ok();
                    if before != after {
                        failures.push(format!("{tag}: holomorphic gauge moved poincare rank {before:?} -> {after:?}"));
                    }
                }
            }
        }
    }
    verdict(3, "katz rank and class survive meromorphic gauges", &failures, &format!("{checks} point checks, 300 gauges"));
}

#[test]
fn c04_moser_reduction() {
    let mut failures = Vec::new();
    let mut reductions = 0;
    for seed in 0..200 {
        let s = mixed(seed);
        for a in s.singular_locus() {
            reductions += 1;
            let red = match moser_reduce(&s, a) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("seed {seed} at {a}: {e}"));
                    continue;
                }
            };
            let min = minimal_poincare_rank(&s, a).unwrap();
            if red.rank_after != min || red.system.poincare_rank(a).unwrap() != min {
                failures.push(format!("seed {seed} at {a}: reduced to {} but minimal is {min}", red.rank_after));
            }
            if apply_gauge(&s, &red.gauge).ok().as_ref() != Some(&red.system) {
                failures.push(format!("seed {seed} at {a}: gauge does not reproduce the reduced system"));
            }
        }
    }

    let z0 = Point::zero();
    let rf = |n: &[i64], d: &[i64]| RationalFunction::new(Poly::from_ints(n), Poly::from_ints(d)).unwrap();
    let zero = RationalFunction::from_int(0);
    let b = LinearSystem::new(RatMatrix::from_rows(vec![vec![zero.clone(), rf(&[1], &[0, 0, 1])], vec![zero.clone(), zero.clone()]]).unwrap())
        .unwrap();
    let red = moser_reduce(&b, &z0).unwrap();
    let want_gauge = RatMatrix::from_rows(vec![vec![RationalFunction::z(), zero.clone()], vec![zero.clone(), RationalFunction::from_int(1)]]).unwrap();
    let want = RatMatrix::from_rows(vec![vec![rf(&[1], &[0, 1]), rf(&[1], &[0, 1])], vec![zero.clone(), zero]]).unwrap();
    if red.gauge.matrix() != &want_gauge || red.system.matrix() != &want || red.rank_after != 0 {
        failures.push(format!("worked example: gauge {:?}, system {:?}", red.gauge.matrix(), red.system.matrix()));
    }
    verdict(4, "moser reaches the minimal rank with a reproducible gauge", &failures, &format!("{reductions} reductions plus the worked example"));
}

#[test]
fn c05_scalarization_round_trip() {
    let mut failures = Vec::new();
    for seed in 0..100 {
        let e = random_equation(seed, seed % 2 == 0);
        let s = companion(&e).unwrap();
        let mut e1 = vec![Poly::zero(); e.order()];
        e1[0] = Poly::from_ints(&[1]);
        match cyclic_vector_with(&s, &e1, "e1") {
            Ok(Some((_, back))) if back == e => {}
            Ok(Some((_, back))) => failures.push(format!("seed {seed}: recovered {back:?}")),
            Ok(None) => failures.push(format!("seed {seed}: e1 not cyclic")),
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
        match scalarize_and_count(&s) {
            Ok(r) if r.m == 0 && r.equation == e => {}
            Ok(r) => failures.push(format!("seed {seed}: m = {}", r.m)),
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
    }
    verdict(5, "companion round trip returns the equation with m = 0", &failures, "100 equations");
}

#[test]
fn c06_apparent_count_bound() {
    let mut failures = Vec::new();
    let mut worst = 0;
    for (seed, r) in scalarizations() {
        match r {
            Ok(r) => {
                worst = worst.max(r.m);
                if !r.satisfied {
                    failures.push(format!("seed {seed}: m = {} exceeds (R+n+1)p(p-1)/2 = {}", r.m, r.bound));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    verdict(6, "m <= (R+n+1)p(p-1)/2", &failures, &format!("200 systems, largest m = {worst}"));
}

#[test]
fn c07_apparent_soundness() {
    let mut failures = Vec::new();
    let mut certified = 0;
    let mut worst: f64 = 0.0;
    for (seed, r) in scalarizations().iter().take(100) {
        let Ok(r) = r else {
            failures.push(format!("seed {seed}: scalarization failed"));
            continue;
        };
        for c in &r.apparent {
            match equation_trivial_residuals(&r.equation, &c.locus, DEFAULT_TOL) {
                Ok(res) => {
                    for x in res {
                        certified += 1;
                        worst = worst.max(x);
                        if x > RELATION_TOL {
                            failures.push(format!("seed {seed}: |G - I| = {x:e}"));
                        }
                    }
                }
                Err(e) => failures.push(format!("seed {seed}: {e}")),
            }
        }
    }
    verdict(7, "certified apparent points have trivial monodromy", &failures, &format!("{certified} points, worst {worst:e}"));
}

#[test]
fn c08_monodromy_oracle() {
    let mut failures = Vec::new();
    let mut worst_euler: f64 = 0.0;
    for seed in 0..20 {
        let a = euler_matrix(seed);
        let rep = match monodromy_rep(&euler_system(&a), None, DEFAULT_TOL) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("euler {seed}: {e}"));
                continue;
            }
        };
        let p = a.rows();
        // A = 0 leaves no singular point and the identity as monodromy.
        let g = match rep.loops.iter().position(|l| l.encloses.is_some_and(|c| c.norm() < 1e-12)) {
            Some(i) => rep.matrices[i].clone(),
            None => CMatrix::identity(p, p),
        };
        let want = (a.to_complex() * Complex64::new(0.0, 2.0 * std::f64::consts::PI)).exp();
        let err = inf_norm(&(&g - &want));
        worst_euler = worst_euler.max(err);
        if err > RELATION_TOL {
            failures.push(format!("euler {seed}: |G - exp(2 pi i A)| = {err:e}"));
        }
    }
    let mut worst_abs: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for seed in 0..100 {
        let s = generate_instance(&InstanceProfile::fuchsian(seed)).unwrap();
        match monodromy_rep(&s, None, DEFAULT_TOL) {
            Ok(r) => {
                let direct = inf_norm(&(r.product() - CMatrix::identity(s.dim(), s.dim())));
                let scale = r.matrices.iter().map(inf_norm).product::<f64>().max(1.0);
                worst_abs = worst_abs.max(r.product_residual);
                worst_rel = worst_rel.max(r.product_residual / scale);
                // The threshold is absolute; the relative figure is reported alongside.
                if r.product_residual > RELATION_TOL || direct > RELATION_TOL {
                    failures.push(format!(
                        "fuchsian {seed}: product residual {:e} with prod |G_i| = {scale:e}",
                        r.product_residual
                    ));
                }
            }
            Err(e) => failures.push(format!("fuchsian {seed}: {e}")),
        }
    }
    verdict(
        8,
        "euler oracle and product relation",
        &failures,
        &format!(
            "20 euler systems (worst {worst_euler:e}), 100 fuchsian instances (worst {worst_abs:e} absolute, {worst_rel:e} relative to prod |G_i|)"
        ),
    );
}

/// `F̂' + F̂ (E/t + Q') − B̂ F̂`, recomputed from the returned formal data.
fn defect_column(s: &LinearSystem, fd: &singular_forge::local::FormalLocalData, l: usize, upto: i64) -> Vec<TruncatedLaurent> {
    let p = fd.dim();
    let a = &fd.point;
    let b = s.chart_series(a, upto);
    let mut w = TruncatedLaurent::monomial(a.clone(), fd.e.get(l, l).clone(), -1, upto);
    for (m, qm) in fd.q[l].iter().enumerate() {
        let m = m as i64 + 1;
        w = w.add(&TruncatedLaurent::monomial(a.clone(), qm * &Scalar::from_int(-m), -m - 1, upto));
    }
    (0..p)
        .map(|i| {
            let f = &fd.f_hat[i * p + l];
            let mut d = f.derivative().add(&f.mul(&w));
            for m in 0..p {
                d = d.sub(&b[i * p + m].mul(&fd.f_hat[m * p + l]));
            }
            d
        })
        .collect()
}

#[test]
fn c09_formal_defect() {
    let mut failures = Vec::new();
    let z0 = Point::zero();
    for seed in 0..50 {
        let s = distinct_leading_instance(seed);
        let fd = match formal_data_unramified(&s, &z0, DEFAULT_TRUNC) {
            Ok(fd) => fd,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let upto = DEFAULT_TRUNC as i64 + 4 * fd.poincare_rank as i64 + 24;
        for l in 0..fd.dim() {
            let c = fd.certified[l];
            for d in defect_column(&s, &fd, l, upto) {
                if d.order() < c {
                    failures.push(format!("seed {seed} column {l}: defect known only through {}", d.order()));
                } else if let Some(k) = (d.valuation()..=c).find(|k| !d.coeff(*k).is_zero()) {
                    failures.push(format!("seed {seed} column {l}: defect term t^{k} below certified order {c}"));
                }
            }
        }
        let kappa = LocalAnalyzer::new(&s).katz_rank(&z0).unwrap();
        if fd.max_q_degree() != fd.poincare_rank || rat(fd.poincare_rank as i64, 1) != kappa {
            failures.push(format!("seed {seed}: deg q = {}, r = {}, katz = {kappa}", fd.max_q_degree(), fd.poincare_rank));
        }
    }
    verdict(9, "formal solution defect vanishes through the certified order", &failures, "50 instances");
}

#[test]
fn c10_bound_calculators() {
    let mut failures = Vec::new();
    let mut check = |name: &str, got: String, want: &str| {
        if got != want {
            failures.push(format!("{name}: got {got}, want {want}"));
        }
    };
    let t1 = |p, r: &[i64]| theorem1_bound(&BoundInputs::new(p, r.to_vec())).map_or("error".into(), |v| v.to_string());
    let r2 = |p, r: &[i64]| remark2_bound(&BoundInputs::new(p, r.to_vec())).map_or("error".into(), |v| v.to_string());
    let pc = |k: &[i64], n, r, m| prop1_check(&SplittingType::new(k.to_vec()).unwrap(), n, r, m).unwrap().to_string();
    let fo = |r1, k: &[i64]| forms_o_rank_bound(r1, &SplittingType::new(k.to_vec()).unwrap()).to_string();
    let t2 = |p, k: &[(i64, i64)]| theorem2_bound(&BoundInputs::with_katz(p, k.iter().map(|(a, b)| rat(*a, *b)).collect())).to_string();
    let c1 = |r0, r, p| corollary1_predicate(r0, r, p).map_or("error".into(), |v| v.to_string());

    check("theorem1 p2 (1,0)", t1(2, &[1, 0]), "3");
    check("theorem1 p1", t1(1, &[4, 2]), "4");
    check("theorem1 p3 (0,0,0)", t1(3, &[0, 0, 0]), "4");
    check("theorem1 p2 (2,1,0)", t1(2, &[2, 1, 0]), "7");
    check("theorem1 p4 (1,1)", t1(4, &[1, 1]), "10");
    check("theorem1 p1 (0)", t1(1, &[0]), "0");
    check("remark2 p2 (1,0)", r2(2, &[1, 0]), "2");
    check("remark2 p3 (2)", r2(3, &[2]), "4");
    check("remark2 R=0", r2(2, &[0, 0]), "error");
    check("remark2 p3 (1,2)", r2(3, &[1, 2]), "7");
    check("prop1 (3,0)", pc(&[3, 0], 2, 1, 1), "false");
    check("prop1 (0,0)", pc(&[0, 0], 2, 1, 1), "true");
    check("prop1 (2,0)", pc(&[2, 0], 2, 1, 1), "true");
    check("prop1 (5,2,0) M=2", pc(&[5, 2, 0], 1, 1, 2), "true");
    check("prop1 (5,2,0) M=1", pc(&[5, 2, 0], 1, 1, 1), "false");
    check("prop1 (4,0) M=2", pc(&[4, 0], 2, 1, 2), "true");
    check("formsO r1=1 (2,0)", fo(1, &[2, 0]), "3");
    check("formsO constant", fo(2, &[1, 1]), "2");
    check("formsO r1=0 (5,1,0)", fo(0, &[5, 1, 0]), "5");
    check("formsO p=1", fo(3, &[0]), "3");
    check("theorem2 (3/2,0)", t2(2, &[(3, 2), (0, 1)]), "6");
    check("theorem2 fuchsian n3", t2(2, &[(0, 1), (0, 1), (0, 1)]), "5");
    check("theorem2 p1", t2(1, &[(5, 2)]), "1");
    check("theorem2 p3 (1/2,2/3)", t2(3, &[(1, 2), (2, 3)]), "16");
    check("theorem2 p2 (1)", t2(2, &[(1, 1)]), "4");
    check("corollary1 1<=4/3", c1(1, 4, 3), "true");
    check("corollary1 2>3/2", c1(2, 3, 2), "false");
    check("corollary1 r0=0", c1(0, 5, 2), "true");
    check("corollary1 2<=4/2", c1(2, 4, 2), "true");
    check("corollary1 r0>r", c1(3, 2, 1), "error");

    let mut grid = 0;
    for p in 1..=6usize {
        for n in 1..=6usize {
            for r in 1..=6i64 {
                for r1 in [r, 0] {
                    if r1 == 0 && n == 1 {
                        continue;
                    }
                    let mut ranks = vec![0; n];
                    ranks[0] = r1;
                    ranks[n - 1] += r - r1;
                    let b = BoundInputs::new(p, ranks);
                    let gap = (n as i64 + r) - 1;
                    let k: Vec<i64> = (0..p).map(|j| (p - 1 - j) as i64 * gap).collect();
                    let k = SplittingType::new(k).unwrap();
                    let feasible = prop1_check(&k, n, r, 1).unwrap();
                    let formed = forms_o_rank_bound(r1, &k);
                    grid += 1;
                    if !feasible
                        || formed != theorem1_bound(&b).unwrap()
                        || formed != r1 + extremal_gap(p, n, r, 1)
                    {
                        failures.push(format!("grid p={p} n={n} R={r} r1={r1}: formsO {formed}"));
                    }
                }
            }
        }
    }
    verdict(10, "bound calculators", &failures, &format!("30 golden cases, {grid} grid points"));
}

#[test]
fn c11_determinism() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_singular-forge"))
            .args(["verify", "--seeds", "0..99"])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    let mut failures = Vec::new();
    if a.stdout.is_empty() {
        failures.push("empty report".to_string());
    }
    if a.stdout != b.stdout {
        failures.push("reports differ between runs".to_string());
    }
    if a.status.code() != b.status.code() {
        failures.push(format!("exit codes {:?} vs {:?}", a.status.code(), b.status.code()));
    }
    verdict(11, "verify reports are byte-identical", &failures, &format!("{} bytes per run", a.stdout.len()));
}
