//! Acceptance criteria, one PASS/FAIL line each.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use coulomb_mot::counterexample::{
    eps_m_margin, eps_m_partial_margin, find_eps_m, find_violation, gates, matching_report,
    refute_class_T, CounterexampleSpec,
};
use coulomb_mot::density::{RadialDensity, SeidlMap, SeidlPattern};
use coulomb_mot::mot::{
    c_1d, discretize, lift_radial_triple, monge_cost, pattern_plan, sample_graph, solve_exact,
};
use coulomb_mot::radialcost::{
    alignment_condition, c_pi, find_stationary_points, full_cost, grad_hess, phi_threshold,
    radial_cost, AngularConfig, MinimizeOptions, Radii, StationaryOptions,
};
use coulomb_mot::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn radii(a: f64, b: f64, c: f64) -> Radii {
    Radii::new(a, b, c).unwrap()
}

fn blocks() -> RadialDensity {
    RadialDensity::blocks(&[(0.0, 1.0), (2.0, 3.0), (15.0, 16.0)], &[1.0 / 3.0; 3]).unwrap()
}

fn poly_p(r1: f64, r2: f64, r3: f64) -> f64 {
    r2 * (r3 - r1).powi(3) - r1 * (r3 + r2).powi(3) - r3 * (r1 + r2).powi(3)
}

fn alignment_boundary() -> Outcome {
    let p15 = alignment_condition(&radii(1.0, 2.0, 15.0));
    let p14 = alignment_condition(&radii(1.0, 2.0, 14.0));
    ensure!(
        p15 == 170.0 && p14 == -80.0,
        "P(1,2,15) = {p15}, P(1,2,14) = {p14}"
    );
    let (mut lo, mut hi) = (14.0, 15.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poly_p(1.0, 2.0, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = phi_threshold(1.0, 2.0).map_err(|e| e.to_string())?;
    ensure!((phi - 14.348469).abs() < 1e-5, "phi(1,2) = {phi}");
    ensure!((phi - lo).abs() < 1e-9, "phi {phi} vs bisection {lo}");
    ensure!(
        poly_p(1.0, 2.0, phi - 1e-6) < 0.0 && poly_p(1.0, 2.0, phi + 1e-6) > 0.0,
        "no sign change around phi"
    );
    Ok(format!("P = 170 / -80, phi(1,2) = {phi:.9}"))
}

fn phi_equivalence(opts: &MinimizeOptions) -> Outcome {
    let collinear = AngularConfig::collinear();
    let (mut pos, mut neg) = (0, 0);
    let mut worst_dist: f64 = 0.0;
    let mut least_gap = f64::INFINITY;
    for i in 0..10 {
        let r1 = 1.0 + 0.1 * i as f64;
        for j in 0..10 {
            let r2 = r1 * (1.2 + 0.3 * j as f64);
            for k in 0..10 {
                let r3 = r2 + (20.0 * r1 - r2) * (k + 1) as f64 / 10.0;
                let r = radii(r1, r2, r3);
                let m = radial_cost(&r, opts).map_err(|e| e.to_string())?;
                if alignment_condition(&r) >= 0.0 {
                    pos += 1;
                    let d = m.argmin.torus_distance(&collinear);
                    worst_dist = worst_dist.max(d);
                    ensure!(
                        d < 1e-6,
                        "argmin {:?} at {:?} with P >= 0",
                        m.argmin,
                        r.as_array()
                    );
                } else {
                    neg += 1;
                    let gap = c_pi(&r) - m.value;
                    least_gap = least_gap.min(gap);
                    ensure!(gap > 1e-8, "gap {gap} at {:?} with P < 0", r.as_array());
                }
            }
        }
    }
    ensure!(pos > 0 && neg > 0, "one side empty: {pos} / {neg}");
    Ok(format!(
        "{pos} triples with P >= 0 (max argmin distance {worst_dist:.1e}), {neg} with P < 0 (min gap {least_gap:.2e})"
    ))
}

fn stationary_points() -> Outcome {
    let so = StationaryOptions {
        grid: 128,
        ..StationaryOptions::default()
    };
    let rep = find_stationary_points(&radii(1.0, 2.0, 15.0), &so).map_err(|e| e.to_string())?;
    ensure!(
        rep.points.len() == 4,
        "{} points for (1,2,15)",
        rep.points.len()
    );
    for c in AngularConfig::corners() {
        let p = rep
            .find(&c, 1e-6)
            .ok_or_else(|| format!("corner {c:?} missing"))?;
        let g = grad_hess(&radii(1.0, 2.0, 15.0), &p.config).map_err(|e| e.to_string())?;
        ensure!(g.grad_norm() < 1e-9, "gradient {} at {c:?}", g.grad_norm());
    }
    let rep14 = find_stationary_points(&radii(1.0, 2.0, 14.0), &so).map_err(|e| e.to_string())?;
    let off = rep14
        .points
        .iter()
        .filter(|p| {
            AngularConfig::corners()
                .iter()
                .all(|c| p.config.torus_distance(c) > 1e-3)
        })
        .count();
    ensure!(off > 0, "no non-corner stationary point for (1,2,14)");
    Ok(format!(
        "4 corners for (1,2,15); {off} non-corner points for (1,2,14)"
    ))
}

fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn hessian_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r1 = rng.gen_range(0.5..3.0);
        let r2 = r1 + rng.gen_range(0.2..3.0);
        let r3 = r2 + rng.gen_range(0.2..3.0);
        let r = radii(r1, r2, r3);
        let (a, b) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let gh = grad_hess(&r, &AngularConfig::new(a, b)).map_err(|e| e.to_string())?;
        let f = |x: f64, y: f64| full_cost(&r, &AngularConfig::new(x, y)).total;
        let g = |x: f64, y: f64| grad_hess(&r, &AngularConfig::new(x, y)).unwrap().gradient;
        let h = 1e-3;
        let fd_grad = [
            richardson(|t| f(a + t, b), h),
            richardson(|t| f(a, b + t), h),
        ];
        let fd_hess = [
            [
                richardson(|t| g(a + t, b)[0], h),
                richardson(|t| g(a, b + t)[0], h),
            ],
            [
                richardson(|t| g(a + t, b)[1], h),
                richardson(|t| g(a, b + t)[1], h),
            ],
        ];
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ge = [fd_grad[0] - gh.gradient[0], fd_grad[1] - gh.gradient[1]];
        let rel_g = norm(&ge) / norm(&gh.gradient).max(1e-3);
        let an: Vec<f64> = gh.hessian.iter().flatten().copied().collect();
        let he: Vec<f64> = fd_hess
            .iter()
            .flatten()
            .zip(&an)
            .map(|(x, y)| x - y)
            .collect();
        let rel_h = norm(&he) / norm(&an).max(1e-3);
        worst = worst.max(rel_g).max(rel_h);
        ensure!(
            rel_g < 1e-6 && rel_h < 1e-6,
            "rel err {rel_g:.2e} / {rel_h:.2e} at {:?}",
            r.as_array()
        );
    }
    let mut agree = 0;
    for _ in 0..1000 {
        let r1 = rng.gen_range(0.1..2.0);
        let r2 = r1 + rng.gen_range(0.05..3.0);
        let r3 = r2 + rng.gen_range(0.05..40.0);
        let r = radii(r1, r2, r3);
        let det = grad_hess(&r, &AngularConfig::collinear())
            .map_err(|e| e.to_string())?
            .det();
        let p = alignment_condition(&r);
        ensure!(
            det.signum() == p.signum(),
            "det {det} vs P {p} at {:?}",
            r.as_array()
        );
        agree += 1;
    }
    Ok(format!(
        "max relative error {worst:.2e}; det sign = P sign on {agree} triples"
    ))
}

fn seidl_algebra() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, rho) in [
        ("uniform", RadialDensity::uniform(0.0, 1.0).unwrap()),
        ("blocks", blocks()),
    ] {
        for pat in SeidlPattern::ALL {
            let m = SeidlMap::build(&rho, pat).map_err(|e| e.to_string())?;
            let d = m.check(1000);
            ensure!(
                d.max_cycle_error < 1e-9 && d.max_pushforward_error < 1e-9 && d.passed(),
                "{name} {pat}: cycle {} pushforward {}",
                d.max_cycle_error,
                d.max_pushforward_error
            );
            worst = worst.max(d.max_cycle_error).max(d.max_pushforward_error);
        }
    }
    Ok(format!("8 maps, worst error {worst:.1e}"))
}

fn monge_positive(opts: &MinimizeOptions) -> Outcome {
    let mut phi_max: f64 = 0.0;
    for i in 0..=100 {
        for j in 0..=100 {
            let (x, y) = (i as f64 / 100.0, 2.0 + j as f64 / 100.0);
            phi_max = phi_max.max(phi_threshold(x, y).map_err(|e| e.to_string())?);
        }
    }
    ensure!(
        phi_max < 15.0 && (phi_max - 14.348469).abs() < 1e-5,
        "max phi {phi_max}"
    );
    let rho = blocks();
    let map = SeidlMap::build(&rho, SeidlPattern::DDI).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for n in [3, 5, 6] {
        let p = discretize(&rho, n, opts).map_err(|e| e.to_string())?;
        let lp = solve_exact(&p, "lp").map_err(|e| e.to_string())?.value;
        let ddi = pattern_plan(&p, SeidlPattern::DDI).cost(&p);
        ensure!((lp - ddi).abs() < 1e-6, "n = {n}: LP {lp} vs DDI {ddi}");
        if n % 3 == 0 {
            let mc = monge_cost(&map, n / 3, opts).map_err(|e| e.to_string())?;
            ensure!(
                (mc - ddi).abs() < 1e-9,
                "n = {n}: Monge cost {mc} vs plan {ddi}"
            );
        }
        report.push(format!("n={n}: {lp:.10}"));
    }
    Ok(format!(
        "max phi = {phi_max:.6}; LP = DDI at {}",
        report.join(", ")
    ))
}

fn one_d_identity() -> Outcome {
    let rho = blocks();
    let map = SeidlMap::build(&rho, SeidlPattern::DDI).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let samples = sample_graph(&map, 100);
    ensure!(samples.len() == 100, "{} samples", samples.len());
    for t in samples {
        ensure!(
            map.branch_of(t[0]) == 0,
            "sample {} outside the first tertile",
            t[0]
        );
        let d = (c_pi(&radii(t[0], t[1], t[2])) - c_1d(-t[1], t[0], t[2])).abs();
        worst = worst.max(d);
    }
    ensure!(worst < 1e-12, "worst difference {worst}");
    Ok(format!("worst difference {worst:.1e}"))
}

fn eps_m_lemma() -> Outcome {
    let m0 = eps_m_partial_margin(0.9, 1.0, 0.0);
    let lhs: f64 = 2.0 / 1.0 + 1.0 / 2.0 + 1.0 / 1.8;
    let rhs = 3f64.sqrt() / 0.9 + 1.0 / 0.9;
    ensure!(
        (lhs - 3.0555556).abs() < 1e-6 && (rhs - 3.0356125).abs() < 1e-6,
        "sides {lhs} {rhs}"
    );
    ensure!((m0 - 0.0199431).abs() < 1e-6, "margin {m0}");
    let e = find_eps_m(0.9, 1.0).map_err(|e| e.to_string())?;
    let check = eps_m_margin(0.9, 1.0, e.eps, e.m);
    ensure!(
        check > 0.0 && e.eps > 0.0 && e.m > e.eps,
        "pair {e:?} margin {check}"
    );
    ensure!(
        matches!(find_eps_m(0.8, 1.0), Err(Error::Infeasible(_))),
        "s1 = 0.8 not reported infeasible"
    );
    Ok(format!("margin {m0:.7}; eps = {}, M = {:.4}", e.eps, e.m))
}

fn counterexample_end_to_end(opts: &MinimizeOptions) -> Outcome {
    let rho = CounterexampleSpec::default()
        .build()
        .map_err(|e| e.to_string())?;
    let g = gates(&rho).map_err(|e| e.to_string())?;
    ensure!(g.ratio && g.seven_halves, "gates {g:?}");
    ensure!(
        (g.rho0_over_rho_s2 - 4.0).abs() < 1e-9,
        "ratio {}",
        g.rho0_over_rho_s2
    );
    let t = rho.tertiles().map_err(|e| e.to_string())?;
    ensure!(
        (t.s1 - 0.9).abs() < 1e-9 && (t.s2 - 1.0).abs() < 1e-9,
        "tertiles {t:?}"
    );
    let e = find_eps_m(t.s1, t.s2).map_err(|e| e.to_string())?;
    let c = find_violation(&rho, &e, opts).map_err(|e| e.to_string())?;
    let regap = c.recompute_gap(opts).map_err(|e| e.to_string())?;
    ensure!(c.gap > 0.0 && regap > 0.0, "DDI gap {} / {regap}", c.gap);
    let rep = refute_class_T(&rho, opts).map_err(|e| e.to_string())?;
    ensure!(rep.complete(), "missing certificates: {:?}", rep.outcomes);
    let mut gaps = Vec::new();
    for c in rep.certificates() {
        let g = c.recompute_gap(opts).map_err(|e| e.to_string())?;
        ensure!(c.gap > 0.0 && g > 0.0, "{} gap {}", c.pattern, c.gap);
        gaps.push(format!("{}={:.2e}", c.pattern, c.gap));
    }
    let p = discretize(&rho, 6, opts).map_err(|e| e.to_string())?;
    let lp = solve_exact(&p, "lp").map_err(|e| e.to_string())?.value;
    let mut least = f64::INFINITY;
    for pat in SeidlPattern::ALL {
        let cost = pattern_plan(&p, pat).cost(&p);
        least = least.min(cost - lp);
        ensure!(cost - lp > 1e-8, "{pat} plan {cost} vs LP {lp}");
    }
    Ok(format!(
        "gaps {}; LP(6) below every pattern by >= {least:.3e}",
        gaps.join(" ")
    ))
}

/// One-sided value and derivative at `s` from `dir = -1` (left) or `+1` (right).
fn one_sided(f: impl Fn(f64) -> f64, s: f64, dir: f64) -> (f64, f64) {
    let value = |h: f64| 2.0 * f(s + dir * h) - f(s + 2.0 * dir * h);
    let slope = |h: f64| dir * (f(s + 2.0 * dir * h) - f(s + dir * h)) / h;
    let r = |g: &dyn Fn(f64) -> f64| (10.0 * g(1e-5) - g(1e-4)) / 9.0;
    (r(&value), r(&slope))
}

fn c1_matching() -> Outcome {
    let rho = CounterexampleSpec::default()
        .build()
        .map_err(|e| e.to_string())?;
    let s2 = rho.tertiles().map_err(|e| e.to_string())?.s2;
    let pdf = |x: f64| rho.pdf(x);
    let (vl, dl) = one_sided(pdf, s2, -1.0);
    let (vr, dr) = one_sided(pdf, s2, 1.0);
    ensure!((vl - vr).abs() < 1e-6, "values {vl} / {vr}");
    ensure!((dl - dr).abs() < 1e-6, "derivatives {dl} / {dr}");
    let mr = matching_report(&rho, 1).map_err(|e| e.to_string())?;
    ensure!(mr.passed, "matching report {mr:?}");
    // psi'(0) rho(s2+) = -T'(0) rho(s2-), both equal to rho(0)
    let fwd = |f: &dyn Fn(f64) -> f64| {
        let d = |h: f64| (f(h) - f(0.0)) / h;
        (10.0 * d(1e-6) - d(1e-5)) / 9.0
    };
    let psi_d = fwd(&|x| rho.psi(x));
    let t_d = fwd(&|x| rho.branch1_map(x));
    let (lhs, rhs) = (psi_d * vr, -t_d * vl);
    ensure!(
        (lhs - rhs).abs() < 1e-6 * lhs.abs().max(1.0),
        "Monge-Ampere {lhs} / {rhs}"
    );
    Ok(format!(
        "rho(s2) {vl:.9} / {vr:.9}, rho'(s2) {dl:.3e} / {dr:.3e}, psi'(0) rho(s2+) = {lhs:.7} = -T'(0) rho(s2-) = {rhs:.7}"
    ))
}

fn property_suites(opts: &MinimizeOptions) -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let (mut hom, mut sym, mut lift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let v = [
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
        ];
        let r = radii(v[0], v[1], v[2]);
        let c = |x: [f64; 3]| radial_cost(&radii(x[0], x[1], x[2]), opts).map(|m| m.value);
        let base = c(v).map_err(|e| e.to_string())?;
        let lambda = rng.gen_range(0.1..10.0);
        let scaled = c(v.map(|x| lambda * x)).map_err(|e| e.to_string())?;
        hom = hom.max((scaled - base / lambda).abs());
        for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let other = c([v[p[0]], v[p[1]], v[p[2]]]).map_err(|e| e.to_string())?;
            sym = sym.max((other - base).abs());
        }
        for t in lift_radial_triple(&r, 8, opts).map_err(|e| e.to_string())? {
            lift = lift.max((t.cost - base).abs());
        }
    }
    ensure!(
        hom < 1e-9 && sym < 1e-9 && lift < 1e-9,
        "homogeneity {hom:.1e}, symmetry {sym:.1e}, lift {lift:.1e}"
    );
    Ok(format!(
        "homogeneity {hom:.1e}, symmetry {sym:.1e}, lift {lift:.1e}"
    ))
}

fn main() {
    let opts = MinimizeOptions::default();
    let criteria: Vec<Criterion> = vec![
        ("alignment condition boundary", Box::new(alignment_boundary)),
        (
            "collinear argmin iff P >= 0 on a 10x10x10 grid",
            Box::new(move || phi_equivalence(&opts)),
        ),
        (
            "stationary points of (1,2,15) and (1,2,14)",
            Box::new(stationary_points),
        ),
        (
            "gradient/Hessian consistency and det sign",
            Box::new(hessian_consistency),
        ),
        ("Seidl map algebra", Box::new(seidl_algebra)),
        (
            "DDI optimal on separated blocks",
            Box::new(move || monge_positive(&opts)),
        ),
        ("collinear cost equals 1D cost", Box::new(one_d_identity)),
        ("eps-M margin", Box::new(eps_m_lemma)),
        (
            "counterexample end to end",
            Box::new(move || counterexample_end_to_end(&opts)),
        ),
        ("C1 matching at s2", Box::new(c1_matching)),
        (
            "homogeneity, symmetry and lift invariance",
            Box::new(move || property_suites(&opts)),
        ),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
