use serde::{Deserialize, Serialize};

use super::{ratio_gate, seven_halves_gate, RATIO_THRESHOLD};
use crate::density::{
    HProfile, PolySegment, PushforwardTail, RadialDensity, Segment, SeidlMap, SeidlPattern,
};
use crate::error::{Error, Result};
use crate::jet::Series;
use crate::radialcost::{alignment_condition, Radii};

/// Largest supported smoothness order at `s2`.
pub const MAX_ORDER: usize = 4;

const MASS_TOL: f64 = 1e-10;
const DELTA_GRID: usize = 4000;
const MONOTONE_GRID: usize = 2000;
const GRAPH_SAMPLES: usize = 200;

/// Parameters of the default two-piece body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub s1: f64,
    pub s2: f64,
    /// Target `rho(0) / rho(s2)`.
    pub ratio: f64,
    pub k: usize,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        CounterexampleSpec {
            s1: 0.9,
            s2: 1.0,
            ratio: 4.0,
            k: 1,
        }
    }
}

impl CounterexampleSpec {
    pub fn build(&self) -> Result<RadialDensity> {
        if !ratio_gate(self.s1, self.s2) {
            return Err(ratio_failure(self.s1, self.s2));
        }
        let (rho1, rho2) = default_pieces(self.s1, self.s2, self.ratio)?;
        build_counterexample_density(&rho1, &rho2, self.k)
    }
}

const BUMP_DEGREE: usize = 12;
const BUMP_LEFT: f64 = 1.0;
const BUMP_RIGHT: f64 = 0.5;

/// Default body pieces, each of mass 1/3.
///
/// `rho1` on `[0, s1]` has Bernstein coefficients `c0 + A, c0 + A, c0, ..., c0, c0 + B`
/// (degree 12, flat at 0). `rho2` on `[s1, s2]` is the quartic `rho(s1), b, e, e, e` with
/// `e = rho1(0) / ratio`, continuous at `s1` and flat to second order at `s2`.
pub fn default_pieces(s1: f64, s2: f64, ratio: f64) -> Result<(PolySegment, PolySegment)> {
    if !(s1 > 0.0 && s2 > s1 && ratio > 0.0 && s2.is_finite() && ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < s1 < s2 and ratio > 0, got s1={s1}, s2={s2}, ratio={ratio}"
        )));
    }
    let m = BUMP_DEGREE;
    let c0 = 1.0 / (3.0 * s1) - (2.0 * BUMP_LEFT + BUMP_RIGHT) / (m + 1) as f64;
    if c0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "s1 = {s1} is too large for the default first piece"
        )));
    }
    let mut coef = vec![c0; m + 1];
    coef[0] += BUMP_LEFT;
    coef[1] += BUMP_LEFT;
    coef[m] += BUMP_RIGHT;
    let rho0 = coef[0];
    let rho_s1 = coef[m];
    let rho1 = PolySegment::bernstein(0.0, s1, coef)?;
    let e = rho0 / ratio;
    let b = 5.0 / (3.0 * (s2 - s1)) - rho_s1 - 3.0 * e;
    if b < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "no nonnegative quartic second piece for s1={s1}, s2={s2}, ratio={ratio}"
        )));
    }
    let rho2 = PolySegment::bernstein(s1, s2, vec![rho_s1, b, e, e, e])?;
    Ok((rho1, rho2))
}

fn ratio_failure(s1: f64, s2: f64) -> Error {
    Error::GateFailed(format!(
        "ratio: s1/s2 = {} must exceed (1 + 2 sqrt 3)/5 = {RATIO_THRESHOLD}",
        s1 / s2
    ))
}

/// Derivatives `h(0), ..., h^(order)(0)` forced by matching the tail to `rho2` at `s2`.
///
/// With `G(u) = int_0^u rho2(s2 + v) dv` (Taylor part) and `F1(x) = int_0^x rho1`, mass
/// conservation gives `T(x) - s2 = G^-1(-F1(x))` and `psi(x) - s2 = G^-1(F1(x))`;
/// then `h = psi - phi(x, T(x))`.
pub(crate) fn h_jet(rho1: &PolySegment, rho2: &PolySegment, order: usize) -> Vec<f64> {
    let (_, s2) = rho2.interval();
    let f1 = Series::from_derivatives(&rho1.endpoint_jet(false, order), order).integral();
    let g = Series::from_derivatives(&rho2.endpoint_jet(true, order), order).integral();
    let ginv = g.reversion();
    let psi = ginv.compose(&f1);
    let tau = ginv.compose(&-&f1);
    let x = Series::variable(order);
    let mut r2 = tau;
    r2.coef[0] += s2;
    let disc = &(&(&r2 * &r2) + &(&x * &r2).scale(12.0)) - &(&x * &x).scale(4.0);
    let sq = disc.sqrt();
    let num = &(&(&x * &r2).scale(5.0) + &(&r2 * &r2)) + &(&(&x + &r2) * &sq);
    let den = (&r2 - &x).scale(2.0);
    let phi = num.div(&den);
    let mut h = &psi - &phi;
    // psi and phi both start at s2
    h.coef[0] = 0.0;
    h.derivatives()
}

fn profile_positive(h: &HProfile) -> bool {
    (1..=DELTA_GRID).all(|i| {
        let (p, dp) = h.taylor(h.delta * i as f64 / DELTA_GRID as f64);
        p > 0.0 && dp > 0.0
    })
}

/// `(x, P(x, T x, T^2 x))` at mass midpoints of the first DDI branch.
pub(crate) fn graph_samples(rho: &RadialDensity, n: usize) -> Result<Vec<(f64, f64)>> {
    let map = SeidlMap::build(rho, SeidlPattern::DDI)?;
    (0..n)
        .map(|k| {
            let x = rho.quantile((k as f64 + 0.5) / (3 * n) as f64);
            let o = map.orbit(x);
            Ok((x, alignment_condition(&Radii::new(o[0], o[1], o[2])?)))
        })
        .collect()
}

/// Density equal to `rho1`, `rho2` on the first two tertiles and to `(phi + h)_# rho1` beyond `s2`.
pub fn build_counterexample_density(
    rho1: &PolySegment,
    rho2: &PolySegment,
    k: usize,
) -> Result<RadialDensity> {
    if k > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds {MAX_ORDER}"
        )));
    }
    let (a, s1) = rho1.interval();
    let (s1b, s2) = rho2.interval();
    if a != 0.0 || s1b != s1 {
        return Err(Error::InvalidArgument(format!(
            "pieces must cover [0, s1] and [s1, s2]; got [{a}, {s1}] and [{s1b}, {s2}]"
        )));
    }
    for (name, p) in [("rho1", rho1), ("rho2", rho2)] {
        if (p.mass() - 1.0 / 3.0).abs() > MASS_TOL {
            return Err(Error::InvalidDensity(format!(
                "{name} has mass {}, not 1/3",
                p.mass()
            )));
        }
        if p.sampled_min() <= 0.0 {
            return Err(Error::InvalidDensity(format!(
                "{name} is not strictly positive"
            )));
        }
    }
    let (l, r) = (rho1.eval(s1), rho2.eval(s1));
    if (l - r).abs() > 1e-9 * l.abs().max(1.0) {
        return Err(Error::InvalidDensity(format!(
            "pieces disagree at s1: {l} vs {r}"
        )));
    }
    if !ratio_gate(s1, s2) {
        return Err(ratio_failure(s1, s2));
    }
    let (rho0, rho_s2) = (rho1.eval(0.0), rho2.eval(s2));
    if !seven_halves_gate(rho0, rho_s2) {
        return Err(Error::GateFailed(format!(
            "seven halves: rho(0)/rho(s2) = {} must exceed 7/2",
            rho0 / rho_s2
        )));
    }

    let mut h = HProfile {
        jet: h_jet(rho1, rho2, k + 1),
        delta: s1,
    };
    let mut found = false;
    for _ in 0..60 {
        if profile_positive(&h) {
            found = true;
            break;
        }
        h.delta *= 0.5;
    }
    if !found {
        return Err(Error::JetNotPositive(format!("jet {:?}", h.jet)));
    }

    let rho = RadialDensity::new(
        vec![Segment::Poly(rho1.clone()), Segment::Poly(rho2.clone())],
        Some(PushforwardTail { s1, s2, h }),
    )?;
    for i in 0..MONOTONE_GRID {
        let x = s1 * i as f64 / MONOTONE_GRID as f64;
        let d = rho.psi_prime(x);
        if !(d > 0.0) {
            return Err(Error::TailNotMonotone(format!("psi'({x}) = {d}")));
        }
    }
    let bad: Vec<f64> = graph_samples(&rho, GRAPH_SAMPLES)?
        .into_iter()
        .filter(|&(_, p)| p < -1e-9)
        .map(|(x, _)| x)
        .collect();
    if !bad.is_empty() {
        return Err(Error::ConditionViolated(bad));
    }
    let report = matching_report(&rho, k)?;
    if !report.passed {
        return Err(Error::InvalidDensity(format!(
            "C^{k} matching at s2 failed: left {:?}, right {:?}",
            report.left, report.right
        )));
    }
    Ok(rho)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub s2: f64,
    pub order: usize,
    /// One-sided derivative estimates `rho^(j)(s2-)`, `j = 0..=order`.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub tolerance: Vec<f64>,
    pub passed: bool,
}

const FD_STEP: [f64; MAX_ORDER + 1] = [0.0, 1e-4, 1e-3, 3e-3, 1e-2];
const FD_TOL: [f64; MAX_ORDER + 1] = [1e-8, 1e-6, 1e-4, 1e-3, 1e-2];

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `j`-th one-sided divided difference at `x0` (`dir = +1` forward, `-1` backward),
/// Richardson-extrapolated over steps `h` and `h / 10`.
fn one_sided(f: &dyn Fn(f64) -> f64, f0: f64, x0: f64, dir: f64, j: usize, h: f64) -> f64 {
    let d = |h: f64| {
        let mut s = 0.0;
        for i in 0..=j {
            let v = if i == 0 {
                f0
            } else {
                f(x0 + dir * i as f64 * h)
            };
            let sign = if (j - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            s += sign * binom(j, i) * v;
        }
        s / (dir * h).powi(j as i32)
    };
    (10.0 * d(h / 10.0) - d(h)) / 9.0
}

/// Compares one-sided derivatives of orders `0..=order` across `s2` by divided differences.
pub fn matching_report(rho: &RadialDensity, order: usize) -> Result<MatchingReport> {
    let tail = rho
        .tail()
        .ok_or_else(|| Error::InvalidArgument("density has no pushforward tail".into()))?;
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "order {order} exceeds {MAX_ORDER}"
        )));
    }
    let s2 = tail.s2;
    let last = rho.segments().last().expect("body is nonempty").clone();
    let left_f = move |x: f64| last.eval(x);
    let right_f = |x: f64| rho.pdf(x);
    let (l0, r0) = (left_f(s2), right_f(s2));
    let mut left = vec![l0];
    let mut right = vec![r0];
    for j in 1..=order {
        left.push(one_sided(&left_f, l0, s2, -1.0, j, FD_STEP[j]));
        right.push(one_sided(&right_f, r0, s2, 1.0, j, FD_STEP[j]));
    }
    let tolerance: Vec<f64> = (0..=order)
        .map(|j| FD_TOL[j] * left[j].abs().max(1.0))
        .collect();
    let passed = (0..=order).all(|j| (left[j] - right[j]).abs() <= tolerance[j]);
    Ok(MatchingReport {
        s2,
        order,
        left,
        right,
        tolerance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_jet_value() {
        let (r1, r2) = default_pieces(0.9, 1.0, 4.0).unwrap();
        let jet = h_jet(&r1, &r2, 2);
        assert_eq!(jet[0], 0.0);
        assert!((jet[1] - 1.0).abs() < 1e-12, "{jet:?}");
        assert!((r1.eval(0.0) / r2.eval(1.0) - 4.0).abs() < 1e-12);
        assert!((r1.eval(0.9) - r2.eval(0.9)).abs() < 1e-12);
    }

    #[test]
    fn default_density_builds() {
        let rho = CounterexampleSpec::default().build().unwrap();
        let t = rho.tertiles().unwrap();
        assert!((t.s1 - 0.9).abs() < 1e-12 && (t.s2 - 1.0).abs() < 1e-12);
        let rep = matching_report(&rho, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn gate_failures() {
        let spec = CounterexampleSpec {
            s1: 0.8,
            ..Default::default()
        };
        assert!(matches!(spec.build(), Err(Error::GateFailed(_))));
        let (r1, r2) = default_pieces(0.9, 1.0, 3.0).unwrap();
        assert!(matches!(
            build_counterexample_density(&r1, &r2, 1),
            Err(Error::GateFailed(_))
        ));
    }
}
