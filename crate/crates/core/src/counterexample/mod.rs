//! Densities for which no map of class `{I,D}^3` is optimal, the epsilon-M
//! feasibility construction, and swap-violation certificates.

mod build;
mod violation;

use num::{BigRational, Signed};
use serde::{Deserialize, Serialize};

use crate::density::{RadialDensity, SeidlMap, SeidlPattern};
use crate::error::{Error, Result};
use crate::radialcost::{alignment_condition, Radii};

pub use build::{
    build_counterexample_density, default_pieces, matching_report, CounterexampleSpec,
    MatchingReport, MAX_ORDER,
};
pub use violation::{
    find_violation, refute_class_T, Certificate, PatternOutcome, RefutationReport, Region,
};

/// `(1 + 2 sqrt 3) / 5`.
pub const RATIO_THRESHOLD: f64 = 0.892_820_323_027_550_9;

/// Relative guard band for gates on floating-point inputs.
pub const GATE_GUARD: f64 = 1e-12;

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// `s1 / s2 > (1 + 2 sqrt 3) / 5` for exact rationals, i.e. `5 s1 - s2 > 0` and
/// `(5 s1 - s2)^2 > 12 s2^2`.
pub fn ratio_gate_exact(s1: &BigRational, s2: &BigRational) -> bool {
    let five = BigRational::from_integer(5.into());
    let twelve = BigRational::from_integer(12.into());
    let d = &five * s1 - s2;
    d.is_positive() && &d * &d > twelve * s2 * s2
}

/// Ratio gate on decimal inputs: the exact test must pass with a relative margin of [`GATE_GUARD`].
pub fn ratio_gate(s1: f64, s2: f64) -> bool {
    if !(s1 > 0.0 && s2 > s1 && s2.is_finite()) {
        return false;
    }
    let (a, b) = (rational(s1), rational(s2));
    let five = BigRational::from_integer(5.into());
    let twelve = BigRational::from_integer(12.into());
    let d = &five * &a - &b;
    let guard = rational(GATE_GUARD) * &twelve * &b * &b;
    d.is_positive() && &d * &d - twelve * &b * &b > guard
}

/// `rho(0) / rho(s2) > 7/2`, exactly `2 rho(0) - 7 rho(s2) > 0`, with the guard band.
pub fn seven_halves_gate(rho0: f64, rho_s2: f64) -> bool {
    if !(rho0.is_finite() && rho_s2 > 0.0 && rho_s2.is_finite()) {
        return false;
    }
    let two = BigRational::from_integer(2.into());
    let seven = BigRational::from_integer(7.into());
    let d = two * rational(rho0) - &seven * rational(rho_s2);
    d > rational(GATE_GUARD) * seven * rational(rho_s2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    pub ratio: bool,
    pub seven_halves: bool,
    pub rho0_over_rho_s2: f64,
}

/// Both gates on a density, with `rho(s2)` taken from the left.
pub fn gates(rho: &RadialDensity) -> Result<Gates> {
    let t = rho.tertiles()?;
    let rho0 = rho.pdf(rho.support().0);
    let rho_s2 = rho
        .segments()
        .iter()
        .find(|s| {
            let (a, b) = s.interval();
            a < t.s2 && t.s2 <= b
        })
        .map_or_else(|| rho.pdf(t.s2), |s| s.eval(t.s2));
    Ok(Gates {
        ratio: ratio_gate(t.s1, t.s2),
        seven_halves: seven_halves_gate(rho0, rho_s2),
        rho0_over_rho_s2: rho0 / rho_s2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsM {
    pub eps: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Left minus right side of the full inequality.
    pub margin: f64,
}

/// `2/(s2+e) + 1/(2 s2+e) + 1/(2 s1+e) - sqrt3/(s1-e) - 1/s1`.
pub fn eps_m_partial_margin(s1: f64, s2: f64, eps: f64) -> f64 {
    2.0 / (s2 + eps) + 1.0 / (2.0 * s2 + eps) + 1.0 / (2.0 * s1 + eps)
        - 3f64.sqrt() / (s1 - eps)
        - 1.0 / s1
}

/// Full margin including `-1/(M - eps)`.
pub fn eps_m_margin(s1: f64, s2: f64, eps: f64, m: f64) -> f64 {
    eps_m_partial_margin(s1, s2, eps) - 1.0 / (m - eps)
}

/// Halves `eps` from `(s2 - s1)/2` until the partial margin is at least half its
/// `eps = 0` value `delta0`, then sets `M = eps + 2/delta`.
pub fn find_eps_m(s1: f64, s2: f64) -> Result<EpsM> {
    if !(s1 > 0.0 && s2 > s1) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < s1 < s2, got ({s1}, {s2})"
        )));
    }
    if !ratio_gate(s1, s2) {
        return Err(Error::Infeasible(format!(
            "s1/s2 = {} does not exceed (1 + 2 sqrt 3)/5; the eps = 0, M = inf margin is {}",
            s1 / s2,
            eps_m_partial_margin(s1, s2, 0.0)
        )));
    }
    let delta0 = eps_m_partial_margin(s1, s2, 0.0);
    let mut eps = 0.5 * (s2 - s1);
    for _ in 0..200 {
        let delta = eps_m_partial_margin(s1, s2, eps);
        if eps < s1 && delta >= 0.5 * delta0 {
            let m = eps + 2.0 / delta;
            let margin = eps_m_margin(s1, s2, eps, m);
            if margin > 0.0 {
                return Ok(EpsM { eps, m, margin });
            }
        }
        eps *= 0.5;
    }
    Err(Error::Infeasible("no eps found".into()))
}

/// Minimum of `P(x, T x, T^2 x)` over `n` mass-midpoint samples of the first DDI branch.
pub fn check_graph_condition(rho: &RadialDensity, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let map = SeidlMap::build(rho, SeidlPattern::DDI)?;
    let mut worst = f64::INFINITY;
    for k in 0..n {
        let x = rho.quantile((k as f64 + 0.5) / (3 * n) as f64);
        let o = map.orbit(x);
        let r = Radii::new(o[0], o[1], o[2])?;
        worst = worst.min(alignment_condition(&r));
    }
    Ok(worst)
}
