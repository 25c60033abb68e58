//! Numerical continuation of the curves on which one component of the
//! stationary system vanishes, for `beta` in `(0, pi)`.
//!
//! Summing the two equations of `grad f = 0` gives `g12(alpha) + g13(beta) = 0`,
//! whose two solutions in `(pi, 2 pi)` are `alpha_pi` (near `pi`) and `alpha_0`
//! (near `2 pi`). The second equation `g13(beta) = g23(alpha - beta)` has the
//! solutions `alpha_hat_pi` and `alpha_hat_0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::profile::{g_value, theta_crit};
use super::{branch_slopes, Radii};
use crate::error::Result;
use crate::roots::brent;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitCurves {
    pub beta: Vec<f64>,
    /// Values lie in `[pi, 2 pi]`, not canonicalized.
    pub alpha_pi: Vec<f64>,
    pub alpha_0: Vec<f64>,
    pub alpha_hat_pi: Vec<f64>,
    pub alpha_hat_0: Vec<f64>,
    pub slope_alpha_pi: f64,
    pub slope_alpha_hat_pi: f64,
    /// Sample indices where `pi <= alpha_pi <= pi + slope_alpha_pi * beta` fails.
    pub alpha_pi_violations: Vec<usize>,
    /// Sample indices where `pi + slope_alpha_hat_pi * beta <= alpha_hat_pi <= pi + beta` fails.
    pub alpha_hat_pi_violations: Vec<usize>,
}

impl ImplicitCurves {
    pub fn confined(&self) -> bool {
        self.alpha_pi_violations.is_empty() && self.alpha_hat_pi_violations.is_empty()
    }
}

const CONFINE_TOL: f64 = 1e-12;

pub fn trace_implicit_curves(r: &Radii, n_beta: usize) -> Result<ImplicitCurves> {
    r.require_strictly_ordered()?;
    let (r1, r2, r3) = (r.r1, r.r2, r.r3);
    let t12 = theta_crit(r1, r2);
    let t23 = theta_crit(r2, r3);
    let (s_pi, s_hat) = branch_slopes(r);
    let n = n_beta.max(2);
    let xtol = 1e-15;

    let mut out = ImplicitCurves {
        beta: Vec::with_capacity(n),
        alpha_pi: Vec::with_capacity(n),
        alpha_0: Vec::with_capacity(n),
        alpha_hat_pi: Vec::with_capacity(n),
        alpha_hat_0: Vec::with_capacity(n),
        slope_alpha_pi: s_pi,
        slope_alpha_hat_pi: s_hat,
        alpha_pi_violations: Vec::new(),
        alpha_hat_pi_violations: Vec::new(),
    };
    for k in 1..=n {
        let beta = PI * k as f64 / (n + 1) as f64;
        let g13 = g_value(r1, r3, beta);
        let e1 = |a: f64| g_value(r1, r2, a) + g13;
        let a_pi = brent(e1, PI, 2.0 * PI - t12, xtol)?;
        let a_0 = brent(e1, 2.0 * PI - t12, 2.0 * PI, xtol)?;
        // g23(alpha - beta) = -g23(2 pi + beta - alpha)
        let e2 = |t: f64| g_value(r2, r3, t) + g13;
        let ah_pi = 2.0 * PI + beta - brent(e2, PI, 2.0 * PI - t23, xtol)?;
        let ah_0 = 2.0 * PI + beta - brent(e2, 2.0 * PI - t23, 2.0 * PI, xtol)?;

        let i = k - 1;
        if !(a_pi >= PI - CONFINE_TOL && a_pi <= PI + s_pi * beta + CONFINE_TOL) {
            out.alpha_pi_violations.push(i);
        }
        if !(ah_pi >= PI + s_hat * beta - CONFINE_TOL && ah_pi <= PI + beta + CONFINE_TOL) {
            out.alpha_hat_pi_violations.push(i);
        }
        out.beta.push(beta);
        out.alpha_pi.push(a_pi);
        out.alpha_0.push(a_0);
        out.alpha_hat_pi.push(ah_pi);
        out.alpha_hat_0.push(ah_0);
    }
    Ok(out)
}
