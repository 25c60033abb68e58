//! The one-angle profiles `g_ij = -F_ij'` and the auxiliary function of `cos(theta)`
//! whose shape controls the tangent-line bounds on the implicit branches.

use serde::{Deserialize, Serialize};

use super::{pair_distance_sq, q_poly};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GProfile {
    pub g: f64,
    pub g_prime: f64,
    /// Maximizer of `g` on `[0, pi]`, the root of `Q(cos theta)` in `(0, pi/2)`.
    pub theta_crit: f64,
}

fn check_pair(ri: f64, rj: f64) -> Result<()> {
    if !(ri.is_finite() && rj.is_finite()) || ri <= 0.0 || rj <= 0.0 {
        return Err(Error::DegenerateRadii(format!(
            "g profile needs positive radii, got ({ri}, {rj})"
        )));
    }
    if ri == rj {
        return Err(Error::EqualRadii(ri));
    }
    Ok(())
}

pub(crate) fn g_value(ri: f64, rj: f64, theta: f64) -> f64 {
    let d = pair_distance_sq(ri, rj, theta);
    ri * rj * theta.sin() / (d * d.sqrt())
}

pub(crate) fn g_derivative(ri: f64, rj: f64, theta: f64) -> f64 {
    let d = pair_distance_sq(ri, rj, theta);
    ri * rj * q_poly(ri, rj, theta.cos()) / (d * d * d.sqrt())
}

pub(crate) fn theta_crit(ri: f64, rj: f64) -> f64 {
    let (a, b) = (ri * ri, rj * rj);
    let cos = (-a - b + (a * a + 14.0 * a * b + b * b).sqrt()) / (2.0 * ri * rj);
    cos.clamp(-1.0, 1.0).acos()
}

/// `g_ij(theta)`, `g_ij'(theta)` and the critical angle `theta_ij`.
pub fn g_profile(ri: f64, rj: f64, theta: f64) -> Result<GProfile> {
    check_pair(ri, rj)?;
    Ok(GProfile {
        g: g_value(ri, rj, theta),
        g_prime: g_derivative(ri, rj, theta),
        theta_crit: theta_crit(ri, rj),
    })
}

/// `h(t) = ri rj Q(t) / (ri^2 + rj^2 - 2 ri rj t)^(5/2)`, so that `g'(theta) = h(cos theta)`.
/// Returns `(h, h', h'')` at `t`.
pub fn lemma_h_aux(ri: f64, rj: f64, t: f64) -> (f64, f64, f64) {
    let (a, b, p) = (ri * ri, rj * rj, ri * rj);
    let s = a + b;
    let base = s - 2.0 * p * t;
    let h = p * q_poly(ri, rj, t) / base.powf(2.5);
    let h1 = p * (p * p * t * t + 5.0 * p * s * t + a * a - 13.0 * a * b + b * b) / base.powf(3.5);
    let h2 =
        3.0 * p * p * (p * p * t * t + 9.0 * p * s * t + 4.0 * a * a - 27.0 * a * b + 4.0 * b * b)
            / base.powf(4.5);
    (h, h1, h2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaHRoots {
    /// Larger root of `h'`.
    pub sigma: f64,
    /// Larger root of `h''`.
    pub xi: f64,
    /// Smaller roots, both below `-1`.
    pub sigma_small: f64,
    pub xi_small: f64,
}

/// Roots of the numerators of `h'` and `h''` from their quadratic formulas.
pub fn lemma_h_roots(ri: f64, rj: f64) -> Result<LemmaHRoots> {
    check_pair(ri, rj)?;
    let (a, b, p) = (ri * ri, rj * rj, ri * rj);
    let s = a + b;
    let d1 = (21.0 * a * a + 102.0 * a * b + 21.0 * b * b).sqrt();
    let d2 = (65.0 * a * a + 270.0 * a * b + 65.0 * b * b).sqrt();
    Ok(LemmaHRoots {
        sigma: (-5.0 * s + d1) / (2.0 * p),
        sigma_small: (-5.0 * s - d1) / (2.0 * p),
        xi: (-9.0 * s + d2) / (2.0 * p),
        xi_small: (-9.0 * s - d2) / (2.0 * p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn critical_angle_example() {
        let p = g_profile(1.0, 2.0, 0.0).unwrap();
        assert_eq!(p.g, 0.0);
        let cos = (-5.0 + 73f64.sqrt()) / 4.0;
        assert!((cos - 0.8860009363293826).abs() < 1e-14);
        assert!((p.theta_crit - cos.acos()).abs() < 1e-14);
        assert!((p.theta_crit - 0.4821).abs() < 1e-4);
        // g' changes sign at the critical angle
        let t = p.theta_crit;
        assert!(g_derivative(1.0, 2.0, t - 1e-6) > 0.0);
        assert!(g_derivative(1.0, 2.0, t + 1e-6) < 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            g_profile(2.0, 2.0, 0.1),
            Err(Error::EqualRadii(_))
        ));
        assert!(g_profile(0.0, 2.0, 0.1).is_err());
        assert!(lemma_h_roots(1.0, 1.0).is_err());
    }

    #[test]
    fn g_derivative_matches_finite_differences() {
        for &t in &[0.1, 0.4821, 1.0, 2.5, 3.0] {
            let h = 1e-6;
            let fd = (g_value(1.0, 2.0, t + h) - g_value(1.0, 2.0, t - h)) / (2.0 * h);
            assert!((fd - g_derivative(1.0, 2.0, t)).abs() < 1e-7);
        }
    }

    #[test]
    fn g13_below_g12_under_condition() {
        // (1, 2, 15) satisfies the alignment condition
        for k in 0..=1000 {
            let t = PI * k as f64 / 1000.0;
            assert!(
                g_value(1.0, 15.0, t) <= g_value(1.0, 2.0, t) + 1e-15,
                "theta = {t}"
            );
            assert!(
                g_value(1.0, 15.0, t) <= g_value(2.0, 15.0, t) + 1e-15,
                "theta = {t}"
            );
        }
    }

    #[test]
    fn aux_derivatives_match_finite_differences() {
        for &(ri, rj) in &[(1.0, 2.0), (0.3, 5.0), (2.0, 2.5)] {
            for &t in &[-0.9, -0.3, 0.2, 0.8] {
                let e = 1e-6;
                let (_, h1, h2) = lemma_h_aux(ri, rj, t);
                let fd1 = (lemma_h_aux(ri, rj, t + e).0 - lemma_h_aux(ri, rj, t - e).0) / (2.0 * e);
                let fd2 = (lemma_h_aux(ri, rj, t + e).1 - lemma_h_aux(ri, rj, t - e).1) / (2.0 * e);
                assert!((h1 - fd1).abs() < 1e-5 * (1.0 + fd1.abs()), "{ri} {rj} {t}");
                assert!((h2 - fd2).abs() < 1e-5 * (1.0 + fd2.abs()), "{ri} {rj} {t}");
                // g'(theta) = h(cos theta)
                let th = t.acos();
                assert!((lemma_h_aux(ri, rj, t).0 - g_derivative(ri, rj, th)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn roots_are_roots() {
        let (ri, rj) = (0.7, 1.9);
        let rt = lemma_h_roots(ri, rj).unwrap();
        assert!(lemma_h_aux(ri, rj, rt.sigma).1.abs() < 1e-10);
        assert!(lemma_h_aux(ri, rj, rt.xi).2.abs() < 1e-10);
        assert!(rt.sigma_small < -1.0 && rt.xi_small < -1.0);
    }
}
