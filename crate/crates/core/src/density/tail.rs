//! The pushforward tail `rho_3 = psi_# rho_1`, with `psi(x) = phi(x, T(x)) + h(x)` on the first tertile.

use serde::{Deserialize, Serialize};

/// `C^infinity` step: 1 on `u <= 1/2`, 0 on `u >= 1`. Returns value and derivative.
pub fn smooth_step(u: f64) -> (f64, f64) {
    if u <= 0.5 {
        return (1.0, 0.0);
    }
    if u >= 1.0 {
        return (0.0, 0.0);
    }
    let v = 2.0 * u - 1.0;
    let e = |s: f64| (-1.0 / s).exp();
    let de = |s: f64| (-1.0 / s).exp() / (s * s);
    let (a, b) = (e(v), e(1.0 - v));
    let den = a + b;
    let sigma = a / den;
    let dsigma = (de(v) * b + a * de(1.0 - v)) / (den * den);
    (1.0 - sigma, -2.0 * dsigma)
}

/// `h = chi(x / delta) p(x) + (1 - chi(x / delta)) p(delta)` where `p` is the Taylor
/// polynomial of the jet `h(0), h'(0), ...` and `chi` is [`smooth_step`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HProfile {
    /// `jet[j] = h^(j)(0)`; `jet[0]` is zero.
    pub jet: Vec<f64>,
    pub delta: f64,
}

impl HProfile {
    /// Taylor polynomial and its derivative.
    pub fn taylor(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut pow = 1.0; // x^(j-1) / (j-1)!
        for (j, c) in self.jet.iter().enumerate().skip(1) {
            dp += c * pow;
            pow *= x / j as f64;
            p += c * pow;
        }
        (p, dp)
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (pd, _) = self.taylor(self.delta);
        if x >= self.delta {
            return (pd, 0.0);
        }
        let (p, dp) = self.taylor(x);
        let (chi, dchi) = smooth_step(x / self.delta);
        (pd + chi * (p - pd), dchi / self.delta * (p - pd) + chi * dp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardTail {
    pub s1: f64,
    pub s2: f64,
    pub h: HProfile,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_smooth_and_monotone() {
        let mut prev = 1.0;
        for k in 0..=1000 {
            let u = k as f64 / 1000.0 * 1.2;
            let (c, d) = smooth_step(u);
            assert!(c <= prev + 1e-15 && d <= 0.0);
            prev = c;
            let e = 1e-6;
            if u > 0.5 + 2.0 * e && u < 1.0 - 2.0 * e {
                let fd = (smooth_step(u + e).0 - smooth_step(u - e).0) / (2.0 * e);
                assert!((fd - d).abs() < 1e-6, "{u}");
            }
        }
        assert_eq!(smooth_step(0.75).0, 0.5);
    }

    #[test]
    fn profile_matches_jet_near_zero() {
        let h = HProfile {
            jet: vec![0.0, 1.0, -0.5, 2.0],
            delta: 0.2,
        };
        let x = 0.05;
        let want = x - 0.25 * x * x + x * x * x / 3.0;
        assert!((h.eval(x).0 - want).abs() < 1e-15);
        assert!((h.eval(x).1 - (1.0 - 0.5 * x + x * x)).abs() < 1e-15);
        let (pd, _) = h.taylor(0.2);
        assert_eq!(h.eval(0.5), (pd, 0.0));
    }
}
