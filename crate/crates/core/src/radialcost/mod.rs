//! Planar three-particle Coulomb cost at fixed radii.
//!
//! Particle 1 sits on the positive x-axis, particles 2 and 3 at angles
//! `alpha` and `beta`. The angular cost is
//! `f(alpha, beta) = F12(alpha) + F13(beta) + F23(alpha - beta)` with
//! `Fij(t) = Dij(t)^(-1/2)` and `Dij(t) = ri^2 + rj^2 - 2 ri rj cos t`.
//! The radial cost is its minimum over the torus.

mod curves;
mod minimize;
mod profile;
mod stationary;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use curves::{trace_implicit_curves, ImplicitCurves};
pub use minimize::{radial_cost, MinimizeOptions, RadialMin};
pub use profile::{g_profile, lemma_h_aux, lemma_h_roots, GProfile, LemmaHRoots};
pub use stationary::{
    find_stationary_points, StationaryKind, StationaryOptions, StationaryPoint, StationaryReport,
};

/// Three nonnegative radial coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl Radii {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        let r = Radii { r1, r2, r3 };
        if r.as_array().iter().all(|x| x.is_finite() && *x >= 0.0) {
            Ok(r)
        } else {
            Err(Error::InvalidRadii([r1, r2, r3]))
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    /// `0 < r1 < r2 < r3`.
    pub fn is_strictly_ordered(&self) -> bool {
        0.0 < self.r1 && self.r1 < self.r2 && self.r2 < self.r3
    }

    pub(crate) fn require_strictly_ordered(&self) -> Result<()> {
        if self.is_strictly_ordered() {
            Ok(())
        } else {
            Err(Error::DegenerateRadii(format!(
                "expected 0 < r1 < r2 < r3, got {:?}",
                self.as_array()
            )))
        }
    }

    pub fn scaled(&self, lambda: f64) -> Radii {
        Radii {
            r1: self.r1 * lambda,
            r2: self.r2 * lambda,
            r3: self.r3 * lambda,
        }
    }
}

/// Map an angle to its representative in `[-pi, pi)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI);
    // rem_euclid may round up to the modulus itself
    if t >= 2.0 * PI {
        -PI
    } else {
        t - PI
    }
}

/// Point on the torus: directions of particles 2 and 3 relative to particle 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl AngularConfig {
    /// Canonicalized configuration.
    pub fn new(alpha: f64, beta: f64) -> Self {
        AngularConfig {
            alpha: canonical_angle(alpha),
            beta: canonical_angle(beta),
        }
    }

    pub fn canonical(&self) -> Self {
        Self::new(self.alpha, self.beta)
    }

    /// Geodesic distance on the flat torus.
    pub fn torus_distance(&self, other: &AngularConfig) -> f64 {
        let da = canonical_angle(self.alpha - other.alpha).abs();
        let db = canonical_angle(self.beta - other.beta).abs();
        da.hypot(db)
    }

    pub fn collinear() -> Self {
        Self::new(PI, 0.0)
    }

    pub fn equilateral() -> Self {
        Self::new(2.0 * PI / 3.0, 4.0 * PI / 3.0)
    }

    /// The four configurations `{0, pi}^2`.
    pub fn corners() -> [AngularConfig; 4] {
        [
            Self::new(0.0, 0.0),
            Self::new(0.0, PI),
            Self::new(PI, 0.0),
            Self::new(PI, PI),
        ]
    }
}

/// Pairwise inverse distances and their sum; `+inf` on coincidence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub f12: f64,
    pub f13: f64,
    pub f23: f64,
    pub total: f64,
}

/// `ri^2 + rj^2 - 2 ri rj cos(theta)`, evaluated as `(ri - rj)^2 + 4 ri rj sin^2(theta/2)`.
pub fn pair_distance_sq(ri: f64, rj: f64, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    let d = ri - rj;
    d * d + 4.0 * ri * rj * s * s
}

fn inverse_distance(ri: f64, rj: f64, theta: f64) -> f64 {
    let d = pair_distance_sq(ri, rj, theta);
    if d <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / d.sqrt()
    }
}

pub fn full_cost(r: &Radii, a: &AngularConfig) -> CostBreakdown {
    let f12 = inverse_distance(r.r1, r.r2, a.alpha);
    let f13 = inverse_distance(r.r1, r.r3, a.beta);
    let f23 = inverse_distance(r.r2, r.r3, a.alpha - a.beta);
    CostBreakdown {
        f12,
        f13,
        f23,
        total: f12 + f13 + f23,
    }
}

#[inline]
pub(crate) fn angular_cost(r: &Radii, alpha: f64, beta: f64) -> f64 {
    inverse_distance(r.r1, r.r2, alpha)
        + inverse_distance(r.r1, r.r3, beta)
        + inverse_distance(r.r2, r.r3, alpha - beta)
}

/// `Qij(t) = ri rj t^2 + (ri^2 + rj^2) t - 3 ri rj`.
pub fn q_poly(ri: f64, rj: f64, t: f64) -> f64 {
    ri * rj * t * t + (ri * ri + rj * rj) * t - 3.0 * ri * rj
}

/// `(F', F'')` of `F(theta) = D(theta)^(-1/2)`; `None` on coincidence.
fn pair_derivatives(ri: f64, rj: f64, theta: f64) -> Option<(f64, f64)> {
    let d = pair_distance_sq(ri, rj, theta);
    if d <= 0.0 {
        return None;
    }
    let rr = ri * rj;
    let d32 = d * d.sqrt();
    let d52 = d32 * d;
    let first = -rr * theta.sin() / d32;
    let second = -rr * q_poly(ri, rj, theta.cos()) / d52;
    Some((first, second))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradHess {
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

impl GradHess {
    pub fn det(&self) -> f64 {
        let h = &self.hessian;
        h[0][0] * h[1][1] - h[0][1] * h[1][0]
    }

    pub fn grad_norm(&self) -> f64 {
        self.gradient[0].hypot(self.gradient[1])
    }

    /// Eigenvalues of the symmetric Hessian, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        sym_eigen(&self.hessian).0
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix: ascending eigenvalues and unit eigenvectors.
pub(crate) fn sym_eigen(h: &[[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let lo = mean - rad;
    let hi = mean + rad;
    // eigenvector for the larger eigenvalue
    let v_hi = if b.abs() > 1e-300 {
        let v = [hi - c, b];
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    } else if a >= c {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let v_lo = [-v_hi[1], v_hi[0]];
    ([lo, hi], [v_lo, v_hi])
}

pub fn grad_hess(r: &Radii, a: &AngularConfig) -> Result<GradHess> {
    grad_hess_at(r, a.alpha, a.beta)
}

pub(crate) fn grad_hess_at(r: &Radii, alpha: f64, beta: f64) -> Result<GradHess> {
    let (d12, dd12) =
        pair_derivatives(r.r1, r.r2, alpha).ok_or(Error::SingularConfiguration(1, 2))?;
    let (d13, dd13) =
        pair_derivatives(r.r1, r.r3, beta).ok_or(Error::SingularConfiguration(1, 3))?;
    let (d23, dd23) =
        pair_derivatives(r.r2, r.r3, alpha - beta).ok_or(Error::SingularConfiguration(2, 3))?;
    Ok(GradHess {
        gradient: [d12 + d23, d13 - d23],
        hessian: [[dd12 + dd23, -dd23], [-dd23, dd13 + dd23]],
    })
}

/// `P(r) = r2 (r3 - r1)^3 - r1 (r3 + r2)^3 - r3 (r1 + r2)^3`.
///
/// The collinear configuration `(pi, 0)` is the unique minimizer for
/// `0 < r1 < r2 < r3` exactly when `P(r) >= 0`.
pub fn alignment_condition(r: &Radii) -> f64 {
    let (r1, r2, r3) = (r.r1, r.r2, r.r3);
    r2 * (r3 - r1).powi(3) - r1 * (r3 + r2).powi(3) - r3 * (r1 + r2).powi(3)
}

/// Smallest admissible `r3`: `alignment_condition(r1, r2, r3) >= 0` iff `r3 >= phi(r1, r2)`.
pub fn phi_threshold(r1: f64, r2: f64) -> Result<f64> {
    if !(r1.is_finite() && r2.is_finite()) || r1 < 0.0 || r1 >= r2 {
        return Err(Error::DegenerateRadii(format!(
            "phi threshold needs 0 <= r1 < r2, got ({r1}, {r2})"
        )));
    }
    Ok(phi_raw(r1, r2))
}

#[inline]
pub(crate) fn phi_raw(r1: f64, r2: f64) -> f64 {
    let disc = r2 * r2 + 12.0 * r1 * r2 - 4.0 * r1 * r1;
    (5.0 * r1 * r2 + r2 * r2 + (r1 + r2) * disc.sqrt()) / (2.0 * (r2 - r1))
}

/// Partial derivatives `(d phi / d r1, d phi / d r2)`.
pub fn phi_gradient(r1: f64, r2: f64) -> [f64; 2] {
    let disc = r2 * r2 + 12.0 * r1 * r2 - 4.0 * r1 * r1;
    let sq = disc.sqrt();
    let num = 5.0 * r1 * r2 + r2 * r2 + (r1 + r2) * sq;
    let n1 = 5.0 * r2 + sq + (r1 + r2) * (12.0 * r2 - 8.0 * r1) / (2.0 * sq);
    let n2 = 5.0 * r1 + 2.0 * r2 + sq + (r1 + r2) * (2.0 * r2 + 12.0 * r1) / (2.0 * sq);
    let den = 2.0 * (r2 - r1);
    let dd = den * (r2 - r1);
    [n1 / den + num / dd, n2 / den - num / dd]
}

/// Collinear cost `C(r1, r2, r3, pi, 0) = 1/(r1+r2) + 1/(r2+r3) + 1/(r3-r1)`.
pub fn c_pi(r: &Radii) -> f64 {
    let d = (r.r3 - r.r1).abs();
    let t3 = if d == 0.0 { f64::INFINITY } else { 1.0 / d };
    1.0 / (r.r1 + r.r2) + 1.0 / (r.r2 + r.r3) + t3
}

/// Cost at the equilateral angles `(2pi/3, 4pi/3)`.
pub fn c_delta(r: &Radii) -> f64 {
    full_cost(r, &AngularConfig::equilateral()).total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerValues {
    pub f_0_0: f64,
    pub f_0_pi: f64,
    pub f_pi_0: f64,
    pub f_pi_pi: f64,
}

impl CornerValues {
    pub fn as_array(&self) -> [f64; 4] {
        [self.f_0_0, self.f_0_pi, self.f_pi_0, self.f_pi_pi]
    }
}

/// The cost at `{0, pi}^2` in closed form, for strictly ordered radii.
pub fn corner_values(r: &Radii) -> Result<CornerValues> {
    r.require_strictly_ordered()?;
    let (r1, r2, r3) = (r.r1, r.r2, r.r3);
    Ok(CornerValues {
        f_0_0: 1.0 / (r2 - r1) + 1.0 / (r3 - r2) + 1.0 / (r3 - r1),
        f_0_pi: 1.0 / (r2 - r1) + 1.0 / (r3 + r2) + 1.0 / (r3 + r1),
        f_pi_0: 1.0 / (r2 + r1) + 1.0 / (r3 + r2) + 1.0 / (r3 - r1),
        f_pi_pi: 1.0 / (r2 + r1) + 1.0 / (r3 - r2) + 1.0 / (r3 + r1),
    })
}

/// `det Hf(pi, 0)` in the factored closed form.
pub fn collinear_hessian_det(r: &Radii) -> f64 {
    let (r1, r2, r3) = (r.r1, r.r2, r.r3);
    r1 * r2 * r3 * alignment_condition(r)
        / ((r1 + r2).powi(3) * (r2 + r3).powi(3) * (r3 - r1).powi(3))
}

/// Slopes at `beta = 0` of the two implicit branches through `(pi, 0)`:
/// `(alpha_pi'(0), alpha_hat_pi'(0))`.
pub fn branch_slopes(r: &Radii) -> (f64, f64) {
    let (r1, r2, r3) = (r.r1, r.r2, r.r3);
    let base = r2 * (r3 - r1).powi(3);
    let alpha_pi = r3 * (r1 + r2).powi(3) / base;
    let alpha_hat_pi = (base - r1 * (r2 + r3).powi(3)) / base;
    (alpha_pi, alpha_hat_pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: f64, b: f64, c: f64) -> Radii {
        Radii::new(a, b, c).unwrap()
    }

    #[test]
    fn pair_distance_examples() {
        assert_eq!(pair_distance_sq(1.0, 2.0, PI), 9.0);
        assert_eq!(pair_distance_sq(1.0, 3.0, 0.0), 4.0);
        assert!((pair_distance_sq(1.0, 2.0, PI / 2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn full_cost_examples() {
        let c = full_cost(&r(1.0, 2.0, 3.0), &AngularConfig::new(PI, 0.0));
        assert!((c.total - (1.0 / 3.0 + 1.0 / 5.0 + 0.5)).abs() < 1e-15);
        let inf = full_cost(&r(1.0, 1.0, 2.0), &AngularConfig::new(0.0, 0.0));
        assert!(inf.f12.is_infinite() && inf.total.is_infinite());
        let eq = full_cost(&r(1.0, 1.0, 1.0), &AngularConfig::equilateral());
        assert!((eq.total - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn radii_validation() {
        assert!(Radii::new(-1.0, 1.0, 1.0).is_err());
        assert!(Radii::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(Radii::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn canonicalization_is_idempotent() {
        for &t in &[-7.0, -PI, 0.0, PI, 3.0 * PI, 1e-17, -1e-17, 100.0] {
            let c = canonical_angle(t);
            assert!((-PI..PI).contains(&c), "{t} -> {c}");
            assert_eq!(canonical_angle(c), c);
        }
        let a = AngularConfig::new(0.3, -1.2);
        let b = AngularConfig::new(0.3 + 2.0 * PI, -1.2 + 2.0 * PI);
        assert!(a.torus_distance(&b) < 1e-14);
    }

    #[test]
    fn alignment_examples() {
        assert_eq!(alignment_condition(&r(1.0, 2.0, 15.0)), 170.0);
        assert_eq!(alignment_condition(&r(1.0, 2.0, 14.0)), -80.0);
        assert_eq!(alignment_condition(&r(2.0, 4.0, 30.0)), 2720.0);
    }

    #[test]
    fn phi_examples() {
        let p = phi_threshold(1.0, 2.0).unwrap();
        assert!((p - 14.348469228349534).abs() < 1e-12, "{p}");
        assert!((phi_threshold(0.0, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((phi_threshold(2.0, 4.0).unwrap() - 2.0 * p).abs() < 1e-12);
        assert!(matches!(
            phi_threshold(2.0, 2.0),
            Err(Error::DegenerateRadii(_))
        ));
        assert!(phi_threshold(3.0, 2.0).is_err());
    }

    #[test]
    fn phi_gradient_matches_finite_differences() {
        for &(a, b) in &[(0.3, 1.0), (1.0, 2.0), (0.05, 0.9), (0.0, 1.0)] {
            let g = phi_gradient(a, b);
            let h = 1e-6;
            let fd1 = if a > h {
                (phi_raw(a + h, b) - phi_raw(a - h, b)) / (2.0 * h)
            } else {
                (-3.0 * phi_raw(a, b) + 4.0 * phi_raw(a + h, b) - phi_raw(a + 2.0 * h, b))
                    / (2.0 * h)
            };
            let fd2 = (phi_raw(a, b + h) - phi_raw(a, b - h)) / (2.0 * h);
            assert!((g[0] - fd1).abs() < 1e-5 * (1.0 + fd1.abs()), "{a} {b}");
            assert!((g[1] - fd2).abs() < 1e-5 * (1.0 + fd2.abs()), "{a} {b}");
        }
        // at r1 = 0 the gradient is (7, 1)
        let g = phi_gradient(0.0, 1.0);
        assert!((g[0] - 7.0).abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c_pi_and_c_delta() {
        assert!((c_pi(&r(1.0, 2.0, 15.0)) - (1.0 / 3.0 + 1.0 / 17.0 + 1.0 / 14.0)).abs() < 1e-15);
        assert!((c_pi(&r(1.0, 2.0, 3.0)) - 1.0333333333333333).abs() < 1e-12);
        assert!(c_pi(&r(1.0, 2.0, 1.0)).is_infinite());
        assert!((c_delta(&r(1.0, 1.0, 1.0)) - 3f64.sqrt()).abs() < 1e-14);
        assert!((c_delta(&r(0.9, 0.9, 0.9)) - 1.9245008972987527).abs() < 1e-12);
        let x = r(1.0, 2.0, 3.0);
        assert!((c_pi(&x) - full_cost(&x, &AngularConfig::collinear()).total).abs() < 1e-15);
    }

    #[test]
    fn corner_value_examples() {
        let c = corner_values(&r(1.0, 2.0, 3.0)).unwrap();
        assert!((c.f_0_0 - 2.5).abs() < 1e-15);
        assert!((c.f_0_pi - 1.45).abs() < 1e-15);
        assert!((c.f_pi_0 - 1.0333333333333333).abs() < 1e-15);
        assert!((c.f_pi_pi - 1.5833333333333333).abs() < 1e-15);
        // closed forms agree with the cost function
        let rr = r(1.0, 2.0, 3.0);
        for (cfg, v) in AngularConfig::corners().iter().zip(c.as_array()) {
            assert!((full_cost(&rr, cfg).total - v).abs() < 1e-14);
        }
        let c = corner_values(&r(1.0, 2.0, 15.0)).unwrap();
        let min = c.as_array().iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, c.f_pi_0);
        assert!(corner_values(&r(1.0, 1.0, 2.0)).is_err());
    }

    #[test]
    fn grad_hess_at_collinear() {
        let gh = grad_hess(&r(1.0, 2.0, 3.0), &AngularConfig::new(PI, 0.0)).unwrap();
        assert!(gh.grad_norm() < 1e-15);
        let gh = grad_hess(&r(1.0, 2.0, 15.0), &AngularConfig::new(PI, 0.0)).unwrap();
        assert!(gh.det() > 0.0);
        let closed = collinear_hessian_det(&r(1.0, 2.0, 15.0));
        assert!((gh.det() - closed).abs() < 1e-12 * closed.abs());
        assert!(matches!(
            grad_hess(&r(1.0, 1.0, 2.0), &AngularConfig::new(0.0, 1.0)),
            Err(Error::SingularConfiguration(1, 2))
        ));
    }

    #[test]
    fn hessian_matches_central_differences() {
        let rr = r(1.0, 2.0, 3.0);
        let (a, b) = (1.0, 0.5);
        let f = |x: f64, y: f64| angular_cost(&rr, x, y);
        let second = |h: f64| {
            let fxx = (f(a + h, b) - 2.0 * f(a, b) + f(a - h, b)) / (h * h);
            let fyy = (f(a, b + h) - 2.0 * f(a, b) + f(a, b - h)) / (h * h);
            let fxy = (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h))
                / (4.0 * h * h);
            [fxx, fyy, fxy]
        };
        // Richardson extrapolation of the central stencils
        let (c1, c2) = (second(1e-3), second(5e-4));
        let want: Vec<f64> = (0..3).map(|k| (4.0 * c2[k] - c1[k]) / 3.0).collect();
        let gh = grad_hess_at(&rr, a, b).unwrap();
        let got = [gh.hessian[0][0], gh.hessian[1][1], gh.hessian[0][1]];
        for k in 0..3 {
            assert!(
                (got[k] - want[k]).abs() <= 1e-6 * want[k].abs().max(1e-3),
                "{got:?} {want:?}"
            );
        }
    }

    #[test]
    fn sym_eigen_reconstructs() {
        let h = [[2.0, -0.7], [-0.7, 0.3]];
        let (l, v) = sym_eigen(&h);
        assert!(l[0] <= l[1]);
        for k in 0..2 {
            let hv = [
                h[0][0] * v[k][0] + h[0][1] * v[k][1],
                h[1][0] * v[k][0] + h[1][1] * v[k][1],
            ];
            assert!((hv[0] - l[k] * v[k][0]).abs() < 1e-14);
            assert!((hv[1] - l[k] * v[k][1]).abs() < 1e-14);
        }
    }

    #[test]
    fn slope_ordering_matches_condition() {
        for &x in &[
            (1.0, 2.0, 15.0),
            (1.0, 2.0, 14.0),
            (0.5, 0.6, 30.0),
            (1.0, 3.0, 10.0),
        ] {
            let rr = r(x.0, x.1, x.2);
            let (a, ah) = branch_slopes(&rr);
            assert_eq!(a <= ah, alignment_condition(&rr) >= 0.0);
        }
    }
}
