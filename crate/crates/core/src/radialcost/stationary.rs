use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{grad_hess_at, sym_eigen, AngularConfig, Radii};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    /// Starts per axis.
    pub grid: usize,
    /// Gradient norm accepted as a stationary point.
    pub grad_tol: f64,
    /// Torus distance under which two points are merged.
    pub dedup_radius: f64,
    /// Distance to `{0, pi}^2` still counted as a corner.
    pub corner_tol: f64,
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            grid: 128,
            grad_tol: 1e-10,
            dedup_radius: 1e-6,
            corner_tol: 1e-6,
            max_iter: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryKind {
    Min,
    Max,
    Saddle,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub config: AngularConfig,
    pub kind: StationaryKind,
    pub residual: f64,
    pub eigenvalues: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub points: Vec<StationaryPoint>,
    pub only_corner_points: bool,
    pub starts: usize,
    /// Starts that did not converge to a stationary point.
    pub dropped: usize,
}

impl StationaryReport {
    pub fn find(&self, target: &AngularConfig, tol: f64) -> Option<&StationaryPoint> {
        self.points
            .iter()
            .find(|p| p.config.torus_distance(target) <= tol)
    }
}

fn classify(l: [f64; 2]) -> StationaryKind {
    let scale = l[0].abs().max(l[1].abs());
    let eps = 1e-8 * scale.max(1e-300);
    match (l[0] > eps, l[1] > eps, l[0] < -eps, l[1] < -eps) {
        (true, true, _, _) => StationaryKind::Min,
        (_, _, true, true) => StationaryKind::Max,
        _ if l[0] < -eps && l[1] > eps => StationaryKind::Saddle,
        _ => StationaryKind::Degenerate,
    }
}

/// Newton on `grad f = 0` with backtracking on the gradient norm.
fn newton(r: &Radii, mut a: f64, mut b: f64, opts: &StationaryOptions) -> Option<(f64, f64, f64)> {
    let mut gh = grad_hess_at(r, a, b).ok()?;
    let mut gn = gh.grad_norm();
    for _ in 0..opts.max_iter {
        if gn < opts.grad_tol {
            return Some((a, b, gn));
        }
        let h = gh.hessian;
        let det = gh.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let g = gh.gradient;
        let mut d = [
            -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
            -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
        ];
        let dn = d[0].hypot(d[1]);
        if dn > 0.5 {
            d = [0.5 * d[0] / dn, 0.5 * d[1] / dn];
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let (na, nb) = (a + t * d[0], b + t * d[1]);
            if let Ok(ng) = grad_hess_at(r, na, nb) {
                let nn = ng.grad_norm();
                if nn < gn {
                    a = na;
                    b = nb;
                    gh = ng;
                    gn = nn;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (gn < opts.grad_tol).then_some((a, b, gn))
}

fn is_corner(c: &AngularConfig, tol: f64) -> bool {
    AngularConfig::corners()
        .iter()
        .any(|k| k.torus_distance(c) <= tol)
}

/// All stationary points of the angular cost found by multi-start Newton.
pub fn find_stationary_points(r: &Radii, opts: &StationaryOptions) -> Result<StationaryReport> {
    r.require_strictly_ordered()?;
    let n = opts.grid.max(2);
    let step = 2.0 * PI / n as f64;
    // offset by half a cell so no start sits exactly on a corner
    let starts: Vec<(f64, f64)> = (0..n * n)
        .map(|k| {
            (
                -PI + step * ((k / n) as f64 + 0.5),
                -PI + step * ((k % n) as f64 + 0.5),
            )
        })
        .collect();
    let found: Vec<Option<(f64, f64, f64)>> = starts
        .par_iter()
        .map(|&(a, b)| newton(r, a, b, opts))
        .collect();
    // corners are stationary by symmetry; polish them exactly too
    let corner_hits: Vec<Option<(f64, f64, f64)>> = AngularConfig::corners()
        .iter()
        .map(|c| newton(r, c.alpha, c.beta, opts))
        .collect();

    let dropped = found.iter().filter(|x| x.is_none()).count();
    let mut points: Vec<StationaryPoint> = Vec::new();
    for (a, b, res) in corner_hits.into_iter().chain(found).flatten() {
        let config = AngularConfig::new(a, b);
        if let Some(p) = points
            .iter_mut()
            .find(|p| p.config.torus_distance(&config) <= opts.dedup_radius)
        {
            if res < p.residual {
                p.config = config;
                p.residual = res;
            }
            continue;
        }
        let gh = grad_hess_at(r, a, b)?;
        let eig = sym_eigen(&gh.hessian).0;
        points.push(StationaryPoint {
            config,
            kind: classify(eig),
            residual: res,
            eigenvalues: eig,
        });
    }
    points.sort_by(|p, q| {
        (p.config.alpha, p.config.beta)
            .partial_cmp(&(q.config.alpha, q.config.beta))
            .unwrap()
    });
    let only_corner_points = points.iter().all(|p| is_corner(&p.config, opts.corner_tol));
    Ok(StationaryReport {
        points,
        only_corner_points,
        starts: n * n,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radialcost::alignment_condition;

    fn report(a: f64, b: f64, c: f64) -> StationaryReport {
        let opts = StationaryOptions {
            grid: 48,
            ..Default::default()
        };
        find_stationary_points(&Radii::new(a, b, c).unwrap(), &opts).unwrap()
    }

    #[test]
    fn aligned_triple_has_only_corners() {
        let rep = report(1.0, 2.0, 15.0);
        assert!(rep.only_corner_points);
        assert_eq!(rep.points.len(), 4, "{:?}", rep.points);
        let p = rep.find(&AngularConfig::collinear(), 1e-9).unwrap();
        assert_eq!(p.kind, StationaryKind::Min);
        assert!(rep.points.iter().all(|p| p.residual < 1e-9));
    }

    #[test]
    fn violated_condition_has_interior_points() {
        let r = Radii::new(1.0, 2.0, 14.0).unwrap();
        assert!(alignment_condition(&r) < 0.0);
        let rep = report(1.0, 2.0, 14.0);
        let p = rep.find(&AngularConfig::collinear(), 1e-9).unwrap();
        assert!(matches!(
            p.kind,
            StationaryKind::Saddle | StationaryKind::Degenerate
        ));
        assert!(!rep.only_corner_points);
        assert!(rep
            .points
            .iter()
            .any(|p| p.kind == StationaryKind::Min && !is_corner(&p.config, 1e-6)));
    }

    #[test]
    fn requires_ordered_radii() {
        let r = Radii::new(1.0, 1.0, 2.0).unwrap();
        assert!(find_stationary_points(&r, &StationaryOptions::default()).is_err());
    }
}
