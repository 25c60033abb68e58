use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{angular_cost, grad_hess_at, inverse_distance, sym_eigen, AngularConfig, Radii};
use crate::error::{Error, Result};

/// Options for the global angular minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Nodes per axis of the coarse torus grid.
    pub grid: usize,
    /// Target accuracy of the returned minimum value.
    pub tol: f64,
    /// Number of grid local minima handed to Newton refinement.
    pub candidates: usize,
    pub max_newton: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grid: 256,
            tol: 1e-10,
            candidates: 8,
            max_newton: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialMin {
    pub value: f64,
    pub argmin: AngularConfig,
}

/// Radial cost `c(r1, r2, r3)`: global minimum of the angular cost over the torus.
///
/// Coarse grid scan, Newton refinement of the best grid local minima, then the
/// lexicographically smallest canonical argmin among (numerically) tied values.
pub fn radial_cost(r: &Radii, opts: &MinimizeOptions) -> Result<RadialMin> {
    let n = opts.grid.max(8);
    let step = 2.0 * PI / n as f64;
    let theta = |i: usize| -PI + step * i as f64;
    // alpha - beta on the grid is a multiple of the step, so F23 needs one table
    let f12: Vec<f64> = (0..n)
        .map(|i| inverse_distance(r.r1, r.r2, theta(i)))
        .collect();
    let f13: Vec<f64> = (0..n)
        .map(|j| inverse_distance(r.r1, r.r3, theta(j)))
        .collect();
    let f23: Vec<f64> = (0..n)
        .map(|d| inverse_distance(r.r2, r.r3, step * d as f64))
        .collect();
    let value = |i: usize, j: usize| f12[i] + f13[j] + f23[(i + n - j) % n];

    let mut grid = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in 0..n {
            grid[i * n + j] = value(i, j);
        }
    }
    if grid.iter().all(|v| !v.is_finite()) {
        return Err(Error::AllInfinite(r.as_array()));
    }

    let mut local: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [n - 1, 0, 1] {
                for dj in [n - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = grid[((i + di) % n) * n + (j + dj) % n];
                    if w < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                local.push((v, i, j));
            }
        }
    }
    if local.is_empty() {
        // flat grid; fall back to the global grid minimum
        let (k, v) =
            grid.iter().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc },
            );
        local.push((v, k / n, k % n));
    }
    local.sort_by(|a, b| a.partial_cmp(b).unwrap());
    local.truncate(opts.candidates.max(1));

    let mut best: Option<RadialMin> = None;
    for &(_, i, j) in &local {
        let (cfg, v) = refine_minimum(r, theta(i), theta(j), opts);
        let cand = RadialMin {
            value: v,
            argmin: cfg,
        };
        best = Some(match best {
            None => cand,
            Some(b) => pick(b, cand),
        });
    }
    Ok(best.expect("at least one candidate"))
}

fn pick(a: RadialMin, b: RadialMin) -> RadialMin {
    let scale = a.value.abs().max(b.value.abs()).max(1e-300);
    if (a.value - b.value).abs() <= 1e-12 * scale {
        let ka = (a.argmin.alpha, a.argmin.beta);
        let kb = (b.argmin.alpha, b.argmin.beta);
        if kb < ka {
            b
        } else {
            a
        }
    } else if b.value < a.value {
        b
    } else {
        a
    }
}

/// Damped Newton with eigenvalue-modified Hessian and Armijo backtracking.
pub(crate) fn refine_minimum(
    r: &Radii,
    alpha0: f64,
    beta0: f64,
    opts: &MinimizeOptions,
) -> (AngularConfig, f64) {
    let (mut a, mut b) = (alpha0, beta0);
    let mut fx = angular_cost(r, a, b);
    for _ in 0..opts.max_newton {
        let gh = match grad_hess_at(r, a, b) {
            Ok(gh) => gh,
            Err(_) => break,
        };
        let g = gh.gradient;
        let gnorm = g[0].hypot(g[1]);
        if gnorm <= 1e-4 * opts.tol * fx.abs().max(1.0) {
            break;
        }
        let (lam, vec) = sym_eigen(&gh.hessian);
        let lmax = lam[0].abs().max(lam[1].abs()).max(1e-300);
        let floor = 1e-8 * lmax;
        let mut d = [0.0; 2];
        for k in 0..2 {
            let proj = vec[k][0] * g[0] + vec[k][1] * g[1];
            let scale = proj / lam[k].abs().max(floor);
            d[0] -= scale * vec[k][0];
            d[1] -= scale * vec[k][1];
        }
        let dn = d[0].hypot(d[1]);
        if dn > 1.0 {
            d = [d[0] / dn, d[1] / dn];
        }
        let slope = g[0] * d[0] + g[1] * d[1];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (na, nb) = (a + t * d[0], b + t * d[1]);
            let fnew = angular_cost(r, na, nb);
            if fnew <= fx + 1e-4 * t * slope {
                a = na;
                b = nb;
                fx = fnew;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || t * dn < 1e-16 {
            break;
        }
    }
    (AngularConfig::new(a, b), fx)
}
