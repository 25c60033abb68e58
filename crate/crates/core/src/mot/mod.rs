//! Discrete three-marginal transport at quantile atoms, Monge costs of the
//! tertile maps, swap probes, and the one-dimensional comparison problem.

mod probe;
mod simplex;
mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::density::{LineDensity, RadialDensity, SeidlMap, SeidlPattern};
use crate::error::{Error, Result};
use crate::radialcost::{alignment_condition, c_pi, radial_cost, MinimizeOptions, Radii};

pub use probe::{
    probe_cyclical_monotonicity, CoordinateSwap, MongeTriple, SwapRegistry, SwapTemplate,
    Violation, PROBE_TOL,
};
pub use solver::{solve_exact, BruteMonge, LpSolver, Solution, SolverRegistry, TransportSolver};

/// Radial cost of an unordered triple with the given minimization options.
pub fn triple_cost(t: &MongeTriple, opts: &MinimizeOptions) -> Result<f64> {
    let r = Radii::new(t[0], t[1], t[2])?;
    match radial_cost(&r, opts) {
        Ok(m) => Ok(m.value),
        Err(Error::AllInfinite(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProblem {
    pub atoms: Vec<f64>,
    /// Row-major `n x n x n` tensor of `c(a_i, a_j, a_k)`.
    cost: Vec<f64>,
}

impl DiscreteProblem {
    /// Fills the tensor from sorted index triples; the radial cost is symmetric.
    pub fn from_atoms(atoms: Vec<f64>, opts: &MinimizeOptions) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::InvalidArgument("at least one atom is needed".into()));
        }
        let mut keys = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    keys.push((i, j, k));
                }
            }
        }
        let values: Vec<f64> = keys
            .par_iter()
            .map(|&(i, j, k)| triple_cost(&[atoms[i], atoms[j], atoms[k]], opts))
            .collect::<Result<_>>()?;
        let mut cost = vec![0.0; n * n * n];
        for (&(i, j, k), &v) in keys.iter().zip(&values) {
            for (a, b, c) in [
                (i, j, k),
                (i, k, j),
                (j, i, k),
                (j, k, i),
                (k, i, j),
                (k, j, i),
            ] {
                cost[(a * n + b) * n + c] = v;
            }
        }
        Ok(DiscreteProblem { atoms, cost })
    }

    pub fn n(&self) -> usize {
        self.atoms.len()
    }

    pub fn cost(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n();
        self.cost[(i * n + j) * n + k]
    }
}

/// Atoms at the quantile midpoints `F^-1((k - 1/2) / n)`.
pub fn discretize(
    rho: &RadialDensity,
    n: usize,
    opts: &MinimizeOptions,
) -> Result<DiscreteProblem> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let atoms = (1..=n)
        .map(|k| rho.quantile((k as f64 - 0.5) / n as f64))
        .collect();
    DiscreteProblem::from_atoms(atoms, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub weight: f64,
}

/// Nonnegative tensor with (ideally) uniform marginals, stored by its support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub n: usize,
    pub support: Vec<SupportEntry>,
}

impl Coupling {
    pub fn zeros(n: usize) -> Self {
        Coupling {
            n,
            support: Vec::new(),
        }
    }

    /// Adds `w` to the entry `(i, j, k)`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, w: f64) {
        match self
            .support
            .iter_mut()
            .find(|e| (e.i, e.j, e.k) == (i, j, k))
        {
            Some(e) => e.weight += w,
            None => {
                let pos = self
                    .support
                    .partition_point(|e| (e.i, e.j, e.k) < (i, j, k));
                self.support
                    .insert(pos, SupportEntry { i, j, k, weight: w });
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|e| e.weight).sum()
    }

    /// The three marginal vectors.
    pub fn marginals(&self) -> [Vec<f64>; 3] {
        let mut m = [vec![0.0; self.n], vec![0.0; self.n], vec![0.0; self.n]];
        for e in &self.support {
            m[0][e.i] += e.weight;
            m[1][e.j] += e.weight;
            m[2][e.k] += e.weight;
        }
        m
    }

    /// Largest deviation of a marginal entry from `1/n`.
    pub fn marginal_error(&self) -> f64 {
        let u = 1.0 / self.n as f64;
        self.marginals()
            .iter()
            .flat_map(|m| m.iter().map(move |v| (v - u).abs()))
            .fold(0.0, f64::max)
    }

    pub fn cost(&self, p: &DiscreteProblem) -> f64 {
        self.support
            .iter()
            .map(|e| e.weight * p.cost(e.i, e.j, e.k))
            .sum()
    }

    /// CSV rows `i,j,k,weight,cost` over the support.
    pub fn to_csv(&self, p: &DiscreteProblem) -> String {
        let mut s = String::from("i,j,k,weight,cost\n");
        for e in &self.support {
            let _ = writeln!(
                s,
                "{},{},{},{:.17e},{:.17e}",
                e.i,
                e.j,
                e.k,
                e.weight,
                p.cost(e.i, e.j, e.k)
            );
        }
        s
    }
}

fn mass_branch(u: f64) -> usize {
    if u < 1.0 / 3.0 {
        0
    } else if u < 2.0 / 3.0 {
        1
    } else {
        2
    }
}

fn mass_map(pattern: SeidlPattern, u: f64) -> f64 {
    let (s, o) = pattern.mass_map(mass_branch(u));
    (s * u + o).clamp(0.0, 1.0)
}

fn mass_map_inv(pattern: SeidlPattern, v: f64) -> f64 {
    // v lies in the image of branch b - 1
    let b = (mass_branch(v.min(1.0 - 1e-300)) + 2) % 3;
    let (s, o) = pattern.mass_map(b);
    ((v - o) / s).clamp(0.0, 1.0)
}

/// Law of `(Q(u), Q(g(u)), Q(g(g(u))))` for `u` uniform, where `Q` is the quantile of the
/// atoms and `g` the pattern's branch map in mass coordinates. For `3 | n` this is the
/// permutation coupling of the map itself.
pub fn pattern_plan(p: &DiscreteProblem, pattern: SeidlPattern) -> Coupling {
    let n = p.n();
    let idx = |u: f64| ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
    let mut cuts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    cuts.extend([1.0 / 3.0, 2.0 / 3.0]);
    let base = cuts.clone();
    for &v in &base {
        let u1 = mass_map_inv(pattern, v);
        cuts.push(u1);
        cuts.push(mass_map_inv(pattern, u1));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut c = Coupling::zeros(n);
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 1e-15 {
            continue;
        }
        let u = 0.5 * (w[0] + w[1]);
        let u1 = mass_map(pattern, u);
        let u2 = mass_map(pattern, u1);
        c.set(idx(u), idx(u1), idx(u2), len);
    }
    c
}

/// `int c(x, T(x), T^2(x)) drho` by the midpoint rule on `n` mass cells of the first tertile.
///
/// Each orbit visits every tertile once with equal mass, so the first tertile
/// carries the whole integral after multiplying by 3.
pub fn monge_cost(map: &SeidlMap<'_>, n: usize, opts: &MinimizeOptions) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let rho = map.density();
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = rho.quantile((k as f64 + 0.5) / (3 * n) as f64);
            triple_cost(&map.orbit(x), opts)
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / n as f64)
}

/// Samples of the graph `{(x, T(x), T^2(x))}` at mass midpoints of the first tertile.
pub fn sample_graph(map: &SeidlMap<'_>, n: usize) -> Vec<MongeTriple> {
    let rho = map.density();
    (0..n)
        .map(|k| map.orbit(rho.quantile((k as f64 + 0.5) / (3 * n) as f64)))
        .collect()
}

/// Coulomb cost of three points on the line.
pub fn c_1d(x1: f64, x2: f64, x3: f64) -> f64 {
    let inv = |d: f64| {
        if d == 0.0 {
            f64::INFINITY
        } else {
            1.0 / d.abs()
        }
    };
    inv(x1 - x2) + inv(x1 - x3) + inv(x2 - x3)
}

/// `rho` on `[0, s1] u [s2, inf)` and the middle tertile mirrored onto `[-s2, -s1]`.
pub fn reflect_density(rho: &RadialDensity) -> Result<LineDensity> {
    let t = rho.tertiles()?;
    let (_, sup) = rho.support();
    Ok(LineDensity::new(
        rho.clone(),
        vec![(-t.s2, -t.s1, -1.0), (0.0, t.s1, 1.0), (t.s2, sup, 1.0)],
    ))
}

/// Largest `|c_pi(x, T x, T^2 x) - c_1d(-T x, x, T^2 x)|` over `n` first-tertile samples of the DDI map.
pub fn one_d_increasing_map_check(rho: &RadialDensity, n: usize) -> Result<f64> {
    let map = SeidlMap::build(rho, SeidlPattern::DDI)?;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for t in sample_graph(&map, n) {
        let r = Radii::new(t[0], t[1], t[2])?;
        if alignment_condition(&r) < 0.0 {
            bad.push(t[0]);
            continue;
        }
        worst = worst.max((c_pi(&r) - c_1d(-t[1], t[0], t[2])).abs());
    }
    if !bad.is_empty() {
        return Err(Error::ConditionViolated(bad));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarTriple {
    pub points: [[f64; 2]; 3],
    pub cost: f64,
}

pub fn planar_cost(p: &[[f64; 2]; 3]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| {
        let h = (a[0] - b[0]).hypot(a[1] - b[1]);
        if h == 0.0 {
            f64::INFINITY
        } else {
            1.0 / h
        }
    };
    d(p[0], p[1]) + d(p[0], p[2]) + d(p[1], p[2])
}

/// Rotations `t = 2 pi m / n` of the optimal angular configuration.
pub fn lift_radial_triple(
    r: &Radii,
    n_rotations: usize,
    opts: &MinimizeOptions,
) -> Result<Vec<PlanarTriple>> {
    let m = radial_cost(r, opts)?;
    let (a, b) = (m.argmin.alpha, m.argmin.beta);
    Ok((0..n_rotations)
        .map(|s| {
            let t = 2.0 * PI * s as f64 / n_rotations as f64;
            let pt = |rad: f64, th: f64| [rad * th.cos(), rad * th.sin()];
            let points = [pt(r.r1, t), pt(r.r2, a + t), pt(r.r3, b + t)];
            PlanarTriple {
                points,
                cost: planar_cost(&points),
            }
        })
        .collect())
}
