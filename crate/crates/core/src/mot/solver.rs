use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::{simplex, Coupling, DiscreteProblem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub method: String,
    pub value: f64,
    pub coupling: Coupling,
    /// `(sigma, tau)` for permutation-pair couplings.
    pub permutations: Option<(Vec<usize>, Vec<usize>)>,
    pub kkt_residual: Option<f64>,
}

pub trait TransportSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn max_atoms(&self) -> usize;
    fn solve(&self, problem: &DiscreteProblem) -> Result<Solution>;
}

/// Exact linear program over the three-index transportation polytope.
pub struct LpSolver;

impl TransportSolver for LpSolver {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn max_atoms(&self) -> usize {
        40
    }

    fn solve(&self, p: &DiscreteProblem) -> Result<Solution> {
        let n = p.n();
        let mut cols = Vec::new();
        let mut cost = Vec::new();
        let mut index = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = p.cost(i, j, k);
                    if c.is_finite() {
                        cols.push(vec![i, n + j, 2 * n + k]);
                        cost.push(c);
                        index.push((i, j, k));
                    }
                }
            }
        }
        if cols.is_empty() {
            return Err(Error::InfeasibleCost);
        }
        // the scaled plan n * gamma has unit marginals
        let res = simplex::solve(3 * n, &cols, &cost, &vec![1.0; 3 * n]).map_err(|e| match e {
            Error::Infeasible(_) => Error::InfeasibleCost,
            other => other,
        })?;
        let mut coupling = Coupling::zeros(n);
        for (q, &(i, j, k)) in index.iter().enumerate() {
            if res.x[q] > 0.0 {
                coupling.set(i, j, k, res.x[q] / n as f64);
            }
        }
        Ok(Solution {
            method: self.name().into(),
            value: res.objective / n as f64,
            coupling,
            permutations: None,
            kkt_residual: Some(res.kkt),
        })
    }
}

/// Enumerates couplings `x_i -> (x_i, x_sigma(i), x_tau(i))`.
pub struct BruteMonge;

/// Lexicographically smallest `tau` minimizing `sum_i w(i, tau(i))`, by a DP over subsets.
fn best_tau(n: usize, w: impl Fn(usize, usize) -> f64) -> (f64, Vec<usize>) {
    let full = (1usize << n) - 1;
    // best[mask]: cheapest completion when the targets in `mask` are taken by rows 0..popcount
    let mut best = vec![f64::INFINITY; 1 << n];
    best[full] = 0.0;
    for mask in (0..full).rev() {
        let i = mask.count_ones() as usize;
        let mut b = f64::INFINITY;
        for k in 0..n {
            if mask & (1 << k) == 0 {
                let v = w(i, k) + best[mask | (1 << k)];
                if v < b {
                    b = v;
                }
            }
        }
        best[mask] = b;
    }
    let mut tau = Vec::with_capacity(n);
    let mut mask = 0usize;
    for i in 0..n {
        let target = best[mask];
        let k = (0..n)
            .filter(|k| mask & (1 << k) == 0)
            .find(|&k| {
                let v = w(i, k) + best[mask | (1 << k)];
                v <= target + 1e-12 * target.abs().max(1.0)
            })
            .expect("a minimizing choice exists");
        tau.push(k);
        mask |= 1 << k;
    }
    (best[0], tau)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

impl TransportSolver for BruteMonge {
    fn name(&self) -> &'static str {
        "brute-monge"
    }

    fn max_atoms(&self) -> usize {
        8
    }

    fn solve(&self, p: &DiscreteProblem) -> Result<Solution> {
        let n = p.n();
        let mut sigma: Vec<usize> = (0..n).collect();
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        loop {
            let (v, tau) = best_tau(n, |i, k| p.cost(i, sigma[i], k));
            let better = match &best {
                None => v.is_finite(),
                Some((bv, _, _)) => v < bv - 1e-12 * bv.abs().max(1.0),
            };
            if better {
                best = Some((v, sigma.clone(), tau));
            }
            if !next_permutation(&mut sigma) {
                break;
            }
        }
        let (v, sigma, tau) = best.ok_or(Error::InfeasibleCost)?;
        let mut coupling = Coupling::zeros(n);
        for i in 0..n {
            coupling.set(i, sigma[i], tau[i], 1.0 / n as f64);
        }
        Ok(Solution {
            method: self.name().into(),
            value: v / n as f64,
            coupling,
            permutations: Some((sigma, tau)),
            kkt_residual: None,
        })
    }
}

/// Solvers selectable by name.
pub struct SolverRegistry {
    solvers: BTreeMap<String, Arc<dyn TransportSolver>>,
    aliases: BTreeMap<String, String>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: BTreeMap::new(),
            aliases: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, solver: Arc<dyn TransportSolver>) {
        self.solvers.insert(solver.name().to_string(), solver);
    }

    pub fn alias(&mut self, alias: &str, target: &str) {
        self.aliases.insert(alias.to_string(), target.to_string());
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TransportSolver>> {
        let key = self.aliases.get(name).map(String::as_str).unwrap_or(name);
        self.solvers
            .get(key)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "solver",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.solvers.keys().cloned().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(LpSolver));
        r.register(Arc::new(BruteMonge));
        r.alias("brute", "brute-monge");
        r
    }
}

/// Solve with the named method from the default registry.
pub fn solve_exact(p: &DiscreteProblem, method: &str) -> Result<Solution> {
    let solver = SolverRegistry::default().get(method)?;
    if p.n() > solver.max_atoms() {
        return Err(Error::SizeExceeded {
            method: solver.name().into(),
            n: p.n(),
            limit: solver.max_atoms(),
        });
    }
    solver.solve(p)
}
