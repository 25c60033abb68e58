//! Dense revised simplex for `min c.x  s.t.  A x = b, x >= 0` where every column
//! of `A` is a sum of unit vectors (the multi-index transportation structure).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct LpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Largest of primal residual, dual infeasibility and duality gap.
    pub kkt: f64,
}

const RC_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 30;
const MAX_PIVOTS: usize = 200_000;

struct Tableau<'a> {
    m: usize,
    cols: &'a [Vec<usize>],
    cost: &'a [f64],
    b: &'a [f64],
    /// Basic variable per row; indices `>= cols.len()` are artificials.
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    since_refactor: usize,
    pivots: usize,
}

impl<'a> Tableau<'a> {
    fn n(&self) -> usize {
        self.cols.len()
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        if q >= self.n() {
            let r = q - self.n();
            return (0..self.m).map(|i| self.binv[i][r]).collect();
        }
        (0..self.m)
            .map(|i| self.cols[q].iter().map(|&r| self.binv[i][r]).sum())
            .collect()
    }

    fn phase_cost(&self, q: usize, phase: u8) -> f64 {
        match (phase, q >= self.n()) {
            (1, true) => 1.0,
            (1, false) => 0.0,
            (_, true) => 0.0,
            (_, false) => self.cost[q],
        }
    }

    fn duals(&self, phase: u8) -> Vec<f64> {
        let mut pi = vec![0.0; self.m];
        for (r, &q) in self.basis.iter().enumerate() {
            let c = self.phase_cost(q, phase);
            if c != 0.0 {
                for (k, p) in pi.iter_mut().enumerate() {
                    *p += c * self.binv[r][k];
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, q: usize, pi: &[f64], phase: u8) -> f64 {
        let c = self.phase_cost(q, phase);
        if q >= self.n() {
            c - pi[q - self.n()]
        } else {
            c - self.cols[q].iter().map(|&r| pi[r]).sum::<f64>()
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![vec![0.0f64; 2 * m]; m];
        for (c, &q) in self.basis.iter().enumerate() {
            if q >= self.n() {
                a[q - self.n()][c] = 1.0;
            } else {
                for &r in &self.cols[q] {
                    a[r][c] += 1.0;
                }
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].abs() < 1e-12 {
                return Err(Error::LinearProgram("singular basis".into()));
            }
            a.swap(col, piv);
            let d = a[col][col];
            for v in a[col].iter_mut() {
                *v /= d;
            }
            for i in 0..m {
                if i != col && a[i][col] != 0.0 {
                    let f = a[i][col];
                    let (src, dst) = if i < col {
                        let (lo, hi) = a.split_at_mut(col);
                        (&hi[0], &mut lo[i])
                    } else {
                        let (lo, hi) = a.split_at_mut(i);
                        (&lo[col], &mut hi[0])
                    };
                    for (x, y) in dst.iter_mut().zip(src.iter()) {
                        *x -= f * y;
                    }
                }
            }
        }
        // rows of the inverse are the right half
        self.binv = a.into_iter().map(|row| row[m..].to_vec()).collect();
        self.xb = (0..m)
            .map(|i| (0..m).map(|k| self.binv[i][k] * self.b[k]).sum::<f64>())
            .map(|v: f64| if v < 0.0 && v > -1e-12 { 0.0 } else { v })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize, d: &[f64]) {
        let theta = self.xb[r] / d[r];
        for i in 0..self.m {
            if i != r {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let dr = d[r];
        for v in self.binv[r].iter_mut() {
            *v /= dr;
        }
        let row_r = self.binv[r].clone();
        for i in 0..self.m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for (x, y) in self.binv[i].iter_mut().zip(row_r.iter()) {
                    *x -= f * y;
                }
            }
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
        self.pivots += 1;
    }

    fn run(&mut self, phase: u8) -> Result<()> {
        let mut degenerate_streak = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            if self.pivots > MAX_PIVOTS {
                return Err(Error::LinearProgram("pivot limit reached".into()));
            }
            let pi = self.duals(phase);
            let bland = degenerate_streak > 50;
            let total = if phase == 1 {
                self.n() + self.m
            } else {
                self.n()
            };
            let mut enter: Option<(usize, f64)> = None;
            for q in 0..total {
                if self.is_basic[q] {
                    continue;
                }
                let rc = self.reduced_cost(q, &pi, phase);
                if rc < -RC_TOL {
                    if bland {
                        enter = Some((q, rc));
                        break;
                    }
                    if enter.is_none_or(|(_, best)| rc < best) {
                        enter = Some((q, rc));
                    }
                }
            }
            let q = match enter {
                None => return Ok(()),
                Some((q, _)) => q,
            };
            let d = self.ftran(q);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if d[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / d[r];
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let better = if (ratio - lratio).abs() <= 1e-12 {
                                if bland {
                                    self.basis[r] < self.basis[lr]
                                } else {
                                    d[r] > d[lr]
                                }
                            } else {
                                ratio < lratio
                            };
                            if better {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let (r, theta) = leave.ok_or_else(|| Error::LinearProgram("unbounded".into()))?;
            if theta <= 1e-14 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(r, q, &d);
        }
    }

    /// Replace basic artificials at level zero by original columns where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n() {
                continue;
            }
            let row = self.binv[r].clone();
            let found = (0..self.n()).find(|&q| {
                !self.is_basic[q] && self.cols[q].iter().map(|&k| row[k]).sum::<f64>().abs() > 1e-7
            });
            if let Some(q) = found {
                let d = self.ftran(q);
                self.pivot(r, q, &d);
            }
        }
    }
}

/// Solves the LP; `cols[q]` lists the rows where column `q` has a unit entry.
pub(crate) fn solve(m: usize, cols: &[Vec<usize>], cost: &[f64], b: &[f64]) -> Result<LpResult> {
    let n = cols.len();
    if n == 0 {
        return Err(Error::InfeasibleCost);
    }
    let mut t = Tableau {
        m,
        cols,
        cost,
        b,
        basis: (n..n + m).collect(),
        is_basic: (0..n + m).map(|q| q >= n).collect(),
        binv: (0..m)
            .map(|i| (0..m).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect(),
        xb: b.to_vec(),
        since_refactor: 0,
        pivots: 0,
    };
    t.run(1)?;
    t.refactor()?;
    let infeas: f64 = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(&q, _)| q >= n)
        .map(|(_, &v)| v)
        .sum();
    if infeas > 1e-9 {
        return Err(Error::Infeasible(format!("phase one residual {infeas:e}")));
    }
    t.drive_out_artificials();
    t.refactor()?;
    t.run(2)?;
    t.refactor()?;

    let mut x = vec![0.0; n];
    for (r, &q) in t.basis.iter().enumerate() {
        if q < n {
            x[q] = t.xb[r].max(0.0);
        }
    }
    let objective: f64 = x.iter().zip(cost).map(|(v, c)| v * c).sum();
    let mut ax = vec![0.0; m];
    for (q, &v) in x.iter().enumerate() {
        for &r in &cols[q] {
            ax[r] += v;
        }
    }
    let primal = ax
        .iter()
        .zip(b)
        .map(|(a, bb)| (a - bb).abs())
        .fold(0.0, f64::max);
    let pi = t.duals(2);
    let dual = (0..n)
        .map(|q| (-t.reduced_cost(q, &pi, 2)).max(0.0))
        .fold(0.0, f64::max);
    let gap = (objective - pi.iter().zip(b).map(|(p, bb)| p * bb).sum::<f64>()).abs();
    let kkt = primal.max(dual).max(gap);
    if kkt > 1e-9 {
        return Err(Error::LinearProgram(format!(
            "KKT residual {kkt:e} exceeds 1e-9"
        )));
    }
    Ok(LpResult { x, objective, kkt })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-index assignment with a known optimum.
    #[test]
    fn assignment_problem() {
        let c = [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let mut cols = Vec::new();
        let mut cost = Vec::new();
        for (i, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                cols.push(vec![i, 3 + j]);
                cost.push(v);
            }
        }
        let res = solve(6, &cols, &cost, &[1.0; 6]).unwrap();
        // brute force over the six permutations
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let best = perms
            .iter()
            .map(|p| (0..3).map(|i| c[i][p[i]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!((res.objective - best).abs() < 1e-12);
        assert!(res.kkt <= 1e-9);
    }
}
