//! Truncated Taylor series `sum_j c_j x^j`, `j <= order`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub coef: Vec<f64>,
}

impl Series {
    pub fn new(mut coef: Vec<f64>, order: usize) -> Self {
        coef.resize(order + 1, 0.0);
        Series { coef }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The identity `x`.
    pub fn variable(order: usize) -> Self {
        Self::new(vec![0.0, 1.0], order)
    }

    /// Series from derivatives `d[j] = f^(j)(0)`.
    pub fn from_derivatives(d: &[f64], order: usize) -> Self {
        let mut fact = 1.0;
        let coef = d
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j > 0 {
                    fact *= j as f64;
                }
                v / fact
            })
            .collect();
        Self::new(coef, order)
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coef
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 0 {
                    fact *= j as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn scale(&self, s: f64) -> Self {
        Series {
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut c = vec![0.0];
        c.extend(
            self.coef
                .iter()
                .enumerate()
                .map(|(j, v)| v / (j + 1) as f64),
        );
        Self::new(c, self.order())
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        let a0 = self.coef[0];
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / a0;
        for j in 1..=n {
            let s: f64 = (1..=j).map(|i| self.coef[i] * r[j - i]).sum();
            r[j] = -s / a0;
        }
        Series { coef: r }
    }

    pub fn div(&self, other: &Series) -> Self {
        self * &other.recip()
    }

    /// Square root of a series with positive constant term.
    pub fn sqrt(&self) -> Self {
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = self.coef[0].sqrt();
        for j in 1..=n {
            let s: f64 = (1..j).map(|i| r[i] * r[j - i]).sum();
            r[j] = (self.coef[j] - s) / (2.0 * r[0]);
        }
        Series { coef: r }
    }

    /// `self(g(x))` for `g(0) = 0`.
    pub fn compose(&self, g: &Series) -> Self {
        let n = self.order().min(g.order());
        let g = Series::new(g.coef[..=n].to_vec(), n);
        let mut r = Series::constant(self.coef[n], n);
        for j in (0..n).rev() {
            r = &r * &g;
            r.coef[0] += self.coef[j];
        }
        r
    }

    /// Compositional inverse of a series with `c_0 = 0`, `c_1 != 0`.
    pub fn reversion(&self) -> Self {
        let n = self.order();
        let mut h = Series::new(vec![0.0, 1.0 / self.coef[1]], n);
        for j in 2..=n {
            let e = self.compose(&h).coef[j];
            h.coef[j] -= e / self.coef[1];
        }
        h
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        Series {
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        Series {
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        let n = self.order().min(o.order());
        let mut c = vec![0.0; n + 1];
        for (i, a) in self.coef.iter().enumerate().take(n + 1) {
            for (j, b) in o.coef.iter().enumerate().take(n + 1 - i) {
                c[i + j] += a * b;
            }
        }
        Series { coef: c }
    }
}
