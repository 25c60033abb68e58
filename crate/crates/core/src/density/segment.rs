//! Body segments: polynomials in Bernstein form and monotone cubic tables.

use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

fn de_casteljau(coef: &[f64], t: f64) -> f64 {
    let mut b = coef.to_vec();
    let n = b.len();
    for r in 1..n {
        for i in 0..n - r {
            b[i] = (1.0 - t) * b[i] + t * b[i + 1];
        }
    }
    b[0]
}

/// Polynomial on `[a, b]` stored by its Bernstein coefficients in `t = (x - a) / (b - a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySegment {
    a: f64,
    b: f64,
    coef: Vec<f64>,
    /// Bernstein coefficients (degree + 1) of the antiderivative vanishing at `a`.
    icoef: Vec<f64>,
}

impl PolySegment {
    pub fn bernstein(a: f64, b: f64, coef: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
            return Err(Error::InvalidDensity(format!("bad interval [{a}, {b}]")));
        }
        if coef.is_empty() || coef.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDensity(
                "empty or non-finite coefficients".into(),
            ));
        }
        let m = coef.len() - 1;
        let w = b - a;
        let mut icoef = Vec::with_capacity(m + 2);
        icoef.push(0.0);
        let mut acc = 0.0;
        for c in &coef {
            acc += c * w / (m + 1) as f64;
            icoef.push(acc);
        }
        Ok(PolySegment { a, b, coef, icoef })
    }

    /// From coefficients of powers of `(x - a)`.
    pub fn monomial(a: f64, b: f64, mono: &[f64]) -> Result<Self> {
        if mono.is_empty() {
            return Err(Error::InvalidDensity("empty coefficients".into()));
        }
        let m = mono.len() - 1;
        let w = b - a;
        let scaled: Vec<f64> = mono
            .iter()
            .enumerate()
            .map(|(j, c)| c * w.powi(j as i32))
            .collect();
        let coef = (0..=m)
            .map(|k| {
                (0..=k)
                    .map(|j| binomial(k, j) / binomial(m, j) * scaled[j])
                    .sum()
            })
            .collect();
        Self::bernstein(a, b, coef)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    fn t(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        de_casteljau(&self.coef, self.t(x))
    }

    /// `int_a^x`.
    pub fn integral_to(&self, x: f64) -> f64 {
        de_casteljau(&self.icoef, self.t(x))
    }

    pub fn mass(&self) -> f64 {
        *self.icoef.last().unwrap()
    }

    /// Derivatives `p(x0), p'(x0), ..., p^(order)(x0)` at an endpoint `x0` (`right` selects `b`).
    pub fn endpoint_jet(&self, right: bool, order: usize) -> Vec<f64> {
        let m = self.degree();
        let w = self.b - self.a;
        let mut diff = self.coef.clone();
        let mut out = Vec::with_capacity(order + 1);
        let mut falling = 1.0;
        for j in 0..=order {
            if j > m {
                out.push(0.0);
                continue;
            }
            let v = if right { diff[diff.len() - 1] } else { diff[0] };
            out.push(falling * v / w.powi(j as i32));
            // next forward differences
            diff = diff.windows(2).map(|p| p[1] - p[0]).collect();
            falling *= (m - j) as f64;
        }
        out
    }

    /// Minimum over a sampling fine enough to catch dips of a degree-`m` polynomial.
    pub(crate) fn sampled_min(&self) -> f64 {
        let n = 64 * (self.degree() + 1);
        (0..=n)
            .map(|i| de_casteljau(&self.coef, i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes; never overshoots the data.
#[derive(Clone, Debug, PartialEq)]
pub struct TableSegment {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    cum: Vec<f64>,
}

fn pchip_end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl TableSegment {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidDensity(
                "table needs at least two (x, y) pairs of equal length".into(),
            ));
        }
        if x.windows(2).any(|p| !(p[0] < p[1])) || x[0] < 0.0 || !x[n - 1].is_finite() {
            return Err(Error::InvalidDensity(
                "table abscissae must be finite, nonnegative and strictly increasing".into(),
            ));
        }
        if y.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidDensity(
                "table values must be finite and >= 0".into(),
            ));
        }
        let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d = vec![m[0]; 2];
        } else {
            for i in 1..n - 1 {
                if m[i - 1] * m[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
                }
            }
            d[0] = pchip_end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        let mut seg = TableSegment {
            x,
            y,
            d,
            cum: Vec::new(),
        };
        let mut cum = vec![0.0];
        for i in 0..n - 1 {
            let c = cum[i] + seg.piece_integral(i, 1.0);
            cum.push(c);
        }
        seg.cum = cum;
        Ok(seg)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.x.len();
        let i = match self.x.partition_point(|&k| k <= x) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let s = ((x - self.x[i]) / (self.x[i + 1] - self.x[i])).clamp(0.0, 1.0);
        (i, s)
    }

    fn piece_integral(&self, i: usize, s: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        let i00 = s - s3 + 0.5 * s4;
        let i10 = 0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4;
        let i01 = s3 - 0.5 * s4;
        let i11 = -s3 / 3.0 + 0.25 * s4;
        h * (self.y[i] * i00 + h * self.d[i] * i10 + self.y[i + 1] * i01 + h * self.d[i + 1] * i11)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        let h = self.x[i + 1] - self.x[i];
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (self.y[i] * h00 + h * self.d[i] * h10 + self.y[i + 1] * h01 + h * self.d[i + 1] * h11)
            .max(0.0)
    }

    pub fn integral_to(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        self.cum[i] + self.piece_integral(i, s)
    }

    pub fn mass(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    Poly(PolySegment),
    Table(TableSegment),
}

impl Segment {
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Segment::Poly(p) => p.interval(),
            Segment::Table(t) => t.interval(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Segment::Poly(p) => p.eval(x),
            Segment::Table(t) => t.eval(x),
        }
    }

    pub fn integral_to(&self, x: f64) -> f64 {
        match self {
            Segment::Poly(p) => p.integral_to(x),
            Segment::Table(t) => t.integral_to(x),
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Segment::Poly(p) => p.mass(),
            Segment::Table(t) => t.mass(),
        }
    }

    pub(crate) fn min_value(&self) -> f64 {
        match self {
            Segment::Poly(p) => p.sampled_min(),
            Segment::Table(t) => t.y.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }
}
