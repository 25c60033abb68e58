//! Radial probability densities on `[0, inf)`: a body of polynomial or tabulated
//! segments, optionally followed by a pushforward tail.

mod file;
mod segment;
mod seidl;
mod tail;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::radialcost::{phi_gradient, phi_raw};
use crate::roots::invert_increasing;

pub use file::{DensityFile, SegmentSpec, SCHEMA_VERSION};
pub use segment::{PolySegment, Segment, TableSegment};
pub use seidl::{BranchCheck, MapDiagnostics, SeidlMap, SeidlPattern};
pub use tail::{smooth_step, HProfile, PushforwardTail};

/// Accepted deviation of the total mass from 1.
pub const MASS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tertiles {
    pub s1: f64,
    pub s2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialDensity {
    body: Vec<Segment>,
    /// Cumulative mass at the start of each body segment, plus the body total.
    offsets: Vec<f64>,
    tail: Option<PushforwardTail>,
}

impl RadialDensity {
    pub fn new(body: Vec<Segment>, tail: Option<PushforwardTail>) -> Result<Self> {
        if body.is_empty() {
            return Err(Error::InvalidDensity("no segments".into()));
        }
        for (i, w) in body.windows(2).enumerate() {
            if w[0].interval().1 > w[1].interval().0 {
                return Err(Error::InvalidDensity(format!(
                    "segments {i} and {} overlap or are unsorted",
                    i + 1
                )));
            }
        }
        for (i, s) in body.iter().enumerate() {
            let lo = s.min_value();
            if lo < -1e-14 {
                return Err(Error::InvalidDensity(format!(
                    "segment {i} is negative (min {lo:e})"
                )));
            }
            let (a, b) = s.interval();
            let q = integrate(|x| s.eval(x), a, b, 1e-13);
            if (q - s.mass()).abs() > MASS_TOL {
                return Err(Error::InvalidDensity(format!(
                    "segment {i}: quadrature mass {q} disagrees with exact mass {}",
                    s.mass()
                )));
            }
        }
        let mut offsets = vec![0.0];
        for s in &body {
            let last = *offsets.last().unwrap();
            offsets.push(last + s.mass());
        }
        let body_mass = *offsets.last().unwrap();
        let rho = RadialDensity {
            body,
            offsets,
            tail,
        };
        match &rho.tail {
            None => {
                if (body_mass - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidDensity(format!(
                        "total mass {body_mass} != 1"
                    )));
                }
            }
            Some(t) => {
                if (body_mass - 2.0 / 3.0).abs() > MASS_TOL {
                    return Err(Error::InvalidDensity(format!(
                        "a pushforward tail carries 1/3; body mass is {body_mass}, not 2/3"
                    )));
                }
                let end = rho.body_end();
                if (t.s2 - end).abs() > 1e-12 {
                    return Err(Error::InvalidDensity(format!(
                        "tail starts at {} but the body ends at {end}",
                        t.s2
                    )));
                }
                let s1 = rho.quantile(1.0 / 3.0);
                if (t.s1 - s1).abs() > 1e-9 {
                    return Err(Error::InvalidDensity(format!(
                        "tail expects s1 = {} but the body gives {s1}",
                        t.s1
                    )));
                }
                if t.h.jet.first().copied().unwrap_or(0.0) != 0.0 || !(t.h.delta > 0.0) {
                    return Err(Error::InvalidDensity(
                        "tail profile needs h(0) = 0 and delta > 0".into(),
                    ));
                }
            }
        }
        Ok(rho)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(
            vec![Segment::Poly(PolySegment::bernstein(
                a,
                b,
                vec![1.0 / (b - a)],
            )?)],
            None,
        )
    }

    /// Piecewise constant density with the given masses on the given intervals.
    pub fn blocks(intervals: &[(f64, f64)], masses: &[f64]) -> Result<Self> {
        if intervals.len() != masses.len() {
            return Err(Error::InvalidArgument("one mass per interval".into()));
        }
        let body = intervals
            .iter()
            .zip(masses)
            .map(|(&(a, b), &m)| {
                Ok(Segment::Poly(PolySegment::bernstein(
                    a,
                    b,
                    vec![m / (b - a)],
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(body, None)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.body
    }

    pub fn tail(&self) -> Option<&PushforwardTail> {
        self.tail.as_ref()
    }

    pub fn body_end(&self) -> f64 {
        self.body.last().unwrap().interval().1
    }

    fn body_mass(&self) -> f64 {
        *self.offsets.last().unwrap()
    }

    /// `[inf, sup]` of the support; `sup` is infinite with a tail.
    pub fn support(&self) -> (f64, f64) {
        let lo = self
            .body
            .iter()
            .find(|s| s.mass() > 0.0)
            .map(|s| s.interval().0)
            .unwrap_or(0.0);
        let hi = if self.tail.is_some() {
            f64::INFINITY
        } else {
            self.body_end()
        };
        (lo, hi)
    }

    fn body_pdf(&self, x: f64) -> f64 {
        let n = self.body.len();
        for (i, s) in self.body.iter().enumerate() {
            let (a, b) = s.interval();
            if x >= a && (x < b || (i == n - 1 && x == b && self.tail.is_none())) {
                return s.eval(x);
            }
        }
        0.0
    }

    /// Body density with each segment closed on the right, so `T(0) = s2` is covered.
    fn body_pdf_closed(&self, x: f64) -> f64 {
        self.body
            .iter()
            .find(|s| {
                let (a, b) = s.interval();
                x >= a && x <= b
            })
            .map_or(0.0, |s| s.eval(x))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if let Some(t) = &self.tail {
            if x >= t.s2 {
                if x.is_infinite() {
                    return 0.0;
                }
                let u = self.psi_inverse(x);
                return self.body_pdf(u) / self.psi_prime(u);
            }
        }
        self.body_pdf(x)
    }

    fn body_cdf(&self, x: f64) -> f64 {
        for (i, s) in self.body.iter().enumerate() {
            let (a, b) = s.interval();
            if x < a {
                return self.offsets[i];
            }
            if x < b {
                return self.offsets[i] + s.integral_to(x);
            }
        }
        self.body_mass()
    }

    /// `F(x) = rho([0, x))`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if let Some(t) = &self.tail {
            if x > t.s2 {
                if x.is_infinite() {
                    return 1.0;
                }
                return (self.body_mass() + self.body_cdf(self.psi_inverse(x))).min(1.0);
            }
        }
        self.body_cdf(x).min(1.0)
    }

    /// `inf {x : F(x) >= p}`; `p <= 0` gives the left end of the support.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.support().0;
        }
        if let Some(_t) = &self.tail {
            let bm = self.body_mass();
            if p > bm {
                if p >= 1.0 {
                    return f64::INFINITY;
                }
                return self.psi(self.body_quantile(p - bm));
            }
        }
        if p >= self.body_mass() {
            return self.last_positive_end();
        }
        self.body_quantile(p)
    }

    fn last_positive_end(&self) -> f64 {
        self.body
            .iter()
            .rev()
            .find(|s| s.mass() > 0.0)
            .map(|s| s.interval().1)
            .unwrap_or(0.0)
    }

    fn body_quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.support().0;
        }
        let k = match (0..self.body.len())
            .find(|&k| self.offsets[k + 1] >= p && self.body[k].mass() > 0.0)
        {
            Some(k) => k,
            None => return self.last_positive_end(),
        };
        let s = &self.body[k];
        let (a, b) = s.interval();
        let target = p - self.offsets[k];
        if target >= s.mass() && s.eval(b) > 0.0 {
            // F is strictly increasing up to b
            return b;
        }
        invert_increasing(|x| (s.integral_to(x), s.eval(x)), a, b, target)
    }

    pub fn tertiles(&self) -> Result<Tertiles> {
        let s1 = self.quantile(1.0 / 3.0);
        let s2 = self.quantile(2.0 / 3.0);
        let lo = self.support().0;
        if !(s1 > lo && s2 > s1) {
            return Err(Error::DegenerateTertile(format!(
                "tertiles ({s1}, {s2}) with support starting at {lo}"
            )));
        }
        Ok(Tertiles { s1, s2 })
    }

    /// First DDI branch `x -> F^-1(2/3 - F(x))` on `[0, s1)`.
    pub fn branch1_map(&self, x: f64) -> f64 {
        let y = self.quantile(2.0 / 3.0 - self.cdf(x));
        match &self.tail {
            Some(t) => y.min(t.s2),
            None => y,
        }
    }

    /// `psi(x) = phi(x, T(x)) + h(x)`; NaN without a tail.
    pub fn psi(&self, x: f64) -> f64 {
        match &self.tail {
            None => f64::NAN,
            Some(t) => phi_raw(x, self.branch1_map(x)) + t.h.eval(x).0,
        }
    }

    pub fn psi_prime(&self, x: f64) -> f64 {
        match &self.tail {
            None => f64::NAN,
            Some(t) => {
                let tx = self.branch1_map(x);
                let dt = -self.body_pdf(x) / self.body_pdf_closed(tx);
                let g = phi_gradient(x, tx);
                g[0] + g[1] * dt + t.h.eval(x).1
            }
        }
    }

    /// Inverse of `psi` on `[0, s1)`.
    pub fn psi_inverse(&self, y: f64) -> f64 {
        let t = match &self.tail {
            None => return f64::NAN,
            Some(t) => t,
        };
        if y <= t.s2 {
            return 0.0;
        }
        invert_increasing(|x| (self.psi(x), self.psi_prime(x)), 0.0, t.s1, y)
    }
}

/// The map of the given pattern on `rho`.
pub fn build_map(rho: &RadialDensity, pattern: SeidlPattern) -> Result<SeidlMap<'_>> {
    SeidlMap::build(rho, pattern)
}

/// Cycle and pushforward diagnostics over `n_probe` mass-spaced probes.
pub fn check_map(map: &SeidlMap<'_>, n_probe: usize) -> MapDiagnostics {
    map.check(n_probe)
}

/// Density on the whole line, used for the reflected one-dimensional problem.
#[derive(Clone, Debug, PartialEq)]
pub struct LineDensity {
    /// `(lo, hi, sign)`: on `[lo, hi]` the value is `rho(sign * x)`.
    pieces: Vec<(f64, f64, f64)>,
    rho: RadialDensity,
}

impl LineDensity {
    pub fn new(rho: RadialDensity, pieces: Vec<(f64, f64, f64)>) -> Self {
        LineDensity { pieces, rho }
    }

    pub fn pieces(&self) -> &[(f64, f64, f64)] {
        &self.pieces
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|&&(lo, hi, _)| x >= lo && x <= hi)
            .map(|&(_, _, s)| self.rho.pdf(s * x))
            .unwrap_or(0.0)
    }

    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.pieces
            .iter()
            .map(|&(lo, hi, s)| {
                let (l, h) = (lo.max(a), hi.min(b));
                if l >= h {
                    0.0
                } else if s > 0.0 {
                    self.rho.cdf(h) - self.rho.cdf(l)
                } else {
                    self.rho.cdf(-l) - self.rho.cdf(-h)
                }
            })
            .sum()
    }
}
