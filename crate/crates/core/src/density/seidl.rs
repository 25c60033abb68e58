//! Maps of the class {III, DDI, DID, IDD}: the three tertiles are cycled
//! `[0, s1) -> [s1, s2) -> [s2, inf) -> [0, s1)` with prescribed branch monotonicities.
//!
//! Every branch is written in mass coordinates `u = F(x)` as an affine map
//! `u -> sign * u + offset`, then `T(x) = F^-1(sign * F(x) + offset)`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::{RadialDensity, Tertiles};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeidlPattern {
    III,
    DDI,
    DID,
    IDD,
}

impl SeidlPattern {
    pub const ALL: [SeidlPattern; 4] = [
        SeidlPattern::III,
        SeidlPattern::DDI,
        SeidlPattern::DID,
        SeidlPattern::IDD,
    ];

    /// `true` marks an increasing branch.
    pub fn increasing(&self) -> [bool; 3] {
        match self {
            SeidlPattern::III => [true, true, true],
            SeidlPattern::DDI => [false, false, true],
            SeidlPattern::DID => [false, true, false],
            SeidlPattern::IDD => [true, false, false],
        }
    }

    /// `(sign, offset)` of the branch map in mass coordinates.
    pub fn mass_map(&self, branch: usize) -> (f64, f64) {
        let inc = self.increasing()[branch];
        match (branch, inc) {
            (0, true) => (1.0, 1.0 / 3.0),
            (0, false) => (-1.0, 2.0 / 3.0),
            (1, true) => (1.0, 1.0 / 3.0),
            (1, false) => (-1.0, 4.0 / 3.0),
            (2, true) => (1.0, -2.0 / 3.0),
            (2, false) => (-1.0, 1.0),
            _ => unreachable!("three branches"),
        }
    }
}

impl fmt::Display for SeidlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SeidlPattern::III => "III",
            SeidlPattern::DDI => "DDI",
            SeidlPattern::DID => "DID",
            SeidlPattern::IDD => "IDD",
        };
        f.write_str(s)
    }
}

impl FromStr for SeidlPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "III" => Ok(SeidlPattern::III),
            "DDI" => Ok(SeidlPattern::DDI),
            "DID" => Ok(SeidlPattern::DID),
            "IDD" => Ok(SeidlPattern::IDD),
            _ => Err(Error::UnknownStrategy {
                kind: "pattern",
                name: s.to_string(),
                available: "III, DDI, DID, IDD".into(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeidlMap<'a> {
    pub pattern: SeidlPattern,
    pub tertiles: Tertiles,
    rho: &'a RadialDensity,
}

impl<'a> SeidlMap<'a> {
    pub fn build(rho: &'a RadialDensity, pattern: SeidlPattern) -> Result<Self> {
        let tertiles = rho.tertiles()?;
        Ok(SeidlMap {
            pattern,
            tertiles,
            rho,
        })
    }

    pub fn density(&self) -> &'a RadialDensity {
        self.rho
    }

    pub fn branch_of(&self, x: f64) -> usize {
        if x < self.tertiles.s1 {
            0
        } else if x < self.tertiles.s2 {
            1
        } else {
            2
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let (sign, offset) = self.pattern.mass_map(self.branch_of(x));
        let target = (sign * self.rho.cdf(x) + offset).clamp(0.0, 1.0);
        self.rho.quantile(target)
    }

    /// `(x, T(x), T^2(x))`.
    pub fn orbit(&self, x: f64) -> [f64; 3] {
        let t = self.apply(x);
        [x, t, self.apply(t)]
    }

    pub fn check(&self, n_probe: usize) -> MapDiagnostics {
        let Tertiles { s1, s2 } = self.tertiles;
        let mut diag = MapDiagnostics {
            pattern: self.pattern,
            n_probe,
            probes_used: 0,
            max_cycle_error: 0.0,
            max_pushforward_error: 0.0,
            branches: [BranchCheck::default(); 3],
            violations: Vec::new(),
        };
        let mut last: [Option<(f64, f64)>; 3] = [None; 3];
        let inc = self.pattern.increasing();
        for k in 0..n_probe {
            let p = (k as f64 + 0.5) / n_probe as f64;
            let x = self.rho.quantile(p);
            if (x - s1).abs() < 1e-12 || (x - s2).abs() < 1e-12 || !x.is_finite() {
                continue;
            }
            diag.probes_used += 1;
            let b = self.branch_of(x);
            let u = self.rho.cdf(x);
            let t = self.apply(x);
            let (sign, offset) = self.pattern.mass_map(b);
            let push = (self.rho.cdf(t) - (sign * u + offset)).abs();
            let t3 = self.apply(self.apply(t));
            let cyc = (t3 - x).abs() / x.abs().max(1.0);
            diag.max_pushforward_error = diag.max_pushforward_error.max(push);
            diag.max_cycle_error = diag.max_cycle_error.max(cyc);
            if push >= MapDiagnostics::TOL || cyc >= MapDiagnostics::TOL || !cyc.is_finite() {
                diag.violations.push(x);
            }
            let br = &mut diag.branches[b];
            br.probes += 1;
            if let Some((_, tp)) = last[b] {
                let tol = 1e-12 * tp.abs().max(1.0);
                let ok = if inc[b] { t >= tp - tol } else { t <= tp + tol };
                if !ok {
                    br.monotone = false;
                    diag.violations.push(x);
                }
            }
            last[b] = Some((x, t));
        }
        diag
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck {
    pub probes: usize,
    pub monotone: bool,
}

impl Default for BranchCheck {
    fn default() -> Self {
        BranchCheck {
            probes: 0,
            monotone: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDiagnostics {
    pub pattern: SeidlPattern,
    pub n_probe: usize,
    pub probes_used: usize,
    pub max_cycle_error: f64,
    pub max_pushforward_error: f64,
    pub branches: [BranchCheck; 3],
    /// Probe points failing any check.
    pub violations: Vec<f64>,
}

impl MapDiagnostics {
    pub const TOL: f64 = 1e-9;

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.branches.iter().all(|b| b.monotone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_ddi_closed_forms() {
        let u = RadialDensity::uniform(0.0, 1.0).unwrap();
        let m = SeidlMap::build(&u, SeidlPattern::DDI).unwrap();
        let o = m.orbit(0.1);
        assert!((o[1] - (2.0 / 3.0 - 0.1)).abs() < 1e-14);
        assert!((o[2] - (2.0 / 3.0 + 0.1)).abs() < 1e-14);
        assert!((m.apply(o[2]) - 0.1).abs() < 1e-14);
        let left = m.apply(1.0 / 3.0 - 1e-12);
        assert!((left - 1.0 / 3.0).abs() < 1e-11);
        let d = m.check(1000);
        assert!(d.passed() && d.max_cycle_error < 1e-12, "{d:?}");
    }

    #[test]
    fn uniform_iii_shifts() {
        let u = RadialDensity::uniform(0.0, 1.0).unwrap();
        let m = SeidlMap::build(&u, SeidlPattern::III).unwrap();
        let o = m.orbit(0.1);
        assert!((o[1] - 0.4333333333333333).abs() < 1e-14);
        assert!((o[2] - 0.7666666666666667).abs() < 1e-14);
        assert!((m.apply(o[2]) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn every_pattern_cycles() {
        let b = RadialDensity::blocks(&[(0.0, 1.0), (2.0, 3.0), (15.0, 16.0)], &[1.0 / 3.0; 3])
            .unwrap();
        for p in SeidlPattern::ALL {
            let d = SeidlMap::build(&b, p).unwrap().check(999);
            assert!(d.passed(), "{p}: {d:?}");
        }
    }

    #[test]
    fn parse_patterns() {
        assert_eq!("ddi".parse::<SeidlPattern>().unwrap(), SeidlPattern::DDI);
        assert!("DII".parse::<SeidlPattern>().is_err());
    }
}
