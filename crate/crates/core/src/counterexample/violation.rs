use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_eps_m, gates, EpsM, Gates};
use crate::density::{RadialDensity, SeidlMap, SeidlPattern};
use crate::error::{Error, Result};
use crate::mot::{triple_cost, MongeTriple};
use crate::radialcost::{alignment_condition, phi_raw, MinimizeOptions, Radii};

const LADDER_STEPS: usize = 200;
/// Window entries per ladder tried before giving up.
const LADDER_CANDIDATES: usize = 16;
const REGION_ITERATIONS: usize = 10;
const REGION_GRID: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// Distance of the inner boundary of the first-tertile interval from its end.
    pub alpha: f64,
    /// `S` of the inner boundary.
    pub beta: f64,
    pub m_tilde: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pattern: SeidlPattern,
    /// Coordinate exchanged between the two triples.
    pub template: String,
    pub l: f64,
    pub r: f64,
    pub triples: [MongeTriple; 2],
    pub swap_triples: [MongeTriple; 2],
    /// Radial costs of `triples` followed by those of `swap_triples`.
    pub exact_costs: [f64; 4],
    /// `c(triples) - c(swap_triples)`; positive certifies a violation.
    pub gap: f64,
    /// `P` at the two original triples.
    pub alignment: [f64; 2],
    pub eps: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub region: Option<Region>,
    pub gates: Gates,
    /// Interval choices not spelled out for this pattern in the source argument.
    pub extrapolated: bool,
}

impl Certificate {
    /// Recomputes the gap from the stored triples.
    pub fn recompute_gap(&self, opts: &MinimizeOptions) -> Result<f64> {
        let c = |t: &MongeTriple| triple_cost(t, opts);
        Ok(c(&self.triples[0])? + c(&self.triples[1])?
            - c(&self.swap_triples[0])?
            - c(&self.swap_triples[1])?)
    }
}

fn alignment(t: &MongeTriple) -> Result<f64> {
    Ok(alignment_condition(&Radii::new(t[0], t[1], t[2])?))
}

#[allow(clippy::too_many_arguments)]
fn certificate(
    pattern: SeidlPattern,
    template: &str,
    l: f64,
    r: f64,
    triples: [MongeTriple; 2],
    swap_triples: [MongeTriple; 2],
    opts: &MinimizeOptions,
    gates: Gates,
) -> Result<Certificate> {
    let c = |t: &MongeTriple| triple_cost(t, opts);
    let exact_costs = [
        c(&triples[0])?,
        c(&triples[1])?,
        c(&swap_triples[0])?,
        c(&swap_triples[1])?,
    ];
    Ok(Certificate {
        pattern,
        template: template.into(),
        l,
        r,
        triples,
        swap_triples,
        exact_costs,
        gap: exact_costs[0] + exact_costs[1] - exact_costs[2] - exact_costs[3],
        alignment: [alignment(&triples[0])?, alignment(&triples[1])?],
        eps: None,
        m: None,
        region: None,
        gates,
        extrapolated: pattern != SeidlPattern::DID && pattern != SeidlPattern::DDI,
    })
}

/// First-coordinate swap between a DDI triple near `x = 0` and one near `x = s1`, with
/// both triples inside the epsilon-M windows.
pub fn find_violation(
    rho: &RadialDensity,
    epsm: &EpsM,
    opts: &MinimizeOptions,
) -> Result<Certificate> {
    let map = SeidlMap::build(rho, SeidlPattern::DDI)?;
    let (s1, s2) = (map.tertiles.s1, map.tertiles.s2);
    let (eps, big_m) = (epsm.eps, epsm.m);
    let in_x = |o: &MongeTriple| {
        o[0] > 0.0 && o[0] < eps && o[1] > s2 - eps && o[1] < s2 && o[2] > s2 && o[2] < s2 + eps
    };
    let in_y = |o: &MongeTriple| {
        o[0] > s1 - eps
            && o[0] < s1
            && o[1] > s1
            && o[1] < s1 + eps
            && o[2] > big_m
            && o[2].is_finite()
    };
    let ladder = |point: &dyn Fn(usize) -> f64, inside: &dyn Fn(&MongeTriple) -> bool| {
        let mut out = Vec::new();
        for j in 1..=LADDER_STEPS {
            let x = point(j);
            if !(x > 0.0 && x < s1) {
                break;
            }
            let o = map.orbit(x);
            if inside(&o) {
                out.push(o);
                if out.len() == LADDER_CANDIDATES {
                    break;
                }
            }
        }
        out
    };
    let xs = ladder(&|j| s1 * 0.5f64.powi(j as i32), &in_x);
    let ys = ladder(&|j| s1 - s1 * 0.5f64.powi(j as i32), &in_y);
    let windows = format!(
        "x-window (0,{eps})x({},{s2})x({s2},{}), y-window ({},{s1})x({s1},{})x({big_m},inf); \
         {} x and {} y ladder points entered",
        s2 - eps,
        s2 + eps,
        s1 - eps,
        s1 + eps,
        xs.len(),
        ys.len()
    );
    let pairs: Vec<(usize, usize)> = (0..xs.len())
        .flat_map(|i| (0..ys.len()).map(move |j| (i, j)))
        .collect();
    let gaps: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (xs[i], ys[j]);
            let c = |t: &MongeTriple| triple_cost(t, opts);
            Ok(c(&a)? + c(&b)? - c(&[b[0], a[1], a[2]])? - c(&[a[0], b[1], b[2]])?)
        })
        .collect();
    for (&(i, j), g) in pairs.iter().zip(gaps) {
        if g? > 0.0 {
            let (a, b) = (xs[i], ys[j]);
            let mut cert = certificate(
                SeidlPattern::DDI,
                "first",
                a[0],
                b[0],
                [a, b],
                [[b[0], a[1], a[2]], [a[0], b[1], b[2]]],
                opts,
                gates(rho)?,
            )?;
            cert.eps = Some(eps);
            cert.m = Some(big_m);
            return Ok(cert);
        }
    }
    Err(Error::NotFound(windows))
}

/// Mass coordinate of `S^2` at the two ends of the first tertile.
fn infinite_end_is_zero(pattern: SeidlPattern) -> bool {
    let (s0, o0) = pattern.mass_map(0);
    let (s1, o1) = pattern.mass_map(1);
    let u2 = |u: f64| s1 * (s0 * u + o0) + o1;
    (u2(0.0) - 1.0).abs() < 1e-12
}

/// The `c = c_pi` box of the class argument and a third-coordinate style swap inside it.
fn refute_pattern(
    rho: &RadialDensity,
    pattern: SeidlPattern,
    opts: &MinimizeOptions,
) -> Result<Certificate> {
    let map = SeidlMap::build(rho, pattern)?;
    let s1 = map.tertiles.s1;
    let zero_end = infinite_end_is_zero(pattern);
    let inner = |a: f64| if zero_end { a } else { s1 - a };
    let end = if zero_end { 0.0 } else { s1 };
    // limit of S at the end, in mass coordinates
    let (sg, off) = pattern.mass_map(0);
    let s_end = rho.quantile(sg * rho.cdf(end) + off);

    let mut a = 0.5 * s1;
    let mut region = None;
    for it in 1..=REGION_ITERATIONS {
        let xb = inner(a);
        let orbit_b = map.orbit(xb);
        let (j_lo, j_hi) = (orbit_b[1].min(s_end), orbit_b[1].max(s_end));
        let (i_lo, i_hi) = (xb.min(end), xb.max(end));
        let mut m_tilde: f64 = 0.0;
        for p in 0..=REGION_GRID {
            let x1 = i_lo + (i_hi - i_lo) * p as f64 / REGION_GRID as f64;
            for q in 0..=REGION_GRID {
                let x2 = j_lo + (j_hi - j_lo) * q as f64 / REGION_GRID as f64;
                m_tilde = m_tilde.max(phi_raw(x1, x2));
            }
        }
        if !m_tilde.is_finite() {
            return Err(Error::RegionEmpty(format!(
                "{pattern}: phi unbounded on the box"
            )));
        }
        m_tilde *= 1.0 + 1e-9;
        let m_inner = orbit_b[2];
        if m_tilde <= m_inner {
            region = Some(Region {
                alpha: a,
                beta: orbit_b[1],
                m_tilde,
                iterations: it,
            });
            break;
        }
        // shrink so that S^2 of the new inner boundary is m_tilde
        let xb_new = map.apply(m_tilde);
        let a_new = if zero_end { xb_new } else { s1 - xb_new };
        if !(a_new > 0.0 && a_new < a) {
            return Err(Error::RegionEmpty(format!(
                "{pattern}: box did not shrink (alpha {a} -> {a_new})"
            )));
        }
        a = a_new;
    }
    let region = region.ok_or_else(|| {
        Error::RegionEmpty(format!(
            "{pattern}: no fixed point in {REGION_ITERATIONS} iterations"
        ))
    })?;

    let (l, r) = if zero_end {
        (a / 3.0, 2.0 * a / 3.0)
    } else {
        (s1 - 2.0 * a / 3.0, s1 - a / 3.0)
    };
    let (ol, or) = (map.orbit(l), map.orbit(r));
    // the line points -S(.), ., S^2(.) of both triples, sorted
    let mut pts = [-ol[1], -or[1], l, r, ol[2], or[2]];
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if pts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NotFound(format!(
            "{pattern}: line points not strictly ordered {pts:?}"
        )));
    }
    let n1 = [pts[2], -pts[0], pts[4]];
    let n2 = [pts[3], -pts[1], pts[5]];
    if (n1 == ol && n2 == or) || (n1 == or && n2 == ol) {
        return Err(Error::NotFound(format!(
            "{pattern}: the sorted pairing is the map itself"
        )));
    }
    let template = if n1[0] == ol[0] && n1[1] == ol[1] {
        "third"
    } else if n1[0] == ol[0] && n1[2] == ol[2] {
        "second"
    } else {
        "first"
    };
    let mut cert = certificate(
        pattern,
        template,
        l,
        r,
        [ol, or],
        [n1, n2],
        opts,
        gates(rho)?,
    )?;
    if !(cert.gap > 0.0) {
        return Err(Error::NotFound(format!(
            "{pattern}: swap gap {} is not positive",
            cert.gap
        )));
    }
    cert.m = Some(region.m_tilde);
    cert.region = Some(region);
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternOutcome {
    pub pattern: SeidlPattern,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationReport {
    pub eps_m: Option<EpsM>,
    pub outcomes: Vec<PatternOutcome>,
}

impl RefutationReport {
    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.outcomes.iter().filter_map(|o| o.certificate.as_ref())
    }

    pub fn complete(&self) -> bool {
        self.outcomes.iter().all(|o| o.certificate.is_some())
    }
}

/// One swap certificate per pattern of `{I,D}^3`; DDI goes through [`find_violation`].
///
/// `RegionEmpty` and `NotFound` are reported per pattern; other errors abort.
#[allow(non_snake_case)]
pub fn refute_class_T(rho: &RadialDensity, opts: &MinimizeOptions) -> Result<RefutationReport> {
    let t = rho.tertiles()?;
    let eps_m = find_eps_m(t.s1, t.s2).ok();
    let mut outcomes = Vec::new();
    for pattern in SeidlPattern::ALL {
        let res = match pattern {
            SeidlPattern::DDI => match &eps_m {
                Some(e) => find_violation(rho, e, opts),
                None => Err(Error::NotFound(
                    "no (eps, M) pair for these tertiles".into(),
                )),
            },
            p => refute_pattern(rho, p, opts),
        };
        let (certificate, error) = match res {
            Ok(c) => (Some(c), None),
            Err(e @ (Error::NotFound(_) | Error::RegionEmpty(_))) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        outcomes.push(PatternOutcome {
            pattern,
            certificate,
            error,
        });
    }
    Ok(RefutationReport { eps_m, outcomes })
}
