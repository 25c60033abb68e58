//! JSON density files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "segments": [
//!     {"interval": [0, 1], "kind": "poly", "data": {"basis": "monomial", "coefficients": [1.0]}},
//!     {"interval": [1, 2], "kind": "table", "data": {"x": [1, 1.5, 2], "y": [0, 0.5, 0]}},
//!     {"interval": [2, null], "kind": "pushforward-tail",
//!      "data": {"s1": 0.9, "s2": 1.0, "h_jet": [0, 1, 0.3], "delta": 0.2}}
//!   ]
//! }
//! ```
//!
//! Monomial coefficients multiply powers of `x - a` on `[a, b]`; Bernstein
//! coefficients refer to `t = (x - a) / (b - a)`. Table data are knots of a
//! monotone cubic interpolant whose first and last abscissae equal the interval.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{HProfile, PolySegment, PushforwardTail, RadialDensity, Segment, TableSegment};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub schema_version: u32,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Poly,
    Table,
    PushforwardTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub interval: (f64, Option<f64>),
    pub kind: SegmentKind,
    pub data: serde_json::Value,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Basis {
    #[default]
    Monomial,
    Bernstein,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyData {
    #[serde(default)]
    basis: Basis,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableData {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailData {
    s1: f64,
    s2: f64,
    h_jet: Vec<f64>,
    delta: f64,
}

fn seg_err(i: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidDensity(format!("segment {i}: {msg}"))
}

impl DensityFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<RadialDensity> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidDensity(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut body = Vec::new();
        let mut tail = None;
        let n = self.segments.len();
        for (i, s) in self.segments.iter().enumerate() {
            let a = s.interval.0;
            match s.kind {
                SegmentKind::Poly => {
                    let b = s
                        .interval
                        .1
                        .ok_or_else(|| seg_err(i, "poly needs a finite interval"))?;
                    let d: PolyData =
                        serde_json::from_value(s.data.clone()).map_err(|e| seg_err(i, e))?;
                    let p = match d.basis {
                        Basis::Monomial => PolySegment::monomial(a, b, &d.coefficients),
                        Basis::Bernstein => PolySegment::bernstein(a, b, d.coefficients),
                    }
                    .map_err(|e| seg_err(i, e))?;
                    body.push(Segment::Poly(p));
                }
                SegmentKind::Table => {
                    let b = s
                        .interval
                        .1
                        .ok_or_else(|| seg_err(i, "table needs a finite interval"))?;
                    let d: TableData =
                        serde_json::from_value(s.data.clone()).map_err(|e| seg_err(i, e))?;
                    if d.x.first() != Some(&a) || d.x.last() != Some(&b) {
                        return Err(seg_err(i, "table abscissae must span the interval"));
                    }
                    body.push(Segment::Table(
                        TableSegment::new(d.x, d.y).map_err(|e| seg_err(i, e))?,
                    ));
                }
                SegmentKind::PushforwardTail => {
                    if i + 1 != n {
                        return Err(seg_err(i, "a pushforward tail must be the last segment"));
                    }
                    let d: TailData =
                        serde_json::from_value(s.data.clone()).map_err(|e| seg_err(i, e))?;
                    if d.s2 != a {
                        return Err(seg_err(i, "tail interval must start at s2"));
                    }
                    tail = Some(PushforwardTail {
                        s1: d.s1,
                        s2: d.s2,
                        h: HProfile {
                            jet: d.h_jet,
                            delta: d.delta,
                        },
                    });
                }
            }
        }
        RadialDensity::new(body, tail)
    }

    pub fn from_density(rho: &RadialDensity) -> Self {
        let mut segments: Vec<SegmentSpec> = rho
            .segments()
            .iter()
            .map(|s| {
                let (a, b) = s.interval();
                let (kind, data) = match s {
                    Segment::Poly(p) => (
                        SegmentKind::Poly,
                        serde_json::to_value(PolyData {
                            basis: Basis::Bernstein,
                            coefficients: p.coefficients().to_vec(),
                        }),
                    ),
                    Segment::Table(t) => {
                        let (x, y) = t.knots();
                        (
                            SegmentKind::Table,
                            serde_json::to_value(TableData {
                                x: x.to_vec(),
                                y: y.to_vec(),
                            }),
                        )
                    }
                };
                SegmentSpec {
                    interval: (a, Some(b)),
                    kind,
                    data: data.expect("plain numeric data serializes"),
                }
            })
            .collect();
        if let Some(t) = rho.tail() {
            segments.push(SegmentSpec {
                interval: (t.s2, None),
                kind: SegmentKind::PushforwardTail,
                data: serde_json::to_value(TailData {
                    s1: t.s1,
                    s2: t.s2,
                    h_jet: t.h.jet.clone(),
                    delta: t.h.delta,
                })
                .expect("plain numeric data serializes"),
            });
        }
        DensityFile {
            schema_version: SCHEMA_VERSION,
            segments,
        }
    }
}

impl RadialDensity {
    pub fn from_json(text: &str) -> Result<Self> {
        DensityFile::from_json(text)?.build()
    }

    pub fn to_json(&self) -> Result<String> {
        DensityFile::from_density(self).to_json()
    }
}
