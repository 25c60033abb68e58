//! Grid sweeps emitted as CSV, one registered strategy per `--what`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use coulomb_mot::radialcost::{
    alignment_condition, c_pi, find_stationary_points, phi_threshold, radial_cost,
    trace_implicit_curves, AngularConfig, MinimizeOptions, Radii, StationaryKind,
    StationaryOptions,
};

use crate::output::{csv_line, num, scalar, Failure, Report};

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// condition, stationary, curves or properties.
    #[arg(long, default_value = "condition")]
    pub what: String,
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r2: f64,
    /// Fixed r3 for the curves sweep.
    #[arg(long, default_value_t = 15.0)]
    pub r3: f64,
    /// Start of the r3 range.
    #[arg(long, default_value_t = 13.0)]
    pub from: f64,
    /// End of the r3 range (inclusive); empty if below `from`.
    #[arg(long, default_value_t = 16.0)]
    pub to: f64,
    /// Points of the r3 range.
    #[arg(long, default_value_t = 31)]
    pub steps: usize,
    /// Samples of beta in (0, pi) for the curves sweep.
    #[arg(long, default_value_t = 64)]
    pub n_beta: usize,
    /// Starts per axis of the stationary point search.
    #[arg(long, default_value_t = 48)]
    pub stationary_grid: usize,
    /// Random radius triples for the properties sweep.
    #[arg(long, default_value_t = 32)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    fn r3_range(&self) -> Result<Vec<f64>, Failure> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Failure::input("range bounds must be finite"));
        }
        if self.steps == 0 || self.to < self.from {
            return Ok(Vec::new());
        }
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| self.from + h * i as f64).collect())
    }
}

type Rows = Vec<Vec<f64>>;

pub trait Sweep: Send + Sync {
    fn name(&self) -> &'static str;
    fn columns(&self) -> &'static [&'static str];
    fn rows(&self, a: &SweepArgs, opts: &MinimizeOptions) -> Result<Rows, Failure>;
}

struct ConditionSweep;

impl Sweep for ConditionSweep {
    fn name(&self) -> &'static str {
        "condition"
    }

    fn columns(&self) -> &'static [&'static str] {
        &[
            "r3",
            "alignment",
            "phi_threshold",
            "value",
            "alpha",
            "beta",
            "c_pi",
            "collinear_argmin",
        ]
    }

    fn rows(&self, a: &SweepArgs, opts: &MinimizeOptions) -> Result<Rows, Failure> {
        let phi = phi_threshold(a.r1, a.r2).unwrap_or(f64::NAN);
        let mut rows = Vec::new();
        for r3 in a.r3_range()? {
            let r = Radii::new(a.r1, a.r2, r3)?;
            let m = radial_cost(&r, opts)?;
            let collinear = m.argmin.torus_distance(&AngularConfig::collinear()) < 1e-6;
            rows.push(vec![
                r3,
                alignment_condition(&r),
                phi,
                m.value,
                m.argmin.alpha,
                m.argmin.beta,
                c_pi(&r),
                f64::from(u8::from(collinear)),
            ]);
        }
        Ok(rows)
    }
}

struct StationarySweep;

impl Sweep for StationarySweep {
    fn name(&self) -> &'static str {
        "stationary"
    }

    fn columns(&self) -> &'static [&'static str] {
        &[
            "r3",
            "alignment",
            "points",
            "min",
            "max",
            "saddle",
            "degenerate",
            "only_corners",
            "dropped",
        ]
    }

    fn rows(&self, a: &SweepArgs, _: &MinimizeOptions) -> Result<Rows, Failure> {
        let so = StationaryOptions {
            grid: a.stationary_grid,
            ..StationaryOptions::default()
        };
        let mut rows = Vec::new();
        for r3 in a.r3_range()? {
            let r = Radii::new(a.r1, a.r2, r3)?;
            let rep = find_stationary_points(&r, &so)?;
            let count =
                |k: StationaryKind| rep.points.iter().filter(|p| p.kind == k).count() as f64;
            rows.push(vec![
                r3,
                alignment_condition(&r),
                rep.points.len() as f64,
                count(StationaryKind::Min),
                count(StationaryKind::Max),
                count(StationaryKind::Saddle),
                count(StationaryKind::Degenerate),
                f64::from(u8::from(rep.only_corner_points)),
                rep.dropped as f64,
            ]);
        }
        Ok(rows)
    }
}

struct CurvesSweep;

impl Sweep for CurvesSweep {
    fn name(&self) -> &'static str {
        "curves"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["beta", "alpha_pi", "alpha_0", "alpha_hat_pi", "alpha_hat_0"]
    }

    fn rows(&self, a: &SweepArgs, _: &MinimizeOptions) -> Result<Rows, Failure> {
        if a.n_beta == 0 {
            return Ok(Vec::new());
        }
        let r = Radii::new(a.r1, a.r2, a.r3)?;
        let c = trace_implicit_curves(&r, a.n_beta)?;
        Ok((0..c.beta.len())
            .map(|i| {
                vec![
                    c.beta[i],
                    c.alpha_pi[i],
                    c.alpha_0[i],
                    c.alpha_hat_pi[i],
                    c.alpha_hat_0[i],
                ]
            })
            .collect())
    }
}

/// Homogeneity `c(l r) = c(r) / l` and label symmetry on seeded random triples.
struct PropertiesSweep;

impl Sweep for PropertiesSweep {
    fn name(&self) -> &'static str {
        "properties"
    }

    fn columns(&self) -> &'static [&'static str] {
        &[
            "case",
            "r1",
            "r2",
            "r3",
            "lambda",
            "value",
            "homogeneity_residual",
            "symmetry_residual",
            "alignment",
        ]
    }

    fn rows(&self, a: &SweepArgs, opts: &MinimizeOptions) -> Result<Rows, Failure> {
        let mut rng = StdRng::seed_from_u64(a.seed);
        let mut rows = Vec::new();
        for case in 0..a.cases {
            let mut v = [0.0f64; 3];
            for x in &mut v {
                *x = rng.gen_range(0.1..5.0);
            }
            v.sort_by(f64::total_cmp);
            let lambda = rng.gen_range(0.25..4.0);
            let c = |x: [f64; 3]| -> Result<f64, Failure> {
                Ok(radial_cost(&Radii::new(x[0], x[1], x[2])?, opts)?.value)
            };
            let base = c(v)?;
            let scaled = c(v.map(|x| lambda * x))?;
            let sym = (c([v[2], v[0], v[1]])? - base)
                .abs()
                .max((c([v[1], v[2], v[0]])? - base).abs());
            rows.push(vec![
                case as f64,
                v[0],
                v[1],
                v[2],
                lambda,
                base,
                (lambda * scaled - base).abs(),
                sym,
                alignment_condition(&Radii::new(v[0], v[1], v[2])?),
            ]);
        }
        Ok(rows)
    }
}

pub struct SweepRegistry {
    sweeps: BTreeMap<&'static str, Box<dyn Sweep>>,
}

impl SweepRegistry {
    pub fn register(&mut self, s: Box<dyn Sweep>) {
        self.sweeps.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Sweep, Failure> {
        self.sweeps.get(name).map(|s| s.as_ref()).ok_or_else(|| {
            let names: Vec<&str> = self.sweeps.keys().copied().collect();
            Failure::input(format!(
                "unknown sweep '{name}' (available: {})",
                names.join(", ")
            ))
        })
    }
}

impl Default for SweepRegistry {
    fn default() -> Self {
        let mut r = SweepRegistry {
            sweeps: BTreeMap::new(),
        };
        r.register(Box::new(ConditionSweep));
        r.register(Box::new(StationarySweep));
        r.register(Box::new(CurvesSweep));
        r.register(Box::new(PropertiesSweep));
        r
    }
}

pub fn run(a: &SweepArgs, opts: &MinimizeOptions) -> Result<Report, Failure> {
    let reg = SweepRegistry::default();
    let s = reg.get(&a.what)?;
    let rows = s.rows(a, opts)?;
    let cols: Vec<String> = s.columns().iter().map(|c| c.to_string()).collect();
    let mut csv = csv_line(&cols);
    for r in &rows {
        csv.push_str(&csv_line(&r.iter().map(|&x| num(x)).collect::<Vec<_>>()));
    }
    let text = match &a.out {
        Some(p) => {
            let mut head = format!(
                "# coulomb-mot sweep schema_version={}\n",
                crate::output::SCHEMA_VERSION
            );
            head.push_str(&format!("# grid={}\n# tol={}\n", opts.grid, num(opts.tol)));
            if let serde_json::Value::Object(m) = serde_json::to_value(a).expect("serializable") {
                for (k, v) in m {
                    head.push_str(&format!("# {k}={}\n", scalar(&v)));
                }
            }
            head.push_str(&csv);
            std::fs::write(p, head)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
            format!("rows = {}\ncsv = {}\n", rows.len(), p.display())
        }
        None => csv,
    };
    let result = serde_json::json!({ "columns": cols, "rows": rows });
    Report::new(a, result, text)
}
