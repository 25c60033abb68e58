use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use coulomb_mot::counterexample::{
    gates, matching_report, refute_class_T, CounterexampleSpec, EpsM, Gates, MatchingReport,
    PatternOutcome,
};
use coulomb_mot::density::{build_map, check_map, DensityFile, RadialDensity, SeidlPattern};
use coulomb_mot::mot::{
    discretize, pattern_plan, probe_cyclical_monotonicity, sample_graph, solve_exact, triple_cost,
    SolverRegistry, SwapRegistry, PROBE_TOL,
};
use coulomb_mot::radialcost::{
    alignment_condition, c_delta, c_pi, full_cost, phi_threshold, radial_cost, AngularConfig,
    CostBreakdown, MinimizeOptions, Radii,
};

use crate::output::{csv_line, num, Failure, Report};

fn load_density(path: &Path) -> Result<RadialDensity, Failure> {
    let with_path = |e: coulomb_mot::Error| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    };
    DensityFile::read(path)
        .and_then(|d| d.build())
        .map_err(with_path)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct CostArgs {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Also evaluate the angular cost at these angles (radians).
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    pub angles: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct CostResult {
    value: f64,
    argmin: AngularConfig,
    collinear_argmin: bool,
    c_pi: f64,
    c_delta: f64,
    alignment: f64,
    phi_threshold: Option<f64>,
    at_angles: Option<CostBreakdown>,
}

pub fn cost(a: &CostArgs, opts: &MinimizeOptions) -> Result<Report, Failure> {
    let r = Radii::new(a.r1, a.r2, a.r3)?;
    let m = radial_cost(&r, opts)?;
    let res = CostResult {
        value: m.value,
        argmin: m.argmin,
        collinear_argmin: m.argmin.torus_distance(&AngularConfig::collinear()) < 1e-6,
        c_pi: c_pi(&r),
        c_delta: c_delta(&r),
        alignment: alignment_condition(&r),
        phi_threshold: phi_threshold(a.r1, a.r2).ok(),
        at_angles: a
            .angles
            .as_ref()
            .map(|v| full_cost(&r, &AngularConfig::new(v[0], v[1]))),
    };
    let mut t = String::new();
    writeln!(t, "value = {}", num(res.value)).unwrap();
    writeln!(
        t,
        "argmin = ({}, {})",
        num(res.argmin.alpha),
        num(res.argmin.beta)
    )
    .unwrap();
    writeln!(t, "collinear_argmin = {}", res.collinear_argmin).unwrap();
    writeln!(t, "c_pi = {}", num(res.c_pi)).unwrap();
    writeln!(t, "c_delta = {}", num(res.c_delta)).unwrap();
    writeln!(t, "alignment = {}", num(res.alignment)).unwrap();
    match res.phi_threshold {
        Some(p) => writeln!(t, "phi_threshold = {}", num(p)).unwrap(),
        None => writeln!(t, "phi_threshold = none").unwrap(),
    }
    if let Some(b) = &res.at_angles {
        writeln!(
            t,
            "at_angles = {} (f12 {}, f13 {}, f23 {})",
            num(b.total),
            num(b.f12),
            num(b.f13),
            num(b.f23)
        )
        .unwrap();
    }
    Report::new(a, res, t)
}

#[derive(Args, Debug, Serialize)]
pub struct MapArgs {
    /// Density specification file (JSON).
    pub density: PathBuf,
    #[arg(long, default_value = "DDI")]
    pub pattern: SeidlPattern,
    /// Run the cycle and pushforward checks; exit 1 if they fail.
    #[arg(long)]
    pub check: bool,
    /// Probes used by the check.
    #[arg(long, default_value_t = 1000)]
    pub n_probe: usize,
    /// Rows of the map table, at mass midpoints.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Write the table here instead of printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn map(a: &MapArgs) -> Result<Report, Failure> {
    let rho = load_density(&a.density)?;
    let m = build_map(&rho, a.pattern)?;
    let mut csv = csv_line(&["x".into(), "T".into(), "T2".into()]);
    let mut rows = Vec::with_capacity(a.samples);
    for k in 0..a.samples {
        let x = rho.quantile((k as f64 + 0.5) / a.samples as f64);
        let o = m.orbit(x);
        csv.push_str(&csv_line(&[num(o[0]), num(o[1]), num(o[2])]));
        rows.push(o);
    }
    let diag = a.check.then(|| check_map(&m, a.n_probe));
    let mut t = String::new();
    writeln!(t, "s1 = {}", num(m.tertiles.s1)).unwrap();
    writeln!(t, "s2 = {}", num(m.tertiles.s2)).unwrap();
    if let Some(d) = &diag {
        writeln!(t, "max_cycle_error = {}", num(d.max_cycle_error)).unwrap();
        writeln!(
            t,
            "max_pushforward_error = {}",
            num(d.max_pushforward_error)
        )
        .unwrap();
        let mono: Vec<String> = d.branches.iter().map(|b| b.monotone.to_string()).collect();
        writeln!(t, "branches_monotone = {}", mono.join(",")).unwrap();
        writeln!(t, "violations = {}", d.violations.len()).unwrap();
        writeln!(t, "passed = {}", d.passed()).unwrap();
    }
    match &a.out {
        Some(p) => {
            write_file(p, &csv)?;
            writeln!(t, "table = {}", p.display()).unwrap();
        }
        None => t.push_str(&csv),
    }
    let passed = diag.as_ref().is_none_or(|d| d.passed());
    let result = serde_json::json!({
        "s1": m.tertiles.s1,
        "s2": m.tertiles.s2,
        "table": rows,
        "diagnostics": diag,
    });
    Ok(Report::new(a, result, t)?.fail_if(!passed, format!("{} map check failed", a.pattern)))
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    /// Density specification file (JSON).
    pub density: PathBuf,
    /// Number of equal-mass atoms.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Method whose value decides the verdict.
    #[arg(long, default_value = "lp")]
    pub method: String,
    /// DDI counts as optimal if its cost exceeds the optimum by at most this.
    #[arg(long, default_value_t = 1e-6)]
    pub verdict_tol: f64,
    /// Write the optimal coupling as CSV.
    #[arg(long)]
    pub coupling: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveResult {
    n: usize,
    method: String,
    value: f64,
    lp: Option<f64>,
    brute_monge: Option<f64>,
    pattern_costs: Vec<(SeidlPattern, f64)>,
    ddi_optimal: bool,
}

pub fn solve(a: &SolveArgs, opts: &MinimizeOptions) -> Result<Report, Failure> {
    let rho = load_density(&a.density)?;
    let reg = SolverRegistry::default();
    let chosen = reg.get(&a.method)?;
    let p = discretize(&rho, a.n, opts)?;
    let sol = solve_exact(&p, &a.method)?;
    let other = |name: &str| -> Result<Option<f64>, Failure> {
        let s = reg.get(name)?;
        if s.name() == chosen.name() {
            return Ok(Some(sol.value));
        }
        if a.n > s.max_atoms() {
            return Ok(None);
        }
        Ok(Some(s.solve(&p)?.value))
    };
    let lp = other("lp")?;
    let brute_monge = other("brute")?;
    let pattern_costs: Vec<(SeidlPattern, f64)> = SeidlPattern::ALL
        .iter()
        .map(|&pat| (pat, pattern_plan(&p, pat).cost(&p)))
        .collect();
    let ddi = pattern_costs
        .iter()
        .find(|(pat, _)| *pat == SeidlPattern::DDI)
        .map(|&(_, c)| c)
        .expect("DDI is a pattern");
    let ddi_optimal = ddi - sol.value <= a.verdict_tol;
    if let Some(path) = &a.coupling {
        write_file(path, &sol.coupling.to_csv(&p))?;
    }
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), num);
    let mut t = String::new();
    writeln!(t, "lp = {}", opt(lp)).unwrap();
    writeln!(t, "brute_monge = {}", opt(brute_monge)).unwrap();
    for (pat, c) in &pattern_costs {
        writeln!(t, "plan_{pat} = {}", num(*c)).unwrap();
    }
    writeln!(
        t,
        "verdict = {}",
        if ddi_optimal {
            "DDI optimal"
        } else {
            "DDI not optimal"
        }
    )
    .unwrap();
    let msg = format!(
        "{} optimum {} is below the DDI plan cost {}",
        sol.method,
        num(sol.value),
        num(ddi)
    );
    let res = SolveResult {
        n: a.n,
        method: sol.method.clone(),
        value: sol.value,
        lp,
        brute_monge,
        pattern_costs,
        ddi_optimal,
    };
    Ok(Report::new(a, res, t)?.fail_if(!ddi_optimal, msg))
}

#[derive(Args, Debug, Serialize)]
pub struct ProbeArgs {
    /// Density specification file (JSON).
    pub density: PathBuf,
    #[arg(long, default_value = "DDI")]
    pub pattern: SeidlPattern,
    /// Graph samples `(x, T x, T^2 x)` at mass midpoints of the first tertile.
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    /// Swap templates to try (first, second, third); all by default.
    #[arg(long, value_delimiter = ',')]
    pub templates: Vec<String>,
    #[arg(long, default_value_t = PROBE_TOL)]
    pub tol: f64,
    /// Violations listed in the text output.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
}

pub fn probe(a: &ProbeArgs, opts: &MinimizeOptions) -> Result<Report, Failure> {
    let rho = load_density(&a.density)?;
    let m = build_map(&rho, a.pattern)?;
    let reg = SwapRegistry::default();
    let swaps = if a.templates.is_empty() {
        reg.all()
    } else {
        a.templates
            .iter()
            .map(|n| reg.get(n))
            .collect::<Result<_, _>>()?
    };
    let triples = sample_graph(&m, a.n);
    let mut found = probe_cyclical_monotonicity(
        |t| triple_cost(t, opts).unwrap_or(f64::INFINITY),
        &triples,
        &swaps,
        a.tol,
    );
    found.sort_by(|x, y| y.gap.total_cmp(&x.gap));
    let mut t = String::new();
    writeln!(t, "triples = {}", triples.len()).unwrap();
    writeln!(t, "violations = {}", found.len()).unwrap();
    for v in found.iter().take(a.show) {
        writeln!(
            t,
            "pair ({}, {}) {} gap = {}",
            v.i,
            v.j,
            v.template,
            num(v.gap)
        )
        .unwrap();
    }
    let result = serde_json::json!({ "triples": triples.len(), "violations": found });
    Report::new(a, result, t)
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.9)]
    pub s1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s2: f64,
    /// Target rho(0) / rho(s2); must exceed 7/2.
    #[arg(long, default_value_t = 4.0)]
    pub ratio: f64,
    /// Shorthand for `--ratio 4`.
    #[arg(long, conflicts_with = "ratio")]
    pub ratio4: bool,
    /// Smoothness order at s2.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Density file to write.
    #[arg(long, default_value = "counterexample.json")]
    pub out: PathBuf,
    /// Certificates file; defaults to the density path with extension `.certificates.json`.
    #[arg(long)]
    pub certificates: Option<PathBuf>,
}

#[derive(Serialize)]
struct CounterexampleResult<'a> {
    schema_version: u32,
    spec: CounterexampleSpec,
    gates: Gates,
    eps_m: Option<EpsM>,
    matching: MatchingReport,
    outcomes: &'a [PatternOutcome],
}

pub fn counterexample(a: &CounterexampleArgs, opts: &MinimizeOptions) -> Result<Report, Failure> {
    let spec = CounterexampleSpec {
        s1: a.s1,
        s2: a.s2,
        ratio: if a.ratio4 { 4.0 } else { a.ratio },
        k: a.k,
    };
    let rho = spec.build()?;
    let g = gates(&rho)?;
    let report = refute_class_T(&rho, opts)?;
    let matching = matching_report(&rho, a.k)?;
    let cert_path = a
        .certificates
        .clone()
        .unwrap_or_else(|| a.out.with_extension("certificates.json"));
    let res = CounterexampleResult {
        schema_version: crate::output::SCHEMA_VERSION,
        spec,
        gates: g,
        eps_m: report.eps_m,
        matching,
        outcomes: &report.outcomes,
    };
    let density_json = DensityFile::from_density(&rho).to_json()?;
    write_file(&a.out, &density_json)?;
    let cert_json = serde_json::to_string_pretty(&res).map_err(coulomb_mot::Error::from)?;
    write_file(&cert_path, &cert_json)?;

    let mut t = String::new();
    writeln!(t, "rho0_over_rho_s2 = {}", num(g.rho0_over_rho_s2)).unwrap();
    if let Some(e) = &report.eps_m {
        writeln!(t, "eps = {}", num(e.eps)).unwrap();
        writeln!(t, "M = {}", num(e.m)).unwrap();
    }
    for o in &report.outcomes {
        match (&o.certificate, &o.error) {
            (Some(c), _) => writeln!(
                t,
                "{} gap = {} template = {}{}",
                o.pattern,
                num(c.gap),
                c.template,
                if c.extrapolated {
                    " (extrapolated)"
                } else {
                    ""
                }
            )
            .unwrap(),
            (None, e) => writeln!(
                t,
                "{} no certificate: {}",
                o.pattern,
                e.as_deref().unwrap_or("")
            )
            .unwrap(),
        }
    }
    writeln!(t, "density = {}", a.out.display()).unwrap();
    writeln!(t, "certificates = {}", cert_path.display()).unwrap();
    let missing: Vec<String> = report
        .outcomes
        .iter()
        .filter(|o| o.certificate.is_none())
        .map(|o| o.pattern.to_string())
        .collect();
    let msg = format!("no certificate for {}", missing.join(", "));
    let result = serde_json::to_value(&res).map_err(coulomb_mot::Error::from)?;
    Ok(Report::new(a, result, t)?.fail_if(!missing.is_empty(), msg))
}
