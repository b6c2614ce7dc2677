//! Command implementations behind the `lzd` binary: curve emission,
//! single runs, parameter sweeps, verification suites and analytic
//! predictions. All file output is deterministic byte-for-byte for fixed
//! inputs and seed.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::{measure_tunneling, RunSpec};
use crate::formulas::{
    asymptotic_strong, asymptotic_weak, dephasing_tunneling, finite_interval_tunneling,
    lz_probability, q_closed, q_max, NumeratorMode,
};
use crate::model::{GammaProfile, ModelParams};
use crate::odeint::IntegratorConfig;
use crate::verify::{run_suite, Suite};

/// Failure category mapped onto the process exit code:
/// 0 success, 1 validation error, 2 numerical failure, 3 verification failure.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::VerificationFailed(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::VerificationFailed(n) => write!(f, "{n} verification properties failed"),
        }
    }
}

fn numerical(err: Error) -> CliError {
    CliError::Numerical(err.to_string())
}

fn validation(err: Error) -> CliError {
    CliError::Validation(err.to_string())
}

/// Shortest round-trip decimal for a float; parses back to the same bits.
pub fn fmt_float(v: f64) -> String {
    format!("{v}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn values(&self) -> Vec<f64> {
        match self {
            ScalarOrList::Scalar(v) => vec![*v],
            ScalarOrList::List(vs) => vs.clone(),
        }
    }

    fn scalar(&self, field: &'static str) -> Result<f64, CliError> {
        match self {
            ScalarOrList::Scalar(v) => Ok(*v),
            ScalarOrList::List(_) => Err(CliError::Validation(format!(
                "{field}: lists are only allowed in sweep configs"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Scalar(f64),
    Table(Vec<(f64, f64)>),
    List(Vec<f64>),
}

/// Flat key-value run configuration. `gamma` takes a number or a breakpoint
/// list `[[s, rate], ...]`; sweep configs may give lists for `g0`, `gamma`,
/// `eps`. Window defaults to `+-20 max(g0, hbar*gamma_max)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub g0: ScalarOrList,
    pub gamma: GammaSpec,
    pub eps: ScalarOrList,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub s0: Option<f64>,
    #[serde(default)]
    pub s1: Option<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_hbar() -> f64 {
    1.0
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_samples() -> usize {
    2001
}

pub fn load_config(path: &Path) -> Result<ConfigDoc, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config: {e}")))
}

struct ResolvedRun {
    spec: RunSpec,
    gamma_const: Option<f64>,
}

fn resolve_run(
    g0: f64,
    gamma: &GammaProfile,
    eps: f64,
    hbar: f64,
    cfg: &ConfigDoc,
) -> Result<ResolvedRun, CliError> {
    let params = ModelParams::new(g0, gamma.clone(), hbar).map_err(validation)?;
    let (default_s0, default_s1) = params.default_window();
    let s0 = cfg.s0.unwrap_or(default_s0);
    let s1 = cfg.s1.unwrap_or(default_s1);
    if !(s0 < s1) {
        return Err(CliError::Validation(format!(
            "s0/s1: need s0 < s1, got [{s0}, {s1}]"
        )));
    }
    let gamma_const = params.gamma.constant_value();
    let spec = RunSpec::new(params, eps, s0, s1)
        .map_err(validation)?
        .with_cfg(IntegratorConfig::with_tols(cfg.rel_tol, cfg.abs_tol))
        .with_samples(cfg.samples);
    spec.validate().map_err(validation)?;
    Ok(ResolvedRun { spec, gamma_const })
}

const QUAD_TOL: f64 = 1e-11;

// ---------------------------------------------------------------------------
// qcurve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Json,
    Svg,
}

impl CurveFormat {
    pub fn parse(name: &str) -> Option<CurveFormat> {
        Some(match name {
            "csv" => CurveFormat::Csv,
            "json" => CurveFormat::Json,
            "svg" => CurveFormat::Svg,
            _ => return None,
        })
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub q: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CurveDoc {
    pub points: Vec<CurvePoint>,
    pub maximum: CurvePoint,
}

pub fn curve_doc(xmin: f64, xmax: f64, n_points: usize) -> Result<CurveDoc, CliError> {
    if !(xmin >= 0.0) || !(xmin < xmax) {
        return Err(CliError::Validation(format!(
            "x range: need 0 <= xmin < xmax, got [{xmin}, {xmax}]"
        )));
    }
    if n_points < 2 {
        return Err(CliError::Validation("points: need at least 2".into()));
    }
    let step = (xmax - xmin) / (n_points - 1) as f64;
    let points = (0..n_points)
        .map(|i| {
            let x = if i == n_points - 1 { xmax } else { xmin + i as f64 * step };
            CurvePoint { x, q: q_closed(x) }
        })
        .collect();
    let (mx, mq) = q_max();
    Ok(CurveDoc {
        points,
        maximum: CurvePoint { x: mx, q: mq },
    })
}

fn curve_csv(doc: &CurveDoc) -> String {
    let mut out = String::from("x,Q\n");
    for p in &doc.points {
        let _ = writeln!(out, "{},{}", fmt_float(p.x), fmt_float(p.q));
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".into() } else { s.to_string() }
}

fn curve_svg(doc: &CurveDoc) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const L: f64 = 70.0;
    const R: f64 = 780.0;
    const T: f64 = 20.0;
    const B: f64 = 450.0;

    let x_lo = doc.points.first().unwrap().x;
    let x_hi = doc.points.last().unwrap().x;
    let y_lo = 0.0;
    let y_hi = doc
        .points
        .iter()
        .map(|p| p.q)
        .fold(doc.maximum.q, f64::max)
        * 1.05;
    let y_hi = if y_hi > 0.0 { y_hi } else { 1.0 };

    let px = |x: f64| L + (x - x_lo) / (x_hi - x_lo) * (R - L);
    let py = |y: f64| B - (y - y_lo) / (y_hi - y_lo) * (B - T);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        R - L,
        B - T
    );

    // 5 tick labels per axis.
    for i in 0..5 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let tx = px(fx);
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.2}" y1="{B}" x2="{tx:.2}" y2="{}" stroke="black"/>"#,
            B + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{}" text-anchor="middle">{}</text>"#,
            B + 20.0,
            tick_label(fx)
        );
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let ty = py(fy);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ty:.2}" x2="{L}" y2="{ty:.2}" stroke="black"/>"#,
            L - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            L - 8.0,
            ty + 4.0,
            tick_label(fy)
        );
    }

    let mut pts = String::new();
    for p in &doc.points {
        let _ = write!(pts, "{:.2},{:.2} ", px(p.x), py(p.q));
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        pts.trim_end()
    );

    // Annotate the maximum if it sits inside the plotted range.
    if doc.maximum.x >= x_lo && doc.maximum.x <= x_hi {
        let cx = px(doc.maximum.x);
        let cy = py(doc.maximum.q);
        let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="crimson"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="crimson">max at x = {:.5}</text>"#,
            cx + 10.0,
            cy - 8.0,
            doc.maximum.x
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">x</text>"#, 0.5 * (L + R), H - 10.0);
    let _ = writeln!(svg, r#"<text x="15" y="{:.2}">Q</text>"#, 0.5 * (T + B));
    svg.push_str("</svg>\n");
    svg
}

pub fn cmd_qcurve(
    xmin: f64,
    xmax: f64,
    n_points: usize,
    out: &Path,
    format: CurveFormat,
) -> Result<(), CliError> {
    let doc = curve_doc(xmin, xmax, n_points)?;
    let body = match format {
        CurveFormat::Csv => curve_csv(&doc),
        CurveFormat::Json => {
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            s.push('\n');
            s
        }
        CurveFormat::Svg => curve_svg(&doc),
    };
    write_file(out, &body)?;
    println!(
        "wrote {} points to {} (Q maximum at x = {})",
        doc.points.len(),
        out.display(),
        fmt_float(doc.maximum.x)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn gamma_profile_of(spec: &GammaSpec) -> Result<GammaProfile, CliError> {
    match spec {
        GammaSpec::Scalar(v) => Ok(GammaProfile::Constant(*v)),
        GammaSpec::Table(t) => Ok(GammaProfile::PiecewiseLinear(t.clone())),
        GammaSpec::List(_) => Err(CliError::Validation(
            "gamma: a list of rates is only allowed in sweep configs".into(),
        )),
    }
}

pub struct SimulateOutput {
    pub t_ode: f64,
    pub t_eq10: f64,
    pub t_eq6: f64,
}

pub fn run_simulate(cfg: &ConfigDoc) -> Result<(SimulateOutput, String), CliError> {
    let g0 = cfg.g0.scalar("g0")?;
    let eps = cfg.eps.scalar("eps")?;
    let gamma = gamma_profile_of(&cfg.gamma)?;
    let run = resolve_run(g0, &gamma, eps, cfg.hbar, cfg)?;

    let (result, traj) = measure_tunneling(&run.spec).map_err(numerical)?;
    let t_eq10 = finite_interval_tunneling(
        &run.spec.params,
        eps,
        run.spec.s0,
        run.spec.s1,
        QUAD_TOL,
        NumeratorMode::Closed,
    )
    .map_err(numerical)?
    .t;
    let t_eq6 = match run.gamma_const {
        Some(gc) => dephasing_tunneling(g0, gc, eps, cfg.hbar),
        None => f64::NAN,
    };

    let mut out = String::new();
    let _ = writeln!(out, "# T_ode={}", fmt_float(result.t));
    let _ = writeln!(out, "# T_eq10={}", fmt_float(t_eq10));
    let _ = writeln!(out, "# T_eq6={}", fmt_float(t_eq6));
    let _ = writeln!(out, "# method={}", result.method.tag());
    let _ = writeln!(out, "# tolerance_achieved={}", fmt_float(result.tolerance_achieved));
    let _ = writeln!(out, "# rhs_evals={}", result.evals);
    let _ = writeln!(
        out,
        "# accepted_steps={} rejected_steps={}",
        result.accepted_steps, result.rejected_steps
    );
    out.push_str("s,pop_plus,offdiag_norm\n");
    for i in 0..traj.samples.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_float(traj.samples[i].0),
            fmt_float(traj.population_plus(i, &run.spec.params)),
            fmt_float(traj.offdiag_norm(i, &run.spec.params))
        );
    }

    Ok((
        SimulateOutput {
            t_ode: result.t,
            t_eq10,
            t_eq6,
        },
        out,
    ))
}

pub fn cmd_simulate(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let (summary, body) = run_simulate(&cfg)?;
    write_file(out, &body)?;
    println!("T_ode  = {}   (master equation)", fmt_float(summary.t_ode));
    println!("T_eq10 = {}   (finite-interval quadrature, same window)", fmt_float(summary.t_eq10));
    println!("T_eq6  = {}   (closed form, infinite window)", fmt_float(summary.t_eq6));
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub const SWEEP_HEADER: &str = "g0,gamma,eps,s0,s1,T_ode,T_eq10,T_eq6,rel_dev_ode_eq10,status";

struct SweepRow {
    g0: f64,
    gamma: f64,
    eps: f64,
    s0: f64,
    s1: f64,
    t_ode: f64,
    t_eq10: f64,
    t_eq6: f64,
    status: String,
}

impl SweepRow {
    fn to_csv(&self) -> String {
        let rel_dev = if self.t_eq10 != 0.0 {
            ((self.t_ode - self.t_eq10) / self.t_eq10).abs()
        } else {
            f64::NAN
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_float(self.g0),
            fmt_float(self.gamma),
            fmt_float(self.eps),
            fmt_float(self.s0),
            fmt_float(self.s1),
            fmt_float(self.t_ode),
            fmt_float(self.t_eq10),
            fmt_float(self.t_eq6),
            fmt_float(rel_dev),
            self.status
        )
    }
}

fn sweep_point(g0: f64, gamma: f64, eps: f64, cfg: &ConfigDoc) -> SweepRow {
    let mut row = SweepRow {
        g0,
        gamma,
        eps,
        s0: f64::NAN,
        s1: f64::NAN,
        t_ode: f64::NAN,
        t_eq10: f64::NAN,
        t_eq6: f64::NAN,
        status: "ok".into(),
    };
    let attempt = (|| -> Result<(), CliError> {
        let run = resolve_run(g0, &GammaProfile::Constant(gamma), eps, cfg.hbar, cfg)?;
        row.s0 = run.spec.s0;
        row.s1 = run.spec.s1;
        let (result, _) = measure_tunneling(&run.spec).map_err(numerical)?;
        row.t_ode = result.t;
        row.t_eq10 = finite_interval_tunneling(
            &run.spec.params,
            eps,
            run.spec.s0,
            run.spec.s1,
            QUAD_TOL,
            NumeratorMode::Closed,
        )
        .map_err(numerical)?
        .t;
        row.t_eq6 = dephasing_tunneling(g0, gamma, eps, cfg.hbar);
        Ok(())
    })();
    if let Err(e) = attempt {
        row.status = e.to_string().replace(',', ";");
    }
    row
}

/// Grid order: outer `g0`, then `gamma`, then `eps`. Rows come out in grid
/// order no matter how many workers run.
pub fn run_sweep(cfg: &ConfigDoc, jobs: usize) -> Result<(String, bool), CliError> {
    let g0s = cfg.g0.values();
    let gammas = match &cfg.gamma {
        GammaSpec::Scalar(v) => vec![*v],
        GammaSpec::List(vs) => vs.clone(),
        GammaSpec::Table(_) => {
            return Err(CliError::Validation(
                "gamma: sweep grids need constant rates, not a breakpoint table".into(),
            ))
        }
    };
    let epss = cfg.eps.values();
    if g0s.is_empty() || gammas.is_empty() || epss.is_empty() {
        return Err(CliError::Validation("grid: empty parameter list".into()));
    }

    let mut grid = Vec::new();
    for &g0 in &g0s {
        for &gamma in &gammas {
            for &eps in &epss {
                grid.push((g0, gamma, eps));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&(g0, gamma, eps)| sweep_point(g0, gamma, eps, cfg))
            .collect()
    });

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    let mut any_failed = false;
    for row in &rows {
        any_failed |= row.status != "ok";
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    Ok((out, any_failed))
}

pub fn cmd_sweep(config: &Path, out: &Path, jobs: usize) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let (body, any_failed) = run_sweep(&cfg, jobs)?;
    write_file(out, &body)?;
    let rows = body.lines().count() - 1;
    println!("wrote {rows} sweep rows to {}", out.display());
    if any_failed {
        return Err(CliError::Numerical("one or more sweep points failed; see status column".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn cmd_verify(suite: &str, seed: u64) -> Result<(), CliError> {
    let suite = Suite::parse(suite)
        .ok_or_else(|| CliError::Validation(format!("suite: unknown name '{suite}'")))?;
    let results = run_suite(suite, seed);
    let mut failed = 0usize;
    for r in &results {
        let status = if r.passed { "ok" } else { "FAIL" };
        println!(
            "[{}] {}: max residual {:.3e} (bound {:.3e}, {} cases) ... {}",
            r.suite, r.name, r.max_residual, r.bound, r.cases, status
        );
        if !r.passed {
            failed += 1;
        }
    }
    println!(
        "verify: {}/{} properties passed (seed {seed})",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        return Err(CliError::VerificationFailed(failed));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

pub fn cmd_predict(g0: f64, gamma: f64, eps: f64, hbar: f64) -> Result<(), CliError> {
    if !(g0 > 0.0) || !(eps > 0.0) || !(hbar > 0.0) || !(gamma >= 0.0) {
        return Err(CliError::Validation(format!(
            "predict: need g0 > 0, eps > 0, hbar > 0, gamma >= 0 (got g0={g0}, gamma={gamma}, eps={eps}, hbar={hbar})"
        )));
    }
    let x = hbar * gamma / g0;
    println!("lz_probability        = {}", fmt_float(lz_probability(g0, eps, hbar)));
    println!("dephasing_tunneling   = {}", fmt_float(dephasing_tunneling(g0, gamma, eps, hbar)));
    println!(
        "weak_dephasing_form   = {}",
        fmt_float(eps * hbar / (2.0 * g0 * g0) * asymptotic_weak(x))
    );
    if x > 0.0 {
        println!(
            "zeno_form             = {}",
            fmt_float(eps * hbar / (2.0 * g0 * g0) * asymptotic_strong(x))
        );
    } else {
        println!("zeno_form             = NaN");
    }
    println!("x = hbar*gamma/g0     = {}", fmt_float(x));
    if x > 0.0 {
        println!("Q(x)                  = {}", fmt_float(q_closed(x)));
    }
    println!(
        "regime                = {}",
        if x < 1.0 { "weak dephasing (x < 1)" } else { "strong dephasing / Zeno (x >= 1)" }
    );
    let gamma_sq_scale = hbar * gamma * gamma;
    if eps >= gamma_sq_scale {
        println!(
            "warning: eps = {} >= hbar*gamma^2 = {}; not in the adiabatic regime, leading-order formulas may be unreliable",
            fmt_float(eps),
            fmt_float(gamma_sq_scale)
        );
    }
    Ok(())
}
