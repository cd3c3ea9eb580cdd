//! Subcommands behind the `admissible-flow` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::admissible::{
    build_invariants, fano_parameters, fano_residual, single_root_check, AdmissibleError,
    InvariantBundle,
};
use crate::config::{ConfigError, Rational, RunConfig};
use crate::flow::{
    init_state, run, trajectory_decay_fit, write_snapshot_file, write_trajectory_file, FlowError,
};
use crate::gqe::{build_profile, mt, solve_k0, verify_profile, GqeError, GqeProfile, MomentumProfile};
use crate::numerics::linspace;
use crate::polycalc::Polynomial;
use crate::stability::{q_function, StabilityError, StabilityReport};

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Admissible(#[from] AdmissibleError),
    #[error(transparent)]
    Gqe(#[from] GqeError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl AppError {
    /// 2 when a standing hypothesis fails, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let hypothesis = |e: &GqeError| {
            matches!(e, GqeError::HypothesisNotMet(_) | GqeError::NoGqeProfile(_))
        };
        match self {
            AppError::Gqe(e) | AppError::Stability(StabilityError::Gqe(e)) if hypothesis(e) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |e| AppError::Io { path: path.to_path_buf(), message: e.to_string() }
}

pub fn read_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(crate::config::parse_config(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn ensure_dir(path: &Path) -> Result<(), AppError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn coeff_strings(p: &Polynomial) -> Vec<String> {
    p.coeffs().iter().map(|c| Rational(c.clone()).to_string()).collect()
}

fn rat_string(r: &BigRational) -> String {
    Rational(r.clone()).to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSummary {
    pub count: usize,
    pub brackets: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanoSummary {
    pub residual_zero: bool,
    pub lambda: Option<String>,
    pub c: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub all_passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub q_min: f64,
    pub q_boundary: [f64; 2],
    pub condition_holds: bool,
    pub xi_eta_min: f64,
    pub log_concavity_holds: bool,
    pub cross_check_error: f64,
}

impl From<&StabilityReport> for ConditionSummary {
    fn from(r: &StabilityReport) -> Self {
        Self {
            q_min: r.q_min,
            q_boundary: [r.q_boundary.0, r.q_boundary.1],
            condition_holds: r.condition_holds,
            xi_eta_min: r.xi_eta_min,
            log_concavity_holds: r.log_concavity_holds,
            cross_check_error: r.cross_check_error,
        }
    }
}

/// Machine-readable output of `analyze`; field order is fixed, so equal
/// inputs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub dimension: u32,
    pub p_c: Vec<String>,
    pub p: Vec<String>,
    pub alpha0: String,
    pub beta0: String,
    pub roots: RootSummary,
    pub mt0: f64,
    pub k0: f64,
    pub fano: FanoSummary,
    pub profile: ProfileSummary,
    pub condition: ConditionSummary,
}

/// Everything computed by `analyze`, kept for the other subcommands.
pub struct Analysis {
    pub inv: InvariantBundle,
    pub profile: GqeProfile,
    pub stability: StabilityReport,
    pub report: AnalyzeReport,
}

pub fn analyze(config: &RunConfig) -> Result<Analysis, AppError> {
    let inv = build_invariants(&config.data)?;
    let roots = single_root_check(&inv)?;
    let mt0 = mt(&inv, 0.0);
    let k0 = solve_k0(&inv)?;
    let profile = build_profile(&inv, k0)?;
    let verification = verify_profile(&profile);
    let (_, stability) = q_function(&profile, &inv)?;
    let fp = fano_parameters(&config.data);
    let residual_zero = fano_residual(&inv, &fp).is_zero();
    let report = AnalyzeReport {
        dimension: config.data.dimension(),
        p_c: coeff_strings(&inv.p_c),
        p: coeff_strings(&inv.p),
        alpha0: rat_string(&inv.alpha0),
        beta0: rat_string(&inv.beta0),
        roots: RootSummary {
            count: roots.brackets.len(),
            brackets: roots.brackets.iter().map(|b| [rat_string(&b.lo), rat_string(&b.hi)]).collect(),
        },
        mt0,
        k0,
        fano: FanoSummary {
            residual_zero,
            lambda: residual_zero.then(|| rat_string(&fp.lambda)),
            c: residual_zero.then(|| rat_string(&fp.c)),
        },
        profile: ProfileSummary {
            all_passed: verification.all_passed(),
            failures: verification
                .failures()
                .iter()
                .map(|c| format!("{}: {:e} > {:e}", c.name, c.value, c.tolerance))
                .collect(),
        },
        condition: ConditionSummary::from(&stability),
    };
    Ok(Analysis { inv, profile, stability, report })
}

pub fn render_text(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dimension m      {}", r.dimension);
    let _ = writeln!(s, "p_c coefficients [{}]", r.p_c.join(", "));
    let _ = writeln!(s, "P coefficients   [{}]", r.p.join(", "));
    let _ = writeln!(s, "alpha0           {}", r.alpha0);
    let _ = writeln!(s, "beta0            {}", r.beta0);
    let _ = writeln!(s, "roots of P       {} in (-1, 1)", r.roots.count);
    for [lo, hi] in &r.roots.brackets {
        let _ = writeln!(s, "  bracket        [{lo}, {hi}]");
    }
    let _ = writeln!(s, "MT(0)            {}", r.mt0);
    let _ = writeln!(s, "k0               {}", r.k0);
    match (&r.fano.lambda, &r.fano.c) {
        (Some(l), Some(c)) => {
            let _ = writeln!(s, "Fano residual    zero (lambda = {l}, C = {c})");
        }
        _ => {
            let _ = writeln!(s, "Fano residual    nonzero");
        }
    }
    let _ = writeln!(
        s,
        "profile checks   {}",
        if r.profile.all_passed { "pass".to_string() } else { r.profile.failures.join("; ") }
    );
    let c = &r.condition;
    let _ = writeln!(s, "Q min            {}", c.q_min);
    let _ = writeln!(s, "Q(-1), Q(1)      {}, {}", c.q_boundary[0], c.q_boundary[1]);
    let _ = writeln!(s, "decay condition  {}", if c.condition_holds { "holds" } else { "fails" });
    let _ = writeln!(s, "log-concavity    {}", if c.log_concavity_holds { "holds" } else { "fails" });
    s
}

pub fn analyze_json(r: &AnalyzeReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

/// Writes `analyze.json` and returns the human-readable summary.
pub fn cmd_analyze(config: &RunConfig, out: &Path) -> Result<String, AppError> {
    ensure_dir(out)?;
    let a = analyze(config)?;
    write_file(&out.join("analyze.json"), &analyze_json(&a.report))?;
    Ok(render_text(&a.report))
}

/// Writes `profile.csv` with `Θ_∞` on the configured grid.
pub fn cmd_gqe(config: &RunConfig, out: &Path) -> Result<PathBuf, AppError> {
    ensure_dir(out)?;
    let inv = build_invariants(&config.data)?;
    let k0 = solve_k0(&inv)?;
    let profile = build_profile(&inv, k0)?;
    let path = out.join("profile.csv");
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| AppError::Io { path: path.clone(), message: e.to_string() };
    w.write_record(["z", "theta"]).map_err(csv_err)?;
    for z in linspace(-1.0, 1.0, config.flow.n) {
        w.write_record([z.to_string(), profile.theta(z).to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub converged: bool,
    pub t_final: f64,
    pub steps: u64,
    pub sup_phi_final: f64,
    pub decay_rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub max_bnd_err: f64,
    pub min_theta: f64,
    pub condition_holds: bool,
}

pub struct FlowOutcome {
    pub summary: FlowSummary,
    pub warnings: Vec<String>,
}

fn flow_in(config: &RunConfig, analysis: &Analysis, out: &Path) -> Result<FlowOutcome, AppError> {
    let mut warnings = Vec::new();
    if !analysis.stability.condition_holds {
        warnings.push(format!(
            "decay condition fails (Q min = {}); running the flow anyway",
            analysis.stability.q_min
        ));
    }
    let (grid, state) = init_state(&analysis.profile, config.initial, &config.flow)?;
    write_snapshot_file(&out.join("snapshot_initial.csv"), &grid, &state)?;
    let traj = run(&grid, state, &config.flow)?;
    write_trajectory_file(&out.join("trajectory.csv"), &traj)?;
    write_snapshot_file(&out.join("snapshot_final.csv"), &grid, &traj.final_state)?;
    let fit = trajectory_decay_fit(&traj).ok();
    let summary = FlowSummary {
        converged: traj.converged,
        t_final: traj.final_state.time,
        steps: traj.final_state.steps,
        sup_phi_final: traj.final_state.diagnostics.sup_phi,
        decay_rate: fit.map(|f| f.rate),
        r_squared: fit.map(|f| f.r_squared),
        max_bnd_err: traj.max_bnd_err,
        min_theta: traj.min_theta,
        condition_holds: analysis.stability.condition_holds,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&out.join("flow.json"), &json)?;
    Ok(FlowOutcome { summary, warnings })
}

/// Runs the flow and writes `trajectory.csv`, the two snapshots and
/// `flow.json`.
pub fn cmd_flow(config: &RunConfig, out: &Path) -> Result<FlowOutcome, AppError> {
    ensure_dir(out)?;
    let analysis = analyze(config)?;
    flow_in(config, &analysis, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scale: BigRational,
    pub k0: f64,
    pub mt0: f64,
    pub q_min: f64,
    pub condition_holds: bool,
    pub decay_rate: Option<f64>,
}

pub const SWEEP_HEADER: [&str; 6] = ["scale", "k0", "mt0", "qmin", "condition_holds", "decay_rate"];

/// Thread count for sweeps: `AF_THREADS` when set to a positive integer.
pub fn sweep_threads() -> Option<usize> {
    std::env::var("AF_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Analyzes and flows every scaled copy of the data. Each entry writes into
/// its own `scale_<i>` directory; `sweep.csv` is written once at the end.
pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<Vec<SweepRow>, AppError> {
    ensure_dir(out)?;
    let scales = config.sweep.clone().ok_or_else(|| {
        AppError::Config(ConfigError::Schema {
            path: "sweep".to_string(),
            message: "sweep.scales is required for the sweep command".to_string(),
        })
    })?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| AppError::Io { path: out.to_path_buf(), message: e.to_string() })?;
    let rows: Result<Vec<SweepRow>, AppError> = pool.install(|| {
        scales
            .par_iter()
            .enumerate()
            .map(|(i, scale)| {
                let entry = RunConfig { data: config.data.with_x_scaled(scale)?, ..config.clone() };
                let dir = out.join(format!("scale_{i}"));
                ensure_dir(&dir)?;
                let a = analyze(&entry)?;
                write_file(&dir.join("analyze.json"), &analyze_json(&a.report))?;
                let decay_rate = match flow_in(&entry, &a, &dir) {
                    Ok(o) => o.summary.decay_rate,
                    Err(AppError::Flow(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok(SweepRow {
                    scale: scale.clone(),
                    k0: a.report.k0,
                    mt0: a.report.mt0,
                    q_min: a.stability.q_min,
                    condition_holds: a.stability.condition_holds,
                    decay_rate,
                })
            })
            .collect()
    });
    let rows = rows?;
    let path = out.join("sweep.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| AppError::Io { path: path.clone(), message: e.to_string() };
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            rat_string(&r.scale),
            r.k0.to_string(),
            r.mt0.to_string(),
            r.q_min.to_string(),
            r.condition_holds.to_string(),
            r.decay_rate.map_or_else(|| "NaN".to_string(), |v| v.to_string()),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::Io { path: path.clone(), message: e.to_string() })?;
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(rows)
}
