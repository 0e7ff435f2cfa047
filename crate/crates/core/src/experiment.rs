//! Experiment configuration, batch runs and report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::adaptive::{
    adapt_solve, evaluate_on_mesh, recheck_residuals, AdaptiveConfig, AdaptiveRun, RunReport,
    DEFAULT_MAX_ITERATIONS,
};
use crate::bounds::{bound_trace, BoundTrace};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fem::SpatialNorm;
use crate::mesh::{fmt_f64, graded_mesh, TemporalMesh, DEFAULT_SAMPLES};
use crate::method::MethodSpec;
use crate::problem::{builtin_example1, builtin_example2, DiscreteProblem, ProblemSpec};
use crate::residual::{residual_csv, BarrierKind, BarrierSpec};
use crate::steppers::solve_on_mesh;

pub const DEFAULT_ALPHAS: [f64; 4] = [0.1, 0.4, 0.8, 0.99];
pub const DEFAULT_METHODS: [&str; 5] = ["l1", "l12", "coll2", "coll4", "coll8"];
/// Samples per interval for the post-hoc residual recheck.
pub const RECHECK_SAMPLES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    #[default]
    Example1,
    Example2,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeshMode {
    #[default]
    Adaptive,
    Uniform,
    Graded,
}

/// Flat experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub alpha: f64,
    /// Sweep over several α; overrides `alpha` for `sweep`.
    pub alphas: Vec<f64>,
    pub gamma: f64,
    pub t_end: f64,
    pub xbar: f64,
    pub source: Option<String>,
    pub initial: Option<String>,
    pub initial_operator: Option<String>,
    pub exact: Option<String>,

    pub method: String,
    pub methods: Vec<String>,

    pub barrier: BarrierKind,
    pub lambda: f64,
    /// Defaults to `λx̄²/8` for the L∞ norm and 0 for L2.
    pub omega: Option<f64>,
    pub tau_prof: Option<f64>,
    pub tol: Vec<f64>,
    pub norm: SpatialNorm,

    pub mesh: MeshMode,
    pub intervals: Vec<usize>,
    /// Grading exponent; defaults to `(q − α)/α` with `q` the method order.
    pub grading: Option<f64>,
    pub n_cells: usize,

    pub tau_init: Option<f64>,
    pub tau_min: f64,
    pub q0: f64,
    pub q1: f64,
    pub q0_iteration_cap: Option<usize>,
    pub max_iterations: usize,
    pub samples: usize,
    pub max_intervals: Option<usize>,
    pub time_limit_s: Option<f64>,

    /// Compare errors with the guaranteed bound (needs an exact solution).
    pub check_bounds: bool,
    /// Also evaluate the direct bound `(1+ω)(D_t^α+λ)^{-1}‖R_h‖`.
    pub direct_bounds: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let a = AdaptiveConfig::default();
        Self {
            problem: ProblemKind::Example1,
            alpha: 0.4,
            alphas: Vec::new(),
            gamma: 0.0,
            t_end: 1.0,
            xbar: 1.0,
            source: None,
            initial: None,
            initial_operator: None,
            exact: None,
            method: "l1".into(),
            methods: Vec::new(),
            barrier: BarrierKind::R0,
            lambda: 0.0,
            omega: None,
            tau_prof: None,
            tol: Vec::new(),
            norm: SpatialNorm::Linf,
            mesh: MeshMode::Adaptive,
            intervals: Vec::new(),
            grading: None,
            n_cells: 10,
            tau_init: a.tau_init,
            tau_min: a.tau_min,
            q0: a.q0,
            q1: a.q1,
            q0_iteration_cap: a.q0_iteration_cap,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            samples: DEFAULT_SAMPLES,
            max_intervals: None,
            time_limit_s: None,
            check_bounds: false,
            direct_bounds: false,
            out_dir: None,
        }
    }
}

/// One unit of work: a single α, method and TOL (or mesh size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPoint {
    pub alpha: f64,
    pub method: MethodSpec,
    pub tol: Option<f64>,
    pub intervals: Option<usize>,
}

impl RunPoint {
    pub fn label(&self, problem: ProblemKind) -> String {
        let p = match problem {
            ProblemKind::Example1 => "example1",
            ProblemKind::Example2 => "example2",
            ProblemKind::Custom => "custom",
        };
        let mut s = format!("{p}_a{}_{}", self.alpha, self.method);
        if let Some(t) = self.tol {
            s.push_str(&format!("_tol{t:e}"));
        }
        if let Some(m) = self.intervals {
            s.push_str(&format!("_M{m}"));
        }
        s
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for &a in self.alpha_list().iter() {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha must lie in (0,1), got {a}")));
            }
            if self.problem == ProblemKind::Example2 && !(self.gamma >= 0.0 && self.gamma <= a) {
                return Err(Error::Config(format!(
                    "example2 needs gamma in [0, alpha], got gamma={} alpha={a}",
                    self.gamma
                )));
            }
        }
        self.method_list()?;
        match self.mesh {
            MeshMode::Adaptive => {
                if self.tol.is_empty() {
                    return Err(Error::Config("adaptive runs need a non-empty tol list".into()));
                }
                self.adaptive_config().validate(self.t_end_for_problem())?;
            }
            MeshMode::Uniform | MeshMode::Graded => {
                if self.intervals.is_empty() || self.intervals.contains(&0) {
                    return Err(Error::Config("fixed meshes need a list of positive interval counts".into()));
                }
            }
        }
        if self.tol.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("tol values must be positive".into()));
        }
        if self.n_cells == 0 {
            return Err(Error::Config("n_cells must be positive".into()));
        }
        if self.problem == ProblemKind::Custom && self.source.is_none() {
            return Err(Error::Config("custom problems need a source expression".into()));
        }
        if self.check_bounds && !self.has_exact() {
            return Err(Error::Config("check_bounds needs a known exact solution".into()));
        }
        self.barrier_spec(1.0)?.validate()?;
        Ok(())
    }

    fn has_exact(&self) -> bool {
        match self.problem {
            ProblemKind::Example1 => true,
            ProblemKind::Example2 => false,
            ProblemKind::Custom => self.exact.is_some(),
        }
    }

    fn t_end_for_problem(&self) -> f64 {
        match self.problem {
            ProblemKind::Custom => self.t_end,
            _ => 1.0,
        }
    }

    fn xbar_for_problem(&self) -> f64 {
        match self.problem {
            ProblemKind::Custom => self.xbar,
            _ => 1.0,
        }
    }

    pub fn alpha_list(&self) -> Vec<f64> {
        if self.alphas.is_empty() {
            vec![self.alpha]
        } else {
            self.alphas.clone()
        }
    }

    pub fn method_list(&self) -> Result<Vec<MethodSpec>> {
        if self.methods.is_empty() {
            Ok(vec![self.method.parse()?])
        } else {
            self.methods.iter().map(|m| m.parse()).collect()
        }
    }

    pub fn omega_value(&self) -> f64 {
        self.omega.unwrap_or(match self.norm {
            SpatialNorm::Linf => self.lambda * self.xbar_for_problem().powi(2) / 8.0,
            SpatialNorm::L2 => 0.0,
        })
    }

    pub fn barrier_spec(&self, tol: f64) -> Result<BarrierSpec> {
        let omega = self.omega_value();
        let b = match self.barrier {
            BarrierKind::R0 => BarrierSpec::r0(self.lambda, omega, tol, self.norm),
            BarrierKind::R1 => BarrierSpec::r1(self.lambda, omega, self.tau_prof, tol, self.norm),
        };
        Ok(b)
    }

    pub fn adaptive_config(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            tau_init: self.tau_init,
            tau_min: self.tau_min,
            q0: self.q0,
            q1: self.q1,
            q0_iteration_cap: self.q0_iteration_cap,
            max_iterations: self.max_iterations,
            samples: self.samples,
            max_intervals: self.max_intervals,
            time_limit_s: self.time_limit_s,
        }
    }

    pub fn problem_spec(&self, alpha: f64) -> Result<ProblemSpec> {
        match self.problem {
            ProblemKind::Example1 => builtin_example1(alpha),
            ProblemKind::Example2 => builtin_example2(alpha, self.gamma),
            ProblemKind::Custom => {
                let src = self.source.as_deref().ok_or_else(|| {
                    Error::Config("custom problems need a source expression".into())
                })?;
                let spec = ProblemSpec {
                    name: "custom".into(),
                    alpha,
                    t_end: self.t_end,
                    xbar: self.xbar,
                    source: Expr::parse(src, &["x", "t"])?.space_time(),
                    initial: Expr::parse(self.initial.as_deref().unwrap_or("0.0"), &["x"])?.space(),
                    initial_operator: match &self.initial_operator {
                        Some(s) => Some(Expr::parse(s, &["x"])?.space()),
                        None => None,
                    },
                    exact: match &self.exact {
                        Some(s) => Some(Expr::parse(s, &["x", "t"])?.space_time()),
                        None => None,
                    },
                };
                spec.validate()?;
                Ok(spec)
            }
        }
    }

    pub fn discrete_problem(&self, alpha: f64) -> Result<DiscreteProblem> {
        DiscreteProblem::new(self.problem_spec(alpha)?, self.n_cells)
    }

    /// Single-point configuration used for one run's report.
    pub fn restricted(&self, point: &RunPoint) -> Self {
        Self {
            alpha: point.alpha,
            alphas: Vec::new(),
            method: point.method.to_string(),
            methods: Vec::new(),
            tol: point.tol.into_iter().collect(),
            intervals: point.intervals.into_iter().collect(),
            ..self.clone()
        }
    }

    /// Work points for `run` (first α and method only) or `sweep`.
    pub fn points(&self, sweep: bool) -> Result<Vec<RunPoint>> {
        let alphas = if sweep {
            self.alpha_list()
        } else {
            vec![self.alpha]
        };
        let methods = if sweep {
            self.method_list()?
        } else {
            vec![self.method.parse()?]
        };
        let mut out = Vec::new();
        for &alpha in &alphas {
            for &method in &methods {
                match self.mesh {
                    MeshMode::Adaptive => {
                        for &tol in &self.tol {
                            out.push(RunPoint {
                                alpha,
                                method,
                                tol: Some(tol),
                                intervals: None,
                            });
                        }
                    }
                    _ => {
                        for &m in &self.intervals {
                            out.push(RunPoint {
                                alpha,
                                method,
                                tol: self.tol.first().copied(),
                                intervals: Some(m),
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn fixed_mesh(&self, point: &RunPoint) -> Result<TemporalMesh> {
        let m = point.intervals.expect("fixed mesh point");
        let t_end = self.t_end_for_problem();
        match self.mesh {
            MeshMode::Uniform => TemporalMesh::uniform(m, t_end),
            MeshMode::Graded => {
                let r = self.grading.unwrap_or_else(|| {
                    (point.method.nominal_order() as f64 - point.alpha) / point.alpha
                });
                graded_mesh(m, r, t_end)
            }
            MeshMode::Adaptive => unreachable!("adaptive points have no mesh size"),
        }
    }

    /// Solves one work point.
    pub fn solve(&self, point: &RunPoint) -> Result<AdaptiveRun> {
        let problem = self.discrete_problem(point.alpha)?;
        let tol = point.tol.unwrap_or(1.0);
        let barrier = self.barrier_spec(tol)?;
        match self.mesh {
            MeshMode::Adaptive => adapt_solve(&problem, point.method, &barrier, &self.adaptive_config()),
            _ => evaluate_on_mesh(&problem, point.method, &barrier, &self.fixed_mesh(point)?, self.samples),
        }
    }
}

/// What is written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub report: RunReport,
    pub bound_check: Option<BoundCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Samples where the error exceeds the guaranteed bound.
    pub guaranteed_violations: usize,
    /// Samples where the error exceeds the direct bound, when evaluated.
    pub direct_violations: Option<usize>,
    /// Largest residual/threshold ratio on a finer sampling grid.
    pub recheck_ratio: f64,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.guaranteed_violations == 0 && self.direct_violations.unwrap_or(0) == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub point: RunPoint,
    pub intervals: Option<usize>,
    pub max_error: Option<f64>,
    pub iterations: Option<u64>,
    pub wall_time_s: Option<f64>,
    pub bounds_ok: Option<bool>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub alpha: f64,
    pub method: MethodSpec,
    /// Rows `(TOL or 0, M, error)`.
    pub rows: Vec<(f64, usize, f64)>,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub runs: Vec<RunRecord>,
    pub convergence: Vec<ConvergenceFit>,
}

impl ExperimentSummary {
    /// True when every requested bound check passed and no run failed.
    pub fn success(&self) -> bool {
        self.runs
            .iter()
            .all(|r| r.failure.is_none() && r.bounds_ok != Some(false))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn write_outputs(dir: &Path, exp: &ExperimentReport, bounds: Option<&BoundTrace>) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(exp)?)?;
    exp.report.mesh.write_csv(&dir.join("mesh.csv"))?;
    fs::write(dir.join("residual.csv"), report_residual_csv(&exp.report))?;
    if let Some(b) = bounds {
        fs::write(dir.join("bounds.csv"), b.to_csv())?;
    }
    Ok(())
}

pub fn report_residual_csv(report: &RunReport) -> String {
    let rows: Vec<_> = report
        .intervals
        .iter()
        .flat_map(|i| i.samples.iter().map(move |s| (i.interval, *s)))
        .collect();
    residual_csv(&rows)
}

fn check_bounds(
    config: &ExperimentConfig,
    run: &AdaptiveRun,
    problem: &DiscreteProblem,
) -> Result<(BoundCheck, Option<BoundTrace>)> {
    let trace = if config.direct_bounds {
        Some(bound_trace(
            problem,
            &run.solution,
            config.lambda,
            config.omega_value(),
            config.norm,
            config.samples,
        )?)
    } else {
        None
    };
    let check = BoundCheck {
        guaranteed_violations: run.report.bound_violations().len(),
        direct_violations: trace.as_ref().map(|t| t.violations().len()),
        recheck_ratio: recheck_residuals(problem, &run.solution, &run.report.barrier, RECHECK_SAMPLES)?,
    };
    Ok((check, trace))
}

fn execute_point(config: &ExperimentConfig, point: &RunPoint, out: Option<&Path>) -> RunRecord {
    let label = point.label(config.problem);
    let mut record = RunRecord {
        label: label.clone(),
        point: point.clone(),
        intervals: None,
        max_error: None,
        iterations: None,
        wall_time_s: None,
        bounds_ok: None,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let run = config.solve(point)?;
        record.intervals = Some(run.report.intervals());
        record.max_error = run.report.max_error();
        record.iterations = Some(run.report.cost.iterations);
        record.wall_time_s = Some(run.report.cost.wall_time_s);
        let mut bound_check = None;
        let mut trace = None;
        if config.check_bounds || config.direct_bounds {
            let problem = config.discrete_problem(point.alpha)?;
            let (c, t) = check_bounds(config, &run, &problem)?;
            if config.check_bounds {
                record.bounds_ok = Some(c.passed());
            }
            bound_check = Some(c);
            trace = t;
        }
        if let Some(dir) = out {
            let exp = ExperimentReport {
                config: config.restricted(point),
                report: run.report,
                bound_check,
            };
            write_outputs(&dir.join(&label), &exp, trace.as_ref())?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        record.failure = Some(e.to_string());
    }
    record
}

/// Runs every point of the configuration on `threads` workers and writes
/// per-run files plus `summary.json` and `convergence.csv` to `out`.
pub fn execute(
    config: &ExperimentConfig,
    sweep: bool,
    out: Option<&Path>,
    threads: usize,
) -> Result<ExperimentSummary> {
    config.validate()?;
    let points = config.points(sweep)?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; points.len()]);
    let workers = threads.max(1).min(points.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let rec = execute_point(config, &points[i], out);
                slots.lock().expect("no poisoned workers")[i] = Some(rec);
            });
        }
    });
    let runs: Vec<RunRecord> = slots
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every point executed"))
        .collect();

    let mut convergence: Vec<ConvergenceFit> = Vec::new();
    for r in &runs {
        let (Some(m), Some(e)) = (r.intervals, r.max_error) else { continue };
        let row = (r.point.tol.unwrap_or(0.0), m, e);
        match convergence
            .iter_mut()
            .find(|c| c.alpha == r.point.alpha && c.method == r.point.method)
        {
            Some(c) => c.rows.push(row),
            None => convergence.push(ConvergenceFit {
                alpha: r.point.alpha,
                method: r.point.method,
                rows: vec![row],
                slope: None,
            }),
        }
    }
    for c in &mut convergence {
        let pts: Vec<(f64, f64)> = c.rows.iter().map(|&(_, m, e)| (m as f64, e)).collect();
        c.slope = loglog_slope(&pts);
    }
    let summary = ExperimentSummary { runs, convergence };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        fs::write(dir.join("convergence.csv"), convergence_csv(&summary.convergence))?;
    }
    Ok(summary)
}

pub fn convergence_csv(fits: &[ConvergenceFit]) -> String {
    let mut s = String::from("alpha,method,tol,intervals,error,slope\n");
    for c in fits {
        let slope = c.slope.map(fmt_f64).unwrap_or_default();
        for &(tol, m, e) in &c.rows {
            s.push_str(&format!(
                "{},{},{},{m},{},{slope}\n",
                c.alpha,
                c.method,
                fmt_f64(tol),
                fmt_f64(e)
            ));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub trace: BoundTrace,
    pub check: BoundCheck,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.check.passed()
    }
}

/// Re-solves a stored run on its mesh and evaluates the direct bound
/// against the errors, writing `bounds.csv` into `out`.
pub fn verify_report(path: &Path, out: Option<&Path>) -> Result<VerifyOutcome> {
    let exp: ExperimentReport = serde_json::from_str(&fs::read_to_string(path)?)?;
    let config = &exp.config;
    let problem = config.discrete_problem(exp.report.alpha)?;
    if problem.spec.exact.is_none() {
        return Err(Error::Config("bounds can only be verified with a known exact solution".into()));
    }
    let sol = solve_on_mesh(&problem, exp.report.method, &exp.report.mesh)?;
    let trace = bound_trace(
        &problem,
        &sol,
        config.lambda,
        config.omega_value(),
        config.norm,
        config.samples,
    )?;
    let run = AdaptiveRun {
        report: exp.report.clone(),
        solution: sol,
    };
    let check = BoundCheck {
        guaranteed_violations: run.report.bound_violations().len(),
        direct_violations: Some(trace.violations().len()),
        recheck_ratio: recheck_residuals(&problem, &run.solution, &run.report.barrier, RECHECK_SAMPLES)?,
    };
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("bounds.csv"), trace.to_csv())?;
    Ok(VerifyOutcome { trace, check })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_tol_list_is_rejected() {
        let e = ExperimentConfig::from_toml("method = \"l1\"\ntol = []\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("tol = [1e-2]\nbogus = 1\n").is_err());
    }

    #[test]
    fn example2_gamma_range() {
        let c = "problem = \"example2\"\nalpha = 0.4\ngamma = 0.5\ntol = [1e-2]\n";
        assert!(ExperimentConfig::from_toml(c).is_err());
    }

    #[test]
    fn omega_default_follows_norm() {
        let c = ExperimentConfig::from_toml("lambda = 8.0\ntol = [1e-2]\n").unwrap();
        assert_eq!(c.omega_value(), 1.0);
        let c = ExperimentConfig::from_toml("lambda = 8.0\nnorm = \"l2\"\ntol = [1e-2]\n").unwrap();
        assert_eq!(c.omega_value(), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, (i as f64).powf(-1.6))).collect();
        assert!((loglog_slope(&pts).unwrap() + 1.6).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn sweep_points_cover_the_product() {
        let c = ExperimentConfig::from_toml(
            "alphas = [0.3, 0.6]\nmethods = [\"l1\", \"coll2\"]\ntol = [1e-2, 1e-3]\n",
        )
        .unwrap();
        assert_eq!(c.points(true).unwrap().len(), 8);
        assert_eq!(c.points(false).unwrap().len(), 2);
    }
}
