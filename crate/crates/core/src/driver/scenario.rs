//! Scenario execution: initial data, the coupled loop, outputs and checks.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::driver::checkpoint::Checkpoint;
use crate::driver::config::{CurveKind, FlowConfig, Scenario};
use crate::driver::plot::{emit_plots, PlotSpec, Table};
use crate::error::{Error, Result};
use crate::hypersurface::flow::coupled_column;
use crate::hypersurface::{
    run_coupled_with, CoupledConfig, CoupledRun, FlowState, Orientation, Outcome, PinchingParams, ProfileCurve,
    StepOptions, Termination, Thresholds,
};
use crate::ricci::{decay_fit, monitor_csv, AmbientMonitor, DecayFit};
use crate::verify::inequality::{evaluate_snapshot, inequality_suite, SnapshotInequalities};
use crate::verify::report::{CheckRow, VerificationReport};
use crate::verify::suite::{fixed_point_suite, oracle_suite, refinement_suite, REFINEMENT_LEVELS};
use crate::warped::{AmbientMetric, Perturbation};

/// Largest allowed drift of any monitor on a fixed point.
pub const FIXED_POINT_DRIFT_TOL: f64 = 1e-10;
/// Relative extinction-time tolerance against the closed form.
pub const EXTINCTION_TOL: f64 = 0.01;
/// Radius error tolerance against the closed-form trajectory.
pub const TRAJECTORY_TOL: f64 = 1e-3;
/// The trajectory is compared while the radius stays above this.
pub const TRAJECTORY_MIN_RHO: f64 = 0.1;

pub const COUPLED_CSV: &str = "coupled.csv";
pub const AMBIENT_CSV: &str = "ambient.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_CSV: &str = "report.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const LOG_TXT: &str = "run.log";
pub const CONFIG_TXT: &str = "config.txt";
pub const FINAL_CHECKPOINT: &str = "checkpoint_final.txt";

/// Which verification checks accompany a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checks {
    /// Classification only, no report rows.
    None,
    /// Inequalities along the run plus scenario closed forms.
    Run,
    /// `Run` plus residual, refinement and oracle suites.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Aborted(String),
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Aborted(_) => "aborted",
        }
    }
}

#[derive(Debug)]
pub struct ScenarioResult {
    pub outcome: Outcome,
    pub status: RunStatus,
    pub run: CoupledRun,
    pub ambient: Vec<AmbientMonitor>,
    pub inequalities: Vec<SnapshotInequalities>,
    pub report: VerificationReport,
    pub fits: Vec<(String, DecayFit)>,
    pub log: Vec<String>,
}

impl ScenarioResult {
    pub fn extinction_estimate(&self) -> Option<f64> {
        self.run.extinction_estimate()
    }

    /// Monitor CSV of the coupled run.
    pub fn coupled_csv(&self) -> String {
        self.run.to_csv()
    }

    pub fn ambient_csv(&self) -> String {
        monitor_csv(&self.ambient)
    }

    pub fn summary(&self, cfg: &FlowConfig) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("scenario", cfg.scenario.to_string());
        kv("status", self.status.label().to_string());
        kv(
            "termination",
            match &self.run.termination {
                Termination::Horizon => "horizon".to_string(),
                Termination::BlowUp => "blowup".to_string(),
                Termination::Aborted(e) => format!("aborted: {e}"),
            },
        );
        kv("outcome", self.outcome.to_string());
        kv("t_end", format!("{:.14e}", self.run.final_state.t));
        kv("steps", self.run.steps.to_string());
        kv("resamples", self.run.resamples.to_string());
        kv("samples", self.run.monitors.len().to_string());
        kv(
            "extinction_estimate",
            self.extinction_estimate().map_or("none".to_string(), |v| format!("{v:.14e}")),
        );
        for (name, fit) in &self.fits {
            kv(&format!("fit_{name}_lambda"), format!("{:.6e}", fit.lambda_hat));
            kv(&format!("fit_{name}_r2"), format!("{:.8}", fit.r2));
        }
        kv("checks_passed", self.report.all_pass().to_string());
        s
    }
}

/// Ambient bumps of a config: `amplitude` in `phi`, half of it in `b`.
pub fn perturbation(amplitude: f64, mode: u32) -> Perturbation {
    Perturbation { amp_phi: amplitude, mode_phi: mode, amp_b: 0.5 * amplitude, mode_b: mode }
}

pub fn initial_metric(cfg: &FlowConfig) -> Result<AmbientMetric> {
    if cfg.amplitude == 0.0 {
        AmbientMetric::round(cfg.n, 1.0, cfg.m)
    } else {
        AmbientMetric::perturbed(cfg.n, 1.0, cfg.m, perturbation(cfg.amplitude, cfg.mode))
    }
}

pub fn initial_curve(cfg: &FlowConfig) -> Result<ProfileCurve> {
    match cfg.curve {
        CurveKind::CoordinateSphere => ProfileCurve::coordinate_sphere(cfg.rho0 / PI, cfg.p),
        CurveKind::NearEquator => ProfileCurve::near_equator(cfg.curve_eps, cfg.p),
    }
}

pub fn initial_state(cfg: &FlowConfig) -> Result<FlowState> {
    FlowState::new(0.0, initial_metric(cfg)?, initial_curve(cfg)?)
}

pub fn params(cfg: &FlowConfig) -> Result<PinchingParams> {
    let mut p = PinchingParams::new(cfg.n, cfg.sigma)?;
    p.eps0 = cfg.eps0;
    Ok(p)
}

pub fn coupled_config(cfg: &FlowConfig) -> Result<CoupledConfig> {
    let mut c = CoupledConfig::new(params(cfg)?);
    c.horizon = cfg.horizon;
    c.stride = cfg.stride;
    c.opts = StepOptions {
        ambient_cfl: cfg.cfl_factor,
        curve_cfl: cfg.curve_cfl,
        freeze_ambient: cfg.freeze_ambient,
        orientation: if cfg.flipped { Orientation::Flipped } else { Orientation::Standard },
    };
    c.thresholds = Thresholds {
        blowup_h: cfg.blowup_h,
        roundness: cfg.roundness,
        geodesic: cfg.geodesic,
        sustain_fraction: cfg.sustain_fraction,
        min_samples: cfg.min_samples,
    };
    c.resample_ratio = (cfg.resample_ratio > 0.0).then_some(cfg.resample_ratio);
    c.regauge_every = (cfg.regauge_every > 0).then_some(cfg.regauge_every);
    Ok(c)
}

/// Optional output directory; every write is a no-op without one.
struct Out(Option<PathBuf>);

impl Out {
    fn write(&self, name: &str, content: &str) -> Result<()> {
        if let Some(dir) = &self.0 {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }
}

/// Runs a single-cell scenario, optionally continuing from a checkpoint,
/// and writes its outputs into `out_dir` when given.
pub fn run_scenario(
    cfg: &FlowConfig,
    out_dir: Option<&Path>,
    checks: Checks,
    resume_from: Option<Checkpoint>,
) -> Result<ScenarioResult> {
    let out = Out(out_dir.map(Path::to_path_buf));
    let mut log = vec![format!("scenario = {}", cfg.scenario)];
    log.extend(cfg.defaults_applied.iter().map(|d| format!("default {d}")));
    out.write(CONFIG_TXT, &cfg.to_text())?;

    let ccfg = coupled_config(cfg)?;
    let (start, resume) = match resume_from {
        Some(ck) => {
            log.push(format!("resume t = {:e} steps = {}", ck.state.t, ck.steps));
            let r = ck.resume();
            (ck.state, Some(r))
        }
        None => (initial_state(cfg)?, None),
    };
    let orient = ccfg.opts.orientation;
    let mut ambient = vec![AmbientMonitor::from_metric(start.t, &start.metric)?];
    let mut inequalities = Vec::new();
    if checks != Checks::None {
        inequalities.push(evaluate_snapshot(&start, &ccfg.params, orient)?);
    }
    let mut sample_count = 0usize;
    let mut hook_error: Option<Error> = None;
    let mut last_checkpoint: Option<String> = None;
    let run = run_coupled_with(start, &ccfg, resume, &mut |p| {
        if hook_error.is_some() {
            return;
        }
        sample_count += 1;
        let res = (|| -> Result<()> {
            ambient.push(AmbientMonitor::from_metric(p.state.t, &p.state.metric)?);
            if checks != Checks::None && sample_count.is_multiple_of(cfg.snapshot_every) {
                inequalities.push(evaluate_snapshot(p.state, &ccfg.params, orient)?);
            }
            if cfg.checkpoint_every > 0 && sample_count.is_multiple_of(cfg.checkpoint_every) {
                let ck = Checkpoint {
                    state: p.state.clone(),
                    steps: p.steps,
                    resamples: p.resamples,
                    monitors: p.monitors.to_vec(),
                };
                let name = format!("checkpoint_{:09}.txt", p.steps);
                out.write(&name, &ck.to_text())?;
                last_checkpoint = Some(name);
            }
            Ok(())
        })();
        if let Err(e) = res {
            hook_error = Some(e);
        }
    })?;
    if let Some(e) = hook_error {
        return Err(e);
    }
    if let Some(name) = last_checkpoint {
        log.push(format!("last periodic checkpoint {name}"));
    }

    let status = match &run.termination {
        Termination::Aborted(e) => RunStatus::Aborted(e.to_string()),
        _ => RunStatus::Completed,
    };
    let outcome = run.outcome(&ccfg.thresholds);
    log.push(format!(
        "end t = {:e} steps = {} resamples = {} status = {} outcome = {}",
        run.final_state.t,
        run.steps,
        run.resamples,
        status.label(),
        outcome
    ));

    let fits = decay_fits(cfg, &run);
    let mut report = VerificationReport::default();
    if checks != Checks::None {
        report.extend(inequality_suite(&inequalities, &ccfg.params));
        report.extend(closed_form_checks(cfg, &run, &ambient));
        // decay rows carry the fitted rate in the residual column
        for (name, f) in fits.iter().filter(|(name, _)| name != "maxE_ambient") {
            report.push(CheckRow::new(format!("decay.{name}"), f.lambda_hat, None, f.lambda_hat > 0.0));
        }
    }
    if checks == Checks::Full {
        report.extend(fixed_point_suite(cfg.n, cfg.m)?);
        report.extend(refinement_suite(cfg.n, &REFINEMENT_LEVELS)?);
        if cfg.n == 2 {
            report.extend(oracle_suite(&REFINEMENT_LEVELS)?);
        }
    }

    let result = ScenarioResult { outcome, status, run, ambient, inequalities, report, fits, log };
    out.write(COUPLED_CSV, &result.coupled_csv())?;
    out.write(AMBIENT_CSV, &result.ambient_csv())?;
    out.write(REPORT_TXT, &result.report.to_text())?;
    out.write(REPORT_CSV, &result.report.to_csv())?;
    let final_ck = Checkpoint {
        state: result.run.final_state.clone(),
        steps: result.run.steps,
        resamples: result.run.resamples,
        monitors: result.run.monitors.clone(),
    };
    out.write(FINAL_CHECKPOINT, &final_ck.to_text())?;
    out.write(SUMMARY_TXT, &result.summary(cfg))?;
    if let Some(dir) = out_dir {
        write_default_plots(&result, dir)?;
    }
    let mut log_text = result.log.join("\n");
    log_text.push('\n');
    out.write(LOG_TXT, &log_text)?;
    Ok(result)
}

/// Plots of both monitor series into `<dir>/plots`, skipped when a series
/// has fewer than two rows.
fn write_default_plots(result: &ScenarioResult, dir: &Path) -> Result<()> {
    let plots = dir.join("plots");
    for (csv, stem) in [(result.coupled_csv(), "coupled"), (result.ambient_csv(), "ambient")] {
        let table = Table::parse(&csv)?;
        if table.rows.len() >= 2 {
            let specs: Vec<PlotSpec> = table.default_specs();
            emit_plots(&csv, &specs, &plots, stem)?;
        }
    }
    Ok(())
}

/// Exponential decay fits over the second half of the run.
fn decay_fits(cfg: &FlowConfig, run: &CoupledRun) -> Vec<(String, DecayFit)> {
    if !matches!(cfg.scenario, Scenario::NearEquatorConverge | Scenario::PinchedConvergence) {
        return Vec::new();
    }
    let t_end = run.final_state.t;
    let times: Vec<f64> = run.monitors.iter().map(|m| m.t).collect();
    let mut fits = Vec::new();
    for col in ["maxFsigma", "maxGradH2", "maxE_ambient"] {
        // a round ambient has nothing to decay
        if col == "maxE_ambient" && cfg.amplitude == 0.0 {
            continue;
        }
        if let Ok(v) = coupled_column(&run.monitors, col) {
            if let Ok(f) = decay_fit(&times, &v, (0.5 * t_end, t_end)) {
                fits.push((col.to_string(), f));
            }
        }
    }
    fits
}

/// Closed-form comparisons that apply to the configured initial data.
pub fn closed_form_checks(cfg: &FlowConfig, run: &CoupledRun, ambient: &[AmbientMonitor]) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let round = cfg.amplitude == 0.0;
    if round && cfg.curve == CurveKind::CoordinateSphere && (cfg.rho0 - PI / 2.0).abs() < 1e-15 {
        let drift = fixed_point_drift(run, ambient);
        rows.push(CheckRow::new("fixed_point.monitor_drift", drift, None, drift <= FIXED_POINT_DRIFT_TOL));
    } else if round && cfg.curve == CurveKind::CoordinateSphere && cfg.rho0 < PI / 2.0 {
        let (ext, traj) = sphere_errors(cfg, run);
        if let Some(e) = ext {
            rows.push(CheckRow::new("geodesic_sphere.extinction_rel_error", e, None, e <= EXTINCTION_TOL));
        }
        rows.push(CheckRow::new("geodesic_sphere.trajectory_error", traj, None, traj <= TRAJECTORY_TOL));
    }
    rows
}

/// Largest change of any coupled or ambient monitor from its initial value.
pub fn fixed_point_drift(run: &CoupledRun, ambient: &[AmbientMonitor]) -> f64 {
    let mut drift = 0.0f64;
    let first = run.monitors[0].csv_row();
    for m in &run.monitors {
        for (a, b) in m.csv_row().iter().zip(&first).skip(1) {
            drift = drift.max((a - b).abs());
        }
    }
    if let Some(a0) = ambient.first() {
        for a in ambient {
            for (x, y) in [(a.rbar, a0.rbar), (a.max_e, a0.max_e), (a.max_grad_rm, a0.max_grad_rm), (a.volume, a0.volume), (a.diam, a0.diam)] {
                drift = drift.max((x - y).abs());
            }
        }
    }
    drift
}

/// Closed-form shrinking sphere in the unit round ambient:
/// `cos rho(t) = cos rho0 e^{n t}`, extinct at `T = -ln(cos rho0) / n`.
pub fn sphere_closed_form(n: usize, rho0: f64) -> (impl Fn(f64) -> f64, f64) {
    let nf = n as f64;
    let c0 = rho0.cos();
    (move |t: f64| (c0 * (nf * t).exp()).min(1.0).acos(), -c0.ln() / nf)
}

/// Relative extinction-time error and the largest radius error while
/// `rho >= TRAJECTORY_MIN_RHO`; the radius comes from `H = n cot rho`.
pub fn sphere_errors(cfg: &FlowConfig, run: &CoupledRun) -> (Option<f64>, f64) {
    let (rho_exact, t_ext) = sphere_closed_form(cfg.n, cfg.rho0);
    let nf = cfg.n as f64;
    let traj = run
        .monitors
        .iter()
        .map(|m| ((nf / m.max_abs_h()).atan(), m.t))
        .filter(|(rho, _)| *rho >= TRAJECTORY_MIN_RHO)
        .map(|(rho, t)| (rho - rho_exact(t)).abs())
        .fold(0.0, f64::max);
    let ext = run.extinction_estimate().map(|t| (t - t_ext).abs() / t_ext);
    (ext, traj)
}
