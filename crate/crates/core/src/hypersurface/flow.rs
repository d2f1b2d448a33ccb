//! Mean curvature flow of the profile curve, alone or coupled to the
//! normalized Ricci flow of the ambient metric.

use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result, Subsystem};
use crate::hypersurface::ambient::AmbientFields;
use crate::hypersurface::curve::ProfileCurve;
use crate::hypersurface::resample::{resample, spacing_ratio};
use crate::hypersurface::shape::{frames_and_curvatures, shape_with, NodeFrame, Orientation, PinchingParams, ShapeReport};
use crate::ricci::{max_stable_dt, nrf_step_with, regauge, DEFAULT_CFL};
use crate::warped::metric::AmbientMetric;

pub const DEFAULT_MCF_CFL: f64 = 0.2;

pub const COUPLED_HEADER: &str =
    "t,Hmax,Hmin,maxA2,maxTraceless,maxP,maxFsigma,maxGradH2,minSectional,maxE_ambient,rbar";

fn rejected(reason: impl Into<String>) -> Error {
    Error::StepRejected {
        subsystem: Subsystem::Hypersurface,
        t: f64::NAN,
        reason: reason.into(),
    }
}

/// Frames plus the mean curvature at every node.
pub struct Velocity {
    pub frames: Vec<NodeFrame>,
    pub h: Vec<f64>,
}

impl Velocity {
    pub fn compute(curve: &ProfileCurve, fields: &AmbientFields, orientation: Orientation) -> Result<Self> {
        let nf = fields.n as f64;
        let (frames, k1, k2) = frames_and_curvatures(curve, fields, orientation)?;
        let h = k1.iter().zip(&k2).map(|(a, b)| a + (nf - 1.0) * b).collect();
        Ok(Velocity { frames, h })
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Explicit-Euler limit `cfl h_min^2 min(1, 2/n)`, `h_min` the smallest
    /// induced node spacing. The axis nodes see an `n`-fold Laplacian.
    pub fn max_dt(&self, n: usize, cfl: f64) -> f64 {
        let du = 1.0 / (self.frames.len() - 1) as f64;
        let hmin = self.frames.iter().map(|f| f.speed * du).fold(f64::INFINITY, f64::min);
        cfl * hmin * hmin * (2.0 / n as f64).min(1.0)
    }

    /// Moves every node by `-H nu dt`; the axis nodes only move along the axis.
    pub fn advance(&self, curve: &ProfileCurve, dt: f64) -> Result<ProfileCurve> {
        let p = curve.segments();
        let mut x = Vec::with_capacity(p + 1);
        let mut alpha = Vec::with_capacity(p + 1);
        for (k, fr) in self.frames.iter().enumerate() {
            let (nx, na) = fr.normal_coords();
            x.push(fr.x - dt * self.h[k] * nx);
            alpha.push(fr.alpha - dt * self.h[k] * na);
        }
        alpha[0] = 0.0;
        alpha[p] = PI;
        if let Some(k) = (1..p).find(|&k| !(alpha[k] > 0.0 && alpha[k] < PI)) {
            return Err(rejected(format!("orbit radius at node {k} collapsed (alpha = {})", alpha[k])));
        }
        if let Some(k) = (0..=p).find(|&k| !(x[k] > 0.0 && x[k] < 1.0)) {
            return Err(rejected(format!("node {k} reached an ambient pole (x = {})", x[k])));
        }
        Ok(ProfileCurve { x, alpha, topology: curve.topology() })
    }
}

/// One explicit step of `d gamma/dt = -H nu` in a fixed ambient metric.
pub fn mcf_step(curve: &ProfileCurve, metric: &AmbientMetric, dt: f64) -> Result<ProfileCurve> {
    mcf_step_with(curve, &AmbientFields::new(metric)?, dt, DEFAULT_MCF_CFL, Orientation::Standard)
}

pub fn mcf_step_with(
    curve: &ProfileCurve,
    fields: &AmbientFields,
    dt: f64,
    cfl: f64,
    orientation: Orientation,
) -> Result<ProfileCurve> {
    let v = Velocity::compute(curve, fields, orientation)?;
    let limit = v.max_dt(fields.n, cfl);
    if !(dt >= 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(rejected(format!("dt = {dt:e} outside the stable range [0, {limit:e}]")));
    }
    v.advance(curve, dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub ambient_cfl: f64,
    pub curve_cfl: f64,
    pub freeze_ambient: bool,
    pub orientation: Orientation,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            ambient_cfl: DEFAULT_CFL,
            curve_cfl: DEFAULT_MCF_CFL,
            freeze_ambient: false,
            orientation: Orientation::Standard,
        }
    }
}

/// Ambient metric, profile curve and time of one coupled run.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub metric: AmbientMetric,
    pub curve: ProfileCurve,
    fields: AmbientFields,
}

impl FlowState {
    pub fn new(t: f64, metric: AmbientMetric, curve: ProfileCurve) -> Result<Self> {
        curve.validate()?;
        let fields = AmbientFields::new(&metric)?;
        Ok(FlowState { t, metric, curve, fields })
    }

    pub fn fields(&self) -> &AmbientFields {
        &self.fields
    }

    pub fn shape(&self, params: &PinchingParams, orientation: Orientation) -> Result<ShapeReport> {
        shape_with(&self.curve, &self.fields, params, orientation)
    }

    /// Largest coupled step allowed by the ambient CFL condition (the curve
    /// is sub-cycled inside `coupled_step`).
    pub fn ambient_dt(&self, opts: &StepOptions) -> f64 {
        max_stable_dt(&self.metric, opts.ambient_cfl)
    }

    /// Replaces the ambient metric by its constant-`b` gauge and moves the
    /// curve through the same coordinate change.
    pub fn regauged(&self) -> Result<FlowState> {
        let (metric, map) = regauge(&self.metric)?;
        let x: Vec<f64> = self.curve.x().iter().map(|&x| map.apply(x)).collect();
        let curve = ProfileCurve::new(x, self.curve.alpha().to_vec(), self.curve.topology())?;
        FlowState::new(self.t, metric, curve)
    }
}

/// Sub-cycled MCF over `dt` in fixed ambient fields; returns the curve and
/// `max |H|` seen at the start of the last sub-step.
fn mcf_substeps(
    curve: &ProfileCurve,
    fields: &AmbientFields,
    dt: f64,
    opts: &StepOptions,
) -> Result<(ProfileCurve, f64)> {
    let mut curve = curve.clone();
    let mut left = dt;
    let mut hmax = 0.0;
    while left > 0.0 {
        let v = Velocity::compute(&curve, fields, opts.orientation)?;
        hmax = v.max_abs_h();
        let limit = v.max_dt(fields.n, opts.curve_cfl);
        // avoid a sliver sub-step at the end
        let sub = if left <= limit * (1.0 + 1e-9) { left } else { limit.min(0.5 * left) };
        curve = v.advance(&curve, sub)?;
        left -= sub;
        if left < 1e-15 * dt {
            left = 0.0;
        }
    }
    Ok((curve, hmax))
}

fn step_internal(state: &FlowState, dt: f64, opts: &StepOptions) -> Result<(FlowState, f64)> {
    let (metric, fields) = if opts.freeze_ambient {
        (state.metric.clone(), state.fields.clone())
    } else {
        let m = nrf_step_with(&state.metric, dt, opts.ambient_cfl, None).map_err(|e| e.at_time(state.t))?;
        let f = AmbientFields::new(&m).map_err(|e| e.at_time(state.t))?;
        (m, f)
    };
    let (curve, hmax) = mcf_substeps(&state.curve, &fields, dt, opts).map_err(|e| e.at_time(state.t))?;
    Ok((FlowState { t: state.t + dt, metric, curve, fields }, hmax))
}

/// One first-order split step: the ambient metric advances by `dt`, then the
/// curve moves by MCF over `dt` in the updated metric.
pub fn coupled_step(state: &FlowState, dt: f64, opts: &StepOptions) -> Result<FlowState> {
    step_internal(state, dt, opts).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub blowup_h: f64,
    pub roundness: f64,
    pub geodesic: f64,
    /// Fraction of the run (at its end) over which the geodesic bound must hold.
    pub sustain_fraction: f64,
    /// Shorter series are never classified.
    pub min_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            blowup_h: 50.0,
            roundness: 0.05,
            geodesic: 0.02,
            sustain_fraction: 0.2,
            min_samples: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    ShrinkToRoundPoint,
    TotallyGeodesicLimit,
    Undetermined,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ShrinkToRoundPoint => "ShrinkToRoundPoint",
            Outcome::TotallyGeodesicLimit => "TotallyGeodesicLimit",
            Outcome::Undetermined => "Undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledMonitor {
    pub t: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_a2: f64,
    pub max_traceless: f64,
    pub max_p: f64,
    pub max_f_sigma: f64,
    pub max_grad_h2: f64,
    pub min_sectional: f64,
    pub max_e_ambient: f64,
    pub rbar: f64,
    /// Largest `(H^2 + 1)/(8 n^2) - minSectional` over the nodes.
    pub gauss_excess: f64,
    pub area: f64,
}

impl CoupledMonitor {
    pub fn from_state(state: &FlowState, params: &PinchingParams, orientation: Orientation) -> Result<Self> {
        let s = state.shape(params, orientation)?;
        Ok(CoupledMonitor {
            t: state.t,
            h_max: s.h_max,
            h_min: s.h_min,
            max_a2: s.max_a2,
            max_traceless: s.max_traceless,
            max_p: s.max_p,
            max_f_sigma: s.max_f_sigma,
            max_grad_h2: s.max_grad_h2,
            min_sectional: s.min_sectional_min,
            max_e_ambient: state.fields.max_e,
            rbar: state.fields.rbar,
            gauss_excess: s.gauss_excess(),
            area: s.area,
        })
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h_max.abs().max(self.h_min.abs())
    }

    pub fn csv_row(&self) -> [f64; 11] {
        [
            self.t,
            self.h_max,
            self.h_min,
            self.max_a2,
            self.max_traceless,
            self.max_p,
            self.max_f_sigma,
            self.max_grad_h2,
            self.min_sectional,
            self.max_e_ambient,
            self.rbar,
        ]
    }
}

pub fn coupled_csv(monitors: &[CoupledMonitor]) -> String {
    let mut out = String::from(COUPLED_HEADER);
    out.push('\n');
    for m in monitors {
        let row: Vec<String> = m.csv_row().iter().map(|v| format!("{v:.14e}")).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Column of a monitor series by CSV header name.
pub fn coupled_column(monitors: &[CoupledMonitor], name: &str) -> Result<Vec<f64>> {
    let idx = COUPLED_HEADER
        .split(',')
        .position(|c| c == name)
        .ok_or_else(|| Error::invalid(format!("unknown column '{name}'")))?;
    Ok(monitors.iter().map(|m| m.csv_row()[idx]).collect())
}

pub fn classify_outcome(series: &[CoupledMonitor], n: usize, th: &Thresholds) -> Outcome {
    if series.len() < th.min_samples.max(1) {
        return Outcome::Undetermined;
    }
    let last = series.last().unwrap();
    let h = last.max_abs_h();
    if h >= th.blowup_h && n as f64 * last.max_traceless / (h * h) <= th.roundness {
        return Outcome::ShrinkToRoundPoint;
    }
    let (t0, t1) = (series[0].t, last.t);
    let from = t1 - th.sustain_fraction * (t1 - t0);
    let tail: Vec<&CoupledMonitor> = series.iter().filter(|m| m.t >= from).collect();
    let small = |m: &&CoupledMonitor| m.max_abs_h().max(m.max_a2.sqrt()) <= th.geodesic;
    if t1 > t0 && tail.len() >= 2 && tail.iter().all(small) {
        return Outcome::TotallyGeodesicLimit;
    }
    Outcome::Undetermined
}

#[derive(Debug, Clone)]
pub struct CoupledConfig {
    pub horizon: f64,
    /// Record a monitor every `stride` accepted steps (and at the end).
    pub stride: usize,
    pub opts: StepOptions,
    pub params: PinchingParams,
    pub thresholds: Thresholds,
    /// Resample when the longest/shortest segment ratio exceeds this.
    pub resample_ratio: Option<f64>,
    /// Move the ambient metric to its constant-`b` gauge every this many steps.
    pub regauge_every: Option<usize>,
    pub keep_snapshots: bool,
}

impl CoupledConfig {
    pub fn new(params: PinchingParams) -> Self {
        CoupledConfig {
            horizon: 1.0,
            stride: 100,
            opts: StepOptions::default(),
            params,
            thresholds: Thresholds::default(),
            resample_ratio: Some(1.5),
            regauge_every: None,
            keep_snapshots: false,
        }
    }
}

#[derive(Debug)]
pub enum Termination {
    Horizon,
    /// `max |H|` reached the blow-up threshold.
    BlowUp,
    Aborted(Error),
}

#[derive(Debug)]
pub struct CoupledRun {
    pub n: usize,
    pub monitors: Vec<CoupledMonitor>,
    pub snapshots: Vec<FlowState>,
    pub steps: usize,
    pub resamples: usize,
    pub termination: Termination,
    pub final_state: FlowState,
}

impl CoupledRun {
    pub fn outcome(&self, th: &Thresholds) -> Outcome {
        classify_outcome(&self.monitors, self.n, th)
    }

    /// Extinction time from the final sample, using the shrinking-sphere
    /// asymptotics `T - t = n / (2 H^2)`.
    pub fn extinction_estimate(&self) -> Option<f64> {
        match self.termination {
            Termination::BlowUp => {
                let m = self.monitors.last()?;
                let h = m.max_abs_h();
                Some(m.t + self.n as f64 / (2.0 * h * h))
            }
            _ => None,
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.termination, Termination::Aborted(_))
    }

    pub fn to_csv(&self) -> String {
        coupled_csv(&self.monitors)
    }
}

/// Counters and history needed to continue a run exactly where it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Resume {
    pub steps: usize,
    pub resamples: usize,
    /// Monitors recorded so far; the last one belongs to the resumed state.
    pub monitors: Vec<CoupledMonitor>,
}

/// View of a run right after a monitor sample was recorded.
pub struct RunProgress<'a> {
    pub state: &'a FlowState,
    pub steps: usize,
    pub resamples: usize,
    pub monitors: &'a [CoupledMonitor],
}

/// Runs the coupled (or frozen-ambient) flow until the horizon, blow-up, or
/// a rejected step. Rejections end the run with `Termination::Aborted` and
/// keep everything recorded so far.
pub fn run_coupled(initial: FlowState, cfg: &CoupledConfig) -> Result<CoupledRun> {
    run_coupled_with(initial, cfg, None, &mut |_| {})
}

/// `run_coupled` that may continue from a checkpoint and reports every
/// recorded sample to `on_sample`.
pub fn run_coupled_with(
    initial: FlowState,
    cfg: &CoupledConfig,
    resume: Option<Resume>,
    on_sample: &mut dyn FnMut(&RunProgress),
) -> Result<CoupledRun> {
    let n = initial.metric.dim();
    let orient = cfg.opts.orientation;
    let record = |s: &FlowState| CoupledMonitor::from_state(s, &cfg.params, orient);
    let (mut monitors, mut steps, mut resamples) = match resume {
        Some(r) if !r.monitors.is_empty() => (r.monitors, r.steps, r.resamples),
        Some(_) => return Err(Error::invalid("resume data carries no monitors")),
        None => (vec![record(&initial)?], 0, 0),
    };
    let mut snapshots = Vec::new();
    if cfg.keep_snapshots {
        snapshots.push(initial.clone());
    }
    let mut state = initial;
    let stride = cfg.stride.max(1);
    let termination = loop {
        if state.t >= cfg.horizon * (1.0 - 1e-14) {
            break Termination::Horizon;
        }
        let left = cfg.horizon - state.t;
        let next = if cfg.opts.freeze_ambient {
            // one MCF step per accepted step, no sub-cycling
            Velocity::compute(&state.curve, &state.fields, orient).and_then(|v| {
                let dt = v.max_dt(n, cfg.opts.curve_cfl).min(left);
                let curve = v.advance(&state.curve, dt)?;
                let hmax = v.max_abs_h();
                Ok((FlowState { t: state.t + dt, metric: state.metric.clone(), curve, fields: state.fields.clone() }, hmax))
            })
        } else {
            step_internal(&state, state.ambient_dt(&cfg.opts).min(left), &cfg.opts)
        };
        let (mut s, hmax) = match next {
            Ok(v) => v,
            Err(e) => break Termination::Aborted(e.at_time(state.t)),
        };
        steps += 1;
        if let Some(every) = cfg.regauge_every {
            if steps % every == 0 {
                match s.regauged() {
                    Ok(r) => s = r,
                    Err(e) => break Termination::Aborted(e.at_time(s.t)),
                }
            }
        }
        if let Some(ratio) = cfg.resample_ratio {
            if steps % stride == 0 && spacing_ratio(&s.curve, &s.fields) > ratio {
                match resample(&s.curve, &s.fields) {
                    Ok(c) => {
                        s.curve = c;
                        resamples += 1;
                    }
                    Err(e) => break Termination::Aborted(e.at_time(s.t)),
                }
            }
        }
        state = s;
        let blowup = hmax >= cfg.thresholds.blowup_h;
        let done = state.t >= cfg.horizon * (1.0 - 1e-14);
        if steps % stride == 0 || blowup || done {
            match record(&state) {
                Ok(m) => monitors.push(m),
                Err(e) => break Termination::Aborted(e.at_time(state.t)),
            }
            if cfg.keep_snapshots {
                snapshots.push(state.clone());
            }
            on_sample(&RunProgress { state: &state, steps, resamples, monitors: &monitors });
        }
        if blowup || monitors.last().unwrap().max_abs_h() >= cfg.thresholds.blowup_h {
            break Termination::BlowUp;
        }
    };
    Ok(CoupledRun { n, monitors, snapshots, steps, resamples, termination, final_state: state })
}
