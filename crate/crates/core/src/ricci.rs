//! Normalized Ricci flow of `b^2 dx^2 + phi^2 g_{S^n}` in fixed coordinates.
//!
//! The flow `dg/dt = -2 Ric + (2 rbar/(n+1)) g` acts on the two blocks as
//!
//! ```text
//! db/dt   = b   (-n K_rad + rbar/(n+1))
//! dphi/dt = phi (-K_rad - (n-1) K_orb + rbar/(n+1))
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result, Subsystem};
use crate::spectral::{interpolate, Parity};
use crate::warped::curvature::{average_scalar, sectional, AmbientCurvature};
use crate::warped::metric::{AmbientMetric, POLE_SLOPE_TOL};
use crate::warped::{pinching_of, volume_and_diameter};

pub const DEFAULT_CFL: f64 = 0.2;

/// Default grid of `delta0` exponents for the `C0` candidates.
pub const DEFAULT_DELTA0: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct NrfRates {
    pub db: Vec<f64>,
    pub dphi: Vec<f64>,
    pub rbar: f64,
}

pub fn nrf_rhs(metric: &AmbientMetric) -> Result<NrfRates> {
    let n = metric.dim() as f64;
    let sec = sectional(metric)?;
    let rbar = average_scalar(metric, &sec.k_rad, &sec.k_orb);
    let shift = rbar / (n + 1.0);
    let db = metric
        .b()
        .iter()
        .zip(&sec.k_rad)
        .map(|(b, kr)| b * (-n * kr + shift))
        .collect();
    let dphi = metric
        .phi()
        .iter()
        .zip(sec.k_rad.iter().zip(&sec.k_orb))
        .map(|(p, (kr, ko))| p * (-kr - (n - 1.0) * ko + shift))
        .collect();
    Ok(NrfRates { db, dphi, rbar })
}

/// Largest step allowed by `dt <= cfl (min b dx)^2`.
pub fn max_stable_dt(metric: &AmbientMetric, cfl: f64) -> f64 {
    let h = metric.min_spacing();
    cfl * h * h
}

fn rejected(reason: impl Into<String>) -> Error {
    Error::StepRejected {
        subsystem: Subsystem::Ambient,
        t: f64::NAN,
        reason: reason.into(),
    }
}

fn axpy(base: &AmbientMetric, dt: f64, k: &NrfRates) -> AmbientMetric {
    let b = base.b().iter().zip(&k.db).map(|(v, d)| v + dt * d).collect();
    let phi = base.phi().iter().zip(&k.dphi).map(|(v, d)| v + dt * d).collect();
    AmbientMetric::from_parts_unchecked(base.dim(), b, phi)
}

fn stage(base: &AmbientMetric, dt: f64, k: &NrfRates) -> Result<NrfRates> {
    nrf_rhs(&axpy(base, dt, k)).map_err(|e| rejected(format!("intermediate stage failed: {e}")))
}

/// One classical Runge-Kutta step with the default CFL factor.
pub fn nrf_step(metric: &AmbientMetric, dt: f64) -> Result<AmbientMetric> {
    nrf_step_with(metric, dt, DEFAULT_CFL, None)
}

/// One step; `k1` may be supplied when the rates at `metric` are already known.
pub fn nrf_step_with(metric: &AmbientMetric, dt: f64, cfl: f64, k1: Option<NrfRates>) -> Result<AmbientMetric> {
    let limit = max_stable_dt(metric, cfl);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(rejected(format!("dt = {dt:e} outside the stable range (0, {limit:e}]")));
    }
    let k1 = match k1 {
        Some(k) => k,
        None => nrf_rhs(metric)?,
    };
    let k2 = stage(metric, 0.5 * dt, &k1)?;
    let k3 = stage(metric, 0.5 * dt, &k2)?;
    let k4 = stage(metric, dt, &k3)?;
    let m = metric.intervals();
    let mut b = Vec::with_capacity(m + 1);
    let mut phi = Vec::with_capacity(m + 1);
    for j in 0..=m {
        b.push(metric.b()[j] + dt / 6.0 * (k1.db[j] + 2.0 * k2.db[j] + 2.0 * k3.db[j] + k4.db[j]));
        phi.push(metric.phi()[j] + dt / 6.0 * (k1.dphi[j] + 2.0 * k2.dphi[j] + 2.0 * k3.dphi[j] + k4.dphi[j]));
    }
    if let Some(j) = (1..m).find(|&j| !(phi[j] > 0.0)) {
        return Err(rejected(format!("phi[{j}] = {} is no longer positive", phi[j])));
    }
    if let Some(j) = (0..=m).find(|&j| !(b[j] > 0.0)) {
        return Err(rejected(format!("b[{j}] = {} is no longer positive", b[j])));
    }
    let next = AmbientMetric::from_parts_unchecked(metric.dim(), b, phi);
    let (lo, hi) = next.pole_slopes();
    if (lo - 1.0).abs() > POLE_SLOPE_TOL || (hi + 1.0).abs() > POLE_SLOPE_TOL {
        return Err(rejected(format!("pole slopes drifted to ({lo}, {hi})")));
    }
    Ok(next)
}

/// Re-parametrizes the metric by normalized arclength `x' = s(x)/L`, which
/// makes `b` constant. Also returns the old-to-new coordinate map sampled at
/// the old nodes, for transporting hypersurface coordinates.
pub fn regauge(metric: &AmbientMetric) -> Result<(AmbientMetric, CoordinateMap)> {
    let m = metric.intervals();
    let len = metric.length();
    let s = metric.arclength();
    // s/L - x is odd about both poles
    let shift: Vec<f64> = (0..=m).map(|j| s[j] / len - metric.x(j)).collect();
    let map = CoordinateMap { shift };
    let mut phi = vec![0.0; m + 1];
    for (j, slot) in phi.iter_mut().enumerate().take(m).skip(1) {
        let target = metric.x(j);
        let mut x = target;
        for _ in 0..50 {
            let f = map.apply(x) - target;
            let slope = interpolate(metric.b(), Parity::Even, x, 8) / len;
            let step = f / slope;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        *slot = interpolate(metric.phi(), Parity::Odd, x, 8);
    }
    let next = AmbientMetric::new(metric.dim(), vec![len; m + 1], phi)?;
    Ok((next, map))
}

/// Smooth monotone map of `[0, 1]` onto itself, stored as an odd offset.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    shift: Vec<f64>,
}

impl CoordinateMap {
    pub fn apply(&self, x: f64) -> f64 {
        x + interpolate(&self.shift, Parity::Odd, x, 8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrfConfig {
    pub horizon: f64,
    /// Fixed step; `None` picks the CFL limit at every step.
    pub dt: Option<f64>,
    pub cfl: f64,
    /// Record monitors every `stride` accepted steps.
    pub stride: usize,
    /// Stop early once `max ||E||` falls below this floor.
    pub e_floor: Option<f64>,
    pub eps0: f64,
    /// Keep the metric of every recorded sample.
    pub keep_snapshots: bool,
}

impl Default for NrfConfig {
    fn default() -> Self {
        NrfConfig {
            horizon: 1.0,
            dt: None,
            cfl: DEFAULT_CFL,
            stride: 100,
            e_floor: None,
            eps0: 1.0 / 12.0,
            keep_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientMonitor {
    pub t: f64,
    pub rbar: f64,
    pub max_e: f64,
    pub max_grad_rm: f64,
    pub volume: f64,
    pub diam: f64,
    pub max_r: f64,
    /// `max ||Rm - (g (.) g)||`, the unit-curvature deviation.
    pub dev_unit: f64,
    /// `sup ||R°m||^2 R^{delta0 - 2}` over the configured `delta0` grid.
    pub c0_candidates: Vec<f64>,
    /// `max (||R°m||^2 - R^2 / (4 n^2 (n+1)^2))`; non-positive when the
    /// curvature-pinching consequence holds everywhere.
    pub pinching_excess: f64,
}

impl AmbientMonitor {
    pub fn from_metric(t: f64, metric: &AmbientMetric) -> Result<Self> {
        let c = AmbientCurvature::compute(metric)?;
        Ok(Self::from_curvature(t, metric, &c, &DEFAULT_DELTA0))
    }

    pub fn from_curvature(t: f64, metric: &AmbientMetric, c: &AmbientCurvature, delta0: &[f64]) -> Self {
        let vd = volume_and_diameter(metric);
        let nf = c.n as f64;
        let traceless = c.traceless_rm2();
        let c0_candidates = delta0
            .iter()
            .map(|&d| {
                traceless
                    .iter()
                    .zip(&c.r)
                    .map(|(t, &r)| if r > 0.0 { t.max(0.0) * r.powf(d - 2.0) } else { f64::INFINITY })
                    .fold(0.0, f64::max)
            })
            .collect();
        let bound = 4.0 * nf * nf * (nf + 1.0) * (nf + 1.0);
        let pinching_excess = traceless
            .iter()
            .zip(&c.r)
            .map(|(t, r)| t - r * r / bound)
            .fold(f64::NEG_INFINITY, f64::max);
        AmbientMonitor {
            t,
            rbar: c.rbar,
            max_e: c.max_e(),
            max_grad_rm: c.max_grad_rm(),
            volume: vd.volume,
            diam: vd.diam,
            max_r: c.max_r(),
            dev_unit: pinching_of(c, f64::INFINITY).lhs_curv,
            c0_candidates,
            pinching_excess,
        }
    }
}

/// Receiver for monitor records as they are produced.
pub trait MonitorSink<T> {
    fn record(&mut self, item: &T);
}

impl<T: Clone> MonitorSink<T> for Vec<T> {
    fn record(&mut self, item: &T) {
        self.push(item.clone());
    }
}

/// Discards everything.
pub struct NullSink;

impl<T> MonitorSink<T> for NullSink {
    fn record(&mut self, _: &T) {}
}

#[derive(Debug, Clone)]
pub struct AmbientFlowSeries {
    pub n: usize,
    pub eps0: f64,
    /// Whether the initial metric satisfied the ambient pinching hypothesis.
    pub within_hypothesis: bool,
    pub monitors: Vec<AmbientMonitor>,
    pub snapshots: Vec<AmbientMetric>,
    /// Smallest `rbar(t_{k+1}) - rbar(t_k)` over all accepted steps.
    pub min_rbar_increment: f64,
    pub steps: usize,
    pub final_metric: AmbientMetric,
}

pub const MONITOR_HEADER: &str = "t,rbar,maxE,maxGradRm,V,diam";

impl AmbientFlowSeries {
    pub fn times(&self) -> Vec<f64> {
        self.monitors.iter().map(|m| m.t).collect()
    }

    /// Values of a monitor column by its CSV name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let pick: fn(&AmbientMonitor) -> f64 = match name {
            "t" => |m| m.t,
            "rbar" => |m| m.rbar,
            "maxE" => |m| m.max_e,
            "maxGradRm" => |m| m.max_grad_rm,
            "V" => |m| m.volume,
            "diam" => |m| m.diam,
            "maxR" => |m| m.max_r,
            _ => return Err(Error::invalid(format!("unknown monitor '{name}'"))),
        };
        Ok(self.monitors.iter().map(pick).collect())
    }

    pub fn volume_drift(&self) -> f64 {
        let v0 = self.monitors[0].volume;
        self.monitors.iter().map(|m| (m.volume - v0).abs() / v0).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        monitor_csv(&self.monitors)
    }
}

/// Monitor CSV with the documented header, 15 significant digits.
pub fn monitor_csv(monitors: &[AmbientMonitor]) -> String {
    let mut out = String::from(MONITOR_HEADER);
    out.push('\n');
    for m in monitors {
        writeln!(
            out,
            "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}",
            m.t, m.rbar, m.max_e, m.max_grad_rm, m.volume, m.diam
        )
        .unwrap();
    }
    out
}

pub fn run_nrf(metric: &AmbientMetric, cfg: &NrfConfig) -> Result<AmbientFlowSeries> {
    run_nrf_with_sink(metric, cfg, &mut NullSink)
}

pub fn run_nrf_with_sink(
    metric: &AmbientMetric,
    cfg: &NrfConfig,
    sink: &mut dyn MonitorSink<AmbientMonitor>,
) -> Result<AmbientFlowSeries> {
    if cfg.stride == 0 || !(cfg.horizon >= 0.0) {
        return Err(Error::invalid("stride must be positive and horizon non-negative"));
    }
    let c0 = AmbientCurvature::compute(metric)?;
    let within_hypothesis = pinching_of(&c0, cfg.eps0).holds;
    let first = AmbientMonitor::from_curvature(0.0, metric, &c0, &DEFAULT_DELTA0);
    sink.record(&first);
    let mut series = AmbientFlowSeries {
        n: metric.dim(),
        eps0: cfg.eps0,
        within_hypothesis,
        monitors: vec![first],
        snapshots: if cfg.keep_snapshots { vec![metric.clone()] } else { Vec::new() },
        min_rbar_increment: f64::INFINITY,
        steps: 0,
        final_metric: metric.clone(),
    };
    let mut g = metric.clone();
    let mut t = 0.0;
    let mut rates = nrf_rhs(&g)?;
    while t < cfg.horizon * (1.0 - 1e-12) {
        let dt_cfl = max_stable_dt(&g, cfg.cfl);
        let dt = cfg.dt.unwrap_or(dt_cfl).min(cfg.horizon - t);
        let rbar_prev = rates.rbar;
        g = nrf_step_with(&g, dt, cfg.cfl, Some(rates)).map_err(|e| e.at_time(t))?;
        t += dt;
        series.steps += 1;
        rates = nrf_rhs(&g).map_err(|e| e.at_time(t))?;
        series.min_rbar_increment = series.min_rbar_increment.min(rates.rbar - rbar_prev);
        let done = t >= cfg.horizon * (1.0 - 1e-12);
        if series.steps.is_multiple_of(cfg.stride) || done {
            let c = AmbientCurvature::compute(&g).map_err(|e| e.at_time(t))?;
            let mon = AmbientMonitor::from_curvature(t, &g, &c, &DEFAULT_DELTA0);
            sink.record(&mon);
            let stop = cfg.e_floor.is_some_and(|floor| mon.max_e < floor);
            series.monitors.push(mon);
            if cfg.keep_snapshots {
                series.snapshots.push(g.clone());
            }
            if stop {
                break;
            }
        }
    }
    series.final_metric = g;
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub lambda_hat: f64,
    pub r2: f64,
}

/// Least-squares fit of `log q` against `t` over samples with `t` in
/// `[t0, t1]`; `lambda_hat` is minus the slope.
pub fn decay_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 10 {
        return Err(Error::invalid(format!("decay fit needs at least 10 samples, got {}", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::invalid(format!("non-positive sample {v} at t = {t}")));
    }
    let k = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let (dt, dy) = (t - tm, v.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::invalid("decay fit window has a single time"));
    }
    let slope = sty / stt;
    let r2 = if syy == 0.0 { 1.0 } else { (sty * sty) / (stt * syy) };
    Ok(DecayFit { lambda_hat: -slope, r2 })
}
