//! Pointwise residuals of the evolution equations and of Simons' identity.
//!
//! Time derivatives are three-point differences over stored samples, taken at
//! fixed node labels. Windows are built without resampling, since a
//! tangential reparametrization would change the field at a label.
//!
//! Samples are spaced by `sample_dt`, with several integrator steps between
//! them. Taking `sample_dt` proportional to the grid spacing makes the
//! differencing error second order in space while keeping the roundoff
//! amplification `eps / (h^2 sample_dt)` far below it.

use crate::error::{Error, Result};
use crate::hypersurface::flow::{coupled_step, FlowState, StepOptions};
use crate::hypersurface::shape::{Orientation, PinchingParams, ShapeReport};
use crate::ricci::{run_nrf, AmbientFlowSeries, NrfConfig};
use crate::spectral::Parity;
use crate::verify::reaction::ReactionTerms;
use crate::warped::curvature::AmbientCurvature;
use crate::warped::metric::AmbientMetric;

/// Weights of the three-point first derivative at the middle of `t`.
fn centered_weights(t: [f64; 3]) -> [f64; 3] {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    [-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))]
}

fn check_interior(i: usize, len: usize) -> Result<()> {
    if i == 0 || i + 1 >= len {
        return Err(Error::invalid(format!(
            "sample {i} has no neighbours on both sides (series of {len})"
        )));
    }
    Ok(())
}

/// Warped-product Laplacian `f_ss + n (phi_s/phi) f_s` of an even grid
/// function, `(n+1) f_ss` at the poles.
pub fn warped_laplacian(metric: &AmbientMetric, f: &[f64]) -> Vec<f64> {
    let n = metric.dim() as f64;
    let sp = metric.spectral();
    let (b, phi) = (metric.b(), metric.phi());
    let bx = sp.diff(b, Parity::Even);
    let phix = sp.diff(phi, Parity::Odd);
    let fx = sp.diff(f, Parity::Even);
    let fxx = sp.diff(&fx, Parity::Odd);
    let m = metric.intervals();
    (0..=m)
        .map(|j| {
            let fss = (fxx[j] - bx[j] * fx[j] / b[j]) / (b[j] * b[j]);
            if j == 0 || j == m {
                (n + 1.0) * fss
            } else {
                fss + n * phix[j] / (b[j] * phi[j]) * fx[j] / b[j]
            }
        })
        .collect()
}

/// Smallest number of steps of size at most `limit` that tile `sample_dt`.
pub fn substeps_for(sample_dt: f64, limit: f64) -> usize {
    ((sample_dt / limit).ceil() as usize).max(1)
}

/// Short ambient run with three samples `sample_dt` apart, `substeps` fixed
/// steps between consecutive samples.
pub fn ambient_window(metric: &AmbientMetric, sample_dt: f64, substeps: usize) -> Result<AmbientFlowSeries> {
    if substeps == 0 || !(sample_dt > 0.0) {
        return Err(Error::invalid("window needs a positive sample spacing and substep count"));
    }
    let cfg = NrfConfig {
        horizon: 2.0 * sample_dt,
        dt: Some(sample_dt / substeps as f64),
        stride: substeps,
        keep_snapshots: true,
        ..NrfConfig::default()
    };
    run_nrf(metric, &cfg)
}

/// `|dR/dt - (Delta R + 2 |Ric|^2 - 2 rbar R / (n+1))|` at every grid node.
pub fn residual_scalar_curvature(series: &AmbientFlowSeries, i: usize) -> Result<Vec<f64>> {
    let len = series.snapshots.len();
    if len != series.monitors.len() {
        return Err(Error::invalid("series was recorded without snapshots at every sample"));
    }
    check_interior(i, len)?;
    let w = centered_weights([series.monitors[i - 1].t, series.monitors[i].t, series.monitors[i + 1].t]);
    let curv: Vec<AmbientCurvature> = (i - 1..=i + 1)
        .map(|j| AmbientCurvature::compute(&series.snapshots[j]))
        .collect::<Result<_>>()?;
    let mid = &curv[1];
    let nf = series.n as f64;
    let lap = warped_laplacian(&series.snapshots[i], &mid.r);
    Ok((0..mid.r.len())
        .map(|j| {
            let dr = w[0] * curv[0].r[j] + w[1] * curv[1].r[j] + w[2] * curv[2].r[j];
            let rhs = lap[j] + 2.0 * mid.ric2[j] - 2.0 * mid.rbar * mid.r[j] / (nf + 1.0);
            (dr - rhs).abs()
        })
        .collect())
}

/// Consecutive coupled states at fixed node labels.
#[derive(Debug, Clone)]
pub struct CoupledWindow {
    pub states: Vec<FlowState>,
    pub params: PinchingParams,
    pub orientation: Orientation,
    /// Set when the curve was redistributed inside the window.
    pub resampled: bool,
}

impl CoupledWindow {
    /// Three samples `sample_dt` apart from `start`, each reached by
    /// `substeps` coupled steps, without resampling.
    pub fn run(
        start: FlowState,
        sample_dt: f64,
        substeps: usize,
        opts: &StepOptions,
        params: PinchingParams,
    ) -> Result<Self> {
        if substeps == 0 || !(sample_dt > 0.0) {
            return Err(Error::invalid("window needs a positive sample spacing and substep count"));
        }
        let dt = sample_dt / substeps as f64;
        let t0 = start.t;
        let mut states = vec![start];
        for j in 1..=2 {
            let mut st = states.last().unwrap().clone();
            for _ in 0..substeps {
                st = coupled_step(&st, dt, opts)?;
            }
            st.t = t0 + j as f64 * sample_dt;
            states.push(st);
        }
        Ok(CoupledWindow { states, params, orientation: opts.orientation, resampled: false })
    }

    fn check(&self, i: usize) -> Result<()> {
        if self.resampled {
            return Err(Error::invalid("window contains a resampling; node labels are not comparable"));
        }
        check_interior(i, self.states.len())
    }

    fn shapes(&self, i: usize) -> Result<Vec<ShapeReport>> {
        (i - 1..=i + 1)
            .map(|j| self.states[j].shape(&self.params, self.orientation))
            .collect()
    }

    fn weights(&self, i: usize) -> [f64; 3] {
        centered_weights([self.states[i - 1].t, self.states[i].t, self.states[i + 1].t])
    }
}

/// `|dH/dt - (Delta H + |A|^2 H + u)|` at interior curve nodes.
pub fn residual_h(window: &CoupledWindow, i: usize) -> Result<Vec<f64>> {
    window.check(i)?;
    let s = window.shapes(i)?;
    let w = window.weights(i);
    let mid = &s[1];
    let rt = ReactionTerms::compute(mid, window.states[i].fields().rbar);
    let lap = mid.laplacian(&mid.h);
    let np = mid.h.len();
    Ok((1..np - 1)
        .map(|k| {
            let dh = w[0] * s[0].h[k] + w[1] * s[1].h[k] + w[2] * s[2].h[k];
            (dh - (lap[k] + mid.a2[k] * mid.h[k] + rt.u[k])).abs()
        })
        .collect())
}

/// `|d|A|^2/dt - (Delta |A|^2 - 2 |grad A|^2 + 2 |A|^4 + v)|` at interior nodes.
pub fn residual_a2(window: &CoupledWindow, i: usize) -> Result<Vec<f64>> {
    window.check(i)?;
    let s = window.shapes(i)?;
    let w = window.weights(i);
    let mid = &s[1];
    let rt = ReactionTerms::compute(mid, window.states[i].fields().rbar);
    let lap = mid.laplacian(&mid.a2);
    let np = mid.h.len();
    Ok((1..np - 1)
        .map(|k| {
            let da = w[0] * s[0].a2[k] + w[1] * s[1].a2[k] + w[2] * s[2].a2[k];
            let a2 = mid.a2[k];
            (da - (lap[k] - 2.0 * mid.grad_a2[k] + 2.0 * a2 * a2 + rt.v[k])).abs()
        })
        .collect())
}

/// Simons' identity for `Delta |A|^2` at interior nodes of one state.
pub fn residual_simons(state: &FlowState, params: &PinchingParams, orientation: Orientation) -> Result<Vec<f64>> {
    let s = state.shape(params, orientation)?;
    Ok(simons_terms(&s, state.fields().rbar).iter().map(|(l, r)| (l - r).abs()).collect())
}

/// `(lhs, rhs)` of Simons' identity at the interior nodes.
pub fn simons_terms(s: &ShapeReport, rbar: f64) -> Vec<(f64, f64)> {
    let nf = s.n as f64;
    let rt = ReactionTerms::compute(s, rbar);
    let lap = s.laplacian(&s.a2);
    let hs = s.deriv.ds(&s.h);
    let hss = s.deriv.dss(&s.h);
    (1..s.h.len() - 1)
        .map(|k| {
            let c = &rt.contractions[k];
            let hess_h = s.kappa_prof[k] * hss[k] + (nf - 1.0) * s.kappa_orb[k] * s.frames[k].log_rho_s * hs[k];
            let rhs = 2.0 * hess_h
                + 2.0 * s.grad_a2[k]
                + 2.0 * rt.z[k]
                + 2.0 * s.h[k] * c.rm0i0j_h
                - 2.0 * c.ric00 * s.a2[k]
                + 4.0 * c.rm_kikp_hh
                - 4.0 * c.rm_kipj_hh
                + 2.0 * c.dk_rm0ijk_h
                + 2.0 * c.di_ric0j_h;
            (lap[k], rhs)
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::ProfileCurve;
    use std::f64::consts::PI;

    #[test]
    fn centered_weights_differentiate_quadratics() {
        let t = [0.1, 0.25, 0.32];
        let w = centered_weights(t);
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let d = w[0] * f(t[0]) + w[1] * f(t[1]) + w[2] * f(t[2]);
        assert!((d - (6.0 * 0.25 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn warped_laplacian_of_first_eigenfunction() {
        // cos(pi x) on the unit round S^3 has eigenvalue -3
        let g = AmbientMetric::round(2, 1.0, 64).unwrap();
        let f: Vec<f64> = (0..=64).map(|j| (PI * g.x(j)).cos()).collect();
        let lap = warped_laplacian(&g, &f);
        for j in 0..=64 {
            assert!((lap[j] + 3.0 * f[j]).abs() < 1e-9, "{j}: {}", lap[j]);
        }
    }

    #[test]
    fn simons_on_round_umbilic_sphere() {
        let g = AmbientMetric::round(2, 1.0, 128).unwrap();
        let state = FlowState::new(0.0, g, ProfileCurve::coordinate_sphere(0.27, 128).unwrap()).unwrap();
        let params = PinchingParams::new(2, 0.1).unwrap();
        let r = residual_simons(&state, &params, Orientation::Standard).unwrap();
        assert!(max_abs(&r) < 1e-8, "{}", max_abs(&r));
    }

    #[test]
    fn rejects_boundary_samples() {
        let g = AmbientMetric::round(2, 1.0, 128).unwrap();
        let series = ambient_window(&g, 1e-5, 1).unwrap();
        assert!(residual_scalar_curvature(&series, 0).is_err());
        assert!(residual_scalar_curvature(&series, 2).is_err());
        let r = residual_scalar_curvature(&series, 1).unwrap();
        assert!(max_abs(&r) < 1e-9, "{r:?}");
    }
}
