//! Residual suites on the double fixed point and on generic refinement runs.

use crate::error::Result;
use crate::hypersurface::curve::{uniform_alpha, ProfileCurve, Topology};
use crate::hypersurface::flow::{FlowState, StepOptions};
use crate::hypersurface::shape::{Orientation, PinchingParams};
use crate::par;
use crate::verify::order::convergence_order;
use crate::verify::report::CheckRow;
use crate::verify::residual::{
    ambient_window, max_abs, residual_a2, residual_h, residual_scalar_curvature, residual_simons, substeps_for,
    CoupledWindow,
};
use crate::warped::oracle::frame_oracle;
use crate::warped::tensor::{riemann, riemann_derivative};
use crate::warped::{AmbientCurvature, AmbientMetric, Perturbation};

pub const FIXED_POINT_TOL: f64 = 1e-9;
pub const MIN_ORDER: f64 = 1.8;
pub const MIN_SIMONS_ORDER: f64 = 1.5;
pub const ORACLE_ROUND_TOL: f64 = 1e-10;
/// Grid for the round oracle comparison. The oracle differentiates
/// numerically, so its roundoff floor rises with `M`.
pub const ORACLE_ROUND_M: usize = 200;
pub const REFINEMENT_LEVELS: [usize; 3] = [100, 200, 400];

/// Residual sample spacing per unit of grid spacing.
const SAMPLE_DT_PER_DX: f64 = 0.1;
/// Fraction of the CFL limit used for window substeps.
const WINDOW_CFL_FRACTION: f64 = 0.9;

pub const RESIDUAL_NAMES: [&str; 4] = ["residual_scalar_curvature", "residual_h", "residual_a2", "residual_simons"];

/// Max residuals, in the order of `RESIDUAL_NAMES`, of a short window started
/// from `metric` and `curve`.
pub fn residual_maxima(metric: &AmbientMetric, curve: ProfileCurve, params: PinchingParams) -> Result<[f64; 4]> {
    let opts = StepOptions::default();
    let sample_dt = SAMPLE_DT_PER_DX * metric.dx();
    let state = FlowState::new(0.0, metric.clone(), curve)?;
    let q = substeps_for(sample_dt, WINDOW_CFL_FRACTION * state.ambient_dt(&opts));
    let series = ambient_window(metric, sample_dt, q)?;
    let r = max_abs(&residual_scalar_curvature(&series, 1)?);
    let win = CoupledWindow::run(state, sample_dt, q, &opts, params)?;
    let h = max_abs(&residual_h(&win, 1)?);
    let a2 = max_abs(&residual_a2(&win, 1)?);
    let s = max_abs(&residual_simons(&win.states[1], &params, Orientation::Standard)?);
    Ok([r, h, a2, s])
}

/// Round unit ambient and the equator at `m` grid intervals and curve segments.
pub fn fixed_point_suite(n: usize, m: usize) -> Result<Vec<CheckRow>> {
    let metric = AmbientMetric::round(n, 1.0, m)?;
    let curve = ProfileCurve::coordinate_sphere(0.5, m)?;
    let r = residual_maxima(&metric, curve, PinchingParams::new(n, 0.1)?)?;
    Ok(RESIDUAL_NAMES
        .iter()
        .zip(r)
        .map(|(name, v)| CheckRow::new(format!("fixed_point.{name}"), v, None, v <= FIXED_POINT_TOL))
        .collect())
}

/// Generic test case: a perturbed ambient and a non-symmetric curve near the
/// equator, neither umbilic nor totally geodesic.
pub fn generic_case(n: usize, m: usize) -> Result<(AmbientMetric, ProfileCurve)> {
    let p = Perturbation { amp_phi: 0.01, mode_phi: 3, amp_b: 0.005, mode_b: 2 };
    let metric = AmbientMetric::perturbed(n, 1.0, m, p)?;
    let alpha = uniform_alpha(m);
    let x = alpha
        .iter()
        .map(|a| {
            let c = a.cos();
            0.5 + 0.04 * c + 0.015 * (5.0 * c * c * c - 3.0 * c)
        })
        .collect();
    Ok((metric, ProfileCurve::new(x, alpha, Topology::Sphere)?))
}

/// Observed orders of the four residuals on generic runs at `levels`.
pub fn refinement_suite(n: usize, levels: &[usize]) -> Result<Vec<CheckRow>> {
    let params = PinchingParams::new(n, 0.1)?;
    let maxima = par::map_items(levels, |&m| {
        let (g, c) = generic_case(n, m)?;
        residual_maxima(&g, c, params)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(RESIDUAL_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let seq: Vec<f64> = maxima.iter().map(|r| r[i]).collect();
            let need = if i == 3 { MIN_SIMONS_ORDER } else { MIN_ORDER };
            let last = *seq.last().unwrap();
            match convergence_order(levels, &seq) {
                Ok(s) => CheckRow::new(format!("refinement.{name}"), last, Some(s.order()), s.order() >= need),
                Err(_) => CheckRow::new(format!("refinement.{name}"), last, None, false),
            }
        })
        .collect())
}

/// Largest componentwise gap between the closed-form curvature tensors and
/// the frame oracle (`n = 2`), over nodes at least `M/10` from the poles.
pub fn oracle_gap(metric: &AmbientMetric) -> Result<f64> {
    let c = AmbientCurvature::compute(metric)?;
    let m = metric.intervals();
    let r = [1.0, 0.0, 0.0];
    let gaps = par::map_indices(m - 2 * (m / 10) + 1, |i| -> Result<f64> {
        let j = m / 10 + i;
        let o = frame_oracle(metric, j)?;
        let p = c.point(j);
        let rm = riemann(&r, &p);
        let drm = riemann_derivative(&r, &p);
        let mut gap = (c.r[j] - o.scalar()).abs().max((c.ric2[j] - o.ric2()).abs());
        for (a, b) in rm.data.iter().zip(&o.rm.data).chain(drm.data.iter().zip(&o.drm.data)) {
            gap = gap.max((a - b).abs());
        }
        Ok(gap)
    });
    gaps.into_iter().try_fold(0.0, |acc, g| Ok(f64::max(acc, g?)))
}

/// Oracle agreement on the round metric and its order on a perturbed one.
pub fn oracle_suite(levels: &[usize]) -> Result<Vec<CheckRow>> {
    let round = oracle_gap(&AmbientMetric::round(2, 1.0, ORACLE_ROUND_M)?)?;
    let p = Perturbation { amp_phi: 0.04, mode_phi: 3, amp_b: 0.03, mode_b: 2 };
    let seq = levels
        .iter()
        .map(|&m| oracle_gap(&AmbientMetric::perturbed(2, 1.0, m, p)?))
        .collect::<Result<Vec<f64>>>()?;
    let last = seq.last().copied().unwrap_or(f64::NAN);
    let order_row = match convergence_order(levels, &seq) {
        Ok(s) => CheckRow::new("oracle.perturbed", last, Some(s.order()), s.order() >= MIN_ORDER),
        Err(_) => CheckRow::new("oracle.perturbed", last, None, false),
    };
    Ok(vec![CheckRow::new("oracle.round", round, None, round <= ORACLE_ROUND_TOL), order_row])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_passes_at_modest_resolution() {
        for row in fixed_point_suite(2, 64).unwrap() {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn generic_case_is_far_from_the_fixed_point() {
        let (g, c) = generic_case(2, 100).unwrap();
        let r = residual_maxima(&g, c, PinchingParams::new(2, 0.1).unwrap()).unwrap();
        // coarse grid: residuals are discretization-sized, not roundoff
        assert!(r.iter().all(|&v| v > 1e-6), "{r:?}");
    }
}
