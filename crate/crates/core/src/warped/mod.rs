//! Rotationally symmetric ambient metrics and their curvature.

pub mod curvature;
pub mod metric;
pub mod oracle;
pub mod tensor;

use std::f64::consts::PI;

use crate::error::Result;
pub use curvature::AmbientCurvature;
pub use metric::{AmbientMetric, Perturbation};

/// Outcome of testing the ambient pinching hypothesis at a given `eps0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchingReport {
    pub holds: bool,
    /// Max over nodes of `||Rm - (g (.) g)||`, distance to unit curvature.
    pub lhs_curv: f64,
    /// Max over nodes of `||nabla Rm||`.
    pub lhs_grad: f64,
}

/// Largest admissible `eps0` for dimension `n`: `1 / (4(n+1))`.
pub fn eps0_bound(n: usize) -> f64 {
    1.0 / (4.0 * (n as f64 + 1.0))
}

pub fn pinching_check(metric: &AmbientMetric, eps0: f64) -> Result<PinchingReport> {
    let c = AmbientCurvature::compute(metric)?;
    Ok(pinching_of(&c, eps0))
}

pub fn pinching_of(c: &AmbientCurvature, eps0: f64) -> PinchingReport {
    let lhs_curv = c
        .k_rad
        .iter()
        .zip(&c.k_orb)
        .map(|(&kr, &ko)| curvature::deviation_norm2(c.n, kr, ko, 1.0))
        .fold(0.0, f64::max)
        .sqrt();
    let lhs_grad = c.max_grad_rm();
    PinchingReport {
        holds: lhs_curv <= eps0 && lhs_grad <= eps0,
        lhs_curv,
        lhs_grad,
    }
}

/// Volume of the unit `n`-sphere.
pub fn sphere_volume(n: usize) -> f64 {
    let mut w = if n.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut k = if n.is_multiple_of(2) { 0 } else { 1 };
    while k < n {
        k += 2;
        w *= 2.0 * PI / (k as f64 - 1.0);
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeDiameter {
    pub volume: f64,
    pub diam: f64,
}

/// Volume, and a diameter estimate `max(L, pi max phi)`: the pole-to-pole
/// distance versus half the circumference of the widest orbit. Both are
/// lower bounds for the true diameter and agree with it on round metrics.
pub fn volume_and_diameter(metric: &AmbientMetric) -> VolumeDiameter {
    let n = metric.dim() as i32;
    let m = metric.intervals();
    let b = metric.b();
    let phi = metric.phi();
    let integral: f64 = (1..m).map(|j| b[j] * phi[j].powi(n)).sum::<f64>() * metric.dx();
    let widest = phi.iter().cloned().fold(0.0, f64::max);
    VolumeDiameter {
        volume: sphere_volume(metric.dim()) * integral,
        diam: metric.length().max(PI * widest),
    }
}
