//! Pointwise curvature of `b^2 dx^2 + phi^2 g_{S^n}`.
//!
//! In the orthonormal frame `(d_s, orbit directions)` the curvature operator is
//! diagonal with two sectional curvatures:
//!
//! * `K_rad = -phi_ss / phi` for planes containing `d_s` (multiplicity `n`),
//! * `K_orb = (1 - phi_s^2) / phi^2` for planes tangent to the orbit
//!   (multiplicity `n(n-1)/2`).
//!
//! `K_orb` is evaluated through `1 - phi_s^2 = int 2 phi phi_s K_rad ds`,
//! integrated from the nearer pole. This is the same quantity for pole-smooth
//! profiles but avoids the `0/0` cancellation next to the poles.

use crate::error::{Error, Result};
use crate::spectral::Parity;
use crate::warped::metric::AmbientMetric;
use crate::warped::tensor::PointCurvature;

/// Relative mismatch between the direct and integrated `K_orb` at the
/// equator above which the profile is declared non-smooth at a pole.
pub const POLE_CONSISTENCY_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct AmbientCurvature {
    pub n: usize,
    pub k_rad: Vec<f64>,
    pub k_orb: Vec<f64>,
    pub ric_rad: Vec<f64>,
    pub ric_orb: Vec<f64>,
    pub r: Vec<f64>,
    pub rm2: Vec<f64>,
    pub ric2: Vec<f64>,
    pub e2: Vec<f64>,
    pub grad_rm2: Vec<f64>,
    pub rbar: f64,
    /// `phi_s`.
    pub phi_s: Vec<f64>,
    /// `phi_s / phi`, the umbilic curvature of the orbit spheres (infinite at poles).
    pub orbit_mc: Vec<f64>,
    pub k_rad_s: Vec<f64>,
    pub k_orb_s: Vec<f64>,
    /// Unnormalized volume density `b phi^n` per node.
    pub density: Vec<f64>,
}

/// `||Rm||^2` of a curvature operator with the warped-product spectrum.
pub fn rm_norm2(n: usize, k_rad: f64, k_orb: f64) -> f64 {
    let nf = n as f64;
    4.0 * (nf * k_rad * k_rad + 0.5 * nf * (nf - 1.0) * k_orb * k_orb)
}

/// `||Rm - c (g (.) g)||^2`, i.e. distance to constant curvature `c`.
pub fn deviation_norm2(n: usize, k_rad: f64, k_orb: f64, c: f64) -> f64 {
    rm_norm2(n, k_rad - c, k_orb - c)
}

pub fn scalar(n: usize, k_rad: f64, k_orb: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf * k_rad + nf * (nf - 1.0) * k_orb
}

/// `||nabla Rm||^2` from the radial derivatives of the sectional curvatures
/// and the orbit curvature `h = phi_s / phi`.
pub fn grad_rm_norm2(n: usize, k_rad_s: f64, k_orb_s: f64, h: f64, k_rad: f64, k_orb: f64) -> f64 {
    let nf = n as f64;
    let gap = k_rad - k_orb;
    4.0 * nf * k_rad_s * k_rad_s
        + 2.0 * nf * (nf - 1.0) * k_orb_s * k_orb_s
        + 8.0 * nf * (nf - 1.0) * h * h * gap * gap
}

/// Sectional curvatures and `phi_s` per node, the minimum needed to evolve.
#[derive(Debug, Clone)]
pub struct Sectional {
    pub k_rad: Vec<f64>,
    pub k_orb: Vec<f64>,
    pub phi_s: Vec<f64>,
}

pub fn sectional(metric: &AmbientMetric) -> Result<Sectional> {
    let m = metric.intervals();
    let sp = metric.spectral();
    let b = metric.b();
    let phi = metric.phi();
    let phi_x = sp.diff(phi, Parity::Odd);
    let phi_s: Vec<f64> = phi_x.iter().zip(b).map(|(d, b)| d / b).collect();
    let phi_ss: Vec<f64> = sp.diff(&phi_s, Parity::Even).iter().zip(b).map(|(d, b)| d / b).collect();
    let phi_sss: Vec<f64> = sp.diff(&phi_ss, Parity::Odd).iter().zip(b).map(|(d, b)| d / b).collect();

    let mut k_rad = vec![0.0; m + 1];
    for j in 1..m {
        k_rad[j] = -phi_ss[j] / phi[j];
    }
    k_rad[0] = -phi_sss[0] / phi_s[0];
    k_rad[m] = -phi_sss[m] / phi_s[m];

    // d/dx (1 - phi_s^2) = 2 phi phi_s K_rad b
    let source: Vec<f64> = (0..=m).map(|j| 2.0 * phi[j] * phi_s[j] * k_rad[j] * b[j]).collect();
    let from_left = sp.antiderivative(&source, Parity::Odd);
    let total = from_left[m];
    let mut k_orb = vec![0.0; m + 1];
    for j in 1..m {
        let gap = if 2 * j <= m { from_left[j] } else { from_left[j] - total };
        k_orb[j] = gap / (phi[j] * phi[j]);
    }
    k_orb[0] = k_rad[0];
    k_orb[m] = k_rad[m];

    let mid = m / 2;
    let direct = (1.0 - phi_s[mid] * phi_s[mid]) / (phi[mid] * phi[mid]);
    if !k_orb.iter().chain(&k_rad).all(|v| v.is_finite())
        || (direct - k_orb[mid]).abs() > POLE_CONSISTENCY_TOL * (1.0 + direct.abs())
    {
        return Err(Error::PoleSingularity(format!(
            "orbit curvature limits disagree (direct {direct}, integrated {})",
            k_orb[mid]
        )));
    }

    Ok(Sectional { k_rad, k_orb, phi_s })
}

/// Average of `f` against the volume density `b phi^n` (trapezoid rule; the
/// density vanishes at both poles).
pub fn weighted_mean(density: &[f64], f: &[f64]) -> f64 {
    let mass: f64 = density.iter().sum();
    density.iter().zip(f).map(|(w, v)| w * v).sum::<f64>() / mass
}

/// Volume-weighted average of the scalar curvature.
pub fn average_scalar(metric: &AmbientMetric, k_rad: &[f64], k_orb: &[f64]) -> f64 {
    let n = metric.dim();
    let density: Vec<f64> = metric.b().iter().zip(metric.phi()).map(|(b, p)| b * p.powi(n as i32)).collect();
    let r: Vec<f64> = k_rad.iter().zip(k_orb).map(|(&kr, &ko)| scalar(n, kr, ko)).collect();
    weighted_mean(&density, &r)
}

impl AmbientCurvature {
    pub fn compute(metric: &AmbientMetric) -> Result<Self> {
        let n = metric.dim();
        let nf = n as f64;
        let m = metric.intervals();
        let sp = metric.spectral();
        let b = metric.b();
        let phi = metric.phi();
        let Sectional { k_rad, k_orb, phi_s } = sectional(metric)?;

        let ric_rad: Vec<f64> = k_rad.iter().map(|k| nf * k).collect();
        let ric_orb: Vec<f64> = k_rad.iter().zip(&k_orb).map(|(kr, ko)| kr + (nf - 1.0) * ko).collect();
        let r: Vec<f64> = k_rad.iter().zip(&k_orb).map(|(&kr, &ko)| scalar(n, kr, ko)).collect();
        let rm2: Vec<f64> = k_rad.iter().zip(&k_orb).map(|(&kr, &ko)| rm_norm2(n, kr, ko)).collect();
        let ric2: Vec<f64> = ric_rad.iter().zip(&ric_orb).map(|(a, o)| a * a + nf * o * o).collect();

        let density: Vec<f64> = (0..=m).map(|j| b[j] * phi[j].powi(n as i32)).collect();
        let rbar = weighted_mean(&density, &r);
        let kbar = rbar / (nf * (nf + 1.0));
        let e2: Vec<f64> = k_rad
            .iter()
            .zip(&k_orb)
            .map(|(&kr, &ko)| deviation_norm2(n, kr, ko, kbar))
            .collect();

        let k_rad_s: Vec<f64> = sp.diff(&k_rad, Parity::Even).iter().zip(b).map(|(d, b)| d / b).collect();
        let k_orb_s: Vec<f64> = sp.diff(&k_orb, Parity::Even).iter().zip(b).map(|(d, b)| d / b).collect();
        let mut orbit_mc = vec![f64::INFINITY; m + 1];
        for j in 1..m {
            orbit_mc[j] = phi_s[j] / phi[j];
        }
        orbit_mc[m] = f64::NEG_INFINITY;
        let mut grad_rm2 = vec![0.0; m + 1];
        for j in 1..m {
            grad_rm2[j] = grad_rm_norm2(n, k_rad_s[j], k_orb_s[j], orbit_mc[j], k_rad[j], k_orb[j]);
        }

        Ok(AmbientCurvature {
            n,
            k_rad,
            k_orb,
            ric_rad,
            ric_orb,
            r,
            rm2,
            ric2,
            e2,
            grad_rm2,
            rbar,
            phi_s,
            orbit_mc,
            k_rad_s,
            k_orb_s,
            density,
        })
    }

    /// Dense-tensor input at node `j`.
    pub fn point(&self, j: usize) -> PointCurvature {
        let last = self.k_rad.len() - 1;
        let gap_h = if j == 0 || j == last {
            0.0
        } else {
            (self.k_rad[j] - self.k_orb[j]) * self.orbit_mc[j]
        };
        PointCurvature {
            k_rad: self.k_rad[j],
            k_orb: self.k_orb[j],
            k_rad_s: self.k_rad_s[j],
            k_orb_s: self.k_orb_s[j],
            gap_h,
        }
    }

    /// Curvature scale `rbar / (n(n+1))` of the round metric with the same `rbar`.
    pub fn kbar(&self) -> f64 {
        let nf = self.n as f64;
        self.rbar / (nf * (nf + 1.0))
    }

    pub fn max_e(&self) -> f64 {
        self.e2.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    pub fn max_grad_rm(&self) -> f64 {
        self.grad_rm2.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    pub fn max_r(&self) -> f64 {
        self.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `||R°m||^2 = ||Rm||^2 - 2 R^2 / (n(n+1))` per node.
    pub fn traceless_rm2(&self) -> Vec<f64> {
        let nf = self.n as f64;
        self.rm2
            .iter()
            .zip(&self.r)
            .map(|(rm2, r)| rm2 - 2.0 * r * r / (nf * (nf + 1.0)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::metric::Perturbation;

    #[test]
    fn unit_round_n2() {
        let g = AmbientMetric::round(2, 1.0, 200).unwrap();
        let c = AmbientCurvature::compute(&g).unwrap();
        for j in 0..=200 {
            assert!((c.k_rad[j] - 1.0).abs() < 1e-10, "K_rad[{j}] = {}", c.k_rad[j]);
            assert!((c.k_orb[j] - 1.0).abs() < 1e-10, "K_orb[{j}] = {}", c.k_orb[j]);
            assert!((c.r[j] - 6.0).abs() < 1e-9);
            assert!((c.rm2[j] - 12.0).abs() < 1e-9);
            assert!((c.ric2[j] - 12.0).abs() < 1e-9);
            assert!(c.e2[j] < 1e-18);
        }
        assert!((c.rbar - 6.0).abs() < 1e-11);
    }

    #[test]
    fn radius_two_round() {
        let g = AmbientMetric::round(2, 2.0, 200).unwrap();
        let c = AmbientCurvature::compute(&g).unwrap();
        for j in 0..=200 {
            assert!((c.k_rad[j] - 0.25).abs() < 1e-10);
            assert!((c.k_orb[j] - 0.25).abs() < 1e-10);
            assert!((c.r[j] - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn round_n3_scalar_curvature() {
        let g = AmbientMetric::round(3, 1.0, 200).unwrap();
        let c = AmbientCurvature::compute(&g).unwrap();
        assert!(c.r.iter().all(|r| (r - 12.0).abs() < 1e-9));
    }

    #[test]
    fn round_nullity_at_400() {
        let g = AmbientMetric::round(2, 1.0, 400).unwrap();
        let c = AmbientCurvature::compute(&g).unwrap();
        assert!(c.e2.iter().all(|v| *v <= 1e-10));
        assert!(c.grad_rm2.iter().all(|v| *v <= 1e-10), "{:e}", c.max_grad_rm());
    }

    #[test]
    fn trace_identities_on_perturbed_profiles() {
        for n in 2..=4 {
            let p = Perturbation { amp_phi: 0.05, mode_phi: 3, amp_b: 0.03, mode_b: 2 };
            let g = AmbientMetric::perturbed(n, 1.0, 128, p).unwrap();
            let c = AmbientCurvature::compute(&g).unwrap();
            let nf = n as f64;
            for j in 0..=128 {
                let r = 2.0 * nf * c.k_rad[j] + nf * (nf - 1.0) * c.k_orb[j];
                assert!((r - c.r[j]).abs() < 1e-12);
                assert!(c.rm2[j] >= 2.0 * c.r[j] * c.r[j] / (nf * (nf + 1.0)) - 1e-12);
                // expansion of ||Rm - kbar G||^2
                let k = c.kbar();
                let e2 = c.rm2[j] - 4.0 * k * c.r[j] + 2.0 * nf * (nf + 1.0) * k * k;
                assert!((e2 - c.e2[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn direct_orbit_formula_agrees_away_from_poles() {
        let g = AmbientMetric::perturbed(2, 1.0, 256, Perturbation::phi_only(0.08, 2)).unwrap();
        let c = AmbientCurvature::compute(&g).unwrap();
        for j in 32..=224 {
            let direct = (1.0 - c.phi_s[j] * c.phi_s[j]) / (g.phi()[j] * g.phi()[j]);
            // both are band-limited approximations; they differ by filter truncation
            assert!((direct - c.k_orb[j]).abs() < 1e-7, "j={j}");
        }
    }

    #[test]
    fn scaling_covariance() {
        let p = Perturbation { amp_phi: 0.04, mode_phi: 2, amp_b: 0.02, mode_b: 4 };
        let g = AmbientMetric::perturbed(2, 1.0, 128, p).unwrap();
        let c1 = AmbientCurvature::compute(&g).unwrap();
        let c3 = AmbientCurvature::compute(&g.scaled(3.0)).unwrap();
        for j in 0..=128 {
            assert!((c3.k_rad[j] * 9.0 - c1.k_rad[j]).abs() < 1e-10);
            assert!((c3.k_orb[j] * 9.0 - c1.k_orb[j]).abs() < 1e-10);
            assert!((c3.r[j] * 9.0 - c1.r[j]).abs() < 1e-9);
        }
    }
}
