//! Ambient fields sampled off the grid, at the positions of curve nodes.

use crate::error::Result;
use crate::spectral::{Parity, Stencil};
use crate::warped::curvature::AmbientCurvature;
use crate::warped::metric::AmbientMetric;
use crate::warped::tensor::PointCurvature;

const STENCIL: usize = 8;

/// Grid fields needed by the hypersurface, kept with their parities.
#[derive(Debug, Clone)]
pub struct AmbientFields {
    pub n: usize,
    pub rbar: f64,
    /// `max ||E||` of the ambient metric.
    pub max_e: f64,
    b: Vec<f64>,
    bx: Vec<f64>,
    phi: Vec<f64>,
    phix: Vec<f64>,
    k_rad: Vec<f64>,
    k_orb: Vec<f64>,
    k_rad_s: Vec<f64>,
    k_orb_s: Vec<f64>,
    gap_h: Vec<f64>,
}

/// Ambient data at one point of the quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub b: f64,
    pub bx: f64,
    pub phi: f64,
    pub phix: f64,
    pub curv: PointCurvature,
}

impl AmbientFields {
    pub fn new(metric: &AmbientMetric) -> Result<Self> {
        let c = AmbientCurvature::compute(metric)?;
        Ok(Self::with_curvature(metric, &c))
    }

    pub fn with_curvature(metric: &AmbientMetric, c: &AmbientCurvature) -> Self {
        let sp = metric.spectral();
        let m = metric.intervals();
        let gap_h = (0..=m).map(|j| c.point(j).gap_h).collect();
        AmbientFields {
            n: metric.dim(),
            rbar: c.rbar,
            max_e: c.max_e(),
            b: metric.b().to_vec(),
            bx: sp.diff(metric.b(), Parity::Even),
            phi: metric.phi().to_vec(),
            phix: sp.diff(metric.phi(), Parity::Odd),
            k_rad: c.k_rad.clone(),
            k_orb: c.k_orb.clone(),
            k_rad_s: c.k_rad_s.clone(),
            k_orb_s: c.k_orb_s.clone(),
            gap_h,
        }
    }

    pub fn at(&self, x: f64) -> AmbientPoint {
        let st = Stencil::new(self.b.len() - 1, x, STENCIL);
        let ip = |f: &[f64], p: Parity| st.apply(f, p);
        AmbientPoint {
            b: ip(&self.b, Parity::Even),
            bx: ip(&self.bx, Parity::Odd),
            phi: ip(&self.phi, Parity::Odd),
            phix: ip(&self.phix, Parity::Even),
            curv: PointCurvature {
                k_rad: ip(&self.k_rad, Parity::Even),
                k_orb: ip(&self.k_orb, Parity::Even),
                k_rad_s: ip(&self.k_rad_s, Parity::Odd),
                k_orb_s: ip(&self.k_orb_s, Parity::Odd),
                gap_h: ip(&self.gap_h, Parity::Odd),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_fields_off_grid() {
        let g = AmbientMetric::round(2, 1.0, 200).unwrap();
        let f = AmbientFields::new(&g).unwrap();
        for &x in &[0.0013, 0.31, 0.5, 0.777, 0.9991] {
            let p = f.at(x);
            assert!((p.phi - (PI * x).sin()).abs() < 1e-12);
            assert!((p.phix - PI * (PI * x).cos()).abs() < 1e-10);
            assert!((p.b - PI).abs() < 1e-13 && p.bx.abs() < 1e-10);
            assert!((p.curv.k_rad - 1.0).abs() < 1e-9 && (p.curv.k_orb - 1.0).abs() < 1e-9);
        }
    }
}
