use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectral::{Parity, Spectral};

pub const PROFILE_FORMAT_VERSION: &str = "1";

/// Coarsest grid for which pole stencils make sense.
pub const MIN_INTERVALS: usize = 16;

/// Tolerance on the pole slope `|phi_s -+ 1|`.
pub const POLE_SLOPE_TOL: f64 = 0.1;

/// Rotationally symmetric metric `b(x)^2 dx^2 + phi(x)^2 g_{S^n}` on
/// `S^{n+1}`, sampled at `x_j = j/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientMetric {
    n: usize,
    b: Vec<f64>,
    phi: Vec<f64>,
}

/// Smooth deformation of a round profile. Both bumps carry a `sin^2(pi x)`
/// factor, so they vanish to second order at the poles and the pole slopes
/// stay exactly `+-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub amp_phi: f64,
    pub mode_phi: u32,
    pub amp_b: f64,
    pub mode_b: u32,
}

impl Perturbation {
    pub fn phi_only(amp: f64, mode: u32) -> Self {
        Perturbation {
            amp_phi: amp,
            mode_phi: mode,
            amp_b: 0.0,
            mode_b: 2,
        }
    }

    /// Whether the deformed metric is symmetric under `x -> 1 - x`.
    pub fn is_reflection_symmetric(&self) -> bool {
        (self.amp_phi == 0.0 || self.mode_phi.is_multiple_of(2)) && (self.amp_b == 0.0 || self.mode_b.is_multiple_of(2))
    }
}

impl AmbientMetric {
    pub fn new(n: usize, b: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let metric = AmbientMetric { n, b, phi };
        metric.validate()?;
        Ok(metric)
    }

    pub(crate) fn from_parts_unchecked(n: usize, b: Vec<f64>, phi: Vec<f64>) -> Self {
        AmbientMetric { n, b, phi }
    }

    /// Round metric of the given radius: `phi = radius sin(pi x)`, `b = pi radius`.
    pub fn round(n: usize, radius: f64, m: usize) -> Result<Self> {
        Self::perturbed(n, radius, m, Perturbation::phi_only(0.0, 2))
    }

    pub fn perturbed(n: usize, radius: f64, m: usize, p: Perturbation) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("dimension n = {n} must be at least 2")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("radius {radius} must be positive")));
        }
        if m < MIN_INTERVALS {
            return Err(Error::invalid(format!(
                "grid too coarse for pole stencils: M = {m} < {MIN_INTERVALS}"
            )));
        }
        let mut b = Vec::with_capacity(m + 1);
        let mut phi = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let x = j as f64 / m as f64;
            let s = (PI * x).sin();
            let bump_phi = p.amp_phi * s * s * (p.mode_phi as f64 * PI * x).cos();
            let bump_b = p.amp_b * s * s * (p.mode_b as f64 * PI * x).cos();
            b.push(PI * radius * (1.0 + bump_b));
            phi.push(radius * s * (1.0 + bump_phi));
        }
        phi[0] = 0.0;
        phi[m] = 0.0;
        Self::new(n, b, phi)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.intervals();
        if self.n < 2 {
            return Err(Error::invalid(format!("dimension n = {} must be at least 2", self.n)));
        }
        if self.b.len() != self.phi.len() {
            return Err(Error::invalid("b and phi have different lengths"));
        }
        if m < MIN_INTERVALS {
            return Err(Error::invalid(format!(
                "grid too coarse for pole stencils: M = {m} < {MIN_INTERVALS}"
            )));
        }
        if self.phi[0] != 0.0 || self.phi[m] != 0.0 {
            return Err(Error::invalid("phi must vanish exactly at both poles"));
        }
        if let Some(j) = (1..m).find(|&j| !(self.phi[j] > 0.0)) {
            return Err(Error::invalid(format!("phi[{j}] = {} is not positive", self.phi[j])));
        }
        if let Some(j) = (0..=m).find(|&j| !(self.b[j] > 0.0) || !self.b[j].is_finite()) {
            return Err(Error::invalid(format!("b[{j}] = {} is not positive", self.b[j])));
        }
        let (lo, hi) = self.pole_slopes();
        if (lo - 1.0).abs() > POLE_SLOPE_TOL || (hi + 1.0).abs() > POLE_SLOPE_TOL {
            return Err(Error::PoleSingularity(format!(
                "pole slopes phi_s = ({lo}, {hi}), expected (+1, -1)"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of grid intervals `M`.
    pub fn intervals(&self) -> usize {
        self.b.len() - 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.intervals() as f64
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn spectral(&self) -> std::sync::Arc<Spectral> {
        Spectral::get(self.intervals())
    }

    /// `phi_s = phi_x / b` at both poles.
    pub fn pole_slopes(&self) -> (f64, f64) {
        let m = self.intervals();
        let phi_x = self.spectral().diff(&self.phi, Parity::Odd);
        (phi_x[0] / self.b[0], phi_x[m] / self.b[m])
    }

    /// Smallest arclength spacing `b_j dx`.
    pub fn min_spacing(&self) -> f64 {
        self.b.iter().cloned().fold(f64::INFINITY, f64::min) * self.dx()
    }

    /// Total pole-to-pole arclength `int_0^1 b dx` (trapezoid rule on an even
    /// periodic function, hence spectrally accurate).
    pub fn length(&self) -> f64 {
        let m = self.intervals();
        let inner: f64 = self.b[1..m].iter().sum();
        (inner + 0.5 * (self.b[0] + self.b[m])) * self.dx()
    }

    /// Arclength from the `x = 0` pole to every node.
    pub fn arclength(&self) -> Vec<f64> {
        let mean = self.length();
        let wiggle = self.spectral().antiderivative(&self.b, Parity::Even);
        wiggle
            .iter()
            .enumerate()
            .map(|(j, w)| w + mean * self.x(j))
            .collect()
    }

    /// Multiplies every length by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        AmbientMetric {
            n: self.n,
            b: self.b.iter().map(|v| v * c).collect(),
            phi: self.phi.iter().map(|v| v * c).collect(),
        }
    }

    /// Plain-text export: header `n M version`, then `x b phi` per node.
    pub fn to_text(&self) -> String {
        let m = self.intervals();
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.n, m, PROFILE_FORMAT_VERSION).unwrap();
        for j in 0..=m {
            writeln!(out, "{:.17e} {:.17e} {:.17e}", self.x(j), self.b[j], self.phi[j]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::Truncated("empty profile".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: hline + 1,
                msg: "expected header `n M version`".into(),
            });
        }
        if fields[2] != PROFILE_FORMAT_VERSION {
            return Err(Error::Version {
                expected: PROFILE_FORMAT_VERSION.into(),
                found: fields[2].into(),
            });
        }
        let n: usize = parse_field(fields[0], hline)?;
        let m: usize = parse_field(fields[1], hline)?;
        let mut b = Vec::with_capacity(m + 1);
        let mut phi = Vec::with_capacity(m + 1);
        for (idx, line) in lines {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected `x b phi`".into(),
                });
            }
            b.push(parse_field::<f64>(cols[1], idx)?);
            phi.push(parse_field::<f64>(cols[2], idx)?);
        }
        if b.len() != m + 1 {
            return Err(Error::Truncated(format!("expected {} nodes, found {}", m + 1, b.len())));
        }
        AmbientMetric::new(n, b, phi)
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line_idx: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line: line_idx + 1,
        msg: format!("cannot parse `{s}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_profile_values() {
        let g = AmbientMetric::round(2, 1.0, 200).unwrap();
        for j in 0..=200 {
            assert!((g.phi()[j] - (PI * g.x(j)).sin()).abs() < 1e-15);
            assert_eq!(g.b()[j], PI);
        }
        let (lo, hi) = g.pole_slopes();
        assert!((lo - 1.0).abs() < 1e-12 && (hi + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(matches!(AmbientMetric::round(2, 1.0, 15), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_kinked_pole() {
        let mut g = AmbientMetric::round(2, 1.0, 64).unwrap();
        for v in g.b.iter_mut() {
            *v *= 2.0;
        }
        assert!(matches!(g.validate(), Err(Error::PoleSingularity(_))));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let g = AmbientMetric::perturbed(3, 1.2, 64, Perturbation::phi_only(0.01, 2)).unwrap();
        let text = g.to_text();
        let back = AmbientMetric::from_text(&text).unwrap();
        assert_eq!(g, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn rejects_wrong_version() {
        let text = AmbientMetric::round(2, 1.0, 32).unwrap().to_text().replacen(" 1\n", " 9\n", 1);
        assert!(matches!(AmbientMetric::from_text(&text), Err(Error::Version { .. })));
    }

    #[test]
    fn arclength_of_round_is_linear() {
        let g = AmbientMetric::round(2, 2.0, 100).unwrap();
        let s = g.arclength();
        for j in 0..=100 {
            assert!((s[j] - 2.0 * PI * g.x(j)).abs() < 1e-12);
        }
        assert!((g.length() - 2.0 * PI).abs() < 1e-13);
    }
}
