//! Band-limited differentiation on the uniform grid `x_j = j/M`.
//!
//! Every profile function used by the ambient metric is either even or odd
//! about both poles (`x = 0` and `x = 1`). Reflecting through both poles turns
//! it into a 2-periodic function, so derivatives are taken with an FFT of
//! length `2M`. An exponential filter limits the resolved band to
//! [`DEFAULT_BAND`] modes; sampling round-off would otherwise be amplified by
//! `k^2` for every derivative taken.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Number of resolved sine/cosine modes on fine grids.
pub const DEFAULT_BAND: usize = 32;

/// Symmetry of a grid function about both poles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Resolved band for a grid of `m` intervals.
pub fn band_for(m: usize) -> usize {
    (m / 4).clamp(4, DEFAULT_BAND)
}

pub struct Spectral {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Filtered `i k pi` multipliers for d/dx, Nyquist removed.
    deriv: Vec<Complex64>,
    /// Filter weights.
    sigma: Vec<f64>,
}

impl Spectral {
    fn new(m: usize) -> Self {
        let n = 2 * m;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let band = band_for(m) as f64;
        let mut deriv = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        for idx in 0..n {
            let k = if idx <= m { idx as f64 } else { idx as f64 - n as f64 };
            let s = (-36.0 * (k.abs() / band).powi(16)).exp();
            sigma.push(s);
            if idx == m {
                deriv.push(Complex64::new(0.0, 0.0));
            } else {
                deriv.push(Complex64::new(0.0, k * PI * s));
            }
        }
        Spectral {
            m,
            forward,
            inverse,
            deriv,
            sigma,
        }
    }

    /// Shared, cached operator for `m` intervals.
    pub fn get(m: usize) -> Arc<Spectral> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Spectral>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("spectral cache poisoned");
        guard
            .entry(m)
            .or_insert_with(|| Arc::new(Spectral::new(m)))
            .clone()
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    fn extend(&self, f: &[f64], parity: Parity) -> Vec<Complex64> {
        let m = self.m;
        assert_eq!(f.len(), m + 1, "grid function has wrong length");
        let s = parity.sign();
        let mut out = Vec::with_capacity(2 * m);
        out.extend(f.iter().map(|&v| Complex64::new(v, 0.0)));
        out.extend((1..m).rev().map(|j| Complex64::new(s * f[j], 0.0)));
        out
    }

    fn apply(&self, f: &[f64], parity: Parity, mult: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let mut buf = self.extend(f, parity);
        self.forward.process(&mut buf);
        let scale = 1.0 / (2 * self.m) as f64;
        for (idx, c) in buf.iter_mut().enumerate() {
            *c *= mult(idx) * scale;
        }
        self.inverse.process(&mut buf);
        buf[..=self.m].iter().map(|c| c.re).collect()
    }

    /// Filtered d/dx. The result has the opposite parity.
    pub fn diff(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        let mut out = self.apply(f, parity, |idx| self.deriv[idx]);
        if parity == Parity::Even {
            out[0] = 0.0;
            out[self.m] = 0.0;
        }
        out
    }

    /// Removes content outside the resolved band.
    pub fn filter(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        let mut out = self.apply(f, parity, |idx| Complex64::new(self.sigma[idx], 0.0));
        if parity == Parity::Odd {
            out[0] = 0.0;
            out[self.m] = 0.0;
        }
        out
    }

    /// Antiderivative `F(x) = int_0^x (f - mean f)`, band-limited. For an odd
    /// `f` the mean is zero; for an even `f` the caller adds `mean * x`.
    pub fn antiderivative(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        let m = self.m;
        let n = 2 * m;
        let raw = self.apply(f, parity, |idx| {
            let k = if idx <= m { idx as f64 } else { idx as f64 - n as f64 };
            if idx == 0 || idx == m {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -self.sigma[idx] / (k * PI))
            }
        });
        let base = raw[0];
        raw.into_iter().map(|v| v - base).collect()
    }
}

/// Value of a parity-extended grid function at node index `i` (may be a ghost).
pub fn ghost(f: &[f64], parity: Parity, i: isize) -> f64 {
    let m = (f.len() - 1) as isize;
    let s = parity.sign();
    if i < 0 {
        s * f[(-i) as usize]
    } else if i > m {
        s * f[(2 * m - i) as usize]
    } else {
        f[i as usize]
    }
}

/// Local Lagrange interpolation of a grid function at an arbitrary `x`, using
/// `points` nodes around `x` (ghosts supplied by parity).
pub fn interpolate(f: &[f64], parity: Parity, x: f64, points: usize) -> f64 {
    Stencil::new(f.len() - 1, x, points).apply(f, parity)
}

/// Lagrange weights for one evaluation point, reusable across grid functions.
#[derive(Debug, Clone)]
pub struct Stencil {
    start: isize,
    weights: Vec<f64>,
}

impl Stencil {
    pub fn new(m: usize, x: f64, points: usize) -> Self {
        let pos = x * m as f64;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-12 {
            return Stencil { start: nearest as isize, weights: vec![1.0] };
        }
        let start = pos.floor() as isize - (points as isize / 2 - 1);
        let weights = (0..points as isize)
            .map(|a| {
                let ia = start + a;
                (0..points as isize)
                    .filter(|&c| c != a)
                    .map(|c| (pos - (start + c) as f64) / ((ia - start - c) as f64))
                    .product()
            })
            .collect();
        Stencil { start, weights }
    }

    pub fn apply(&self, f: &[f64], parity: Parity) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(a, w)| w * ghost(f, parity, self.start + a as isize))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize) -> Vec<f64> {
        (0..=m).map(|j| j as f64 / m as f64).collect()
    }

    #[test]
    fn derivative_of_sine_mode_is_exact() {
        let m = 200;
        let x = grid(m);
        let f: Vec<f64> = x.iter().map(|x| (3.0 * PI * x).sin()).collect();
        let d = Spectral::get(m).diff(&f, Parity::Odd);
        for (xi, di) in x.iter().zip(&d) {
            assert!((di - 3.0 * PI * (3.0 * PI * xi).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn derivative_of_cosine_mode_is_exact() {
        let m = 128;
        let x = grid(m);
        let f: Vec<f64> = x.iter().map(|x| 2.0 + (2.0 * PI * x).cos()).collect();
        let d = Spectral::get(m).diff(&f, Parity::Even);
        for (xi, di) in x.iter().zip(&d) {
            assert!((di + 2.0 * PI * (2.0 * PI * xi).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn antiderivative_inverts_diff() {
        let m = 100;
        let x = grid(m);
        let f: Vec<f64> = x.iter().map(|x| (PI * x).sin() + 0.3 * (2.0 * PI * x).sin()).collect();
        let big_f = Spectral::get(m).antiderivative(&f, Parity::Odd);
        for (xi, v) in x.iter().zip(&big_f) {
            let exact = (1.0 - (PI * xi).cos()) / PI + 0.3 * (1.0 - (2.0 * PI * xi).cos()) / (2.0 * PI);
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_keeps_low_modes() {
        let m = 64;
        let f: Vec<f64> = grid(m).iter().map(|x| (PI * x).sin()).collect();
        let g = Spectral::get(m).filter(&f, Parity::Odd);
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_uses_parity_ghosts() {
        let m = 50;
        let f: Vec<f64> = grid(m).iter().map(|x| (PI * x).sin()).collect();
        for &x in &[0.001, 0.013, 0.5003, 0.997] {
            let v = interpolate(&f, Parity::Odd, x, 8);
            assert!((v - (PI * x).sin()).abs() < 1e-10, "x = {x}");
        }
        assert_eq!(interpolate(&f, Parity::Odd, 0.5, 8), f[25]);
    }
}
