//! Brute-force curvature of the 3-dimensional coordinate metric
//! `diag(b^2, phi^2, phi^2 sin^2 alpha)` in coordinates `(x, alpha, beta)`.
//!
//! Metric derivatives come from finite differences on the grid in `x` and on
//! a fixed step in `alpha`; Christoffel symbols, the Riemann tensor and its
//! covariant derivative are assembled from the textbook coordinate formulas
//! and then orthonormalized. Stencils are trigonometrically fitted so that
//! round metrics (whose coefficients are trigonometric polynomials of
//! frequency `2 pi` and `4 pi` in `x`, and `2` in `alpha`) are reproduced
//! exactly; on other profiles the error is `O(dx^2)`.

use crate::error::{Error, Result};
use crate::warped::metric::AmbientMetric;
use crate::warped::tensor::{Riemann, RiemannDerivative};
use std::f64::consts::PI;

/// Polar angle at which the coordinate computation is carried out.
pub const ALPHA0: f64 = 1.0;
const ALPHA_STEP: f64 = 0.1;
/// Grid stride of the `x` stencils. Two intervals instead of one quarters the
/// round-off amplification of the second differences.
pub const STRIDE: usize = 2;
/// Nodes closer than this to a pole cannot host the oracle stencil.
pub const MIN_POLE_DISTANCE: usize = 3 * STRIDE;

/// Orthonormal-frame tensors at one grid node; frame index 0 is `d_s`.
#[derive(Debug, Clone)]
pub struct FrameOracle {
    pub rm: Riemann,
    pub ric: [[f64; 3]; 3],
    pub drm: RiemannDerivative,
}

impl FrameOracle {
    pub fn k_rad(&self) -> f64 {
        self.rm.get(0, 1, 0, 1)
    }

    pub fn k_orb(&self) -> f64 {
        self.rm.get(1, 2, 1, 2)
    }

    pub fn scalar(&self) -> f64 {
        (0..3).map(|a| self.ric[a][a]).sum()
    }

    pub fn ric2(&self) -> f64 {
        self.ric.iter().flatten().map(|v| v * v).sum()
    }
}

/// 3-point weights exact on `{1, cos wt, sin wt}`: first and second derivative.
fn fitted3(omega: f64, h: f64) -> (f64, f64) {
    let first = omega / (2.0 * (omega * h).sin());
    let second = omega * omega / (2.0 - 2.0 * (omega * h).cos());
    (first, second)
}

/// Antisymmetric 5-point first-derivative weights exact on `sin(w t)` for
/// `w in {w1, w2}`: `f' = a1 (f1 - f_-1) + a2 (f2 - f_-2)`.
fn fitted5(w1: f64, w2: f64, h: f64) -> (f64, f64) {
    let (a11, a12) = (2.0 * (w1 * h).sin(), 2.0 * (2.0 * w1 * h).sin());
    let (a21, a22) = (2.0 * (w2 * h).sin(), 2.0 * (2.0 * w2 * h).sin());
    let det = a11 * a22 - a12 * a21;
    ((w1 * a22 - w2 * a12) / det, (a11 * w2 - a21 * w1) / det)
}

type Diag = [f64; 3];
type Sym = [[[f64; 3]; 3]; 3];
type R4 = [[[[f64; 3]; 3]; 3]; 3];

struct Coords<'a> {
    b: &'a [f64],
    phi: &'a [f64],
    x1: f64,
    x2: f64,
    a1: f64,
    a2: f64,
}

impl Coords<'_> {
    fn metric(&self, j: usize, alpha: f64) -> Diag {
        let p2 = self.phi[j] * self.phi[j];
        [self.b[j] * self.b[j], p2, p2 * alpha.sin().powi(2)]
    }

    /// Metric, first derivatives `dg[c][a]` (= d_c g_aa), second derivatives
    /// `ddg[c][e][a]`, at node `j` and angle `alpha`.
    fn jet(&self, j: usize, alpha: f64) -> (Diag, [Diag; 3], [[Diag; 3]; 3]) {
        let h = ALPHA_STEP;
        let g = self.metric(j, alpha);
        let gxp = self.metric(j + STRIDE, alpha);
        let gxm = self.metric(j - STRIDE, alpha);
        let gap = self.metric(j, alpha + h);
        let gam = self.metric(j, alpha - h);
        let gpp = self.metric(j + STRIDE, alpha + h);
        let gpm = self.metric(j + STRIDE, alpha - h);
        let gmp = self.metric(j - STRIDE, alpha + h);
        let gmm = self.metric(j - STRIDE, alpha - h);
        let mut dg = [[0.0; 3]; 3];
        let mut ddg = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            dg[0][a] = self.x1 * (gxp[a] - gxm[a]);
            dg[1][a] = self.a1 * (gap[a] - gam[a]);
            ddg[0][0][a] = self.x2 * (gxp[a] - 2.0 * g[a] + gxm[a]);
            ddg[1][1][a] = self.a2 * (gap[a] - 2.0 * g[a] + gam[a]);
            let mixed = self.x1 * self.a1 * (gpp[a] - gpm[a] - gmp[a] + gmm[a]);
            ddg[0][1][a] = mixed;
            ddg[1][0][a] = mixed;
        }
        (g, dg, ddg)
    }

    /// `Gamma^a_{bc}` for a diagonal metric.
    fn christoffel(g: &Diag, dg: &[Diag; 3]) -> Sym {
        let mut gam = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    // Gamma_{a bc} = (d_b g_ac + d_c g_ab - d_a g_bc) / 2, diagonal g
                    let mut low = 0.0;
                    if a == c {
                        low += dg[b][a];
                    }
                    if a == b {
                        low += dg[c][a];
                    }
                    if b == c {
                        low -= dg[a][b];
                    }
                    gam[a][b][c] = 0.5 * low / g[a];
                }
            }
        }
        gam
    }

    /// Fully covariant Riemann tensor with `R(a,b,a,b) = K g_aa g_bb`.
    fn riemann(&self, j: usize, alpha: f64) -> (R4, Diag, Sym) {
        let (g, dg, ddg) = self.jet(j, alpha);
        let gam = Self::christoffel(&g, &dg);
        // d_e d_f g_ab for diagonal g, zero when a != b
        let dd = |e: usize, f: usize, a: usize, b: usize| if a == b { ddg[e][f][a] } else { 0.0 };
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let mut v = 0.5 * (dd(b, c, a, d) + dd(a, d, b, c) - dd(a, c, b, d) - dd(b, d, a, c));
                        for e in 0..3 {
                            v += g[e] * (gam[e][b][c] * gam[e][a][d] - gam[e][b][d] * gam[e][a][c]);
                        }
                        r[a][b][c][d] = v;
                    }
                }
            }
        }
        (r, g, gam)
    }
}

/// Full orthonormal-frame tensors of the 3-dimensional metric at node `j`.
pub fn frame_oracle(metric: &AmbientMetric, j: usize) -> Result<FrameOracle> {
    if metric.dim() != 2 {
        return Err(Error::invalid(format!(
            "frame oracle is only defined for n = 2, got n = {}",
            metric.dim()
        )));
    }
    let m = metric.intervals();
    if j < MIN_POLE_DISTANCE || j + MIN_POLE_DISTANCE > m {
        return Err(Error::invalid(format!("node {j} too close to a pole for the oracle stencil")));
    }
    let dx = metric.dx() * STRIDE as f64;
    let (x1, x2) = fitted3(2.0 * PI, dx);
    let (a1, a2) = fitted3(2.0, ALPHA_STEP);
    let c = Coords { b: metric.b(), phi: metric.phi(), x1, x2, a1, a2 };
    let (r, g, gam) = c.riemann(j, ALPHA0);

    let (w1, w2) = fitted5(2.0 * PI, 4.0 * PI, dx);
    let rxp1 = c.riemann(j + STRIDE, ALPHA0).0;
    let rxm1 = c.riemann(j - STRIDE, ALPHA0).0;
    let rxp2 = c.riemann(j + 2 * STRIDE, ALPHA0).0;
    let rxm2 = c.riemann(j - 2 * STRIDE, ALPHA0).0;
    let rap = c.riemann(j, ALPHA0 + ALPHA_STEP).0;
    let ram = c.riemann(j, ALPHA0 - ALPHA_STEP).0;

    let mut dr = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                for d in 0..3 {
                    dr[0][a][b][cc][d] =
                        w1 * (rxp1[a][b][cc][d] - rxm1[a][b][cc][d]) + w2 * (rxp2[a][b][cc][d] - rxm2[a][b][cc][d]);
                    dr[1][a][b][cc][d] = a1 * (rap[a][b][cc][d] - ram[a][b][cc][d]);
                }
            }
        }
    }

    let norm: Vec<f64> = g.iter().map(|v| v.sqrt()).collect();
    let mut rm = vec![0.0; 81];
    let mut drm = vec![0.0; 243];
    for e in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        let mut v = dr[e][a][b][cc][d];
                        for f in 0..3 {
                            v -= gam[f][e][a] * r[f][b][cc][d]
                                + gam[f][e][b] * r[a][f][cc][d]
                                + gam[f][e][cc] * r[a][b][f][d]
                                + gam[f][e][d] * r[a][b][cc][f];
                        }
                        let scale = norm[a] * norm[b] * norm[cc] * norm[d];
                        drm[(((e * 3 + a) * 3 + b) * 3 + cc) * 3 + d] = v / (scale * norm[e]);
                        if e == 0 {
                            rm[((a * 3 + b) * 3 + cc) * 3 + d] = r[a][b][cc][d] / scale;
                        }
                    }
                }
            }
        }
    }
    let rm = Riemann { d: 3, data: rm };
    let ric_v = rm.ricci();
    let mut ric = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            ric[a][b] = ric_v[a][b];
        }
    }
    Ok(FrameOracle { rm, ric, drm: RiemannDerivative { d: 3, data: drm } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_stencils_are_exact_on_their_modes() {
        let h = 0.01;
        let (w1, w2) = fitted3(2.0 * PI, h);
        let f = |t: f64| (2.0 * PI * t).cos() + 0.3 * (2.0 * PI * t).sin() + 2.0;
        let d1 = w1 * (f(0.3 + h) - f(0.3 - h));
        let d2 = w2 * (f(0.3 + h) - 2.0 * f(0.3) + f(0.3 - h));
        let e1 = -2.0 * PI * (2.0 * PI * 0.3).sin() + 0.6 * PI * (2.0 * PI * 0.3).cos();
        let e2 = -4.0 * PI * PI * (f(0.3) - 2.0);
        assert!((d1 - e1).abs() < 1e-9);
        assert!((d2 - e2).abs() < 1e-7);
        let (a1, a2) = fitted5(2.0 * PI, 4.0 * PI, h);
        let g = |t: f64| (4.0 * PI * t).sin();
        let d = a1 * (g(0.2 + h) - g(0.2 - h)) + a2 * (g(0.2 + 2.0 * h) - g(0.2 - 2.0 * h));
        assert!((d - 4.0 * PI * (4.0 * PI * 0.2).cos()).abs() < 1e-9);
    }

    #[test]
    fn unit_round_has_unit_sectional_curvatures() {
        let g = AmbientMetric::round(2, 1.0, 200).unwrap();
        for j in [10, 57, 100, 190] {
            let o = frame_oracle(&g, j).unwrap();
            assert!((o.rm.get(0, 1, 0, 1) - 1.0).abs() < 1e-10, "{} {} {}", o.rm.get(0, 1, 0, 1), o.rm.get(0, 2, 0, 2), o.rm.get(1, 2, 1, 2));
            assert!((o.rm.get(0, 2, 0, 2) - 1.0).abs() < 1e-10);
            assert!((o.rm.get(1, 2, 1, 2) - 1.0).abs() < 1e-10);
            assert!(o.drm.data.iter().all(|v| v.abs() < 1e-8));
        }
    }

    #[test]
    fn rejects_other_dimensions() {
        let g = AmbientMetric::round(3, 1.0, 64).unwrap();
        assert!(matches!(frame_oracle(&g, 32), Err(Error::InvalidInput(_))));
    }
}
