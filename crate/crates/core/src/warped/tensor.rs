//! Dense ambient tensors at a point, in an arbitrary orthonormal frame.
//!
//! The frame is described only through the components `r` of the radial unit
//! vector `d_s`. Writing `G = g (.) g / 2` for the constant-curvature tensor
//! and `P` for the part supported on planes containing `r`,
//! `Rm = K_orb G + (K_rad - K_orb) P`.

/// Curvature data of the warped product at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCurvature {
    pub k_rad: f64,
    pub k_orb: f64,
    pub k_rad_s: f64,
    pub k_orb_s: f64,
    /// `(K_rad - K_orb) phi_s / phi`; finite (zero) at the poles.
    pub gap_h: f64,
}

impl PointCurvature {
    pub fn round(k: f64) -> Self {
        PointCurvature { k_rad: k, k_orb: k, k_rad_s: 0.0, k_orb_s: 0.0, gap_h: 0.0 }
    }
}

#[inline]
fn idx4(d: usize, a: usize, b: usize, c: usize, e: usize) -> usize {
    ((a * d + b) * d + c) * d + e
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Riemann tensor, flattened `[a][b][c][d]`, with `R(a,b,a,b) = K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    pub d: usize,
    pub data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        self.data[idx4(self.d, a, b, c, e)]
    }

    pub fn ricci(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut ric = vec![vec![0.0; d]; d];
        for a in 0..d {
            for c in 0..d {
                ric[a][c] = (0..d).map(|b| self.get(a, b, c, b)).sum();
            }
        }
        ric
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Covariant derivative of the Riemann tensor, flattened `[e][a][b][c][d]`
/// for `(nabla_e Rm)(a, b, c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannDerivative {
    pub d: usize,
    pub data: Vec<f64>,
}

impl RiemannDerivative {
    pub fn get(&self, e: usize, a: usize, b: usize, c: usize, f: usize) -> f64 {
        self.data[e * self.d.pow(4) + idx4(self.d, a, b, c, f)]
    }

    /// `(nabla_e Ric)(a, c)`.
    pub fn ricci(&self, e: usize, a: usize, c: usize) -> f64 {
        (0..self.d).map(|b| self.get(e, a, b, c, b)).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

fn g_tensor(a: usize, b: usize, c: usize, e: usize) -> f64 {
    delta(a, c) * delta(b, e) - delta(a, e) * delta(b, c)
}

/// `P` built from two vectors `u`, `w` in place of `r (x) r`, symmetrized.
fn p_tensor(u: &[f64], w: &[f64], a: usize, b: usize, c: usize, e: usize) -> f64 {
    let uw = |x: usize, y: usize| 0.5 * (u[x] * w[y] + w[x] * u[y]);
    delta(a, c) * uw(b, e) - delta(a, e) * uw(b, c) + uw(a, c) * delta(b, e) - uw(a, e) * delta(b, c)
}

pub fn riemann(r: &[f64], k: &PointCurvature) -> Riemann {
    let d = r.len();
    let mut data = vec![0.0; d.pow(4)];
    let gap = k.k_rad - k.k_orb;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    data[idx4(d, a, b, c, e)] = k.k_orb * g_tensor(a, b, c, e) + gap * p_tensor(r, r, a, b, c, e);
                }
            }
        }
    }
    Riemann { d, data }
}

/// `nabla Rm`, using `nabla_X d_s = (phi_s/phi) (X - <X, d_s> d_s)`.
pub fn riemann_derivative(r: &[f64], k: &PointCurvature) -> RiemannDerivative {
    let d = r.len();
    let gap_s = k.k_rad_s - k.k_orb_s;
    let mut data = vec![0.0; d.pow(5)];
    let mut w = vec![0.0; d];
    for e in 0..d {
        // (K_rad - K_orb) nabla_e r, with the h factor folded into gap_h
        for x in 0..d {
            w[x] = k.gap_h * (delta(e, x) - r[e] * r[x]);
        }
        let base = e * d.pow(4);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for f in 0..d {
                        let v = r[e] * k.k_orb_s * g_tensor(a, b, c, f)
                            + r[e] * gap_s * p_tensor(r, r, a, b, c, f)
                            + 2.0 * p_tensor(&w, r, a, b, c, f);
                        data[base + idx4(d, a, b, c, f)] = v;
                    }
                }
            }
        }
    }
    RiemannDerivative { d, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::curvature::{grad_rm_norm2, rm_norm2};

    // h = 0.9; consistency of a warped product forces K_orb_s = 2 h (K_rad - K_orb)
    fn sample() -> PointCurvature {
        let gap_h = -0.6 * 0.9;
        PointCurvature { k_rad: 0.7, k_orb: 1.3, k_rad_s: -0.4, k_orb_s: 2.0 * gap_h, gap_h }
    }

    fn tilted(d: usize) -> Vec<f64> {
        let mut r = vec![0.0; d];
        r[0] = 0.6;
        r[1] = 0.8;
        r
    }

    #[test]
    fn sectional_curvatures_in_adapted_frame() {
        let k = sample();
        let mut r = vec![0.0; 4];
        r[0] = 1.0;
        let rm = riemann(&r, &k);
        assert!((rm.get(0, 1, 0, 1) - 0.7).abs() < 1e-15);
        assert!((rm.get(1, 2, 1, 2) - 1.3).abs() < 1e-15);
        assert!((rm.get(0, 1, 1, 0) + 0.7).abs() < 1e-15);
    }

    #[test]
    fn norms_match_multiplicity_counting() {
        for n in 2..=4 {
            let k = sample();
            let rm = riemann(&tilted(n + 1), &k);
            assert!((rm.norm2() - rm_norm2(n, k.k_rad, k.k_orb)).abs() < 1e-12);
            let ric = rm.ricci();
            let nf = n as f64;
            let ric2: f64 = ric.iter().flatten().map(|v| v * v).sum();
            let expect = (nf * k.k_rad).powi(2) + nf * (k.k_rad + (nf - 1.0) * k.k_orb).powi(2);
            assert!((ric2 - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_norm_matches_closed_form() {
        for n in 2..=4 {
            let k = sample();
            let h = 0.9;
            let drm = riemann_derivative(&tilted(n + 1), &k);
            let expect = grad_rm_norm2(n, k.k_rad_s, k.k_orb_s, h, k.k_rad, k.k_orb);
            assert!((drm.norm2() - expect).abs() < 1e-12, "n={n}: {} vs {expect}", drm.norm2());
        }
    }

    #[test]
    fn derivative_obeys_second_bianchi() {
        let k = sample();
        let d = 4;
        let drm = riemann_derivative(&tilted(d), &k);
        for e in 0..d {
            for f in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            let s = drm.get(e, a, b, c, f) + drm.get(a, b, e, c, f) + drm.get(b, e, a, c, f);
                            assert!(s.abs() < 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn round_derivative_vanishes() {
        let drm = riemann_derivative(&tilted(3), &PointCurvature::round(1.0));
        assert!(drm.norm2() == 0.0);
    }
}
