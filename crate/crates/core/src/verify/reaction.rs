//! Ambient curvature contracted with the second fundamental form.
//!
//! Frame index 0 is the unit normal, 1 the profile tangent and `2..=n` the
//! orbit directions; `h` is diagonal in this frame.

use crate::hypersurface::shape::ShapeReport;
use crate::warped::tensor::{riemann, riemann_derivative};

/// Ambient contractions at one node that enter the evolution equations and
/// Simons' identity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeContractions {
    /// `R_ij h_ij`.
    pub ric_h: f64,
    /// `R_ij h_ik h_jk`.
    pub ric_hh: f64,
    /// `(nabla_0 Ric)(0, 0)`.
    pub d0_ric00: f64,
    /// `(nabla_0 Rm)(0, i, 0, j) h_ij`.
    pub d0_rm0i0j_h: f64,
    /// `P_ij h_ij`.
    pub p_contract: f64,
    /// `R_0i0j h_ij`.
    pub rm0i0j_h: f64,
    /// `R_00`.
    pub ric00: f64,
    /// `R_kikp h_pj h_ij`.
    pub rm_kikp_hh: f64,
    /// `R_kipj h_kp h_ij`.
    pub rm_kipj_hh: f64,
    /// `(nabla_k Rm)(0, i, j, k) h_ij`.
    pub dk_rm0ijk_h: f64,
    /// `(nabla_i Ric)(0, j) h_ij`.
    pub di_ric0j_h: f64,
    /// `|S|^2` with `S_i = R_0i`.
    pub s2: f64,
}

pub fn node_contractions(report: &ShapeReport, k: usize) -> NodeContractions {
    let n = report.n;
    let fr = &report.frames[k];
    let r = fr.radial_components(n);
    let rm = riemann(&r, &fr.ambient.curv);
    let drm = riemann_derivative(&r, &fr.ambient.curv);
    let ric = rm.ricci();
    let h: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => 0.0,
            1 => report.kappa_prof[k],
            _ => report.kappa_orb[k],
        })
        .collect();
    let tangent = 1..=n;
    // partial traces over tangent directions, T_i = sum_k R(k, i, k, i)
    let t: Vec<f64> = (0..=n).map(|i| tangent.clone().map(|q| rm.get(q, i, q, i)).sum()).collect();

    let mut c = NodeContractions {
        d0_ric00: drm.ricci(0, 0, 0),
        ric00: ric[0][0],
        ..Default::default()
    };
    for i in tangent.clone() {
        let hi = h[i];
        c.ric_h += ric[i][i] * hi;
        c.ric_hh += ric[i][i] * hi * hi;
        c.d0_rm0i0j_h += drm.get(0, 0, i, 0, i) * hi;
        c.rm0i0j_h += rm.get(0, i, 0, i) * hi;
        c.rm_kikp_hh += t[i] * hi * hi;
        c.di_ric0j_h += drm.ricci(i, 0, i) * hi;
        c.s2 += ric[0][i] * ric[0][i];
        let mut p_ii = -2.0 * hi * t[i];
        for q in tangent.clone() {
            p_ii += 2.0 * h[q] * rm.get(q, i, q, i);
            c.rm_kipj_hh += rm.get(q, i, q, i) * h[q] * hi;
            c.dk_rm0ijk_h += drm.get(q, 0, i, i, q) * hi;
        }
        c.p_contract += p_ii * hi;
    }
    c
}

/// Reaction terms of the evolution equations for `H` and `|A|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTerms {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p_contract: Vec<f64>,
    pub z: Vec<f64>,
    pub contractions: Vec<NodeContractions>,
}

impl ReactionTerms {
    pub fn compute(report: &ShapeReport, rbar: f64) -> Self {
        let n = report.n;
        let nf = n as f64;
        let np = report.h.len();
        let contractions: Vec<NodeContractions> = (0..np).map(|k| node_contractions(report, k)).collect();
        let mut u = Vec::with_capacity(np);
        let mut v = Vec::with_capacity(np);
        let mut z = Vec::with_capacity(np);
        for k in 0..np {
            let c = &contractions[k];
            let (h, a2) = (report.h[k], report.a2[k]);
            u.push(2.0 * c.ric_h - rbar * h / (nf + 1.0) - c.d0_ric00);
            v.push(2.0 * c.p_contract + 4.0 * c.ric_hh - 2.0 * rbar * a2 / (nf + 1.0) - 2.0 * c.d0_rm0i0j_h);
            let (k1, k2) = (report.kappa_prof[k], report.kappa_orb[k]);
            let tr3 = k1.powi(3) + (nf - 1.0) * k2.powi(3);
            z.push(h * tr3 - a2 * a2);
        }
        let p_contract = contractions.iter().map(|c| c.p_contract).collect();
        ReactionTerms { u, v, p_contract, z, contractions }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{shape, PinchingParams, ProfileCurve};
    use crate::warped::AmbientMetric;

    #[test]
    fn umbilic_sphere_in_round_ambient() {
        for n in 2..=3 {
            let g = AmbientMetric::round(n, 1.0, 128).unwrap();
            let c = ProfileCurve::coordinate_sphere(0.3, 64).unwrap();
            let s = shape(&c, &g, &PinchingParams::new(n, 0.1).unwrap()).unwrap();
            let rt = ReactionTerms::compute(&s, (n * (n + 1)) as f64);
            let nf = n as f64;
            for k in 0..=64 {
                assert!(rt.p_contract[k].abs() < 1e-10);
                assert!(rt.z[k].abs() < 1e-10);
                // round: u = 2 n H - n H = n H and v = 4 n |A|^2 - 2 n |A|^2
                assert!((rt.u[k] - nf * s.h[k]).abs() < 1e-9);
                assert!((rt.v[k] - 2.0 * nf * s.a2[k]).abs() < 1e-9);
                assert!(rt.contractions[k].s2 < 1e-20);
            }
        }
    }

    #[test]
    fn p_contract_matches_eigenvalue_form() {
        // -sum_{i<p} 2 (k_i - k_p)^2 R_pipi over the tangent pairs
        let g = AmbientMetric::round(3, 1.0, 128).unwrap();
        let c = ProfileCurve::near_equator(0.08, 64).unwrap();
        let s = shape(&c, &g, &PinchingParams::new(3, 0.1).unwrap()).unwrap();
        let rt = ReactionTerms::compute(&s, 12.0);
        for k in 1..64 {
            let d = s.kappa_prof[k] - s.kappa_orb[k];
            // two (T, f) pairs with unit curvature, the (f, f') pair has d = 0
            assert!((rt.p_contract[k] + 2.0 * 2.0 * d * d).abs() < 1e-8, "{k}");
        }
    }
}
