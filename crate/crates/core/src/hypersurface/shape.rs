//! Extrinsic geometry of the rotation hypersurface generated by a profile curve.
//!
//! With unit tangent `T = tau_1 e_s + tau_2 e_alpha` (orthonormal quotient
//! components) the unit normal is `nu = (tau_2, -tau_1)`. For a curve
//! traversed with increasing `alpha` this points towards increasing `x`, so
//! small spheres around the first pole have `H > 0`.
//!
//! Principal curvatures: `kappa_prof` is the geodesic curvature of the
//! profile in the quotient, and `kappa_orb = nu(rho) / rho` with orbit radius
//! `rho = phi sin alpha` (multiplicity `n - 1`). On the axis `kappa_orb` is
//! extrapolated from the neighbouring nodes.

use crate::error::{Error, Result};
use crate::hypersurface::ambient::{AmbientFields, AmbientPoint};
use crate::hypersurface::curve::ProfileCurve;
use crate::warped::metric::AmbientMetric;
use crate::warped::{eps0_bound, sphere_volume};

/// Tangent norms below this mark the node as degenerate.
pub const DEGENERATE_SPEED: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchingParams {
    pub n: usize,
    pub alpha_n: f64,
    pub a: f64,
    pub sigma: f64,
    pub eps0: f64,
    pub eps1: f64,
}

impl PinchingParams {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        let nf = n as f64;
        let alpha_n = if n == 2 { 11.0 / 16.0 } else { 4.0 / (4.0 * nf - 3.0) };
        let p = PinchingParams {
            n,
            alpha_n,
            a: alpha_n - 1.0 / nf,
            sigma,
            eps0: eps0_bound(n),
            eps1: eps1_bound(n),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("hypersurface dimension must be at least 2"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::invalid(format!("sigma = {} outside (0, 1)", self.sigma)));
        }
        if !(self.eps1 > 0.0 && self.eps1 <= eps1_bound(self.n)) {
            return Err(Error::invalid(format!("eps1 = {} exceeds 1/(128 n)", self.eps1)));
        }
        Ok(())
    }
}

pub fn eps1_bound(n: usize) -> f64 {
    1.0 / (128.0 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Standard,
    Flipped,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Flipped => -1.0,
        }
    }
}

/// Local frame data at one curve node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFrame {
    pub x: f64,
    pub alpha: f64,
    /// `|gamma_u|` in the quotient metric.
    pub speed: f64,
    pub tau: [f64; 2],
    pub nu: [f64; 2],
    pub rho: f64,
    /// `rho_s / rho`; zero on the axis where the terms it multiplies vanish.
    pub log_rho_s: f64,
    pub ambient: AmbientPoint,
}

impl NodeFrame {
    /// Coordinate components `(N^x, N^alpha)` of the unit normal.
    pub fn normal_coords(&self) -> (f64, f64) {
        (self.nu[0] / self.ambient.b, self.nu[1] / self.ambient.phi)
    }

    /// Components of the ambient radial direction in the frame `(nu, T, f...)`.
    pub fn radial_components(&self, n: usize) -> Vec<f64> {
        let mut r = vec![0.0; n + 1];
        r[0] = self.nu[0];
        r[1] = self.tau[0];
        r
    }
}

/// Arclength derivatives of nodal fields that are even under the axis reflection.
#[derive(Debug, Clone)]
pub struct ArcDerivative {
    h: f64,
    speed: Vec<f64>,
    speed_u: Vec<f64>,
}

fn even_ghost(f: &[f64], k: isize) -> f64 {
    let p = f.len() as isize - 1;
    let i = if k < 0 {
        -k
    } else if k > p {
        2 * p - k
    } else {
        k
    };
    f[i as usize]
}

fn d_u(f: &[f64], k: usize, h: f64) -> f64 {
    let k = k as isize;
    (even_ghost(f, k + 1) - even_ghost(f, k - 1)) / (2.0 * h)
}

fn d_uu(f: &[f64], k: usize, h: f64) -> f64 {
    let k = k as isize;
    (even_ghost(f, k + 1) - 2.0 * even_ghost(f, k) + even_ghost(f, k - 1)) / (h * h)
}

impl ArcDerivative {
    pub fn new(speed: Vec<f64>) -> Self {
        let h = 1.0 / (speed.len() - 1) as f64;
        let speed_u = (0..speed.len()).map(|k| d_u(&speed, k, h)).collect();
        ArcDerivative { h, speed, speed_u }
    }

    pub fn ds(&self, f: &[f64]) -> Vec<f64> {
        (0..f.len()).map(|k| d_u(f, k, self.h) / self.speed[k]).collect()
    }

    pub fn dss(&self, f: &[f64]) -> Vec<f64> {
        (0..f.len())
            .map(|k| {
                let s = self.speed[k];
                (d_uu(f, k, self.h) - d_u(f, k, self.h) * self.speed_u[k] / s) / (s * s)
            })
            .collect()
    }

    /// Induced Laplacian `f_ss + (n-1) (rho_s/rho) f_s`, and `n f_ss` on the axis.
    pub fn laplacian(&self, f: &[f64], frames: &[NodeFrame], n: usize) -> Vec<f64> {
        let nf = n as f64;
        let fs = self.ds(f);
        let fss = self.dss(f);
        let last = f.len() - 1;
        (0..f.len())
            .map(|k| {
                if k == 0 || k == last {
                    nf * fss[k]
                } else {
                    fss[k] + (nf - 1.0) * frames[k].log_rho_s * fs[k]
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ShapeReport {
    pub n: usize,
    pub kappa_prof: Vec<f64>,
    pub kappa_orb: Vec<f64>,
    pub h: Vec<f64>,
    pub a2: Vec<f64>,
    pub traceless: Vec<f64>,
    pub grad_h2: Vec<f64>,
    pub grad_a2: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    pub f_sigma: Vec<f64>,
    pub min_sectional: Vec<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_p: f64,
    pub max_f_sigma: f64,
    pub max_a2: f64,
    pub max_traceless: f64,
    pub max_grad_h2: f64,
    /// Smallest value of `min_sectional` over the nodes.
    pub min_sectional_min: f64,
    /// Induced area of the hypersurface.
    pub area: f64,
    pub frames: Vec<NodeFrame>,
    pub deriv: ArcDerivative,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn shape(curve: &ProfileCurve, metric: &AmbientMetric, params: &PinchingParams) -> Result<ShapeReport> {
    if metric.dim() != params.n {
        return Err(Error::invalid("metric and pinching parameters disagree on n"));
    }
    shape_with(curve, &AmbientFields::new(metric)?, params, Orientation::Standard)
}

/// Frames and principal curvatures only; shared by `shape_with` and the flow.
pub fn frames_and_curvatures(
    curve: &ProfileCurve,
    fields: &AmbientFields,
    orientation: Orientation,
) -> Result<(Vec<NodeFrame>, Vec<f64>, Vec<f64>)> {
    let p = curve.segments();
    let h = 1.0 / p as f64;
    let sign = orientation.sign();
    let mut frames = Vec::with_capacity(p + 1);
    let mut k1 = Vec::with_capacity(p + 1);
    let mut k2 = Vec::with_capacity(p + 1);
    for k in 0..=p {
        let ki = k as isize;
        let (xm, am) = curve.node(ki - 1);
        let (x0, a0) = curve.node(ki);
        let (xp, ap) = curve.node(ki + 1);
        let (xu, au) = ((xp - xm) / (2.0 * h), (ap - am) / (2.0 * h));
        let (xuu, auu) = ((xp - 2.0 * x0 + xm) / (h * h), (ap - 2.0 * a0 + am) / (h * h));
        let amb = fields.at(x0);
        let (b, phi) = (amb.b, amb.phi);
        let t = [b * xu, phi * au];
        let speed = t[0].hypot(t[1]);
        if !(speed >= DEGENERATE_SPEED) {
            return Err(Error::DegenerateNode {
                node: k,
                reason: format!("tangent norm {speed:e}"),
            });
        }
        let tau = [t[0] / speed, t[1] / speed];
        let nu = [sign * tau[1], -sign * tau[0]];
        // covariant acceleration in coordinates
        let acc_x = xuu + amb.bx / b * xu * xu - phi * amb.phix / (b * b) * au * au;
        let acc_a = auu + 2.0 * amb.phix / phi * xu * au;
        let kappa_prof = -(b * acc_x * nu[0] + phi * acc_a * nu[1]) / (speed * speed);

        let phi_s = amb.phix / b;
        let on_axis = k == 0 || k == p;
        let (rho, kappa_orb, log_rho_s) = if on_axis {
            (0.0, kappa_prof, 0.0)
        } else {
            let (sa, ca) = a0.sin_cos();
            let rho = phi * sa;
            let grad = |v: [f64; 2]| v[0] * phi_s * sa + v[1] * ca;
            (rho, grad(nu) / rho, grad(tau) / rho)
        };
        frames.push(NodeFrame {
            x: x0,
            alpha: a0,
            speed,
            tau,
            nu,
            rho,
            log_rho_s,
            ambient: amb,
        });
        k1.push(kappa_prof);
        k2.push(kappa_orb);
    }
    // On the axis kappa_orb tends to kappa_prof, but the two discrete values
    // carry different O(h^2) errors; the jump would spoil second differences
    // at the neighbouring node. Even extrapolation keeps the error smooth.
    k2[0] = (4.0 * k2[1] - k2[2]) / 3.0;
    k2[p] = (4.0 * k2[p - 1] - k2[p - 2]) / 3.0;
    Ok((frames, k1, k2))
}

pub fn shape_with(
    curve: &ProfileCurve,
    fields: &AmbientFields,
    params: &PinchingParams,
    orientation: Orientation,
) -> Result<ShapeReport> {
    let n = fields.n;
    let nf = n as f64;
    let (frames, k1, k2) = frames_and_curvatures(curve, fields, orientation)?;
    let np = k1.len();
    let deriv = ArcDerivative::new(frames.iter().map(|f| f.speed).collect());

    let h: Vec<f64> = (0..np).map(|k| k1[k] + (nf - 1.0) * k2[k]).collect();
    let a2: Vec<f64> = (0..np).map(|k| k1[k] * k1[k] + (nf - 1.0) * k2[k] * k2[k]).collect();
    let traceless: Vec<f64> = (0..np).map(|k| (nf - 1.0) / nf * (k1[k] - k2[k]).powi(2)).collect();
    let hs = deriv.ds(&h);
    let grad_h2: Vec<f64> = hs.iter().map(|v| v * v).collect();
    let k1s = deriv.ds(&k1);
    let k2s = deriv.ds(&k2);
    let grad_a2: Vec<f64> = (0..np)
        .map(|k| {
            let rot = (k1[k] - k2[k]) * frames[k].log_rho_s;
            k1s[k] * k1s[k] + (nf - 1.0) * (k2s[k] * k2s[k] + 2.0 * rot * rot)
        })
        .collect();
    let p: Vec<f64> = (0..np).map(|k| a2[k] - params.alpha_n * h[k] * h[k] - 1.0).collect();
    let w: Vec<f64> = h.iter().map(|hk| params.a * hk * hk + 1.0).collect();
    let f_sigma: Vec<f64> = (0..np).map(|k| traceless[k] / w[k].powf(1.0 - params.sigma)).collect();
    let min_sectional: Vec<f64> = (0..np)
        .map(|k| {
            let fr = &frames[k];
            let c = &fr.ambient.curv;
            let mixed = fr.tau[0].powi(2) * c.k_rad + fr.tau[1].powi(2) * c.k_orb + k1[k] * k2[k];
            if n >= 3 {
                mixed.min(c.k_orb + k2[k] * k2[k])
            } else {
                mixed
            }
        })
        .collect();

    let hstep = 1.0 / (np - 1) as f64;
    let area = sphere_volume(n - 1)
        * (0..np)
            .map(|k| {
                let wgt = if k == 0 || k == np - 1 { 0.5 } else { 1.0 };
                wgt * frames[k].rho.powi(n as i32 - 1) * frames[k].speed * hstep
            })
            .sum::<f64>();

    Ok(ShapeReport {
        n,
        h_max: max_of(&h),
        h_min: min_of(&h),
        max_p: max_of(&p),
        max_f_sigma: max_of(&f_sigma),
        max_a2: max_of(&a2),
        max_traceless: max_of(&traceless),
        max_grad_h2: max_of(&grad_h2),
        min_sectional_min: min_of(&min_sectional),
        area,
        kappa_prof: k1,
        kappa_orb: k2,
        h,
        a2,
        traceless,
        grad_h2,
        grad_a2,
        p,
        w,
        f_sigma,
        min_sectional,
        frames,
        deriv,
    })
}

impl ShapeReport {
    /// `max |H|`.
    pub fn max_abs_h(&self) -> f64 {
        self.h_max.abs().max(self.h_min.abs())
    }

    /// Lower bound on sectional curvature used by the Gauss-equation check.
    pub fn gauss_floor(&self, k: usize) -> f64 {
        let nf = self.n as f64;
        (self.h[k] * self.h[k] + 1.0) / (8.0 * nf * nf)
    }

    /// Largest `floor - minSectional` over the nodes (negative when the bound holds).
    pub fn gauss_excess(&self) -> f64 {
        (0..self.h.len())
            .map(|k| self.gauss_floor(k) - self.min_sectional[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.deriv.laplacian(f, &self.frames, self.n)
    }
}
