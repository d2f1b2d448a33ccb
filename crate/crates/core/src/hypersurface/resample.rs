//! Tangential redistribution of curve nodes to uniform induced arclength.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hypersurface::ambient::AmbientFields;
use crate::hypersurface::curve::{ProfileCurve, MIN_NODES};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    t: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `t` strictly increasing. End slopes use the one-sided three-point
    /// formula, limited to keep the end intervals monotone.
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 3 || y.len() != n {
            return Err(Error::invalid("pchip needs at least three matching samples"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("pchip abscissae must increase strictly"));
        }
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Pchip { t, y, d })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.t.len();
        let k = match self.t.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.t[k + 1] - self.t[k];
        let u = (s - self.t[k]) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Induced length of each segment, with the metric taken at the midpoint.
pub fn segment_lengths(curve: &ProfileCurve, fields: &AmbientFields) -> Vec<f64> {
    let (x, a) = (curve.x(), curve.alpha());
    (0..curve.segments())
        .map(|k| {
            let mid = fields.at(0.5 * (x[k] + x[k + 1]));
            (mid.b * (x[k + 1] - x[k])).hypot(mid.phi * (a[k + 1] - a[k]))
        })
        .collect()
}

/// Longest over shortest segment.
pub fn spacing_ratio(curve: &ProfileCurve, fields: &AmbientFields) -> f64 {
    let l = segment_lengths(curve, fields);
    let max = l.iter().cloned().fold(0.0, f64::max);
    let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Redistributes nodes uniformly in induced arclength, keeping the node count.
///
/// The data are extended by one reflected node past each axis endpoint so
/// that the end slopes respect the reflection symmetry.
pub fn resample(curve: &ProfileCurve, fields: &AmbientFields) -> Result<ProfileCurve> {
    let p = curve.segments();
    if p + 1 < MIN_NODES {
        return Err(Error::invalid(format!("resampling needs at least {MIN_NODES} nodes")));
    }
    let lengths = segment_lengths(curve, fields);
    let mut s = Vec::with_capacity(p + 3);
    s.push(-lengths[0]);
    s.push(0.0);
    for l in &lengths {
        s.push(s.last().unwrap() + l);
    }
    let total = s[p + 1];
    s.push(total + lengths[p - 1]);
    let ext = |f: &dyn Fn(isize) -> f64| (-1..=p as isize + 1).map(f).collect::<Vec<f64>>();
    let xs = Pchip::new(s.clone(), ext(&|k| curve.node(k).0))?;
    let als = Pchip::new(s, ext(&|k| curve.node(k).1))?;

    let mut x = Vec::with_capacity(p + 1);
    let mut alpha = Vec::with_capacity(p + 1);
    for j in 0..=p {
        let target = total * j as f64 / p as f64;
        x.push(xs.eval(target));
        alpha.push(als.eval(target));
    }
    x[0] = curve.x()[0];
    x[p] = curve.x()[p];
    alpha[0] = 0.0;
    alpha[p] = PI;
    ProfileCurve::new(x, alpha, curve.topology())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::curve::Topology;
    use crate::hypersurface::shape::{shape_with, Orientation, PinchingParams};
    use crate::warped::metric::AmbientMetric;

    fn round_fields() -> AmbientFields {
        AmbientFields::new(&AmbientMetric::round(2, 1.0, 200).unwrap()).unwrap()
    }

    #[test]
    fn pchip_reproduces_lines_and_stays_monotone() {
        let t = vec![0.0, 0.1, 0.5, 0.6, 1.0];
        let p = Pchip::new(t.clone(), t.iter().map(|v| 3.0 * v - 1.0).collect()).unwrap();
        for s in [0.05, 0.3, 0.77] {
            assert!((p.eval(s) - (3.0 * s - 1.0)).abs() < 1e-14);
        }
        let step = Pchip::new(t, vec![0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = step.eval(i as f64 / 100.0);
            assert!(v >= prev && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn uniform_coordinate_sphere_is_unchanged() {
        let c = ProfileCurve::coordinate_sphere(0.3, 64).unwrap();
        let r = resample(&c, &round_fields()).unwrap();
        for k in 0..=64 {
            assert!((r.x()[k] - c.x()[k]).abs() < 1e-12);
            assert!((r.alpha()[k] - c.alpha()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn clustered_circle_has_identical_geometry() {
        let p = 100;
        let mut alpha: Vec<f64> = (0..=p)
            .map(|k| {
                let u = k as f64 / p as f64;
                PI * (u - 0.05 * (2.0 * PI * u).sin())
            })
            .collect();
        alpha[p] = PI;
        let c = ProfileCurve::new(vec![0.3; p + 1], alpha, Topology::CoordinateSphere).unwrap();
        let fields = round_fields();
        assert!(spacing_ratio(&c, &fields) > 1.5);
        let params = PinchingParams::new(2, 0.1).unwrap();
        let before = shape_with(&c, &fields, &params, Orientation::Standard).unwrap();
        let r = resample(&c, &fields).unwrap();
        assert!(spacing_ratio(&r, &fields) < 1.0 + 1e-9);
        let after = shape_with(&r, &fields, &params, Orientation::Standard).unwrap();
        assert!((before.h_max - after.h_max).abs() < 1e-8);
        assert!((before.h_min - after.h_min).abs() < 1e-8);
        assert!((before.max_p - after.max_p).abs() < 1e-8);
        assert!((before.max_f_sigma - after.max_f_sigma).abs() < 1e-8);
    }

    #[test]
    fn generic_curve_keeps_its_area() {
        let c = ProfileCurve::near_equator(0.05, 200).unwrap();
        let fields = round_fields();
        let params = PinchingParams::new(2, 0.1).unwrap();
        let r = resample(&c, &fields).unwrap();
        let a0 = shape_with(&c, &fields, &params, Orientation::Standard).unwrap();
        let a1 = shape_with(&r, &fields, &params, Orientation::Standard).unwrap();
        assert!((a0.area - a1.area).abs() < 1e-5 * a0.area, "{} {}", a0.area, a1.area);
        assert!(spacing_ratio(&r, &fields) < 1.01);
    }

    #[test]
    fn rejects_short_curves() {
        let c = ProfileCurve {
            x: vec![0.5; 8],
            alpha: crate::hypersurface::curve::uniform_alpha(7),
            topology: Topology::Sphere,
        };
        assert!(resample(&c, &round_fields()).is_err());
    }
}
