use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::warped::metric::parse_field;

pub const CURVE_FORMAT_VERSION: &str = "1";

/// Fewest curve nodes accepted by the geometry and resampling routines.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Endpoints on the axis `alpha in {0, pi}`.
    Sphere,
    /// The orbit `x = const`; stored like `Sphere` with constant `x`.
    CoordinateSphere,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Sphere => "sphere",
            Topology::CoordinateSphere => "coordinate_sphere",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Topology::Sphere),
            "coordinate_sphere" => Ok(Topology::CoordinateSphere),
            other => Err(Error::invalid(format!("unknown topology '{other}'"))),
        }
    }
}

/// Profile curve `u -> (x(u), alpha(u))`, `u = k/P`, in the quotient with
/// metric `b^2 dx^2 + phi^2 d alpha^2`. Rotating it about the axis through
/// the remaining `n - 1` orbit directions gives the hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub(crate) x: Vec<f64>,
    pub(crate) alpha: Vec<f64>,
    pub(crate) topology: Topology,
}

impl ProfileCurve {
    pub fn new(x: Vec<f64>, alpha: Vec<f64>, topology: Topology) -> Result<Self> {
        let c = ProfileCurve { x, alpha, topology };
        c.validate()?;
        Ok(c)
    }

    /// The orbit `{x = x0}` sampled uniformly in `alpha`.
    pub fn coordinate_sphere(x0: f64, segments: usize) -> Result<Self> {
        Self::new(vec![x0; segments + 1], uniform_alpha(segments), Topology::CoordinateSphere)
    }

    /// `x = x_mid + eps * P3(cos alpha)`, a graph over the equator that is
    /// odd under `(x, alpha) -> (1 - x, pi - alpha)` about `x_mid = 1/2`.
    pub fn near_equator(eps: f64, segments: usize) -> Result<Self> {
        let alpha = uniform_alpha(segments);
        let x = alpha
            .iter()
            .map(|a| {
                let c = a.cos();
                0.5 + eps * 0.5 * (5.0 * c * c * c - 3.0 * c)
            })
            .collect();
        Self::new(x, alpha, Topology::Sphere)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.segments();
        if self.x.len() != self.alpha.len() {
            return Err(Error::invalid("x and alpha have different lengths"));
        }
        if self.x.len() < MIN_NODES {
            return Err(Error::invalid(format!(
                "curve needs at least {MIN_NODES} nodes, got {}",
                self.x.len()
            )));
        }
        if self.alpha[0] != 0.0 || self.alpha[p] != PI {
            return Err(Error::invalid("curve endpoints must lie on the axis (alpha = 0 and pi)"));
        }
        if let Some(k) = (1..p).find(|&k| !(self.alpha[k] > 0.0 && self.alpha[k] < PI)) {
            return Err(Error::invalid(format!("alpha[{k}] = {} leaves (0, pi)", self.alpha[k])));
        }
        if let Some(k) = (0..=p).find(|&k| !(self.x[k] > 0.0 && self.x[k] < 1.0)) {
            return Err(Error::invalid(format!("x[{k}] = {} leaves (0, 1)", self.x[k])));
        }
        Ok(())
    }

    /// Number of segments `P` (nodes minus one).
    pub fn segments(&self) -> usize {
        self.x.len() - 1
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Node `k`, extended past the endpoints by reflection through the axis.
    pub fn node(&self, k: isize) -> (f64, f64) {
        let p = self.segments() as isize;
        if k < 0 {
            let (x, a) = (self.x[(-k) as usize], self.alpha[(-k) as usize]);
            (x, -a)
        } else if k > p {
            let i = (2 * p - k) as usize;
            (self.x[i], 2.0 * PI - self.alpha[i])
        } else {
            (self.x[k as usize], self.alpha[k as usize])
        }
    }

    /// Header `P topology version`, then `u x alpha` per node.
    pub fn to_text(&self) -> String {
        let p = self.segments();
        let mut out = String::new();
        writeln!(out, "{} {} {}", p, self.topology, CURVE_FORMAT_VERSION).unwrap();
        for k in 0..=p {
            writeln!(out, "{:.17e} {:.17e} {:.17e}", k as f64 / p as f64, self.x[k], self.alpha[k]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::Truncated("empty curve".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: hline + 1,
                msg: "expected header `P topology version`".into(),
            });
        }
        if fields[2] != CURVE_FORMAT_VERSION {
            return Err(Error::Version {
                expected: CURVE_FORMAT_VERSION.into(),
                found: fields[2].into(),
            });
        }
        let p: usize = parse_field(fields[0], hline)?;
        let topology: Topology = fields[1].parse()?;
        let mut x = Vec::with_capacity(p + 1);
        let mut alpha = Vec::with_capacity(p + 1);
        for (idx, line) in lines {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected `u x alpha`".into(),
                });
            }
            x.push(parse_field::<f64>(cols[1], idx)?);
            alpha.push(parse_field::<f64>(cols[2], idx)?);
        }
        if x.len() != p + 1 {
            return Err(Error::Truncated(format!("expected {} nodes, found {}", p + 1, x.len())));
        }
        ProfileCurve::new(x, alpha, topology)
    }
}

/// `alpha_k = pi k / P` with both endpoints exactly on the axis.
pub fn uniform_alpha(segments: usize) -> Vec<f64> {
    let mut a: Vec<f64> = (0..=segments).map(|k| PI * k as f64 / segments as f64).collect();
    a[segments] = PI;
    a
}
