//! Run configuration: a line-oriented `key = value` format.
//!
//! `#` starts a comment, `[section]` headers group keys for readability.
//! Keys are unique across sections. Every key left out takes a documented
//! default, which may depend on the scenario, and is reported in
//! `FlowConfig::defaults_applied`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::warped::eps0_bound;

pub const SECTIONS: [&str; 6] = ["run", "ambient", "curve", "flow", "classification", "sweep"];

/// Every accepted key.
pub const KEYS: [&str; 29] = [
    "scenario",
    "horizon",
    "stride",
    "checkpoint_every",
    "require_determinate",
    "n",
    "M",
    "eps0",
    "amplitude",
    "mode",
    "freeze_ambient",
    "regauge_every",
    "cfl_factor",
    "P",
    "curve",
    "rho0",
    "curve_eps",
    "sigma",
    "curve_cfl",
    "resample_ratio",
    "orientation",
    "blowup_h",
    "roundness",
    "geodesic",
    "sustain_fraction",
    "min_samples",
    "rho0_values",
    "amplitude_values",
    "snapshot_every",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    RoundFixedPoint,
    GeodesicSphereShrink,
    NearEquatorConverge,
    PinchedConvergence,
    DichotomySweep,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::RoundFixedPoint,
        Scenario::GeodesicSphereShrink,
        Scenario::NearEquatorConverge,
        Scenario::PinchedConvergence,
        Scenario::DichotomySweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::RoundFixedPoint => "round_fixed_point",
            Scenario::GeodesicSphereShrink => "geodesic_sphere_shrink",
            Scenario::NearEquatorConverge => "near_equator_converge",
            Scenario::PinchedConvergence => "pinched_convergence",
            Scenario::DichotomySweep => "dichotomy_sweep",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

/// Initial profile curve family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// `x = rho0 / pi`, all of `alpha`.
    CoordinateSphere,
    /// `x = 1/2 + curve_eps P_3(cos alpha)`.
    NearEquator,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::CoordinateSphere => "coordinate_sphere",
            CurveKind::NearEquator => "near_equator",
        })
    }
}

impl FromStr for CurveKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "coordinate_sphere" => Ok(CurveKind::CoordinateSphere),
            "near_equator" => Ok(CurveKind::NearEquator),
            _ => Err(format!("unknown curve '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub scenario: Scenario,
    pub horizon: f64,
    /// Monitor output every this many accepted steps.
    pub stride: usize,
    /// Write a checkpoint every this many monitor samples; 0 writes only the final one.
    pub checkpoint_every: usize,
    /// Undetermined outcomes count as failures (exit code 2).
    pub require_determinate: bool,
    pub n: usize,
    pub m: usize,
    pub eps0: f64,
    /// Ambient bump amplitude in `phi`; the `b` bump has half of it.
    pub amplitude: f64,
    /// Angular mode of both ambient bumps.
    pub mode: u32,
    pub freeze_ambient: bool,
    /// 0 disables regauging.
    pub regauge_every: usize,
    pub cfl_factor: f64,
    pub p: usize,
    pub curve: CurveKind,
    /// Coordinate radius `pi x0` of the initial coordinate sphere.
    pub rho0: f64,
    pub curve_eps: f64,
    pub sigma: f64,
    pub curve_cfl: f64,
    /// 0 disables resampling.
    pub resample_ratio: f64,
    pub flipped: bool,
    pub blowup_h: f64,
    pub roundness: f64,
    pub geodesic: f64,
    pub sustain_fraction: f64,
    pub min_samples: usize,
    pub rho0_values: Vec<f64>,
    pub amplitude_values: Vec<f64>,
    /// Evaluate the inequality suite every this many monitor samples.
    pub snapshot_every: usize,
    /// `key = value` for every default that was applied, in key order.
    pub defaults_applied: Vec<String>,
}

struct Raw {
    values: BTreeMap<&'static str, (String, usize)>,
    defaults: Vec<String>,
}

impl Raw {
    fn take<T>(&mut self, key: &'static str, default: T, check: impl Fn(&T) -> bool, range: &str) -> Result<T>
    where
        T: FromStr + fmt::Display,
    {
        match self.values.get(key) {
            Some((text, line)) => {
                let v: T = text.parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("cannot parse '{text}' for '{key}'"),
                })?;
                if !check(&v) {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("value {text} for '{key}' out of range {range}"),
                    });
                }
                Ok(v)
            }
            None => {
                self.defaults.push(format!("{key} = {default}"));
                Ok(default)
            }
        }
    }

    fn take_list(&mut self, key: &'static str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            Some((text, line)) => {
                if text.trim().is_empty() {
                    return Ok(Vec::new());
                }
                text.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: *line,
                            msg: format!("cannot parse '{}' in '{key}'", s.trim()),
                        })
                    })
                    .collect()
            }
            None => {
                self.defaults.push(format!("{key} = {}", join(default)));
                Ok(default.to_vec())
            }
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn positive(v: &f64) -> bool {
    v.is_finite() && *v > 0.0
}

pub fn parse_config(text: &str) -> Result<FlowConfig> {
    let mut values: BTreeMap<&'static str, (String, usize)> = BTreeMap::new();
    let mut last_line = 0;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw_line.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                msg: format!("malformed section header '{content}'"),
            })?;
            if !SECTIONS.contains(&name.trim()) {
                return Err(Error::Parse { line, msg: format!("unknown section '{}'", name.trim()) });
            }
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, found '{content}'"),
        })?;
        let k = k.trim();
        let key = KEYS
            .iter()
            .find(|&&known| known == k)
            .ok_or_else(|| Error::Parse { line, msg: format!("unknown key '{k}'") })?;
        if values.insert(key, (v.trim().to_string(), line)).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key '{k}'") });
        }
    }
    let (scenario_text, scenario_line) = values.get("scenario").cloned().ok_or_else(|| Error::Parse {
        line: last_line.max(1),
        msg: "missing required key 'scenario'".into(),
    })?;
    let scenario: Scenario = scenario_text
        .parse()
        .map_err(|msg| Error::Parse { line: scenario_line, msg })?;
    let mut raw = Raw { values, defaults: Vec::new() };
    build(scenario, &mut raw)
}

fn build(scenario: Scenario, raw: &mut Raw) -> Result<FlowConfig> {
    use Scenario::*;
    let sweep = scenario == DichotomySweep;
    let n: usize = raw.take("n", 2, |v| (2..=6).contains(v), "[2, 6]")?;
    let m: usize = raw.take("M", if sweep { 100 } else { 400 }, |v| (16..=20000).contains(v), "[16, 20000]")?;
    let bound = eps0_bound(n);
    let eps0 = raw.take("eps0", bound, |v| *v > 0.0 && *v <= bound, &format!("(0, {bound}]"))?;
    let amplitude = raw.take(
        "amplitude",
        if scenario == PinchedConvergence { 1e-3 } else { 0.0 },
        |v: &f64| v.is_finite() && v.abs() <= 0.1,
        "[-0.1, 0.1]",
    )?;
    let mode: u32 = raw.take("mode", 2, |v| (1..=16).contains(v), "[1, 16]")?;
    let freeze_ambient = raw.take("freeze_ambient", scenario == GeodesicSphereShrink, |_| true, "")?;
    let regauge_every: usize = raw.take("regauge_every", 0, |_| true, "")?;
    let cfl_factor = raw.take("cfl_factor", crate::ricci::DEFAULT_CFL, |v| positive(v) && *v <= 1.0, "(0, 1]")?;
    let p: usize = raw.take("P", m, |v| (16..=20000).contains(v), "[16, 20000]")?;
    let curve_default = match scenario {
        NearEquatorConverge | PinchedConvergence => CurveKind::NearEquator,
        _ => CurveKind::CoordinateSphere,
    };
    let curve = raw.take("curve", curve_default, |_| true, "")?;
    let rho0_default = if scenario == GeodesicSphereShrink { PI / 3.0 } else { PI / 2.0 };
    let rho0 = raw.take("rho0", rho0_default, |v| *v > 0.0 && *v < PI, "(0, pi)")?;
    let curve_eps = raw.take("curve_eps", 0.05, |v: &f64| v.is_finite() && v.abs() <= 0.2, "[-0.2, 0.2]")?;
    let sigma = raw.take("sigma", 0.1, |v| *v > 0.0 && *v < 1.0, "(0, 1)")?;
    let curve_cfl = raw.take(
        "curve_cfl",
        crate::hypersurface::flow::DEFAULT_MCF_CFL,
        |v| positive(v) && *v <= 0.5,
        "(0, 0.5]",
    )?;
    let resample_ratio = raw.take("resample_ratio", 1.5, |v| *v == 0.0 || *v > 1.0, "0 or > 1")?;
    let orientation: String = raw.take("orientation", "standard".to_string(), |v| v == "standard" || v == "flipped", "{standard, flipped}")?;
    let horizon = raw.take("horizon", 1.0, positive, "(0, inf)")?;
    let stride: usize = raw.take("stride", 100, |v| *v >= 1, "[1, inf)")?;
    let checkpoint_every: usize = raw.take("checkpoint_every", 0, |_| true, "")?;
    let require_determinate = raw.take("require_determinate", false, |_| true, "")?;
    let snapshot_every: usize = raw.take("snapshot_every", 1, |v| *v >= 1, "[1, inf)")?;
    let th = crate::hypersurface::Thresholds::default();
    let blowup_h = raw.take("blowup_h", th.blowup_h, positive, "(0, inf)")?;
    let roundness = raw.take("roundness", th.roundness, positive, "(0, inf)")?;
    let geodesic = raw.take("geodesic", th.geodesic, positive, "(0, inf)")?;
    let sustain_fraction = raw.take("sustain_fraction", th.sustain_fraction, |v| *v > 0.0 && *v <= 1.0, "(0, 1]")?;
    let min_samples: usize = raw.take("min_samples", th.min_samples, |v| *v >= 2, "[2, inf)")?;
    let (rho_default, amp_default): (Vec<f64>, Vec<f64>) = if sweep {
        (vec![PI / 4.0, PI / 3.0, 5.0 * PI / 12.0, PI / 2.0], vec![0.0, 5e-4, 1e-3])
    } else {
        (Vec::new(), Vec::new())
    };
    let rho0_values = raw.take_list("rho0_values", &rho_default)?;
    let amplitude_values = raw.take_list("amplitude_values", &amp_default)?;
    let mut defaults_applied = std::mem::take(&mut raw.defaults);
    defaults_applied.sort();
    Ok(FlowConfig {
        scenario,
        horizon,
        stride,
        checkpoint_every,
        require_determinate,
        n,
        m,
        eps0,
        amplitude,
        mode,
        freeze_ambient,
        regauge_every,
        cfl_factor,
        p,
        curve,
        rho0,
        curve_eps,
        sigma,
        curve_cfl,
        resample_ratio,
        flipped: orientation == "flipped",
        blowup_h,
        roundness,
        geodesic,
        sustain_fraction,
        min_samples,
        rho0_values,
        amplitude_values,
        snapshot_every,
        defaults_applied,
    })
}

impl FlowConfig {
    /// Full configuration in the input format; parsing it back gives the
    /// same values with no defaults applied.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("scenario", self.scenario.to_string());
        kv("horizon", self.horizon.to_string());
        kv("stride", self.stride.to_string());
        kv("checkpoint_every", self.checkpoint_every.to_string());
        kv("require_determinate", self.require_determinate.to_string());
        kv("snapshot_every", self.snapshot_every.to_string());
        kv("n", self.n.to_string());
        kv("M", self.m.to_string());
        kv("eps0", self.eps0.to_string());
        kv("amplitude", self.amplitude.to_string());
        kv("mode", self.mode.to_string());
        kv("freeze_ambient", self.freeze_ambient.to_string());
        kv("regauge_every", self.regauge_every.to_string());
        kv("cfl_factor", self.cfl_factor.to_string());
        kv("P", self.p.to_string());
        kv("curve", self.curve.to_string());
        kv("rho0", self.rho0.to_string());
        kv("curve_eps", self.curve_eps.to_string());
        kv("sigma", self.sigma.to_string());
        kv("curve_cfl", self.curve_cfl.to_string());
        kv("resample_ratio", self.resample_ratio.to_string());
        kv("orientation", if self.flipped { "flipped" } else { "standard" }.to_string());
        kv("blowup_h", self.blowup_h.to_string());
        kv("roundness", self.roundness.to_string());
        kv("geodesic", self.geodesic.to_string());
        kv("sustain_fraction", self.sustain_fraction.to_string());
        kv("min_samples", self.min_samples.to_string());
        kv("rho0_values", join(&self.rho0_values));
        kv("amplitude_values", join(&self.amplitude_values));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_alone_gets_documented_defaults() {
        let c = parse_config("scenario = round_fixed_point\n").unwrap();
        assert_eq!((c.n, c.m, c.p), (2, 400, 400));
        assert_eq!(c.sigma, 0.1);
        assert_eq!(c.eps0, 1.0 / 12.0);
        assert!(c.defaults_applied.contains(&"n = 2".to_string()));
        assert!(c.defaults_applied.contains(&"sigma = 0.1".to_string()));
        assert!(!c.defaults_applied.iter().any(|d| d.starts_with("scenario")));
    }

    #[test]
    fn unknown_key_is_reported_with_its_line() {
        let e = parse_config("epz0 = 0.08").unwrap_err();
        assert_eq!(e.to_string(), "unknown key 'epz0' at line 1");
    }

    #[test]
    fn eps0_bound_depends_on_n() {
        assert!(parse_config("scenario = pinched_convergence\neps0 = 0.0833").is_ok());
        let e = parse_config("scenario = pinched_convergence\neps0 = 0.09").unwrap_err();
        assert!(e.to_string().ends_with("at line 2"), "{e}");
        assert!(parse_config("scenario = pinched_convergence\nn = 3\neps0 = 0.07").is_err());
    }

    #[test]
    fn sections_comments_and_errors() {
        let text = "# run\n[run]\nscenario = geodesic_sphere_shrink  # closed form\n\n[curve]\nP = 200\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.p, 200);
        assert!(c.freeze_ambient);
        assert!((c.rho0 - PI / 3.0).abs() < 1e-15);
        assert!(parse_config("[bogus]\nscenario = round_fixed_point").is_err());
        let e = parse_config("n = 2\nM = 100\n").unwrap_err();
        assert!(e.to_string().contains("missing required key 'scenario'"), "{e}");
        let e = parse_config("scenario = round_fixed_point\nM = ten").unwrap_err();
        assert!(e.to_string().ends_with("at line 2"));
        assert!(parse_config("scenario = round_fixed_point\nn = 2\nn = 3").is_err());
        assert!(parse_config("scenario = nowhere").is_err());
    }

    #[test]
    fn text_form_roundtrips() {
        let c = parse_config("scenario = dichotomy_sweep\nrho0_values = 0.5, 1.0").unwrap();
        let back = parse_config(&c.to_text()).unwrap();
        assert!(back.defaults_applied.is_empty());
        assert_eq!(FlowConfig { defaults_applied: Vec::new(), ..c }, back);
    }

    #[test]
    fn sweep_defaults() {
        let c = parse_config("scenario = dichotomy_sweep").unwrap();
        assert_eq!(c.m, 100);
        assert_eq!(c.rho0_values.len(), 4);
        assert_eq!(c.amplitude_values.len(), 3);
        let c = parse_config("scenario = dichotomy_sweep\nrho0_values =\namplitude_values =").unwrap();
        assert!(c.rho0_values.is_empty() && c.amplitude_values.is_empty());
    }
}
