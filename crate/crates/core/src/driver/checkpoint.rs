//! Versioned text checkpoints of a coupled run.
//!
//! Layout:
//!
//! ```text
//! rmcf-checkpoint <version>
//! t <t>
//! steps <steps>
//! resamples <resamples>
//! metric <line count>
//! <ambient profile text>
//! curve <line count>
//! <profile curve text>
//! monitors <row count>
//! <one row per monitor, all columns>
//! ```
//!
//! Floats are written in shortest round-trip form, so loading restores the
//! exact bits and saving again reproduces the file byte for byte.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hypersurface::{CoupledMonitor, FlowState, ProfileCurve, Resume};
use crate::warped::AmbientMetric;

pub const CHECKPOINT_VERSION: &str = "1";
const MAGIC: &str = "rmcf-checkpoint";
const MONITOR_FIELDS: usize = 13;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: FlowState,
    pub steps: usize,
    pub resamples: usize,
    pub monitors: Vec<CoupledMonitor>,
}

fn monitor_fields(m: &CoupledMonitor) -> [f64; MONITOR_FIELDS] {
    [
        m.t,
        m.h_max,
        m.h_min,
        m.max_a2,
        m.max_traceless,
        m.max_p,
        m.max_f_sigma,
        m.max_grad_h2,
        m.min_sectional,
        m.max_e_ambient,
        m.rbar,
        m.gauss_excess,
        m.area,
    ]
}

fn monitor_from(v: &[f64]) -> CoupledMonitor {
    CoupledMonitor {
        t: v[0],
        h_max: v[1],
        h_min: v[2],
        max_a2: v[3],
        max_traceless: v[4],
        max_p: v[5],
        max_f_sigma: v[6],
        max_grad_h2: v[7],
        min_sectional: v[8],
        max_e_ambient: v[9],
        rbar: v[10],
        gauss_excess: v[11],
        area: v[12],
    }
}

impl Checkpoint {
    pub fn resume(&self) -> Resume {
        Resume { steps: self.steps, resamples: self.resamples, monitors: self.monitors.clone() }
    }

    pub fn to_text(&self) -> String {
        let metric = self.state.metric.to_text();
        let curve = self.state.curve.to_text();
        let mut s = String::new();
        writeln!(s, "{MAGIC} {CHECKPOINT_VERSION}").unwrap();
        writeln!(s, "t {:e}", self.state.t).unwrap();
        writeln!(s, "steps {}", self.steps).unwrap();
        writeln!(s, "resamples {}", self.resamples).unwrap();
        writeln!(s, "metric {}", metric.lines().count()).unwrap();
        s.push_str(&metric);
        writeln!(s, "curve {}", curve.lines().count()).unwrap();
        s.push_str(&curve);
        writeln!(s, "monitors {}", self.monitors.len()).unwrap();
        for m in &self.monitors {
            let row: Vec<String> = monitor_fields(m).iter().map(|v| format!("{v:e}")).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cur = Cursor { lines: text.lines().collect(), pos: 0 };
        let (_, header) = cur.next("the header")?;
        let mut h = header.split_whitespace();
        if h.next() != Some(MAGIC) {
            return Err(Error::Version {
                expected: format!("{MAGIC} {CHECKPOINT_VERSION}"),
                found: header.to_string(),
            });
        }
        let found = h.next().unwrap_or("");
        if found != CHECKPOINT_VERSION || h.next().is_some() {
            return Err(Error::Version { expected: CHECKPOINT_VERSION.into(), found: found.into() });
        }
        let t: f64 = cur.tagged("t")?;
        let steps: usize = cur.tagged("steps")?;
        let resamples: usize = cur.tagged("resamples")?;
        let metric_lines: usize = cur.tagged("metric")?;
        let metric = AmbientMetric::from_text(&cur.block(metric_lines, "the metric")?)?;
        let curve_lines: usize = cur.tagged("curve")?;
        let curve = ProfileCurve::from_text(&cur.block(curve_lines, "the curve")?)?;
        let count: usize = cur.tagged("monitors")?;
        let mut monitors = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, l) = cur.next("the monitors")?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse { line: no, msg: "malformed monitor row".into() })?;
            if v.len() != MONITOR_FIELDS {
                return Err(Error::Parse { line: no, msg: format!("expected {MONITOR_FIELDS} monitor columns") });
            }
            monitors.push(monitor_from(&v));
        }
        Ok(Checkpoint { state: FlowState::new(t, metric, curve)?, steps, resamples, monitors })
    }
}

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Next line and its 1-based number.
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let l = self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::Truncated(format!("checkpoint ends before {what}")))?;
        self.pos += 1;
        Ok((self.pos, *l))
    }

    fn tagged<T: std::str::FromStr>(&mut self, tag: &str) -> Result<T> {
        let (no, l) = self.next(tag)?;
        l.strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| Error::Parse { line: no, msg: format!("expected `{tag} <value>`") })
    }

    fn block(&mut self, count: usize, what: &str) -> Result<String> {
        let mut out = String::new();
        for _ in 0..count {
            out.push_str(self.next(what)?.1);
            out.push('\n');
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{Orientation, PinchingParams};
    use crate::warped::Perturbation;

    fn sample() -> Checkpoint {
        let p = Perturbation { amp_phi: 1e-3, mode_phi: 2, amp_b: 5e-4, mode_b: 2 };
        let g = AmbientMetric::perturbed(2, 1.0, 64, p).unwrap();
        let state = FlowState::new(0.1234567890123, g, ProfileCurve::near_equator(0.05, 48).unwrap()).unwrap();
        let params = PinchingParams::new(2, 0.1).unwrap();
        let m = CoupledMonitor::from_state(&state, &params, Orientation::Standard).unwrap();
        Checkpoint { state, steps: 1700, resamples: 3, monitors: vec![m, m] }
    }

    #[test]
    fn double_save_is_byte_identical() {
        let c = sample();
        let text = c.to_text();
        let back = Checkpoint::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.state.t.to_bits(), c.state.t.to_bits());
        assert_eq!(back.state.curve, c.state.curve);
        assert_eq!(back.state.metric.phi(), c.state.metric.phi());
        assert_eq!(back.monitors, c.monitors);
        assert_eq!((back.steps, back.resamples), (1700, 3));
    }

    #[test]
    fn rejects_foreign_versions_and_truncation() {
        let text = sample().to_text();
        let bumped = text.replacen("rmcf-checkpoint 1", "rmcf-checkpoint 2", 1);
        assert!(matches!(Checkpoint::from_text(&bumped), Err(Error::Version { .. })));
        let garbage = text.replacen("rmcf-checkpoint", "garbage", 1);
        assert!(matches!(Checkpoint::from_text(&garbage), Err(Error::Version { .. })));
        let cut: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
        assert!(matches!(Checkpoint::from_text(&cut), Err(Error::Truncated(_))));
    }
}
