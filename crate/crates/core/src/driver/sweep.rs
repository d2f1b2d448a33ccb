//! Parameter sweeps over the initial radius and the ambient perturbation.

use std::fmt::Write as _;
use std::path::Path;

use crate::driver::config::FlowConfig;
use crate::driver::scenario::{run_scenario, Checks, RunStatus};
use crate::hypersurface::Outcome;
use crate::par;

pub const SWEEP_HEADER: &str = "rho0,amplitude,outcome,status,t_end,steps,extinction_estimate";
pub const SWEEP_CSV: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho0: f64,
    pub amplitude: f64,
    pub outcome: Outcome,
    pub status: RunStatus,
    pub t_end: f64,
    pub steps: usize,
    pub extinction_estimate: Option<f64>,
}

impl SweepRow {
    pub fn is_aborted(&self) -> bool {
        matches!(self.status, RunStatus::Aborted(_))
    }

    fn csv_line(&self) -> String {
        format!(
            "{:.14e},{:.14e},{},{},{:.14e},{},{}",
            self.rho0,
            self.amplitude,
            self.outcome,
            self.status.label(),
            self.t_end,
            self.steps,
            self.extinction_estimate.map_or(String::new(), |v| format!("{v:.14e}"))
        )
    }
}

/// Cell grid in row-major order: every `rho0` for the first amplitude, then
/// the next amplitude. An empty axis falls back to the base value.
pub fn cells(cfg: &FlowConfig) -> Vec<(f64, f64)> {
    let rhos = if cfg.rho0_values.is_empty() { vec![cfg.rho0] } else { cfg.rho0_values.clone() };
    let amps = if cfg.amplitude_values.is_empty() { vec![cfg.amplitude] } else { cfg.amplitude_values.clone() };
    amps.iter().flat_map(|&a| rhos.iter().map(move |&r| (r, a))).collect()
}

/// Runs every cell independently; a failing cell becomes an aborted row.
/// Cell `k` writes into `<out_dir>/cell_<k>` when a directory is given.
pub fn sweep(cfg: &FlowConfig, out_dir: Option<&Path>, checks: Checks) -> Vec<SweepRow> {
    let grid: Vec<(usize, (f64, f64))> = cells(cfg).into_iter().enumerate().collect();
    par::map_items(&grid, |&(k, (rho0, amplitude))| {
        let mut c = cfg.clone();
        c.rho0 = rho0;
        c.amplitude = amplitude;
        c.rho0_values.clear();
        c.amplitude_values.clear();
        let dir = out_dir.map(|d| d.join(format!("cell_{k:04}")));
        match run_scenario(&c, dir.as_deref(), checks, None) {
            Ok(r) => SweepRow {
                rho0,
                amplitude,
                outcome: r.outcome,
                status: r.status.clone(),
                t_end: r.run.final_state.t,
                steps: r.run.steps,
                extinction_estimate: r.extinction_estimate(),
            },
            Err(e) => SweepRow {
                rho0,
                amplitude,
                outcome: Outcome::Undetermined,
                status: RunStatus::Aborted(e.to_string()),
                t_end: 0.0,
                steps: 0,
                extinction_estimate: None,
            },
        }
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{}", r.csv_line()).unwrap();
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryCheck {
    pub aborted: usize,
    pub undetermined: usize,
    /// Along every amplitude, all shrinking cells lie below all geodesic
    /// cells in `rho0`.
    pub monotone: bool,
}

impl BoundaryCheck {
    pub fn pass(&self) -> bool {
        self.aborted == 0 && self.undetermined == 0 && self.monotone
    }
}

pub fn boundary_check(rows: &[SweepRow]) -> BoundaryCheck {
    let aborted = rows.iter().filter(|r| r.is_aborted()).count();
    let undetermined = rows.iter().filter(|r| !r.is_aborted() && r.outcome == Outcome::Undetermined).count();
    let mut amps: Vec<f64> = rows.iter().map(|r| r.amplitude).collect();
    amps.sort_by(f64::total_cmp);
    amps.dedup();
    let monotone = amps.iter().all(|&a| {
        let mut line: Vec<&SweepRow> = rows.iter().filter(|r| r.amplitude == a && !r.is_aborted()).collect();
        line.sort_by(|x, y| x.rho0.total_cmp(&y.rho0));
        let first_geo = line.iter().position(|r| r.outcome == Outcome::TotallyGeodesicLimit).unwrap_or(line.len());
        line[first_geo..].iter().all(|r| r.outcome == Outcome::TotallyGeodesicLimit)
            && line[..first_geo].iter().all(|r| r.outcome == Outcome::ShrinkToRoundPoint)
    });
    BoundaryCheck { aborted, undetermined, monotone }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::config::parse_config;

    fn row(rho0: f64, amplitude: f64, outcome: Outcome) -> SweepRow {
        SweepRow {
            rho0,
            amplitude,
            outcome,
            status: RunStatus::Completed,
            t_end: 1.0,
            steps: 1,
            extinction_estimate: None,
        }
    }

    #[test]
    fn empty_axes_give_one_cell() {
        let mut cfg = parse_config("scenario = dichotomy_sweep\nrho0_values =\namplitude_values =").unwrap();
        cfg.rho0 = 1.0;
        assert_eq!(cells(&cfg), vec![(1.0, cfg.amplitude)]);
    }

    #[test]
    fn boundary_detects_inversions() {
        use Outcome::*;
        let good = [row(0.5, 0.0, ShrinkToRoundPoint), row(1.0, 0.0, ShrinkToRoundPoint), row(1.5, 0.0, TotallyGeodesicLimit)];
        assert!(boundary_check(&good).pass());
        let bad = [row(0.5, 0.0, TotallyGeodesicLimit), row(1.0, 0.0, ShrinkToRoundPoint)];
        assert!(!boundary_check(&bad).monotone);
        let mut und = good.to_vec();
        und[1].outcome = Undetermined;
        let c = boundary_check(&und);
        assert_eq!(c.undetermined, 1);
        assert!(!c.pass());
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let csv = sweep_csv(&[row(0.5, 0.0, Outcome::ShrinkToRoundPoint)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1].split(',').count(), 7);
        assert!(lines[1].ends_with(','));
    }
}
