//! Monitored inequalities evaluated on flow snapshots.

use crate::error::Result;
use crate::hypersurface::flow::FlowState;
use crate::hypersurface::shape::{Orientation, PinchingParams, ShapeReport};
use crate::verify::reaction::node_contractions;
use crate::verify::report::CheckRow;
use crate::warped::pinching_check;

/// Allowed growth of `max P` over a run.
pub const MAX_P_GROWTH: f64 = 1e-3;
/// Slack for inequalities whose two sides come from finite differences.
pub const DISCRETE_TOL: f64 = 1e-6;
/// Kato slack in units of `du^2`. Next to the axis both sides scale like
/// `s^2`, so the relative difference error at a fixed node index does not
/// shrink under refinement; the absolute one falls like `du^2`.
pub const KATO_TOL_PER_DU2: f64 = 8.0;

/// The `eta` used in the gradient estimate, `1/(8(n+2))` (equal to `1/32` at `n = 2`).
pub fn kato_eta(n: usize) -> f64 {
    1.0 / (8.0 * (n as f64 + 2.0))
}

/// Per-node `|grad A|^2 - rhs` of the Kato-type inequality
/// `|grad A|^2 >= (3/(n+2) - eta) |grad H|^2 - 2/(n+2) (2/((n+2) eta) - n/(n-1)) |S|^2`
/// with `S_i = Ric(nu, e_i)`.
pub fn kato_margins(report: &ShapeReport, eta: f64) -> Vec<f64> {
    let nf = report.n as f64;
    let c_grad = 3.0 / (nf + 2.0) - eta;
    let c_s = 2.0 / (nf + 2.0) * (2.0 / ((nf + 2.0) * eta) - nf / (nf - 1.0));
    (0..report.h.len())
        .map(|k| {
            let s2 = node_contractions(report, k).s2;
            report.grad_a2[k] - (c_grad * report.grad_h2[k] - c_s * s2)
        })
        .collect()
}

/// Inequality quantities of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotInequalities {
    pub t: f64,
    /// Smallest Kato margin relative to `1 + max |grad H|^2`.
    pub kato_margin: f64,
    /// Admissible negative margin at this curve resolution.
    pub kato_tol: f64,
    pub rbar: f64,
    pub max_p: f64,
    pub gauss_excess: f64,
    pub ambient_pinched: bool,
}

pub fn evaluate_snapshot(
    state: &FlowState,
    params: &PinchingParams,
    orientation: Orientation,
) -> Result<SnapshotInequalities> {
    let s = state.shape(params, orientation)?;
    let scale = 1.0 + s.max_grad_h2;
    let kato_margin = kato_margins(&s, kato_eta(params.n)).iter().fold(f64::INFINITY, |m, v| m.min(*v)) / scale;
    let du = 1.0 / state.curve.segments() as f64;
    Ok(SnapshotInequalities {
        t: state.t,
        kato_margin,
        kato_tol: KATO_TOL_PER_DU2 * du * du,
        rbar: state.fields().rbar,
        max_p: s.max_p,
        gauss_excess: s.gauss_excess(),
        ambient_pinched: pinching_check(&state.metric, params.eps0)?.holds,
    })
}

/// One row per inequality over a run's snapshots; the first snapshot is
/// the initial state. Empty input yields no rows.
pub fn inequality_suite(snaps: &[SnapshotInequalities], params: &PinchingParams) -> Vec<CheckRow> {
    let Some(first) = snaps.first() else {
        return Vec::new();
    };
    let nf = params.n as f64;
    let worst = |f: &dyn Fn(&SnapshotInequalities) -> f64| snaps.iter().map(f).fold(f64::NEG_INFINITY, f64::max);

    let kato = worst(&|s| -s.kato_margin);
    let kato_ok = worst(&|s| -s.kato_margin - s.kato_tol) <= 0.0;
    let centre = nf * (nf + 1.0);
    let band = worst(&|s| (s.rbar - centre).abs() - centre * params.eps0);
    let p_growth = worst(&|s| s.max_p - first.max_p);
    let mut rows = vec![
        CheckRow::new("kato_inequality", kato, None, kato_ok),
        CheckRow::new("rbar_band", band, None, band <= 0.0),
        CheckRow::new("pinching_preserved", p_growth, None, p_growth <= MAX_P_GROWTH),
    ];
    let gauss: Vec<f64> = snaps
        .iter()
        .filter(|s| s.max_p < 0.0 && s.ambient_pinched)
        .map(|s| s.gauss_excess)
        .collect();
    if !gauss.is_empty() {
        let g = gauss.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rows.push(CheckRow::new("gauss_bound", g, None, g <= DISCRETE_TOL));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{shape, ProfileCurve, Topology};
    use crate::warped::{AmbientMetric, Perturbation};

    #[test]
    fn both_sides_vanish_on_umbilic_spheres() {
        let g = AmbientMetric::round(2, 1.0, 128).unwrap();
        let c = ProfileCurve::coordinate_sphere(0.3, 128).unwrap();
        let s = shape(&c, &g, &PinchingParams::new(2, 0.1).unwrap()).unwrap();
        for m in kato_margins(&s, kato_eta(2)) {
            assert!(m.abs() < 1e-10, "{m}");
        }
    }

    #[test]
    fn holds_on_a_generic_curve_in_a_perturbed_ambient() {
        let p = Perturbation { amp_phi: 0.01, mode_phi: 3, amp_b: 0.005, mode_b: 2 };
        let g = AmbientMetric::perturbed(2, 1.0, 200, p).unwrap();
        let alpha = crate::hypersurface::curve::uniform_alpha(200);
        let x: Vec<f64> = alpha.iter().map(|a| 0.5 + 0.04 * a.cos() + 0.02 * (2.0 * a).cos()).collect();
        let c = ProfileCurve::new(x, alpha, Topology::Sphere).unwrap();
        let state = FlowState::new(0.0, g, c).unwrap();
        let params = PinchingParams::new(2, 0.1).unwrap();
        let snap = evaluate_snapshot(&state, &params, Orientation::Standard).unwrap();
        assert!(snap.kato_margin > -snap.kato_tol, "{snap:?}");
        // any violation is a discretization effect of size O(du^2)
        assert!(snap.kato_margin > -0.5 / (200.0 * 200.0), "{snap:?}");
    }

    #[test]
    fn suite_flags_growth_of_max_p() {
        let params = PinchingParams::new(2, 0.1).unwrap();
        let base = SnapshotInequalities {
            t: 0.0,
            kato_margin: 0.1,
            kato_tol: 1e-6,
            rbar: 6.0,
            max_p: -0.5,
            gauss_excess: -0.3,
            ambient_pinched: true,
        };
        let later = SnapshotInequalities { t: 1.0, max_p: -0.49, ..base };
        let rows = inequality_suite(&[base, later], &params);
        let get = |name: &str| rows.iter().find(|r| r.check == name).unwrap().pass;
        assert!(get("kato_inequality") && get("rbar_band") && get("gauss_bound"));
        assert!(!get("pinching_preserved"));
        let off_band = SnapshotInequalities { rbar: 6.0 * (1.0 + 2.0 * params.eps0), ..base };
        let rows = inequality_suite(&[base, off_band], &params);
        assert!(!rows.iter().find(|r| r.check == "rbar_band").unwrap().pass);
    }
}
