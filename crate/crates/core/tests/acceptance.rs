//! Acceptance suite: one PASS/FAIL line per criterion, desk-scale defaults.
//!
//! Runs without the libtest harness so the lines always reach the terminal.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ricci_mcf::driver::scenario::{fixed_point_drift, initial_metric, run_scenario, Checks};
use ricci_mcf::driver::sweep::{boundary_check, sweep};
use ricci_mcf::driver::{parse_config, FlowConfig};
use ricci_mcf::hypersurface::flow::coupled_column;
use ricci_mcf::hypersurface::Outcome;
use ricci_mcf::ricci::{decay_fit, run_nrf, AmbientFlowSeries, NrfConfig};
use ricci_mcf::verify::suite::{fixed_point_suite, oracle_suite, refinement_suite};
use ricci_mcf::warped::{pinching_check, AmbientMetric, Perturbation};

type Verdict = Result<String, String>;

fn cfg(text: &str) -> FlowConfig {
    parse_config(text).expect("scenario config")
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_fixed_point() -> Verdict {
    let c = cfg("scenario = round_fixed_point");
    let r = run_scenario(&c, None, Checks::None, None).map_err(|e| e.to_string())?;
    let drift = fixed_point_drift(&r.run, &r.ambient);
    let t_end = r.run.final_state.t;
    check(
        drift <= 1e-10 && (t_end - 1.0).abs() < 1e-12 && r.outcome == Outcome::TotallyGeodesicLimit,
        format!("max monitor drift {drift:.3e} over t = {t_end}, outcome {}", r.outcome),
    )
}

fn c2_geodesic_sphere() -> Verdict {
    let c = cfg("scenario = geodesic_sphere_shrink");
    let r = run_scenario(&c, None, Checks::None, None).map_err(|e| e.to_string())?;
    // cos rho(t) = cos(pi/3) e^{2t}, so rho reaches 0 at t = ln 2 / 2
    let t_exact = 2f64.ln() / 2.0;
    let ext = r.extinction_estimate().ok_or("no extinction estimate")?;
    let ext_err = (ext - t_exact).abs() / t_exact;
    let mut traj = 0.0f64;
    for m in &r.run.monitors {
        let rho = (2.0 / m.max_abs_h()).atan();
        if rho < 0.1 {
            break;
        }
        let exact = (0.5 * (2.0 * m.t).exp()).acos();
        traj = traj.max((rho - exact).abs());
    }
    check(
        ext_err <= 0.01 && traj <= 1e-3 && r.outcome == Outcome::ShrinkToRoundPoint,
        format!("extinction {ext:.6} vs {t_exact:.6} (rel {ext_err:.2e}), radius error {traj:.2e}, outcome {}", r.outcome),
    )
}

fn decay_run() -> Result<(AmbientMetric, AmbientFlowSeries), String> {
    let g = initial_metric(&cfg("scenario = pinched_convergence")).map_err(|e| e.to_string())?;
    let s = run_nrf(&g, &NrfConfig { horizon: 1.0, stride: 20, eps0: 1.0 / 12.0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    Ok((g, s))
}

fn c3_ambient_decay(s: &AmbientFlowSeries) -> Verdict {
    let t = s.times();
    let e = s.column("maxE").map_err(|e| e.to_string())?;
    let horizon = *t.last().unwrap();
    let settled: Vec<f64> = t.iter().zip(&e).filter(|(t, _)| **t >= 0.25 * horizon).map(|(_, v)| *v).collect();
    let monotone = settled.windows(2).all(|w| w[1] < w[0]);
    let fit = decay_fit(&t, &e, (0.5 * horizon, horizon)).map_err(|e| e.to_string())?;
    let band = s.monitors.iter().map(|m| (m.rbar - 6.0).abs()).fold(0.0, f64::max);
    check(
        s.within_hypothesis && monotone && fit.r2 >= 0.99 && fit.lambda_hat > 0.0 && band <= 6.0 / 12.0,
        format!(
            "hypothesis {}, monotone after t = {:.2}: {monotone}, lambda {:.4}, R^2 {:.8}, max |rbar - 6| {band:.3e}",
            s.within_hypothesis,
            0.25 * horizon,
            fit.lambda_hat,
            fit.r2
        ),
    )
}

fn c4_c5_pinched() -> (Verdict, Verdict) {
    let c = cfg("scenario = pinched_convergence");
    let r = match run_scenario(&c, None, Checks::None, None) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let mons = &r.run.monitors;
    let p0 = mons[0].max_p;
    let growth = mons.iter().map(|m| m.max_p - p0).fold(f64::NEG_INFINITY, f64::max);
    let completed = (r.run.final_state.t - c.horizon).abs() < 1e-12;
    let c4 = check(
        p0 < 0.0 && growth <= 1e-3 && completed,
        format!("maxP(0) = {p0:.4e}, max growth {growth:.3e}, reached t = {}", r.run.final_state.t),
    );
    let t: Vec<f64> = mons.iter().map(|m| m.t).collect();
    let window = (0.5 * c.horizon, c.horizon);
    let fits = ["maxFsigma", "maxGradH2"].map(|col| {
        coupled_column(mons, col)
            .and_then(|v| decay_fit(&t, &v, window))
            .map_err(|e| e.to_string())
    });
    let c5 = match fits {
        [Ok(f), Ok(g)] => check(
            f.lambda_hat > 0.0 && g.lambda_hat > 0.0,
            format!(
                "f_sigma rate {:.4} (R^2 {:.6}), |grad H|^2 rate {:.4} (R^2 {:.6})",
                f.lambda_hat, f.r2, g.lambda_hat, g.r2
            ),
        ),
        [a, b] => Err(format!("fit failed: {:?} {:?}", a.err(), b.err())),
    };
    (c4, c5)
}

fn c6_residuals() -> Verdict {
    let mut rows = fixed_point_suite(2, 400).map_err(|e| e.to_string())?;
    rows.extend(refinement_suite(2, &[100, 200, 400]).map_err(|e| e.to_string())?);
    let detail = rows
        .iter()
        .map(|r| match r.order {
            Some(o) => format!("{} order {o:.3}", r.check),
            None => format!("{} {:.2e}", r.check, r.max_residual),
        })
        .collect::<Vec<_>>()
        .join("; ");
    check(rows.iter().all(|r| r.pass), detail)
}

fn c7_oracle() -> Verdict {
    let rows = oracle_suite(&[100, 200, 400]).map_err(|e| e.to_string())?;
    let detail = rows
        .iter()
        .map(|r| format!("{} {:.2e} order {}", r.check, r.max_residual, r.order.map_or("-".into(), |o| format!("{o:.3}"))))
        .collect::<Vec<_>>()
        .join("; ");
    check(rows.iter().all(|r| r.pass), detail)
}

fn c8_conservation(decay: &AmbientFlowSeries) -> Verdict {
    let mut runs = vec![("decay M=400".to_string(), decay.clone())];
    let extra = [
        ("round M=200", None),
        ("amp 5e-4 mode 2 M=200", Some(Perturbation { amp_phi: 5e-4, mode_phi: 2, amp_b: 2.5e-4, mode_b: 2 })),
        ("amp 5e-4 mode 3 M=200", Some(Perturbation { amp_phi: 5e-4, mode_phi: 3, amp_b: 2.5e-4, mode_b: 3 })),
        ("amp 2e-4 mode 4 M=200", Some(Perturbation { amp_phi: 2e-4, mode_phi: 4, amp_b: 1e-4, mode_b: 4 })),
    ];
    for (name, p) in extra {
        let g = match p {
            None => AmbientMetric::round(2, 1.0, 200),
            Some(p) => AmbientMetric::perturbed(2, 1.0, 200, p),
        }
        .map_err(|e| e.to_string())?;
        if !pinching_check(&g, 1.0 / 12.0).map_err(|e| e.to_string())?.holds {
            return Err(format!("{name} does not satisfy the ambient hypothesis"));
        }
        let s = run_nrf(&g, &NrfConfig { horizon: 1.0, ..Default::default() }).map_err(|e| e.to_string())?;
        runs.push((name.to_string(), s));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in &runs {
        let drift = s.volume_drift();
        ok &= drift <= 1e-5 && s.min_rbar_increment >= -1e-8;
        parts.push(format!("{name}: drift {drift:.1e}, min rbar step {:.1e}", s.min_rbar_increment));
    }
    check(ok, parts.join("; "))
}

fn c9_sweep() -> Verdict {
    let c = cfg("scenario = dichotomy_sweep");
    let rows = sweep(&c, None, Checks::None);
    let b = boundary_check(&rows);
    // at zero amplitude only the equator is a fixed point below the horizon
    let expected = |rho0: f64| if rho0 < PI / 2.0 { Outcome::ShrinkToRoundPoint } else { Outcome::TotallyGeodesicLimit };
    let matches = rows.iter().filter(|r| r.amplitude == 0.0).all(|r| r.outcome == expected(r.rho0));
    check(
        b.pass() && matches && rows.len() == 12,
        format!(
            "{} cells, aborted {}, undetermined {}, monotone {}, round column as expected {matches}",
            rows.len(),
            b.aborted,
            b.undetermined,
            b.monotone
        ),
    )
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
}

fn report(id: u32, name: &str, v: &Verdict, secs: f64, failed: &mut u32) {
    let (tag, detail) = match v {
        Ok(d) => ("PASS", d),
        Err(d) => {
            *failed += 1;
            ("FAIL", d)
        }
    };
    println!("criterion {id} {tag} [{name}] ({secs:.1}s) {detail}");
}

fn main() -> ExitCode {
    let mut failed = 0;
    let timed = |f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = guarded(f);
        (v, t.elapsed().as_secs_f64())
    };

    let (v, s) = timed(&mut c1_fixed_point);
    report(1, "double fixed point", &v, s, &mut failed);
    let (v, s) = timed(&mut c2_geodesic_sphere);
    report(2, "geodesic sphere extinction", &v, s, &mut failed);

    let t = Instant::now();
    let decay = catch_unwind(decay_run).unwrap_or_else(|_| Err("panicked".into()));
    let decay_secs = t.elapsed().as_secs_f64();
    let (v, s) = match &decay {
        Ok((_, series)) => timed(&mut || c3_ambient_decay(series)),
        Err(e) => (Err(e.clone()), 0.0),
    };
    report(3, "ambient decay", &v, s + decay_secs, &mut failed);

    let t = Instant::now();
    let (c4, c5) = catch_unwind(c4_c5_pinched).unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    let secs = t.elapsed().as_secs_f64();
    report(4, "pinching preservation", &c4, secs, &mut failed);
    report(5, "curvature decay signatures", &c5, secs, &mut failed);

    let (v, s) = timed(&mut c6_residuals);
    report(6, "identity residuals", &v, s, &mut failed);
    let (v, s) = timed(&mut c7_oracle);
    report(7, "oracle equivalence", &v, s, &mut failed);
    let (v, s) = match &decay {
        Ok((_, series)) => timed(&mut || c8_conservation(series)),
        Err(e) => (Err(e.clone()), 0.0),
    };
    report(8, "conservation", &v, s, &mut failed);
    let (v, s) = timed(&mut c9_sweep);
    report(9, "dichotomy sweep", &v, s, &mut failed);

    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
