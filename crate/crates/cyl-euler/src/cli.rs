//! The `run` / `study` / `verify` commands behind the thin binary.
//!
//! Exit codes are the process-level contract: 0 all verifications pass,
//! 1 verification failure, 2 configuration or input-format error,
//! 3 solver blow-up. Everything else lives in the JSON reports.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{load_config, Overrides, RunConfig, StudyKind};
use crate::diagnostics::{
    angular_transport_check, decay_rate_fit, entropy_dissipation_integral,
    entropy_inequality_check, invariant_region_check, omega_maximum_principle,
    physical_bounds_check, source_sign_check, weak_residual, TestFunctionSpec, WeakEquation,
};
use crate::error::Error;
use crate::initial::{build_initial_data, check_admissibility};
use crate::report::{
    write_json, write_trajectory, ReportMeta, RunReport, RunResult, VerificationRecord,
};
use crate::solver::{cross_check_physical, run, Trajectory};
use crate::study::{epsilon_study, grid_refinement_study, EpsilonStudyReport, GridStudyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

fn classify_error(e: &Error) -> i32 {
    match e {
        Error::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Run every enabled verification on a trajectory.
fn run_verifications(traj: &Trajectory, cfg: &RunConfig) -> Vec<VerificationRecord> {
    let enabled = cfg.enabled_verifications();
    let p = &traj.params;
    let mut records = Vec::new();
    let testfn = |weight: bool| -> Option<TestFunctionSpec> {
        TestFunctionSpec::interior(
            cfg.testfn_x_center,
            cfg.testfn_x_width,
            cfg.testfn_t_center,
            cfg.testfn_t_width,
            weight,
            p,
        )
        .ok()
    };
    for name in &enabled {
        match name.as_str() {
            "admissibility" => {
                let raw = cfg.profile.eval_physical(&traj.grid, p);
                records.push(check_admissibility(&raw, &traj.grid, p));
            }
            "invariant-region" => records.push(invariant_region_check(traj)),
            "physical-bounds" => records.push(physical_bounds_check(traj)),
            "omega-max-principle" => records.push(omega_maximum_principle(traj)),
            "source-sign" => records.push(source_sign_check(traj)),
            "entropy-inequality" => match testfn(false) {
                Some(tf) => records.push(entropy_inequality_check(traj, &tf)),
                None => records.push(unusable_testfn_record("entropy-inequality")),
            },
            "decay-rate" => {
                let window = (1.5 * p.a_eps, (10.0 * p.a_eps).min(0.9 * p.b_eps));
                for (tag, t) in [("initial", 0.0), ("final", p.t_final)] {
                    let name = format!("decay-rate-{tag}");
                    match decay_rate_fit(traj, t, window) {
                        Ok(fit) => {
                            let metric =
                                (fit.slope_rho - p.c).abs().max((fit.slope_m - p.d).abs());
                            records.push(VerificationRecord::new(
                                name,
                                metric,
                                0.3,
                                (fit.t_snapshot, window.0),
                                format!(
                                    "slope_rho = {:.4} (target {}), slope_m = {:.4} (target {})",
                                    fit.slope_rho, p.c, fit.slope_m, p.d
                                ),
                            ));
                        }
                        Err(e) => records.push(VerificationRecord::new(
                            name,
                            f64::INFINITY,
                            0.3,
                            (t, window.0),
                            format!("fit unavailable: {e}"),
                        )),
                    }
                }
            }
            "angular-transport" => records.push(angular_transport_check(traj)),
            "weak-residual" => match testfn(true) {
                Some(tf) => {
                    let in_support = tf.snapshots_in_support(traj);
                    let warn = if in_support < 8 {
                        format!(
                            "; warning: only {in_support} snapshots inside the test support, \
                             quadrature unreliable"
                        )
                    } else {
                        String::new()
                    };
                    for eq in [
                        WeakEquation::Mass,
                        WeakEquation::NormalMomentum,
                        WeakEquation::AngularMomentum,
                    ] {
                        let value = weak_residual(traj, &tf, eq);
                        records.push(VerificationRecord::info(
                            format!("weak-residual-{eq}"),
                            value.abs(),
                            format!("signed value {value:.6e}{warn}"),
                        ));
                    }
                }
                None => records.push(unusable_testfn_record("weak-residual")),
            },
            "dissipation" => match testfn(false) {
                Some(tf) => {
                    let d = entropy_dissipation_integral(traj, &tf);
                    records.push(VerificationRecord::info(
                        "dissipation",
                        d,
                        "entropy dissipation integral over the configured bump",
                    ));
                }
                None => records.push(unusable_testfn_record("dissipation")),
            },
            "cross-check" => match cross_check_physical(traj) {
                Ok(rep) => records.push(VerificationRecord::info(
                    "cross-check",
                    rep.linf[0].max(rep.linf[1]).max(rep.linf[2]),
                    format!(
                        "physical-system residuals: L1 = {:?}, Linf = {:?}",
                        rep.l1, rep.linf
                    ),
                )),
                Err(e) => records.push(VerificationRecord::info(
                    "cross-check",
                    f64::NAN,
                    format!("unavailable: {e}"),
                )),
            },
            other => records.push(VerificationRecord::new(
                other.to_string(),
                f64::INFINITY,
                0.0,
                (0.0, 0.0),
                "unknown verification name",
            )),
        }
    }
    records
}

fn unusable_testfn_record(name: &str) -> VerificationRecord {
    VerificationRecord::new(
        name,
        f64::INFINITY,
        0.0,
        (0.0, 0.0),
        "test function support does not fit inside the run domain",
    )
}

/// Execute a run plus all enabled diagnostics, writing snapshots and the
/// report into the configured output directory.
pub fn cmd_run(config_path: &Path, over: &Overrides) -> i32 {
    let started = Instant::now();
    let cfg = match load_config(config_path, over) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let p = match cfg.params() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let scfg = cfg.solver_config(&p);
    let outcome = match run(&cfg.profile, &p, &scfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return classify_error(&e);
        }
    };
    let traj = &outcome.trajectory;
    let records = run_verifications(traj, &cfg);
    let all_pass = records.iter().all(|r| r.passed);

    let snap_dir = cfg.output_dir.join("snapshots");
    if let Err(e) = write_trajectory(&snap_dir, traj) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let report = RunReport {
        meta: ReportMeta {
            wall_time_s: started.elapsed().as_secs_f64(),
            created_unix_s: now_unix(),
        },
        result: RunResult {
            params: traj.params,
            initial: outcome.initial,
            clip_events: traj.clip_events,
            clip_fraction: traj.clip_fraction(),
            clip_flag: traj.clip_flag(),
            snapshot_extrema: traj.snapshot_extrema.clone(),
            verifications: records,
        },
    };
    if let Err(e) = write_json(&cfg.output_dir.join("report.json"), &report) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    for r in &report.result.verifications {
        println!(
            "[{}] {}: metric {:.6e} (tolerance {:.6e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.metric,
            r.tolerance
        );
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

#[derive(Serialize)]
struct StudyResult {
    epsilon_study: Option<EpsilonStudyReport>,
    grid_study: Option<GridStudyReport>,
    per_run_verifications_pass: bool,
}

#[derive(Serialize)]
struct StudyMeta {
    wall_time_s: f64,
    created_unix_s: u64,
    epsilon_run_wall_times_s: Vec<f64>,
    grid_run_wall_times_s: Vec<f64>,
}

#[derive(Serialize)]
struct StudyReportFile {
    meta: StudyMeta,
    result: StudyResult,
}

/// Execute the configured studies; exit 0 only when the Cauchy differences
/// decrease and every per-run state verification passes.
pub fn cmd_study(config_path: &Path, over: &Overrides) -> i32 {
    let started = Instant::now();
    let cfg = match load_config(config_path, over) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let inputs = cfg.study_inputs();
    let plan = cfg.study_plan();

    let mut eps_report = None;
    let mut eps_walls = Vec::new();
    let mut grid_report = None;
    let mut grid_walls = Vec::new();
    let mut per_run_pass = true;
    let mut cauchy_ok = true;

    if matches!(cfg.study_kind, StudyKind::Epsilon | StudyKind::Both) {
        match epsilon_study(&inputs, &plan) {
            Ok(out) => {
                for traj in &out.trajectories {
                    for rec in [
                        invariant_region_check(traj),
                        physical_bounds_check(traj),
                        omega_maximum_principle(traj),
                        source_sign_check(traj),
                    ] {
                        if !rec.passed {
                            eprintln!(
                                "per-run verification '{}' failed at eps = {}: metric {:.3e}",
                                rec.name, traj.params.epsilon, rec.metric
                            );
                            per_run_pass = false;
                        }
                    }
                }
                cauchy_ok &= out.report.deltas_decreasing.iter().all(|&b| b);
                // pairwise matrix as CSV
                let mut csv = String::new();
                for row in &out.report.pairwise_l1 {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
                    csv.push_str(&cells.join(","));
                    csv.push('\n');
                }
                if std::fs::create_dir_all(&cfg.output_dir).is_ok() {
                    let _ = std::fs::write(cfg.output_dir.join("pairwise_l1.csv"), csv);
                }
                eps_walls = out.wall_times_s.clone();
                eps_report = Some(out.report);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if matches!(cfg.study_kind, StudyKind::Grid | StudyKind::Both) {
        match grid_refinement_study(&inputs, &plan) {
            Ok(out) => {
                grid_walls = out.wall_times_s.clone();
                grid_report = Some(out.report);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }

    let file = StudyReportFile {
        meta: StudyMeta {
            wall_time_s: started.elapsed().as_secs_f64(),
            created_unix_s: now_unix(),
            epsilon_run_wall_times_s: eps_walls,
            grid_run_wall_times_s: grid_walls,
        },
        result: StudyResult {
            epsilon_study: eps_report,
            grid_study: grid_report,
            per_run_verifications_pass: per_run_pass,
        },
    };
    if let Err(e) = write_json(&cfg.output_dir.join("study.json"), &file) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    if let Some(rep) = &file.result.epsilon_study {
        for (k, row) in rep.rows.iter().enumerate() {
            match row.delta_l1 {
                Some(d) => println!(
                    "eps = {:.3e}: delta_L1 = ({:.3e}, {:.3e}, {:.3e}), D = {:.3e}",
                    row.epsilon, d[0], d[1], d[2], row.dissipation
                ),
                None => println!(
                    "eps = {:.3e}: baseline row {k}, D = {:.3e}",
                    row.epsilon, row.dissipation
                ),
            }
        }
        println!("cauchy decreasing: {:?}", rep.deltas_decreasing);
    }
    if cauchy_ok && per_run_pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

/// Re-run diagnostics on stored snapshots without re-solving.
pub fn cmd_verify(snapshot_dir: &Path, config_path: &Path) -> i32 {
    let started = Instant::now();
    let cfg = match load_config(config_path, &Overrides::default()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let p = match cfg.params() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut traj = match crate::report::read_trajectory(snapshot_dir, p) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    // the control constant is the observed ceiling of w_bar at t = 0
    let s0 = &traj.snapshots[0];
    let m3 = (0..s0.len())
        .map(|i| {
            let r = s0.rho_bar[i];
            s0.m_bar[i] / r + r.powf(traj.params.theta)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    traj.params.m3 = m3;

    let initial = match build_initial_data(&cfg.profile, &traj.grid, &traj.params) {
        Ok((_, rep)) => rep,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let records = run_verifications(&traj, &cfg);
    let all_pass = records.iter().all(|r| r.passed);
    let report = RunReport {
        meta: ReportMeta {
            wall_time_s: started.elapsed().as_secs_f64(),
            created_unix_s: now_unix(),
        },
        result: RunResult {
            params: traj.params,
            initial,
            clip_events: traj.clip_events,
            clip_fraction: traj.clip_fraction(),
            clip_flag: traj.clip_flag(),
            snapshot_extrema: traj.snapshot_extrema.clone(),
            verifications: records,
        },
    };
    if let Err(e) = write_json(&cfg.output_dir.join("verify_report.json"), &report) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    for r in &report.result.verifications {
        println!(
            "[{}] {}: metric {:.6e} (tolerance {:.6e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.metric,
            r.tolerance
        );
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}
