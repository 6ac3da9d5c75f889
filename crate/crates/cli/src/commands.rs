use std::fmt::Write as _;

use qhj_impulse::ensemble::{run_ensemble, EnsembleReport, EnsembleSpec};
use qhj_impulse::perturbation::{copenhagen_e1, trajectory_e1};
use qhj_impulse::{MatrixElementVariant, TrajectoryClock, TrajectoryE1, TransferCase};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::format::{float, Csv};

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["t", "x", "direction", "cycle", "sheet_epoch"];

pub const PERTURB_COLUMNS: [&str; 17] = [
    "a",
    "b",
    "c",
    "epsilon",
    "force",
    "time_weight",
    "gamma",
    "tau0",
    "case",
    "direction",
    "cycle",
    "sheet_epoch",
    "window_lo",
    "window_hi",
    "trajectory_e1",
    "copenhagen_e1_original",
    "copenhagen_e1_errata",
];

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "epsilon",
    "n",
    "mean_e1",
    "stderr_e1",
    "left_wall_plus",
    "right_wall_plus",
    "right_wall_minus",
    "left_wall_minus",
    "interior_zero",
    "skipped",
    "copenhagen_e1_original",
    "copenhagen_e1_errata",
];

pub const SAMPLE_COLUMNS: [&str; 9] = ["epsilon", "index", "microstate", "a", "b", "c", "tau0", "e1", "case"];

/// Samples the particle position at `n_points` evenly spaced instants over
/// `n_cycles` periods from `tau0`, checking each row against the exact
/// equation of motion.
pub fn cmd_trajectory(cfg: &RunConfig) -> Result<String, CliError> {
    let well = cfg.well_model()?;
    let ms = cfg.microstate()?;
    let t = &cfg.trajectory;
    if !(t.n_cycles > 0.0 && t.n_cycles.is_finite()) {
        return Err(qhj_impulse::Error::Input(format!("n_cycles = {} must be > 0", t.n_cycles)).into());
    }
    let clock = TrajectoryClock::new(well, ms, t.tau0)?;
    let span = t.n_cycles * clock.period();
    let mut csv = Csv::with_header(&TRAJECTORY_COLUMNS);
    for i in 0..t.n_points {
        let time = if t.n_points == 1 {
            t.tau0
        } else {
            t.tau0 + span * i as f64 / (t.n_points - 1) as f64
        };
        let s = clock.locate_particle(time)?;
        let back = clock.exact_time_of_position(s.x, s.direction)? + s.sheet_epoch;
        if (back - time).abs() > 1e-9 * time.abs().max(1.0) {
            return Err(CliError::Verification(format!(
                "row {i}: x = {} maps back to t = {back}, not {time}",
                s.x
            )));
        }
        csv.row([
            float(time),
            float(s.x),
            s.direction.as_str().to_string(),
            s.cycle_index.to_string(),
            float(s.sheet_epoch),
        ]);
    }
    Ok(csv.into_string())
}

#[derive(Debug, Clone)]
pub struct PerturbReport {
    pub trajectory: TrajectoryE1,
    pub copenhagen_original: f64,
    pub copenhagen_errata: f64,
    pub text: String,
    pub csv: String,
}

pub fn cmd_perturb(cfg: &RunConfig) -> Result<PerturbReport, CliError> {
    let well = cfg.well_model()?;
    let ms = cfg.microstate()?;
    let spec = cfg.impulse_spec(&well)?;
    let tau0 = cfg.perturb.tau0;
    let r = trajectory_e1(&well, &ms, &spec, tau0)?;
    let orig = copenhagen_e1(&well, &spec, MatrixElementVariant::Original);
    let errata = copenhagen_e1(&well, &spec, MatrixElementVariant::Errata);

    let mut text = String::new();
    let _ = writeln!(text, "microstate      a = {}, b = {}, c = {}", ms.a(), ms.b(), ms.c());
    let _ = writeln!(
        text,
        "impulse         F = {}, eps = {}, gamma = {}, T = {}, tau0 = {}",
        spec.force(),
        spec.epsilon(),
        spec.gamma(),
        spec.time_weight(),
        tau0
    );
    let _ = writeln!(
        text,
        "sheet           {} (cycle {}, epoch {}), gamma - epoch = {}",
        r.direction, r.cycle_index, r.sheet_epoch, r.since_epoch
    );
    let _ = writeln!(text, "case            {} on ({}, {}]", r.case, r.window.lo, r.window.hi);
    let _ = writeln!(text, "trajectory E1   {}", r.e1);
    let _ = writeln!(text, "copenhagen E1   {} (original), {} (errata)", orig.e1, errata.e1);

    let mut csv = Csv::with_header(&PERTURB_COLUMNS);
    csv.row([
        float(ms.a()),
        float(ms.b()),
        float(ms.c()),
        float(spec.epsilon()),
        float(spec.force()),
        float(spec.time_weight()),
        float(spec.gamma()),
        float(tau0),
        r.case.to_string(),
        r.direction.as_str().to_string(),
        r.cycle_index.to_string(),
        float(r.sheet_epoch),
        float(r.window.lo),
        float(r.window.hi),
        float(r.e1),
        float(orig.e1),
        float(errata.e1),
    ]);
    Ok(PerturbReport {
        trajectory: r,
        copenhagen_original: orig.e1,
        copenhagen_errata: errata.e1,
        text,
        csv: csv.into_string(),
    })
}

#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub runs: Vec<(f64, EnsembleReport)>,
    pub summary_csv: String,
    pub samples_csv: Option<String>,
    pub text: String,
}

/// One ensemble per band width: `epsilons`, or the configured width if
/// empty.
pub fn cmd_ensemble(cfg: &RunConfig, epsilons: &[f64], keep_samples: bool) -> Result<EnsembleOutput, CliError> {
    let well = cfg.well_model()?;
    let source = cfg.microstate_source()?;
    let widths: Vec<f64> = if epsilons.is_empty() {
        vec![cfg.impulse.epsilon]
    } else {
        epsilons.to_vec()
    };
    let mut summary = Csv::with_header(&SUMMARY_COLUMNS);
    let mut samples = keep_samples.then(|| Csv::with_header(&SAMPLE_COLUMNS));
    let mut text = String::new();
    let mut runs = Vec::new();
    for eps in widths {
        let mut c = cfg.clone();
        c.impulse.epsilon = eps;
        let impulse = c.impulse_spec(&well)?;
        let mut spec = EnsembleSpec::new(cfg.ensemble.n, source.clone(), cfg.ensemble.seed, impulse);
        spec.error_policy = cfg.error_policy();
        spec.keep_samples = keep_samples;
        let report = run_ensemble(&spec, &well)?;

        let mut row = vec![
            float(eps),
            report.n.to_string(),
            float(report.mean_e1),
            float(report.stderr_e1),
        ];
        row.extend(TransferCase::ALL.iter().map(|&case| report.case_count(case).to_string()));
        row.push(report.skipped.len().to_string());
        row.push(float(report.copenhagen_e1_original));
        row.push(float(report.copenhagen_e1_errata));
        summary.row(row);

        if let (Some(out), Some(recs)) = (samples.as_mut(), report.samples.as_ref()) {
            for s in recs {
                let ms = report.per_microstate[s.microstate_index].microstate;
                out.row([
                    float(eps),
                    s.index.to_string(),
                    s.microstate_index.to_string(),
                    float(ms.a()),
                    float(ms.b()),
                    float(ms.c()),
                    float(s.tau0),
                    float(s.e1),
                    s.case.to_string(),
                ]);
            }
        }

        let _ = writeln!(
            text,
            "eps = {eps}: <E1> = {} +/- {} (n = {}), Copenhagen E1 = {} (original), {} (errata)",
            report.mean_e1, report.stderr_e1, report.n, report.copenhagen_e1_original, report.copenhagen_e1_errata
        );
        for case in TransferCase::ALL {
            let _ = writeln!(
                text,
                "    {:<17} {:>10}  mean {}",
                case.as_str(),
                report.case_count(case),
                report.case_mean(case)
            );
        }
        if report.per_microstate.len() > 1 {
            for (i, m) in report.per_microstate.iter().enumerate() {
                let ms = m.microstate;
                let _ = writeln!(
                    text,
                    "    microstate {i:>3} ({:.4}, {:.4}, {:.4})  mean {} +/- {}",
                    ms.a(),
                    ms.b(),
                    ms.c(),
                    m.moments.mean,
                    m.moments.stderr()
                );
            }
        }
        runs.push((eps, report));
    }
    Ok(EnsembleOutput {
        runs,
        summary_csv: summary.into_string(),
        samples_csv: samples.map(Csv::into_string),
        text,
    })
}

