//! Quick invariant suites, runnable from the command line.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qhj_impulse::ensemble::{run_ensemble, sample_trajectory_microstate, EnsembleSpec, MicrostateSource, SamplerParams};
use qhj_impulse::oracle::{
    canonical_fd_e1, fit_convergence_order, matrix_element_quadrature, reversion_round_trip_error, FdRoute,
    QuadratureSpec,
};
use qhj_impulse::perturbation::{case_window, copenhagen_bracket, copenhagen_matrix_element, trajectory_e1_case};
use qhj_impulse::{
    Direction, EigenPairContext, ImpulseSpec, MatrixElementVariant, Microstate, TrajectoryClock, TransferCase,
    WellModel,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub const GROUPS: [&str; 10] = [
    "model",
    "reconstruction",
    "wronskian",
    "qshje",
    "kinematics",
    "copenhagen",
    "classical-branch",
    "fd-oracle",
    "reversion-order",
    "ensemble",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub groups: Vec<GroupResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.outcome.is_ok())
    }

    pub fn render(&self) -> String {
        self.groups
            .iter()
            .map(|g| match &g.outcome {
                Ok(()) => format!("PASS {}\n", g.name),
                Err(e) => format!("FAIL {}: {e}\n", g.name),
            })
            .collect()
    }
}

struct Ctx {
    well: WellModel,
    ms: Microstate,
    random: Vec<Microstate>,
}

type Check = Result<(), String>;
type Suite = (&'static str, fn(&Ctx) -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: qhj_impulse::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn grid(q: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..n).map(move |i| -q + 2.0 * q * i as f64 / n as f64)
}

fn microstates(ctx: &Ctx) -> impl Iterator<Item = &Microstate> {
    std::iter::once(&ctx.ms).chain(ctx.random.iter())
}

fn model(ctx: &Ctx) -> Check {
    let w = &ctx.well;
    let e = w.action().powi(2) / (32.0 * w.mass() * w.q().powi(2));
    ensure((e / w.ground_energy() - 1.0).abs() < 1e-14, || {
        format!("E0 = {} but J^2/(32mq^2) = {e}", w.ground_energy())
    })?;
    for ms in microstates(ctx) {
        let g = core(ms.scaled(3.7))?.g();
        ensure((g / ms.g() - 1.0).abs() < 1e-12, || format!("G not scale invariant for {ms:?}"))?;
    }
    Ok(())
}

fn reconstruction(ctx: &Ctx) -> Check {
    for ms in microstates(ctx) {
        let ep = EigenPairContext::new(ctx.well, *ms);
        for x in grid(ctx.well.q(), 100) {
            let d = (core(ep.reconstruct_psi(x))? - core(ep.phi(x))?).abs();
            ensure(d <= 1e-12, || format!("|psi - phi| = {d:e} at x = {x} for {ms:?}"))?;
        }
    }
    Ok(())
}

fn wronskian(ctx: &Ctx) -> Check {
    let w = &ctx.well;
    for ms in microstates(ctx) {
        let ep = EigenPairContext::new(*w, *ms);
        let target = 2.0 * w.mass() / (w.hbar().powi(2) * ms.discriminant());
        for x in grid(w.q(), 100) {
            let v = core(ep.wronskian(x))?;
            ensure((v * v / target - 1.0).abs() <= 1e-12, || {
                format!("W^2 = {} vs {target} at x = {x} for {ms:?}", v * v)
            })?;
        }
    }
    Ok(())
}

fn qshje(ctx: &Ctx) -> Check {
    for ms in microstates(ctx) {
        let ep = EigenPairContext::new(ctx.well, *ms);
        for x in grid(ctx.well.q(), 100) {
            let r = core(ep.qshje_residual(x))?;
            ensure(r.abs() <= 1e-9, || format!("residual {r:e} at x = {x} for {ms:?}"))?;
        }
    }
    Ok(())
}

fn kinematics(ctx: &Ctx) -> Check {
    for ms in &ctx.random {
        let clock = core(TrajectoryClock::new(ctx.well, *ms, 0.3))?;
        for i in 0..50 {
            let t = -2.0 + 0.17 * i as f64;
            let s = core(clock.locate_particle(t))?;
            let back = core(clock.exact_time_of_position(s.x, s.direction))? + s.sheet_epoch;
            ensure((back - t).abs() < 1e-9, || format!("t = {t} maps back to {back} for {ms:?}"))?;
        }
    }
    Ok(())
}

fn copenhagen(ctx: &Ctx) -> Check {
    let w = &ctx.well;
    for eps in [0.01, 0.05, 0.1, 0.3].map(|e| e * w.q()) {
        let spec = core(ImpulseSpec::new(1.0, eps, 0.0, 1.0, w))?;
        let quad = core(matrix_element_quadrature(w, &spec, &QuadratureSpec::default()))?;
        let errata = copenhagen_matrix_element(w, &spec, MatrixElementVariant::Errata);
        ensure((quad / errata - 1.0).abs() <= 1e-10, || {
            format!("eps = {eps}: quadrature {quad:e} vs bracket/q {errata:e}")
        })?;
        ensure(errata == copenhagen_bracket(w, eps) / w.q(), || "errata != original/q".into())?;
    }
    Ok(())
}

fn classical_branch(ctx: &Ctx) -> Check {
    let w = &ctx.well;
    let ms = Microstate::classical();
    let spec = core(ImpulseSpec::new(1.3, 0.1 * w.q(), 0.0, 0.7, w))?;
    let clock = core(TrajectoryClock::new(*w, ms, 0.0))?;
    let v = spec.force() * w.plane_wave_speed() * spec.time_weight();
    for (case, sign) in [
        (TransferCase::LeftWallPlus, 1.0),
        (TransferCase::RightWallPlus, -1.0),
        (TransferCase::RightWallMinus, 1.0),
        (TransferCase::LeftWallMinus, -1.0),
    ] {
        let win = core(case_window(case, &clock, spec.epsilon()))?;
        let e = core(trajectory_e1_case(case, w, &ms, &spec, 0.5 * (win.lo + win.hi)))?;
        ensure((e - sign * v).abs() <= 1e-14 * v.abs().max(1.0), || {
            format!("{case}: {e} vs {}", sign * v)
        })?;
    }
    Ok(())
}

fn wall_cases() -> [(TransferCase, Direction); 4] {
    [
        (TransferCase::LeftWallPlus, Direction::Positive),
        (TransferCase::RightWallPlus, Direction::Positive),
        (TransferCase::RightWallMinus, Direction::Negative),
        (TransferCase::LeftWallMinus, Direction::Negative),
    ]
}

fn fd_oracle(ctx: &Ctx) -> Check {
    let w = &ctx.well;
    let spec = core(ImpulseSpec::new(1.0, 1e-3 * w.q(), 0.0, 1.0, w))?;
    for (i, ms) in ctx.random.iter().enumerate() {
        let (case, dir) = wall_cases()[i % 4];
        let clock = core(TrajectoryClock::new(*w, *ms, 0.0))?;
        let win = core(case_window(case, &clock, spec.epsilon()))?;
        let s = win.lo + 0.37 * (win.hi - win.lo);
        let tau0 = match dir {
            Direction::Positive => -s,
            Direction::Negative => -s - clock.sheet_shift(),
        };
        let closed = core(trajectory_e1_case(case, w, ms, &spec, s))?;
        let fd = core(canonical_fd_e1(w, ms, &spec, tau0, 1e-7, FdRoute::Exact))?;
        ensure((closed / fd - 1.0).abs() <= 1e-5, || format!("{case} for {ms:?}: {closed} vs {fd}"))?;
    }
    Ok(())
}

fn reversion_order(ctx: &Ctx) -> Check {
    for ms in ctx.random.iter().take(3) {
        let clock = core(TrajectoryClock::new(ctx.well, *ms, 0.0))?;
        let q = ctx.well.q();
        let pts = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|&e| core(reversion_round_trip_error(&clock, e * q, 0.5)).map(|err| (e * q, err)))
            .collect::<Result<Vec<_>, _>>()?;
        let p = core(fit_convergence_order(&pts))?;
        ensure((2.7..=3.3).contains(&p), || format!("order {p} for {ms:?}"))?;
    }
    Ok(())
}

fn ensemble(ctx: &Ctx) -> Check {
    let spec = core(ImpulseSpec::new(1.0, 0.1 * ctx.well.q(), 0.0, 1.0, &ctx.well))?;
    let es = EnsembleSpec::new(20_000, MicrostateSource::Fixed(Microstate::classical()), 42, spec);
    let r = core(run_ensemble(&es, &ctx.well))?;
    ensure(r.mean_e1.abs() <= 3.0 * r.stderr_e1, || {
        format!("mean {} exceeds 3 stderr ({})", r.mean_e1, r.stderr_e1)
    })?;
    ensure(r.case_histogram.iter().sum::<u64>() == r.n, || "histogram does not sum to n".into())
}

/// Runs every group, or only `only`.
pub fn cmd_verify(cfg: &RunConfig, only: Option<&str>) -> Result<VerifyReport, CliError> {
    if let Some(g) = only {
        if !GROUPS.contains(&g) {
            return Err(CliError::Config(format!(
                "unknown group {g:?}; expected one of {}",
                GROUPS.join(", ")
            )));
        }
    }
    let well = cfg.well_model()?;
    let ms = cfg.microstate()?;
    cfg.impulse_spec(&well)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.ensemble.seed);
    let random = (0..12)
        .map(|_| sample_trajectory_microstate(&mut rng, &SamplerParams::default()))
        .collect::<qhj_impulse::Result<Vec<_>>>()?;
    let ctx = Ctx { well, ms, random };
    let suites: [Suite; 10] = [
        ("model", model),
        ("reconstruction", reconstruction),
        ("wronskian", wronskian),
        ("qshje", qshje),
        ("kinematics", kinematics),
        ("copenhagen", copenhagen),
        ("classical-branch", classical_branch),
        ("fd-oracle", fd_oracle),
        ("reversion-order", reversion_order),
        ("ensemble", ensemble),
    ];
    let groups = suites
        .iter()
        .filter(|(name, _)| only.is_none_or(|g| g == *name))
        .map(|&(name, f)| GroupResult { name, outcome: f(&ctx) })
        .collect();
    Ok(VerifyReport { groups })
}
