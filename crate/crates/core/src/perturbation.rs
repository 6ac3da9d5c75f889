//! First-order energy transfer from the wall-band impulse, in the Copenhagen
//! (matrix element) and trajectory (canonical perturbation) representations.

use std::fmt;

use crate::error::{Error, Result};
use crate::kinematics::{TrajectoryClock, Wall};
use crate::model::{Direction, ImpulseSpec, Microstate, WellModel};

/// Normalisation of the ground-state matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixElementVariant {
    /// `ε²/2 - 1/(4k²) + cos(2kε)/(4k²)`.
    Original,
    /// The same bracket divided by `q`, from the normalised `ψ = q^(-1/2) cos kx`.
    Errata,
}

impl MatrixElementVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixElementVariant::Original => "original",
            MatrixElementVariant::Errata => "errata",
        }
    }
}

impl fmt::Display for MatrixElementVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopenhagenE1 {
    pub matrix_element: f64,
    /// `F · matrix_element · 𝒯`.
    pub e1: f64,
    pub variant: MatrixElementVariant,
}

/// `ε²/2 - sin²(kε)/(2k²)`, which equals `ε²/2 - 1/(4k²) + cos(2kε)/(4k²)`.
///
/// The two terms cancel to leading order, so for `kε < 1` the difference is
/// summed as the series `(1/2k²) Σ_{n≥2} (-1)^n 2^(2n-1) (kε)^(2n) / (2n)!`.
pub fn copenhagen_bracket(well: &WellModel, epsilon: f64) -> f64 {
    let k = well.k();
    let x = k * epsilon;
    if x.abs() >= 1.0 {
        let s = x.sin();
        return (x * x - s * s) / (2.0 * k * k);
    }
    let x2 = x * x;
    // n = 2 term: 8 x⁴ / 4!
    let mut term = x2 * x2 / 3.0;
    let mut sum = term;
    for n in 3..40 {
        let two_n = 2.0 * n as f64;
        term *= -4.0 * x2 / ((two_n - 1.0) * two_n);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * k * k)
}

pub fn copenhagen_matrix_element(
    well: &WellModel,
    spec: &ImpulseSpec,
    variant: MatrixElementVariant,
) -> f64 {
    let bracket = copenhagen_bracket(well, spec.epsilon());
    match variant {
        MatrixElementVariant::Original => bracket,
        MatrixElementVariant::Errata => bracket / well.q(),
    }
}

pub fn copenhagen_e1(
    well: &WellModel,
    spec: &ImpulseSpec,
    variant: MatrixElementVariant,
) -> CopenhagenE1 {
    let matrix_element = copenhagen_matrix_element(well, spec, variant);
    CopenhagenE1 {
        matrix_element,
        e1: spec.force() * matrix_element * spec.time_weight(),
        variant,
    }
}

/// Where the particle is, and which way it moves, when the impulse fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferCase {
    LeftWallPlus,
    RightWallPlus,
    RightWallMinus,
    LeftWallMinus,
    InteriorZero,
}

impl TransferCase {
    pub const ALL: [TransferCase; 5] = [
        TransferCase::LeftWallPlus,
        TransferCase::RightWallPlus,
        TransferCase::RightWallMinus,
        TransferCase::LeftWallMinus,
        TransferCase::InteriorZero,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransferCase::LeftWallPlus => "left_wall_plus",
            TransferCase::RightWallPlus => "right_wall_plus",
            TransferCase::RightWallMinus => "right_wall_minus",
            TransferCase::LeftWallMinus => "left_wall_minus",
            TransferCase::InteriorZero => "interior_zero",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Sheet on which a wall case occurs; `None` for the interior.
    pub fn direction(self) -> Option<Direction> {
        match self {
            TransferCase::LeftWallPlus | TransferCase::RightWallPlus => Some(Direction::Positive),
            TransferCase::RightWallMinus | TransferCase::LeftWallMinus => Some(Direction::Negative),
            TransferCase::InteriorZero => None,
        }
    }

    fn wall(self) -> Option<Wall> {
        match self {
            TransferCase::LeftWallPlus | TransferCase::LeftWallMinus => Some(Wall::Left),
            TransferCase::RightWallPlus | TransferCase::RightWallMinus => Some(Wall::Right),
            TransferCase::InteriorZero => None,
        }
    }

    /// `+1` when the particle leaves the wall (it gains energy), `-1` when
    /// it approaches it.
    fn sign(self) -> f64 {
        match self {
            TransferCase::LeftWallPlus | TransferCase::RightWallMinus => 1.0,
            TransferCase::RightWallPlus | TransferCase::LeftWallMinus => -1.0,
            TransferCase::InteriorZero => 0.0,
        }
    }
}

impl fmt::Display for TransferCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransferCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransferCase::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Input(format!("unknown transfer case {s:?}")))
    }
}

/// Half-open interval `(lo, hi]` of `γ - τ` measured from the sheet epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseWindow {
    pub lo: f64,
    pub hi: f64,
}

impl CaseWindow {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && s <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryE1 {
    pub e1: f64,
    pub case: TransferCase,
    /// Window of the selected case, relative to `sheet_epoch`.
    pub window: CaseWindow,
    pub direction: Direction,
    pub sheet_epoch: f64,
    /// `γ - sheet_epoch`.
    pub since_epoch: f64,
    pub cycle_index: i64,
}

/// Window of `case` on its sheet.
///
/// Each sheet spans `(-T_h, T_h]`. On `+x` the left band comes first and is
/// left when `γ - τ₊` passes `-L_ε`; the right band is entered at `R_ε`,
/// where `L_ε` and `R_ε` are the band edges of
/// [`TrajectoryClock::band_edge`]. The `-x` sheet runs the other way round.
/// The interior window is given for the `+x` sheet; on `-x` it is `(-R_ε, L_ε]`.
pub fn case_window(case: TransferCase, clock: &TrajectoryClock, epsilon: f64) -> Result<CaseWindow> {
    let th = clock.half_sheet();
    let left = clock.band_edge(Wall::Left, epsilon)?;
    let right = clock.band_edge(Wall::Right, epsilon)?;
    Ok(match case {
        TransferCase::LeftWallPlus => CaseWindow { lo: -th, hi: -left },
        TransferCase::RightWallPlus => CaseWindow { lo: right, hi: th },
        TransferCase::RightWallMinus => CaseWindow { lo: -th, hi: -right },
        TransferCase::LeftWallMinus => CaseWindow { lo: left, hi: th },
        TransferCase::InteriorZero => CaseWindow { lo: -left, hi: right },
    })
}

fn interior_window(direction: Direction, clock: &TrajectoryClock, epsilon: f64) -> Result<CaseWindow> {
    let left = clock.band_edge(Wall::Left, epsilon)?;
    let right = clock.band_edge(Wall::Right, epsilon)?;
    Ok(match direction {
        Direction::Positive => CaseWindow { lo: -left, hi: right },
        Direction::Negative => CaseWindow { lo: -right, hi: left },
    })
}

/// Classifies `γ - τ` on a sheet into its transfer case.
pub fn classify(
    direction: Direction,
    since_epoch: f64,
    clock: &TrajectoryClock,
    epsilon: f64,
) -> Result<(TransferCase, CaseWindow)> {
    let candidates: [TransferCase; 2] = match direction {
        Direction::Positive => [TransferCase::LeftWallPlus, TransferCase::RightWallPlus],
        Direction::Negative => [TransferCase::RightWallMinus, TransferCase::LeftWallMinus],
    };
    for case in candidates {
        let window = case_window(case, clock, epsilon)?;
        if window.contains(since_epoch) {
            return Ok((case, window));
        }
    }
    let window = interior_window(direction, clock, epsilon)?;
    if window.contains(since_epoch) {
        return Ok((TransferCase::InteriorZero, window));
    }
    Err(Error::Window {
        context: "sheet",
        offset: since_epoch,
        lo: -clock.half_sheet(),
        hi: clock.half_sheet(),
    })
}

/// Energy transfer for a wall case: `±F𝒯` times the speed of the particle
/// at `γ`, from the quadratic near-wall reversion. At `a = b, c = 0` this is
/// `±Fħk𝒯/m` for every offset in the window.
fn wall_transfer(case: TransferCase, clock: &TrajectoryClock, spec: &ImpulseSpec, s: f64) -> Result<f64> {
    let wall = case.wall().expect("wall case");
    let offset = s.abs().min(clock.half_sheet());
    let point = clock.revert_wall(wall, offset)?;
    Ok(case.sign() * spec.force() * spec.time_weight() * point.speed)
}

/// Evaluates the closed form of one case at `γ - τ = gamma_minus_tau`, which
/// must lie in that case's window (for the interior, either sheet's).
pub fn trajectory_e1_case(
    case: TransferCase,
    well: &WellModel,
    ms: &Microstate,
    spec: &ImpulseSpec,
    gamma_minus_tau: f64,
) -> Result<f64> {
    let clock = TrajectoryClock::new(*well, *ms, 0.0)?;
    let eps = spec.epsilon();
    if case == TransferCase::InteriorZero {
        let inside = interior_window(Direction::Positive, &clock, eps)?.contains(gamma_minus_tau)
            || interior_window(Direction::Negative, &clock, eps)?.contains(gamma_minus_tau);
        if !inside {
            let w = case_window(case, &clock, eps)?;
            return Err(Error::Window {
                context: "interior_zero",
                offset: gamma_minus_tau,
                lo: w.lo,
                hi: w.hi,
            });
        }
        return Ok(0.0);
    }
    let window = case_window(case, &clock, eps)?;
    if !window.contains(gamma_minus_tau) {
        return Err(Error::Window {
            context: case.as_str(),
            offset: gamma_minus_tau,
            lo: window.lo,
            hi: window.hi,
        });
    }
    wall_transfer(case, &clock, spec, gamma_minus_tau)
}

/// Energy transferred to a particle on microstate `ms` with epoch `tau0`
/// by the impulse at `spec.gamma()`. Any `γ` is accepted; it is reduced to a
/// sheet and an offset from that sheet's epoch.
pub fn trajectory_e1(
    well: &WellModel,
    ms: &Microstate,
    spec: &ImpulseSpec,
    tau0: f64,
) -> Result<TrajectoryE1> {
    let clock = TrajectoryClock::new(*well, *ms, tau0)?;
    trajectory_e1_with_clock(&clock, spec)
}

/// As [`trajectory_e1`] with a prebuilt clock.
pub fn trajectory_e1_with_clock(clock: &TrajectoryClock, spec: &ImpulseSpec) -> Result<TrajectoryE1> {
    let sheet = clock.sheet_time(spec.gamma());
    let (case, window) = classify(sheet.direction, sheet.since_epoch, clock, spec.epsilon())?;
    let e1 = if case == TransferCase::InteriorZero {
        0.0
    } else {
        wall_transfer(case, clock, spec, sheet.since_epoch)?
    };
    Ok(TrajectoryE1 {
        e1,
        case,
        window,
        direction: sheet.direction,
        sheet_epoch: sheet.sheet_epoch,
        since_epoch: sheet.since_epoch,
        cycle_index: sheet.cycle_index,
    })
}
