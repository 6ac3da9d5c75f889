//! Trajectory engine: the exact equation of motion `t(x)`, its near-wall
//! Maclaurin truncation and quadratic reversion, Riemann-sheet bookkeeping
//! and particle localisation at an arbitrary time.
//!
//! Time is measured from the sheet epoch. On the `+x` sheet the particle goes
//! from `-q` to `q` while the offset `t - τ₊` runs over `(-T_h, T_h]`, with
//! half-sheet time `T_h = mq/(ħkG)`; the `-x` sheet is its time reverse with
//! `τ₋ = τ₊ + 2T_h`. A full cycle lasts `4T_h`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Direction, Microstate, WellModel};

/// Below this `|a - b|/b` the near-wall quadratic is treated as linear.
pub const DEGENERATE_ANISOTROPY: f64 = 1e-8;

/// Bracketing tolerance in x for [`TrajectoryClock::locate_particle`].
pub const LOCATE_TOLERANCE: f64 = 1e-12;

pub const LOCATE_MAX_ITERATIONS: usize = 200;

/// One of the two walls of the well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Left,
    Right,
}

impl Wall {
    /// Sign of `c` in the expansion about this wall: the mirror `x → -x`
    /// maps the left-wall problem onto the right-wall one with `c → -c`.
    fn c_sign(self) -> f64 {
        match self {
            Wall::Left => -1.0,
            Wall::Right => 1.0,
        }
    }
}

/// Where the particle is at a given instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSnapshot {
    pub x: f64,
    pub direction: Direction,
    /// Epoch `τ` of the sheet the particle is on.
    pub sheet_epoch: f64,
    /// Time since `sheet_epoch`, in `(-T_h, T_h]`.
    pub since_epoch: f64,
    pub cycle_index: i64,
}

/// Sheet membership of an instant, found without locating the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetTime {
    pub direction: Direction,
    pub sheet_epoch: f64,
    pub since_epoch: f64,
    pub cycle_index: i64,
}

/// Depth of the particle inside a wall band (distance from the wall) and the
/// speed at which that depth changes, from the quadratic near-wall reversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPoint {
    pub depth: f64,
    pub speed: f64,
}

/// A microstate's trajectory anchored at epoch `tau0`, the instant the `+x`
/// sheet passes `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryClock {
    well: WellModel,
    ms: Microstate,
    tau0: f64,
    half_sheet: f64,
    period: f64,
}

/// Minimum over the interior of the numerator of `dt/dx`, relative to
/// `a + b`.
///
/// With `ϑ = 2kx ∈ [-π, π]` the numerator is
/// `g(ϑ) = a + b + (a-b)(cos ϑ + ϑ sin ϑ) + c(sin ϑ - ϑ cos ϑ)` and
/// `g'(ϑ) = ϑ[(a-b)cos ϑ + c sin ϑ]`, so the minimum sits at `ϑ = 0`, at the
/// walls, or where `(a-b)cos ϑ + c sin ϑ = 0`. A positive margin means the
/// exact `t(x)` is strictly increasing on each sheet.
pub fn monotonicity_margin(ms: &Microstate) -> f64 {
    let (a, b, c) = (ms.a(), ms.b(), ms.c());
    let g = |t: f64| {
        let (s, co) = t.sin_cos();
        a + b + (a - b) * (co + t * s) + c * (s - t * co)
    };
    let mut candidates = vec![-PI, 0.0, PI];
    if a != b || c != 0.0 {
        let alpha = c.atan2(a - b);
        for shift in [-1.5, -0.5, 0.5, 1.5] {
            let t = alpha + shift * PI;
            if t.abs() <= PI {
                candidates.push(t);
            }
        }
    }
    candidates.into_iter().map(g).fold(f64::INFINITY, f64::min) / (a + b)
}

impl TrajectoryClock {
    /// Fails with [`Error::NonMonotoneTrajectory`] when `t(x)` folds back on
    /// itself, since the position is then not a function of time.
    pub fn new(well: WellModel, ms: Microstate, tau0: f64) -> Result<Self> {
        if !tau0.is_finite() {
            return Err(Error::validation("tau0", "epoch must be finite"));
        }
        let margin = monotonicity_margin(&ms);
        if margin <= 0.0 {
            return Err(Error::NonMonotoneTrajectory {
                a: ms.a(),
                b: ms.b(),
                c: ms.c(),
                margin,
            });
        }
        let half_sheet = well.mass() * well.q() / (well.hbar() * well.k() * ms.g());
        Ok(Self {
            well,
            ms,
            tau0,
            half_sheet,
            period: 4.0 * half_sheet,
        })
    }

    pub fn well(&self) -> &WellModel {
        &self.well
    }

    pub fn microstate(&self) -> &Microstate {
        &self.ms
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Duration of one pass between the walls, `T_h = mq/(ħkG)`.
    pub fn half_sheet(&self) -> f64 {
        self.half_sheet
    }

    /// Time between the `+x` and `-x` sheet epochs, `2mq/(ħkG)`.
    pub fn sheet_shift(&self) -> f64 {
        2.0 * self.half_sheet
    }

    /// Duration of one cycle in phase space, `4mq/(ħkG)`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `(τ₊, τ₋)` for the given cycle.
    pub fn sheet_epochs(&self, cycle: i64) -> (f64, f64) {
        let plus = self.tau0 + cycle as f64 * self.period;
        (plus, plus + self.sheet_shift())
    }

    fn check(&self, x: f64) -> Result<()> {
        let q = self.well.q();
        if x.is_finite() && x.abs() <= q {
            Ok(())
        } else {
            Err(Error::Domain { x, q })
        }
    }

    fn scale(&self) -> f64 {
        self.well.mass() / (self.well.hbar() * self.well.k())
    }

    /// Exact equation of motion,
    /// `t - τ = ±2(mx/ħk)(ab - c²/4)^(1/2) / [a + b + (a-b)cos 2kx + c sin 2kx]`.
    pub fn exact_time_of_position(&self, x: f64, direction: Direction) -> Result<f64> {
        self.check(x)?;
        Ok(direction.sign() * self.plus_sheet_time(x))
    }

    fn plus_sheet_time(&self, x: f64) -> f64 {
        let (a, b, c) = (self.ms.a(), self.ms.b(), self.ms.c());
        let (s, co) = (2.0 * self.well.k() * x).sin_cos();
        2.0 * self.scale() * x * self.ms.discriminant().sqrt() / (a + b + (a - b) * co + c * s)
    }

    /// Second-order Maclaurin truncation of the equation of motion about the
    /// left wall for `+x` travel,
    /// `t - τ = (mx/ħk)(ab - c²/4)^(1/2) / [b - ck(x+q) + (a-b)k²(x+q)²]`.
    pub fn wall_series_time(&self, x: f64, epsilon: f64) -> Result<f64> {
        let q = self.well.q();
        let y = x + q;
        if !(y >= 0.0 && y <= epsilon) {
            return Err(Error::Domain { x, q });
        }
        let (a, b, c) = (self.ms.a(), self.ms.b(), self.ms.c());
        let k = self.well.k();
        Ok(self.scale() * x * self.ms.discriminant().sqrt()
            / (b - c * k * y + (a - b) * k * k * y * y))
    }

    /// Time offset `|t - τ|` at which the truncated motion reaches depth `ε`
    /// inside the band at `wall`:
    /// `m(q-ε) / (ħkG[1 ∓ (c/b)kε + ((a-b)/b)k²ε²])`, minus sign on the left.
    pub fn band_edge(&self, wall: Wall, epsilon: f64) -> Result<f64> {
        let q = self.well.q();
        if !(epsilon > 0.0 && epsilon < q) {
            return Err(Error::validation("epsilon", format!("epsilon = {epsilon} outside (0, q)")));
        }
        let k = self.well.k();
        let b = self.ms.b();
        let denom = 1.0 + wall.c_sign() * self.ms.c() / b * k * epsilon
            + self.ms.anisotropy() * k * k * epsilon * epsilon;
        let edge = self.scale() * (q - epsilon) / (self.ms.g() * denom);
        if !(denom > 0.0 && edge > 0.0 && edge < self.half_sheet) {
            return Err(Error::degenerate(
                "wall band",
                format!(
                    "band edge {edge} for epsilon = {epsilon} at the {wall:?} wall is not inside (0, {})",
                    self.half_sheet
                ),
            ));
        }
        Ok(edge)
    }

    /// Quadratic reversion of the truncated motion near `wall`.
    ///
    /// `offset` is `|t - τ|` on the `+x` sheet, in `[edge, T_h]`. With
    /// `u = m/(ħkG·offset)` the depth `d` solves
    /// `((a-b)/b)k² d² + (u ± (c/b)k) d + (1 - qu) = 0`, taking the root that
    /// vanishes at wall contact (`u = 1/q`), written as
    /// `d = -2(1 - qu) / (β + √(β² - 4A(1 - qu)))`.
    pub fn revert_wall(&self, wall: Wall, offset: f64) -> Result<WallPoint> {
        let (b, c) = (self.ms.b(), self.ms.c());
        let q = self.well.q();
        let k = self.well.k();
        let unit = self.scale() / self.ms.g();
        let u = unit / offset;
        let w = unit / (offset * offset);
        let beta = u + wall.c_sign() * c / b * k;
        let gamma0 = 1.0 - q * u;
        if !(beta > 0.0) || !offset.is_finite() {
            return Err(Error::degenerate(
                "wall reversion",
                format!("linear coefficient {beta} is not positive at offset {offset}"),
            ));
        }
        let anisotropy = self.ms.anisotropy();
        if anisotropy.abs() < DEGENERATE_ANISOTROPY {
            if c == 0.0 {
                // uniform motion at speed ħkG/m
                return Ok(WallPoint {
                    depth: q - offset / unit,
                    speed: 1.0 / unit,
                });
            }
            let depth = -gamma0 / beta;
            return Ok(WallPoint {
                depth,
                speed: w * (q - depth) / beta,
            });
        }
        let quad = anisotropy * k * k;
        let radicand = beta * beta - 4.0 * quad * gamma0;
        if radicand < 0.0 {
            return Err(Error::degenerate(
                "wall reversion",
                format!("negative radicand {radicand} at offset {offset}"),
            ));
        }
        let root = radicand.sqrt();
        let depth = -2.0 * gamma0 / (beta + root);
        Ok(WallPoint {
            depth,
            speed: w * (q - depth) / root,
        })
    }

    /// Position from the quadratic reversion for `+x` travel inside the left
    /// band. `since_epoch` is `t - τ`, inside
    /// `[-mq/(ħkG), -m(q-ε)/(ħkG[1 - (c/b)kε + ((a-b)/b)k²ε²])]`.
    pub fn revert_position(&self, since_epoch: f64, epsilon: f64) -> Result<f64> {
        let edge = self.band_edge(Wall::Left, epsilon)?;
        let lo = -self.half_sheet;
        let hi = -edge;
        let slack = 1e-14 * self.half_sheet;
        if !(since_epoch >= lo - slack && since_epoch <= hi + slack) {
            return Err(Error::Window {
                context: "left-wall reversion",
                offset: since_epoch,
                lo,
                hi,
            });
        }
        let offset = (-since_epoch).min(self.half_sheet);
        let point = self.revert_wall(Wall::Left, offset)?;
        Ok(point.depth - self.well.q())
    }

    /// Reduces an absolute time to its sheet and the offset from that sheet's
    /// epoch.
    pub fn sheet_time(&self, t: f64) -> SheetTime {
        let th = self.half_sheet;
        let rel = t - self.tau0;
        let mut cycle = ((rel + th) / self.period).ceil() as i64 - 1;
        let mut r = rel + th - cycle as f64 * self.period;
        if r <= 0.0 {
            cycle -= 1;
            r += self.period;
        } else if r > self.period {
            cycle += 1;
            r -= self.period;
        }
        let (plus, minus) = self.sheet_epochs(cycle);
        if r <= 2.0 * th {
            SheetTime {
                direction: Direction::Positive,
                sheet_epoch: plus,
                since_epoch: (t - plus).clamp(-th, th),
                cycle_index: cycle,
            }
        } else {
            SheetTime {
                direction: Direction::Negative,
                sheet_epoch: minus,
                since_epoch: (t - minus).clamp(-th, th),
                cycle_index: cycle,
            }
        }
    }

    /// Locates the particle at `t` by bracketed root-finding on the exact
    /// equation of motion of the current sheet.
    pub fn locate_particle(&self, t: f64) -> Result<ParticleSnapshot> {
        if !t.is_finite() {
            return Err(Error::Input(format!("query time {t} is not finite")));
        }
        let sheet = self.sheet_time(t);
        // The -x sheet is the time reverse of the +x one.
        let target = sheet.direction.sign() * sheet.since_epoch;
        let q = self.well.q();
        let x = solve_increasing(
            |x| self.plus_sheet_time(x) - target,
            -q,
            q,
            LOCATE_TOLERANCE,
            LOCATE_MAX_ITERATIONS,
        )?;
        Ok(ParticleSnapshot {
            x,
            direction: sheet.direction,
            sheet_epoch: sheet.sheet_epoch,
            since_epoch: sheet.since_epoch,
            cycle_index: sheet.cycle_index,
        })
    }
}

/// Root of an increasing function on `[lo, hi]`: bisection with secant
/// steps, falling back to a pure bisection step whenever a secant step fails
/// to halve the bracket.
fn solve_increasing<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::RootFinding {
            iterations: 0,
            detail: format!("no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"),
        });
    }
    let mut bisect = false;
    for _ in 0..max_iter {
        let width = hi - lo;
        if width <= tol {
            break;
        }
        let mut x = if bisect {
            0.5 * (lo + hi)
        } else {
            lo - f_lo * width / (f_hi - f_lo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        bisect = !bisect && hi - lo > 0.5 * width;
        if hi - lo <= tol {
            return Ok(lo - f_lo * (hi - lo) / (f_hi - f_lo));
        }
    }
    if hi - lo <= tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::RootFinding {
            iterations: max_iter,
            detail: format!("bracket [{lo}, {hi}] still wider than {tol}"),
        })
    }
}
