//! Brute-force reference computations. Nothing here calls into
//! [`crate::kinematics`] or [`crate::perturbation`] formulas: positions come
//! from bisection on an independently written equation of motion and energy
//! transfers from finite differences of the perturbing potential.

use crate::error::{Error, Result};
use crate::kinematics::TrajectoryClock;
use crate::model::{Direction, ImpulseSpec, Microstate, WellModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    AdaptiveSimpson,
    /// Adaptive bisection with a 10-point Gauss-Legendre rule per panel.
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, abs_tol: f64, max_depth: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::validation("abs_tol", "must be > 0"));
        }
        if max_depth == 0 {
            return Err(Error::validation("max_depth", "must be > 0"));
        }
        Ok(Self {
            rule,
            abs_tol,
            max_depth,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::AdaptiveSimpson,
            abs_tol: 1e-20,
            max_depth: 50,
        }
    }
}

/// Panels whose refinement changes by less than this fraction of the mean
/// integrand magnitude times the panel width are accepted: the change is
/// then rounding noise.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

struct Refiner<'a, F> {
    f: F,
    quad: &'a QuadratureSpec,
    noise_density: f64,
    nodes: Vec<(f64, f64)>,
}

impl<F: Fn(f64) -> f64> Refiner<'_, F> {
    fn converged(&self, delta: f64, tol: f64, width: f64) -> bool {
        delta.abs() <= tol || delta.abs() <= self.noise_density * width
    }

    fn exhausted(&self) -> Error {
        Error::Quadrature {
            tol: self.quad.abs_tol,
            max_depth: self.quad.max_depth,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn simpson(&self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (flm, frm) = ((self.f)(0.5 * (a + m)), (self.f)(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if self.converged(delta, 15.0 * tol, b - a) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(self.exhausted());
        }
        Ok(self.simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + self.simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    fn gauss(&self, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = gauss_panel(&self.f, a, m, &self.nodes);
        let right = gauss_panel(&self.f, m, b, &self.nodes);
        if self.converged(left + right - whole, tol, b - a) {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(self.exhausted());
        }
        Ok(self.gauss(a, m, left, 0.5 * tol, depth - 1)? + self.gauss(m, b, right, 0.5 * tol, depth - 1)?)
    }
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, quad: &QuadratureSpec) -> Result<f64> {
    if hi == lo {
        return Ok(0.0);
    }
    match quad.rule {
        QuadratureRule::AdaptiveSimpson => {
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            let r = Refiner {
                noise_density: ROUNDOFF * (whole / (hi - lo)).abs(),
                f,
                quad,
                nodes: Vec::new(),
            };
            r.simpson(lo, hi, fa, fm, fb, whole, quad.abs_tol, quad.max_depth)
        }
        QuadratureRule::GaussLegendre => {
            let nodes = gauss_legendre_nodes(10);
            let whole = gauss_panel(&f, lo, hi, &nodes);
            let r = Refiner {
                noise_density: ROUNDOFF * (whole / (hi - lo)).abs(),
                f,
                quad,
                nodes,
            };
            r.gauss(lo, hi, whole, quad.abs_tol, quad.max_depth)
        }
    }
}

fn gauss_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * nodes.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn tent(q: f64, epsilon: f64, x: f64) -> f64 {
    (epsilon - (q - x.abs())).max(0.0)
}

/// `(1/q) ∫ cos²(kx) ΔV(x) dx` over both wall bands of width `epsilon`,
/// with the unit-height-slope tent `ΔV`. `epsilon = 0` gives 0.
pub fn band_quadrature(well: &WellModel, epsilon: f64, quad: &QuadratureSpec) -> Result<f64> {
    let q = well.q();
    if !(epsilon >= 0.0 && epsilon < q) {
        return Err(Error::validation("epsilon", format!("epsilon = {epsilon} outside [0, q)")));
    }
    let k = well.k();
    // In terms of the depth d from each wall, cos(kx) = sin(kd); this keeps
    // full relative accuracy where cos(kx) is tiny. The tent height is ε - d.
    let left = integrate(
        |d: f64| {
            let s = (k * d).sin();
            s * s * (epsilon - d).max(0.0) / q
        },
        0.0,
        epsilon,
        quad,
    )?;
    let right = integrate(
        |d: f64| {
            let s = (k * d).sin();
            s * s * (epsilon - d).max(0.0) / q
        },
        0.0,
        epsilon,
        quad,
    )?;
    Ok(left + right)
}

/// Ground-state expectation of the tent potential, with the normalised
/// `ψ = q^(-1/2) cos kx`. This equals the closed-form bracket divided by
/// `q`.
pub fn matrix_element_quadrature(
    well: &WellModel,
    spec: &ImpulseSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    band_quadrature(well, spec.epsilon(), quad)
}

/// `t - τ` on the `+x` sheet, written through `a cos² + b sin² + c sin cos`.
pub fn reference_time(well: &WellModel, ms: &Microstate, x: f64) -> f64 {
    let (s, c) = (well.k() * x).sin_cos();
    let weight = ms.a() * c * c + ms.b() * s * s + ms.c() * s * c;
    well.mass() * x * ms.discriminant().sqrt() / (well.hbar() * well.k() * weight)
}

/// `t - τ` on the `+x` sheet, truncated at second order about the nearer
/// wall.
pub fn reference_wall_series_time(well: &WellModel, ms: &Microstate, x: f64) -> f64 {
    let k = well.k();
    let (depth, c_sign) = if x < 0.0 { (x + well.q(), -1.0) } else { (well.q() - x, 1.0) };
    let weight = ms.b() + c_sign * ms.c() * k * depth + (ms.a() - ms.b()) * k * k * depth * depth;
    well.mass() * x * ms.discriminant().sqrt() / (well.hbar() * k * weight)
}

/// Bisection on `[lo, hi]` until the bracket collapses to adjacent doubles.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::RootFinding {
            iterations: 0,
            detail: format!("target outside [{lo}, {hi}]: f = ({flo}, {fhi})"),
        });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves the exact equation of motion for `x` given `since_epoch = t - τ`
/// on the sheet moving in `direction`.
pub fn invert_eom_bruteforce(
    clock: &TrajectoryClock,
    since_epoch: f64,
    direction: Direction,
) -> Result<f64> {
    let (well, ms) = (clock.well(), clock.microstate());
    let target = direction.sign() * since_epoch;
    let q = well.q();
    bisect(|x| reference_time(well, ms, x) - target, -q, q).map_err(|e| match e {
        Error::RootFinding { iterations, detail } => Error::RootFinding {
            iterations,
            detail: format!("{direction} sheet, t - tau = {since_epoch}: {detail}"),
        },
        other => other,
    })
}

/// Motion model used by [`canonical_fd_e1`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdRoute {
    /// Bisection on the exact equation of motion.
    Exact,
    /// Bisection on the second-order wall series, inside the bands only.
    WallSeries,
}

struct OracleSheet {
    direction: Direction,
    since_epoch: f64,
    half: f64,
}

fn reference_sheet(well: &WellModel, ms: &Microstate, gamma: f64, tau0: f64) -> OracleSheet {
    let half = reference_time(well, ms, well.q());
    let period = 4.0 * half;
    let r = (gamma - tau0 + half).rem_euclid(period) - half;
    if r < half || r == -half {
        OracleSheet {
            direction: Direction::Positive,
            since_epoch: r,
            half,
        }
    } else {
        OracleSheet {
            direction: Direction::Negative,
            since_epoch: r - 2.0 * half,
            half,
        }
    }
}

/// Energy transfer `F𝒯 ∂ΔV(x(γ; τ₀))/∂τ₀` by central differences in `τ₀`
/// with step `fd_step`.
///
/// The particle must stay inside one wall band at `τ₀ ± h`; a step that
/// crosses a band edge or a wall fails. If it stays in the interior the
/// result is 0.
pub fn canonical_fd_e1(
    well: &WellModel,
    ms: &Microstate,
    spec: &ImpulseSpec,
    tau0: f64,
    fd_step: f64,
    route: FdRoute,
) -> Result<f64> {
    if !(fd_step > 0.0) {
        return Err(Error::validation("fd_step", "must be > 0"));
    }
    let clock = TrajectoryClock::new(*well, *ms, tau0)?;
    let sheet = reference_sheet(well, ms, spec.gamma(), tau0);
    let (q, eps) = (well.q(), spec.epsilon());
    let position = |s: f64| -> Result<f64> {
        if s.abs() >= sheet.half {
            return Err(Error::Step {
                step: fd_step,
                detail: format!("offset {s} reaches a wall"),
            });
        }
        match route {
            FdRoute::Exact => invert_eom_bruteforce(&clock, s, sheet.direction),
            FdRoute::WallSeries => {
                let target = sheet.direction.sign() * s;
                let (lo, hi) = if target < 0.0 { (-q, -q + eps) } else { (q - eps, q) };
                bisect(|x| reference_wall_series_time(well, ms, x) - target, lo, hi).map_err(|_| {
                    Error::Step {
                        step: fd_step,
                        detail: format!("offset {s} is outside the series band"),
                    }
                })
            }
        }
    };
    // x(γ; τ₀ + h) is the position at offset s - h.
    let xs = [
        position(sheet.since_epoch + fd_step)?,
        position(sheet.since_epoch)?,
        position(sheet.since_epoch - fd_step)?,
    ];
    let band = |x: f64| -> i8 {
        if x < -q + eps {
            -1
        } else if x > q - eps {
            1
        } else {
            0
        }
    };
    let bands = xs.map(band);
    if bands[0] != bands[1] || bands[2] != bands[1] {
        return Err(Error::Step {
            step: fd_step,
            detail: format!("positions {xs:?} straddle a band edge"),
        });
    }
    if bands[1] == 0 {
        return Ok(0.0);
    }
    let dv = (tent(q, eps, xs[2]) - tent(q, eps, xs[0])) / (2.0 * fd_step);
    Ok(spec.force() * spec.time_weight() * dv)
}

/// Round-trip error of the near-wall reversion: the exact time of
/// `x₀ = -q + fraction·ε` is reverted with band width `ε` and compared
/// against `x₀`.
pub fn reversion_round_trip_error(clock: &TrajectoryClock, epsilon: f64, fraction: f64) -> Result<f64> {
    let (well, ms) = (clock.well(), clock.microstate());
    let x0 = -well.q() + fraction * epsilon;
    let t = reference_time(well, ms, x0);
    let x1 = clock.revert_position(t, epsilon)?;
    Ok((x1 - x0).abs())
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn fit_convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Input(format!("need at least 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::Input("step sizes must be strictly decreasing".into()));
    }
    if points.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(Error::Input("steps and errors must be positive and finite".into()));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
