//! Interior eigenfunction pair `(φ, θ)` of the well and the quantities built
//! from it: Wronskian, conjugate momentum, Hamilton's characteristic function,
//! the ψ-reconstruction identity and the quantum stationary Hamilton-Jacobi
//! residual.
//!
//! Only the interior `[-q, q]` is modelled. Derivatives up to third order are
//! closed forms in `sin(kx)` and `cos(kx)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::model::{Direction, Microstate, WellModel};

/// A well and a microstate together with the common normalisation
/// `(2m / [ħ²k²(ab - c²/4)])^(1/4)` of `φ` and `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPairContext {
    well: WellModel,
    ms: Microstate,
    norm: f64,
}

/// Hamilton's characteristic function at a point, with a flag set when the
/// point is a wall where `θ/φ` has its pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicValue {
    pub value: f64,
    pub branch_endpoint: bool,
}

/// `P = aφ² + bθ² + cφθ` with its first two derivatives.
#[derive(Debug, Clone, Copy)]
struct Quadratic {
    p: f64,
    dp: f64,
    d2p: f64,
}

impl EigenPairContext {
    pub fn new(well: WellModel, ms: Microstate) -> Self {
        let hk = well.hbar() * well.k();
        let norm = (2.0 * well.mass() / (hk * hk * ms.discriminant())).powf(0.25);
        Self { well, ms, norm }
    }

    pub fn well(&self) -> &WellModel {
        &self.well
    }

    pub fn microstate(&self) -> &Microstate {
        &self.ms
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn check(&self, x: f64) -> Result<()> {
        let q = self.well.q();
        if x.is_finite() && x.abs() <= q {
            Ok(())
        } else {
            Err(Error::Domain { x, q })
        }
    }

    fn check_open(&self, x: f64) -> Result<()> {
        let q = self.well.q();
        if x.is_finite() && x.abs() < q {
            Ok(())
        } else {
            Err(Error::Domain { x, q })
        }
    }

    /// Symmetric bound solution `norm · cos(kx)`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.norm * (self.well.k() * x).cos())
    }

    /// Antisymmetric unbound partner `norm · sin(kx)`.
    pub fn theta(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.norm * (self.well.k() * x).sin())
    }

    /// `(φ, φ', θ, θ')` at `x`, unchecked.
    fn pair(&self, x: f64) -> (f64, f64, f64, f64) {
        let k = self.well.k();
        let (s, c) = (k * x).sin_cos();
        let n = self.norm;
        (n * c, -n * k * s, n * s, n * k * c)
    }

    /// `𝒲(φ, θ) = φθ' - φ'θ`; constant in `x` with
    /// `𝒲² = 2m / [ħ²(ab - c²/4)]`.
    pub fn wronskian(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let (phi, dphi, theta, dtheta) = self.pair(x);
        Ok(phi * dtheta - dphi * theta)
    }

    fn quadratic(&self, x: f64) -> Quadratic {
        let (a, b, c) = (self.ms.a(), self.ms.b(), self.ms.c());
        let k2 = self.well.k() * self.well.k();
        let (phi, dphi, theta, dtheta) = self.pair(x);
        let (d2phi, d2theta) = (-k2 * phi, -k2 * theta);
        Quadratic {
            p: a * phi * phi + b * theta * theta + c * phi * theta,
            dp: 2.0 * a * phi * dphi + 2.0 * b * theta * dtheta + c * (dphi * theta + phi * dtheta),
            d2p: 2.0 * a * (dphi * dphi + phi * d2phi)
                + 2.0 * b * (dtheta * dtheta + theta * d2theta)
                + c * (d2phi * theta + 2.0 * dphi * dtheta + phi * d2theta),
        }
    }

    /// `aφ² + bθ² + cφθ`, strictly positive for a valid microstate.
    pub fn denominator(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.quadratic(x).p)
    }

    /// `∂W/∂x = ±(2m)^(1/2) / (aφ² + bθ² + cφθ)`.
    pub fn conjugate_momentum(&self, x: f64, direction: Direction) -> Result<f64> {
        self.check(x)?;
        Ok(direction.sign() * (2.0 * self.well.mass()).sqrt() / self.quadratic(x).p)
    }

    /// `W = ħ arctan([b(θ/φ) + c/2] / (ab - c²/4)^(1/2))` with the integration
    /// constant set to zero, on the principal branch.
    ///
    /// At `x = ±q` the pole of `θ/φ` is replaced by the branch limit `±ħπ/2`.
    pub fn hamilton_w(&self, x: f64) -> Result<CharacteristicValue> {
        self.check(x)?;
        let hbar = self.well.hbar();
        let q = self.well.q();
        if x.abs() == q {
            return Ok(CharacteristicValue {
                value: x.signum() * hbar * FRAC_PI_2,
                branch_endpoint: true,
            });
        }
        let ratio = (self.well.k() * x).tan();
        let arg = (self.ms.b() * ratio + self.ms.c() / 2.0) / self.ms.discriminant().sqrt();
        Ok(CharacteristicValue {
            value: hbar * arg.atan(),
            branch_endpoint: false,
        })
    }

    /// Rebuilds the wave function from the microstate,
    /// `(aφ² + bθ² + cφθ)^(1/2) / [a - c²/(4b)]^(1/2) · cos(W/ħ)`, which must
    /// reproduce `φ` for every microstate.
    pub fn reconstruct_psi(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let (a, b, c) = (self.ms.a(), self.ms.b(), self.ms.c());
        let p = self.quadratic(x).p;
        let w = self.hamilton_w(x)?.value;
        Ok(p.sqrt() / (a - c * c / (4.0 * b)).sqrt() * (w / self.well.hbar()).cos())
    }

    /// First three x-derivatives of `W` (for the `+x` sheet).
    pub fn w_derivatives(&self, x: f64) -> Result<[f64; 3]> {
        self.check(x)?;
        let root = (2.0 * self.well.mass()).sqrt();
        let Quadratic { p, dp, d2p } = self.quadratic(x);
        let w1 = root / p;
        let w2 = -root * dp / (p * p);
        let w3 = root * (2.0 * dp * dp / (p * p * p) - d2p / (p * p));
        Ok([w1, w2, w3])
    }

    /// Schwarzian derivative `⟨W; x⟩ = W'''/W' - (3/2)(W''/W')²`.
    pub fn schwarzian(&self, x: f64) -> Result<f64> {
        let [w1, w2, w3] = self.w_derivatives(x)?;
        let r = w2 / w1;
        Ok(w3 / w1 - 1.5 * r * r)
    }

    /// `(W')²/(2m) + V - E + (ħ²/4m)⟨W; x⟩` with `V = 0` inside the well.
    pub fn qshje_residual(&self, x: f64) -> Result<f64> {
        self.check_open(x)?;
        let m = self.well.mass();
        let hbar = self.well.hbar();
        let [w1, _, _] = self.w_derivatives(x)?;
        let schwarzian = self.schwarzian(x)?;
        Ok(w1 * w1 / (2.0 * m) - self.well.ground_energy() + hbar * hbar / (4.0 * m) * schwarzian)
    }
}
