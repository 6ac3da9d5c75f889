//! Physical constants, well geometry and the microstate coefficients shared
//! by every other module.
//!
//! The well occupies `[-q, q]` and the particle sits in its ground state, so
//! the wave number is fixed at `k = π / (2q)` regardless of the microstate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Infinitely deep square well of half-width `q` holding a particle of mass
/// `m` in its ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellModel {
    hbar: f64,
    mass: f64,
    half_width: f64,
    wave_number: f64,
    ground_energy: f64,
    action: f64,
}

impl WellModel {
    pub fn new(hbar: f64, mass: f64, half_width: f64) -> Result<Self> {
        positive("hbar", hbar)?;
        positive("m", mass)?;
        positive("q", half_width)?;
        let wave_number = PI / (2.0 * half_width);
        Ok(Self {
            hbar,
            mass,
            half_width,
            wave_number,
            ground_energy: hbar * hbar * PI * PI / (8.0 * mass * half_width * half_width),
            action: 4.0 * half_width * hbar * wave_number,
        })
    }

    /// `ħ = m = q = 1`.
    pub fn natural() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("unit parameters are valid")
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Half-width `q`.
    pub fn q(&self) -> f64 {
        self.half_width
    }

    /// Ground-state wave number `k = π / (2q)`.
    pub fn k(&self) -> f64 {
        self.wave_number
    }

    /// `E₀ = ħ²π² / (8mq²)`.
    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// Action variable `J = 4qħk`, taken positive.
    pub fn action(&self) -> f64 {
        self.action
    }

    /// Classical speed `ħk/m` of the `a = b, c = 0` microstate.
    pub fn plane_wave_speed(&self) -> f64 {
        self.hbar * self.wave_number / self.mass
    }
}

impl Default for WellModel {
    fn default() -> Self {
        Self::natural()
    }
}

/// Coefficient triple `(a, b, c)` selecting one trajectory of the ground
/// state.
///
/// Validity requires `a > 0`, `b > 0` and a positive discriminant
/// `ab - c²/4`, which keeps `aφ² + bθ² + cφθ` positive everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Microstate {
    a: f64,
    b: f64,
    c: f64,
    discriminant: f64,
    g: f64,
}

impl Microstate {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Error::validation("microstate", "coefficients must be finite"));
        }
        if a <= 0.0 {
            return Err(Error::validation("a", format!("a = {a} must be > 0")));
        }
        if b <= 0.0 {
            return Err(Error::validation("b", format!("b = {b} must be > 0")));
        }
        let discriminant = a * b - c * c / 4.0;
        if discriminant <= 0.0 {
            return Err(Error::validation(
                "ab - c^2/4",
                format!("ab - c^2/4 = {discriminant} must be > 0"),
            ));
        }
        let g = b / discriminant.sqrt();
        if !g.is_finite() {
            return Err(Error::validation("G", "G = b/(ab - c^2/4)^(1/2) is not finite"));
        }
        Ok(Self {
            a,
            b,
            c,
            discriminant,
            g,
        })
    }

    /// The `a = b = 1, c = 0` microstate, whose motion is uniform.
    pub fn classical() -> Self {
        Self::new(1.0, 1.0, 0.0).expect("(1, 1, 0) is valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `ab - c²/4`.
    pub fn discriminant(&self) -> f64 {
        self.discriminant
    }

    /// Constant of the motion `G = b / (ab - c²/4)^(1/2)`.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Ermakov invariant `I = [a - c²/(4b)]⁻¹`.
    pub fn ermakov_invariant(&self) -> f64 {
        1.0 / (self.a - self.c * self.c / (4.0 * self.b))
    }

    /// `(a - b)/b`, the relative anisotropy entering the near-wall expansions.
    pub fn anisotropy(&self) -> f64 {
        (self.a - self.b) / self.b
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda * self.a, lambda * self.b, lambda * self.c)
    }
}

/// Direction of travel along the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Positive => "+x",
            Direction::Negative => "-x",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of the symmetric tent-shaped impulse `F ΔV(x, t)` applied at
/// time `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseSpec {
    force: f64,
    epsilon: f64,
    gamma: f64,
    time_weight: f64,
}

impl ImpulseSpec {
    /// Validates `0 < ε < q` and `𝒯 > 0`. A band wider than `q/10` only
    /// logs a warning since the near-wall expansions lose accuracy as `ε³`.
    pub fn new(
        force: f64,
        epsilon: f64,
        gamma: f64,
        time_weight: f64,
        well: &WellModel,
    ) -> Result<Self> {
        if !force.is_finite() {
            return Err(Error::validation("F", "force must be finite"));
        }
        if !gamma.is_finite() {
            return Err(Error::validation("gamma", "impulse time must be finite"));
        }
        if !(epsilon > 0.0 && epsilon < well.q()) {
            return Err(Error::validation(
                "epsilon",
                format!("epsilon = {epsilon} must satisfy 0 < epsilon < q = {}", well.q()),
            ));
        }
        if !(time_weight > 0.0 && time_weight.is_finite()) {
            return Err(Error::validation(
                "T",
                format!("impulse time weight {time_weight} must be > 0"),
            ));
        }
        if epsilon > well.q() / 10.0 {
            log::warn!(
                "epsilon = {epsilon} exceeds q/10 = {}; near-wall expansions degrade as epsilon^3",
                well.q() / 10.0
            );
        }
        Ok(Self {
            force,
            epsilon,
            gamma,
            time_weight,
        })
    }

    pub fn force(&self) -> f64 {
        self.force
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Integrated measure `𝒯` of the δ-function impulse.
    pub fn time_weight(&self) -> f64 {
        self.time_weight
    }

    pub fn with_force(mut self, force: f64) -> Self {
        self.force = force;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_time_weight(mut self, time_weight: f64) -> Result<Self> {
        if !(time_weight > 0.0 && time_weight.is_finite()) {
            return Err(Error::validation("T", "impulse time weight must be > 0"));
        }
        self.time_weight = time_weight;
        Ok(self)
    }

    /// Spatial factor of the perturbing potential: the tent that rises
    /// linearly from zero at `|x| = q - ε` to `ε` at the walls.
    pub fn tent(&self, well: &WellModel, x: f64) -> f64 {
        let q = well.q();
        let eps = self.epsilon;
        if x.abs() > q {
            0.0
        } else if x < -q + eps {
            -x - q + eps
        } else if x > q - eps {
            x - q + eps
        } else {
            0.0
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{field} = {value} must be > 0")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_well() {
        let w = WellModel::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(w.k(), PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(w.ground_energy(), PI * PI / 8.0, max_relative = 1e-15);
        assert_relative_eq!(w.ground_energy(), 1.233_700_550_136_169_8, max_relative = 1e-15);
        assert_relative_eq!(w.action(), 2.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn wider_and_heavier_wells() {
        let w = WellModel::new(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(w.k(), PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(w.ground_energy(), PI * PI / 32.0, max_relative = 1e-15);

        let w = WellModel::new(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(w.ground_energy(), PI * PI / 16.0, max_relative = 1e-15);
        let j = w.action();
        assert_relative_eq!(j * j / (32.0 * 2.0), w.ground_energy(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_non_positive_parameters() {
        for (h, m, q, field) in [
            (0.0, 1.0, 1.0, "hbar"),
            (1.0, -1.0, 1.0, "m"),
            (1.0, 1.0, 0.0, "q"),
            (f64::NAN, 1.0, 1.0, "hbar"),
        ] {
            match WellModel::new(h, m, q) {
                Err(Error::Validation { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected validation error, got {other:?}"),
            }
        }
    }

    #[test]
    fn microstate_validation() {
        let ms = Microstate::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(ms.g(), 1.0);

        match Microstate::new(1.0, 1.0, 2.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "ab - c^2/4"),
            other => panic!("expected discriminant error, got {other:?}"),
        }
        assert!(matches!(
            Microstate::new(0.0, 1.0, 0.0),
            Err(Error::Validation { field: "a", .. })
        ));
        assert!(matches!(
            Microstate::new(1.0, -2.0, 0.0),
            Err(Error::Validation { field: "b", .. })
        ));
    }

    #[test]
    fn g_for_2_3_1() {
        // ab - c²/4 = 23/4; values from a 30-digit evaluation
        let ms = Microstate::new(2.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(ms.discriminant(), 23.0 / 4.0, max_relative = 1e-15);
        assert_relative_eq!(ms.g(), 3.0 / 2.397_915_761_656_36, max_relative = 1e-14);
        assert_relative_eq!(ms.g(), 1.251_086_484_342_448_6, max_relative = 1e-14);
    }

    #[test]
    fn impulse_bounds() {
        let w = WellModel::natural();
        assert!(ImpulseSpec::new(1.0, 0.1, 0.0, 1.0, &w).is_ok());
        assert!(ImpulseSpec::new(1.0, 0.5, 0.0, 1.0, &w).is_ok());
        assert!(matches!(
            ImpulseSpec::new(1.0, 1.0, 0.0, 1.0, &w),
            Err(Error::Validation { field: "epsilon", .. })
        ));
        assert!(ImpulseSpec::new(1.0, 0.0, 0.0, 1.0, &w).is_err());
        assert!(matches!(
            ImpulseSpec::new(1.0, 0.1, 0.0, 0.0, &w),
            Err(Error::Validation { field: "T", .. })
        ));
    }

    #[test]
    fn tent_shape() {
        let w = WellModel::natural();
        let s = ImpulseSpec::new(1.0, 0.1, 0.0, 1.0, &w).unwrap();
        assert_eq!(s.tent(&w, 0.0), 0.0);
        assert_relative_eq!(s.tent(&w, -1.0), 0.1);
        assert_relative_eq!(s.tent(&w, 1.0), 0.1);
        assert_relative_eq!(s.tent(&w, -0.95), 0.05, epsilon = 1e-15);
        assert_relative_eq!(s.tent(&w, 0.95), 0.05, epsilon = 1e-15);
        assert_eq!(s.tent(&w, 1.5), 0.0);
    }

    proptest! {
        #[test]
        fn energy_action_consistency(
            hbar in 1e-3f64..1e3,
            m in 1e-3f64..1e3,
            q in 1e-3f64..1e3,
        ) {
            let w = WellModel::new(hbar, m, q).unwrap();
            let j = w.action();
            let e = j * j / (32.0 * m * q * q);
            prop_assert!((e - w.ground_energy()).abs() <= 4.0 * f64::EPSILON * w.ground_energy());
        }

        #[test]
        fn g_is_scale_invariant(
            a in 0.1f64..10.0,
            b in 0.1f64..10.0,
            frac in -0.99f64..0.99,
            lambda in 1e-3f64..1e3,
        ) {
            let c = frac * 2.0 * (a * b).sqrt();
            let ms = Microstate::new(a, b, c).unwrap();
            let scaled = ms.scaled(lambda).unwrap();
            prop_assert!((scaled.g() - ms.g()).abs() <= 1e-12 * ms.g());
        }
    }
}
