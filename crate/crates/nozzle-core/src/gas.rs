//! Gas constants, the background two-layer state, and the pointwise
//! nonlinear closures of the Helmholtz-decomposed Euler system.
//!
//! All closures are pure scalar functions of value types; they are evaluated
//! pointwise on grids and are safe to call from any number of threads.

use crate::error::{Result, SolverError};

pub type Vec2 = [f64; 2];

/// r' = (r2, -r1), the clockwise rotation entering the Helmholtz split
/// u = grad(phi) + perp(grad(psi)).
#[inline]
pub fn perp(r: Vec2) -> Vec2 {
    [r[1], -r[0]]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Ideal polytropic gas constants and the two-layer reference data.
///
/// The upper layer moves with speed `u0`, the lower layer is at rest; both
/// share the pressure `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    /// Ratio of specific heats, > 1.
    pub gamma: f64,
    /// Upper-layer density.
    pub rho_plus: f64,
    /// Lower-layer density.
    pub rho_minus: f64,
    /// Common pressure of both layers.
    pub p0: f64,
    /// Upper-layer axial speed.
    pub u0: f64,
}

impl GasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(SolverError::InvalidGas(format!(
                "gamma must be > 1, got {}",
                self.gamma
            )));
        }
        for (name, v) in [
            ("rho_plus", self.rho_plus),
            ("rho_minus", self.rho_minus),
            ("p0", self.p0),
            ("u0", self.u0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidGas(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        let c0 = (self.gamma * self.p0 / self.rho_plus).sqrt();
        if !(self.u0 < c0) {
            return Err(SolverError::InvalidGas(format!(
                "background must be subsonic: u0 = {} >= c0 = {c0}",
                self.u0
            )));
        }
        Ok(())
    }
}

/// Quantities derived from [`GasParams`]: per-layer entropy and Bernoulli
/// constants, the upper sound speed, and the slope of the background
/// potential phi_0 = u0 * x1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundState {
    pub s0_plus: f64,
    pub s0_minus: f64,
    pub b0_plus: f64,
    pub b0_minus: f64,
    pub c0: f64,
    pub phi0_slope: f64,
}

impl BackgroundState {
    pub fn from_params(p: &GasParams) -> Self {
        BackgroundState {
            s0_plus: p.p0 / p.rho_plus.powf(p.gamma),
            s0_minus: p.p0 / p.rho_minus.powf(p.gamma),
            b0_plus: 0.5 * p.u0 * p.u0 + p.gamma * p.p0 / ((p.gamma - 1.0) * p.rho_plus),
            b0_minus: p.gamma * p.p0 / ((p.gamma - 1.0) * p.rho_minus),
            c0: (p.gamma * p.p0 / p.rho_plus).sqrt(),
            phi0_slope: p.u0,
        }
    }
}

/// One point of the decomposed state: entropy value `xi`, potential gradient
/// `q` and stream-function gradient `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub xi: f64,
    pub q: Vec2,
    pub r: Vec2,
}

impl StatePoint {
    pub fn new(xi: f64, q: Vec2, r: Vec2) -> Self {
        StatePoint { xi, q, r }
    }

    /// The reconstructed velocity q + perp(r).
    #[inline]
    pub fn velocity(&self) -> Vec2 {
        let rp = perp(self.r);
        [self.q[0] + rp[0], self.q[1] + rp[1]]
    }
}

/// Validated gas parameters plus their derived background state.
#[derive(Debug, Clone, Copy)]
pub struct Gas {
    pub params: GasParams,
    pub background: BackgroundState,
}

impl Gas {
    pub fn new(params: GasParams) -> Result<Self> {
        params.validate()?;
        Ok(Gas {
            params,
            background: BackgroundState::from_params(&params),
        })
    }

    /// The reference state V0 = (S0+, (u0, 0), (0, 0)).
    pub fn background_point(&self) -> StatePoint {
        StatePoint::new(self.background.s0_plus, [self.params.u0, 0.0], [0.0, 0.0])
    }

    /// H^(gamma-1), i.e. the radicand-over-entropy base of the density
    /// closure, kept separate because the vorticity source uses it directly.
    #[inline]
    fn h_base(&self, s: &StatePoint) -> Result<f64> {
        let v = s.velocity();
        let g = self.params.gamma;
        let radicand = self.background.b0_plus - 0.5 * dot(v, v);
        if !(radicand > 0.0) || !(s.xi > 0.0) {
            return Err(SolverError::NonPhysicalState {
                context: "density closure",
                radicand,
                entropy: s.xi,
            });
        }
        Ok((g - 1.0) * radicand / (g * s.xi))
    }

    /// Density closure H(xi, q, r) = [ (g-1)(B0+ - |q+r'|^2/2) / (g xi) ]^{1/(g-1)}.
    pub fn density_h(&self, s: &StatePoint) -> Result<f64> {
        Ok(self.h_base(s)?.powf(1.0 / (self.params.gamma - 1.0)))
    }

    /// Mass flux F = H(xi, q, r) (q + r').
    pub fn momentum_f(&self, s: &StatePoint) -> Result<Vec2> {
        let h = self.density_h(s)?;
        let v = s.velocity();
        Ok([h * v[0], h * v[1]])
    }

    /// Vorticity source G = -eta H^{g-1} / ((g-1)(q1 + r2)), where eta is the
    /// transverse entropy derivative. The axial part q1 + r2 must stay away
    /// from zero; the guard threshold is 0.1 u0.
    pub fn vorticity_source_g(&self, s: &StatePoint, eta: f64) -> Result<f64> {
        let axial = s.q[0] + s.r[1];
        let guard = 0.1 * self.params.u0;
        if axial < guard {
            return Err(SolverError::AxialVelocityDegenerate {
                value: axial,
                guard,
            });
        }
        let base = self.h_base(s)?;
        Ok(-eta * base / ((self.params.gamma - 1.0) * axial))
    }

    /// Conormal datum for the stream function on the contact:
    /// A(f', S) = sqrt(2 (B0+ - g p0^{1-1/g} S^{1/g} / (g-1))) - u0 / sqrt(1+f'^2).
    pub fn contact_neumann_a(&self, f_slope: f64, s_at_contact: f64) -> Result<f64> {
        let g = self.params.gamma;
        if !(s_at_contact > 0.0) {
            return Err(SolverError::NonPhysicalState {
                context: "contact datum",
                radicand: f64::NAN,
                entropy: s_at_contact,
            });
        }
        let enthalpy = g * self.params.p0.powf(1.0 - 1.0 / g) * s_at_contact.powf(1.0 / g)
            / (g - 1.0);
        let radicand = 2.0 * (self.background.b0_plus - enthalpy);
        if radicand < 0.0 {
            return Err(SolverError::NonPhysicalState {
                context: "contact datum",
                radicand,
                entropy: s_at_contact,
            });
        }
        let tangential0 = self.params.u0 / (1.0 + f_slope * f_slope).sqrt();
        Ok(radicand.sqrt() - tangential0)
    }

    /// Bernoulli invariant |u|^2/2 + g p / ((g-1) rho).
    pub fn bernoulli(&self, u: Vec2, rho: f64, p: f64) -> f64 {
        debug_assert!(rho > 0.0);
        0.5 * dot(u, u) + self.params.gamma * p / ((self.params.gamma - 1.0) * rho)
    }

    /// Pressure recovered from entropy and density: p = S H^gamma.
    pub fn pressure_from(&self, s: f64, h_value: f64) -> f64 {
        s * h_value.powf(self.params.gamma)
    }
}

/// The example gas used throughout the tests: gamma = 1.4, rho+ = 1,
/// rho- = 2, p0 = 1, u0 = 0.5, so B0+ = 3.625 and S0+ = 1.
pub fn example_gas() -> Gas {
    Gas::new(GasParams {
        gamma: 1.4,
        rho_plus: 1.0,
        rho_minus: 2.0,
        p0: 1.0,
        u0: 0.5,
    })
    .expect("example gas is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn background_state_values() {
        let gas = example_gas();
        assert_eq!(gas.background.s0_plus, 1.0);
        assert!((gas.background.b0_plus - 3.625).abs() < 1e-14);
        assert_eq!(gas.background.s0_minus, 1.0 / 2.0_f64.powf(1.4));
        assert!((gas.background.b0_minus - 1.75).abs() < 1e-14);
        // derived fields are pure functions of the params
        let again = BackgroundState::from_params(&gas.params);
        assert_eq!(again, gas.background);
    }

    #[test]
    fn rejects_invalid_params() {
        let bad_gamma = GasParams {
            gamma: 0.9,
            ..example_gas().params
        };
        assert!(Gas::new(bad_gamma).is_err());
        let supersonic = GasParams {
            u0: 1.3,
            ..example_gas().params
        };
        assert!(Gas::new(supersonic).is_err(), "u0 above c0 must be rejected");
    }

    #[test]
    fn density_at_background_is_rho_plus() {
        let gas = example_gas();
        let h = gas.density_h(&gas.background_point()).unwrap();
        assert!((h - 1.0).abs() < 1e-15, "H(V0) = {h}");
    }

    #[test]
    fn density_off_background() {
        let gas = example_gas();
        let s = StatePoint::new(1.0, [0.6, 0.0], [0.0, 0.0]);
        let h = gas.density_h(&s).unwrap();
        // independent scalar evaluation through ln/exp
        let base: f64 = 0.4 * (3.625 - 0.5 * 0.36) / 1.4;
        let oracle = (base.ln() * 2.5).exp();
        assert!((h - oracle).abs() < 1e-14);
        assert!((h - 0.961176).abs() < 1e-6, "H = {h}");
    }

    #[test]
    fn density_depends_only_on_combined_velocity() {
        let gas = example_gas();
        let a = StatePoint::new(1.1, [0.3, 0.1], [0.05, -0.02]);
        // q + r' identical to a second (q, r) pair
        let shift = [0.04, -0.03];
        let b = StatePoint::new(
            1.1,
            [a.q[0] - shift[1], a.q[1] + shift[0]],
            [a.r[0] + shift[0], a.r[1] + shift[1]],
        );
        assert!((a.velocity()[0] - b.velocity()[0]).abs() < 1e-15);
        assert!((a.velocity()[1] - b.velocity()[1]).abs() < 1e-15);
        let (ha, hb) = (gas.density_h(&a).unwrap(), gas.density_h(&b).unwrap());
        assert!((ha - hb).abs() < 1e-14);
    }

    #[test]
    fn density_rejects_nonphysical() {
        let gas = example_gas();
        let too_fast = StatePoint::new(1.0, [3.0, 0.0], [0.0, 0.0]);
        assert!(matches!(
            gas.density_h(&too_fast),
            Err(SolverError::NonPhysicalState { .. })
        ));
        let negative_entropy = StatePoint::new(-1.0, [0.5, 0.0], [0.0, 0.0]);
        assert!(gas.density_h(&negative_entropy).is_err());
    }

    #[test]
    fn momentum_values() {
        let gas = example_gas();
        let f0 = gas.momentum_f(&gas.background_point()).unwrap();
        assert!((f0[0] - 0.5).abs() < 1e-15 && f0[1] == 0.0);

        let rest = StatePoint::new(1.0, [0.0, 0.0], [0.0, 0.0]);
        let fr = gas.momentum_f(&rest).unwrap();
        assert_eq!(fr, [0.0, 0.0]);

        let s = StatePoint::new(1.0, [0.6, 0.0], [0.0, 0.0]);
        let f = gas.momentum_f(&s).unwrap();
        let h = gas.density_h(&s).unwrap();
        assert_eq!(f[0], h * 0.6);
        assert!((f[0] - 0.576706).abs() < 1e-6, "F1 = {}", f[0]);
    }

    #[test]
    fn vorticity_source_values() {
        let gas = example_gas();
        let v0 = gas.background_point();
        assert_eq!(gas.vorticity_source_g(&v0, 0.0).unwrap(), 0.0);

        let g1 = gas.vorticity_source_g(&v0, 0.01).unwrap();
        assert!((g1 - (-0.05)).abs() < 1e-15, "G = {g1}");

        // doubling the axial speed more than halves |G|
        let fast = StatePoint::new(1.0, [1.0, 0.0], [0.0, 0.0]);
        let g2 = gas.vorticity_source_g(&fast, 0.01).unwrap();
        let base: f64 = 0.4 * (3.625 - 0.5) / 1.4;
        let oracle = -0.01 * base / (0.4 * 1.0);
        assert!((g2 - oracle).abs() < 1e-15);
        assert!(g2.abs() < 0.5 * g1.abs());
    }

    #[test]
    fn vorticity_source_guard() {
        let gas = example_gas();
        let slow = StatePoint::new(1.0, [0.01, 0.0], [0.0, 0.0]);
        assert!(matches!(
            gas.vorticity_source_g(&slow, 0.01),
            Err(SolverError::AxialVelocityDegenerate { .. })
        ));
    }

    #[test]
    fn contact_datum_values() {
        let gas = example_gas();
        let a0 = gas.contact_neumann_a(0.0, 1.0).unwrap();
        assert!(a0.abs() < 1e-15, "background contact must be compatible, A = {a0}");

        let a1 = gas.contact_neumann_a(0.1, 1.0).unwrap();
        let oracle = 0.5 * (1.0 - 1.0 / 1.01_f64.sqrt());
        assert!((a1 - oracle).abs() < 1e-15);
        assert!((a1 - 2.4814e-3).abs() < 1e-7, "A = {a1}");

        // entropy above S0+ lowers the tangential speed below u0
        let a2 = gas.contact_neumann_a(0.0, 1.01).unwrap();
        assert!(a2 < 0.0, "A = {a2}");
    }

    #[test]
    fn bernoulli_values() {
        let gas = example_gas();
        let b = gas.bernoulli([0.5, 0.0], 1.0, 1.0);
        assert!((b - 3.625).abs() < 1e-14);
        let b_rest = gas.bernoulli([0.0, 0.0], 2.0, 1.0);
        assert_eq!(b_rest, gas.background.b0_minus);

        // scaling p and rho together changes only the enthalpy term linearly
        let k = 1.7;
        let b1 = gas.bernoulli([0.3, 0.1], 1.2, 0.9);
        let b2 = gas.bernoulli([0.3, 0.1], 1.2 * k, 0.9 * k);
        let kinetic = 0.5 * (0.3f64 * 0.3 + 0.1 * 0.1);
        assert!((b2 - kinetic - (b1 - kinetic)).abs() < 1e-14);
    }

    #[test]
    fn pressure_values() {
        let gas = example_gas();
        assert_eq!(gas.pressure_from(1.0, 1.0), 1.0);
        let p = gas.pressure_from(1.0, 0.9611762);
        let oracle = (0.9611762_f64.ln() * 1.4).exp();
        assert!((p - oracle).abs() < 1e-14);
        assert!((p - 0.946070).abs() < 1e-5, "p = {p}");
        assert_eq!(gas.pressure_from(2.0, 0.7), 2.0 * gas.pressure_from(1.0, 0.7));
    }

    #[test]
    fn closure_identity_reproduces_bernoulli() {
        // |q+r'|^2/2 + g S H^{g-1}/(g-1) = B0+ wherever H is defined
        let gas = example_gas();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let s = StatePoint::new(
                rng.gen_range(0.5..2.0),
                [rng.gen_range(-0.2..1.0), rng.gen_range(-0.5..0.5)],
                [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            );
            let h = match gas.density_h(&s) {
                Ok(h) => h,
                Err(_) => continue,
            };
            let v = s.velocity();
            let g = gas.params.gamma;
            let b = 0.5 * dot(v, v) + g * s.xi * h.powf(g - 1.0) / (g - 1.0);
            let rel = (b - gas.background.b0_plus).abs() / gas.background.b0_plus;
            assert!(rel < 1e-12, "Bernoulli identity defect {rel:.3e}");
        }
    }

    #[test]
    fn density_monotonicity() {
        // H strictly decreasing in |q+r'|^2 and in xi on the valid region
        let gas = example_gas();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let xi = rng.gen_range(0.6..1.6);
            let speed = rng.gen_range(0.0..1.0);
            let s = StatePoint::new(xi, [speed, 0.0], [0.0, 0.0]);
            let faster = StatePoint::new(xi, [speed + 0.05, 0.0], [0.0, 0.0]);
            let hotter = StatePoint::new(xi * 1.05, [speed, 0.0], [0.0, 0.0]);
            let (h, hf, hh) = (
                gas.density_h(&s).unwrap(),
                gas.density_h(&faster).unwrap(),
                gas.density_h(&hotter).unwrap(),
            );
            assert!(hf < h, "H must decrease in speed");
            assert!(hh < h, "H must decrease in entropy");
        }
    }

    #[test]
    fn pressure_bernoulli_roundtrip() {
        let gas = example_gas();
        let s = StatePoint::new(1.05, [0.55, 0.02], [0.01, -0.03]);
        let h = gas.density_h(&s).unwrap();
        let p = gas.pressure_from(s.xi, h);
        let b = gas.bernoulli(s.velocity(), h, p);
        let rel = (b - gas.background.b0_plus).abs() / gas.background.b0_plus;
        assert!(rel < 1e-12, "B defect {rel:.3e}");
    }
}
