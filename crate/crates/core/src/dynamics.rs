//! Vector field of the forced pendulum with time-dependent damping.
//!
//! The model is a pendulum with vertically oscillating support,
//!
//! ```text
//! theta'' + (alpha - beta cos t) sin theta + gamma(t) theta' = 0
//! ```
//!
//! with `theta` on the torus (canonical representative in `[-pi, pi)`) and a
//! damping coefficient that ramps linearly from `gamma_i` to `gamma_f` over
//! `[0, t_ramp]` and stays constant afterwards.

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
pub const PI: f64 = std::f64::consts::PI;

/// Wrap an angle to the canonical interval `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut w = (theta + PI).rem_euclid(TWO_PI) - PI;
    // rem_euclid can round up to exactly 2*pi for tiny negative inputs.
    if w >= PI {
        w -= TWO_PI;
    }
    w
}

/// Drive coefficients of the pendulum with oscillating support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Dimensionless gravity coefficient.
    pub alpha: f64,
    /// Dimensionless drive amplitude.
    pub beta: f64,
}

impl SystemParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Config(format!(
                "system parameters must be finite (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(SystemParams { alpha, beta })
    }
}

/// Piecewise-linear damping: `gamma_i` at `t = 0`, ramping linearly to
/// `gamma_f` at `t = t_ramp`, constant afterwards. `t_ramp = 0` means
/// constant damping `gamma_f` for all times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingProfile {
    pub gamma_i: f64,
    pub gamma_f: f64,
    pub t_ramp: f64,
}

impl DampingProfile {
    pub fn new(gamma_i: f64, gamma_f: f64, t_ramp: f64) -> Result<Self> {
        for (name, v) in [("gamma_i", gamma_i), ("gamma_f", gamma_f), ("t_ramp", t_ramp)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(DampingProfile {
            gamma_i,
            gamma_f,
            t_ramp,
        })
    }

    /// Constant damping at `gamma` for all times.
    pub fn constant(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma, 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.t_ramp == 0.0 || self.gamma_i == self.gamma_f
    }

    /// Damping coefficient at time `t >= 0`.
    pub fn damping_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "damping profile evaluated at negative time t = {t}"
            )));
        }
        Ok(self.gamma_unchecked(t))
    }

    /// Total evaluation used on the hot path; clamps t <= 0 to the ramp start.
    #[inline]
    pub(crate) fn gamma_unchecked(&self, t: f64) -> f64 {
        if self.t_ramp == 0.0 {
            self.gamma_f
        } else if t >= self.t_ramp {
            self.gamma_f
        } else if t <= 0.0 {
            self.gamma_i
        } else {
            self.gamma_i + (self.gamma_f - self.gamma_i) * (t / self.t_ramp)
        }
    }
}

/// Phase-space state carrying both the canonical angle and the cumulative
/// (unwrapped) angle used for winding counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// Canonical angle in `[-pi, pi)`.
    pub theta: f64,
    /// Angular velocity.
    pub theta_dot: f64,
    /// Cumulative angle on the real line; `theta == wrap_angle(theta_unwrapped)`.
    pub theta_unwrapped: f64,
}

impl State {
    /// Build a state from an arbitrary angle; the unwrapped angle starts at
    /// the given (uncanonicalized) value.
    pub fn new(theta: f64, theta_dot: f64) -> Self {
        State {
            theta: wrap_angle(theta),
            theta_dot,
            theta_unwrapped: theta,
        }
    }

    /// Advance the angle by `dtheta`, keeping the canonical representative
    /// and the cumulative angle in sync.
    #[inline]
    pub(crate) fn advance(&mut self, dtheta: f64, theta_dot: f64) {
        self.theta = wrap_angle(self.theta + dtheta);
        self.theta_unwrapped += dtheta;
        self.theta_dot = theta_dot;
    }
}

/// Right-hand side of the equations of motion:
/// `(theta', -(alpha - beta cos t) sin theta - gamma(t) theta')`.
#[inline]
pub fn vector_field(
    params: &SystemParams,
    profile: &DampingProfile,
    state: &State,
    t: f64,
) -> (f64, f64) {
    rhs(params, profile, state.theta, state.theta_dot, t)
}

#[inline]
pub(crate) fn rhs(
    params: &SystemParams,
    profile: &DampingProfile,
    theta: f64,
    theta_dot: f64,
    t: f64,
) -> (f64, f64) {
    let accel = -(params.alpha - params.beta * t.cos()) * theta.sin()
        - profile.gamma_unchecked(t) * theta_dot;
    (theta_dot, accel)
}

/// Mechanical energy `E = theta_dot^2 / 2 + alpha (1 - cos theta)`.
///
/// For `beta = 0` and `gamma >= 0` this is non-increasing along exact
/// trajectories, which the integrator tests rely on.
pub fn energy(params: &SystemParams, state: &State) -> f64 {
    0.5 * state.theta_dot * state.theta_dot + params.alpha * (1.0 - state.theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damping_linear_ramp_endpoints_and_midpoint() {
        let p = DampingProfile::new(0.02, 0.05, 8.0 * PI).unwrap();
        assert_eq!(p.damping_at(0.0).unwrap(), 0.02);
        assert!((p.damping_at(4.0 * PI).unwrap() - 0.035).abs() < 1e-15);
        assert_eq!(p.damping_at(8.0 * PI).unwrap(), 0.05);
        assert_eq!(p.damping_at(1000.0).unwrap(), 0.05);
    }

    #[test]
    fn damping_zero_ramp_is_constant_gamma_f() {
        let p = DampingProfile::new(0.05, 0.02, 0.0).unwrap();
        assert_eq!(p.damping_at(0.0).unwrap(), 0.02);
        assert_eq!(p.damping_at(1000.0).unwrap(), 0.02);
    }

    #[test]
    fn damping_negative_time_is_domain_error() {
        let p = DampingProfile::new(0.02, 0.05, 1.0).unwrap();
        assert!(matches!(p.damping_at(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn damping_rejects_negative_coefficients() {
        assert!(DampingProfile::new(-0.01, 0.05, 1.0).is_err());
        assert!(DampingProfile::new(0.01, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn field_at_equilibrium_is_zero() {
        let params = SystemParams::new(0.5, 0.1).unwrap();
        let profile = DampingProfile::constant(0.3).unwrap();
        let s = State::new(0.0, 0.0);
        for t in [0.0, 0.7, 13.0] {
            assert_eq!(vector_field(&params, &profile, &s, t), (0.0, 0.0));
        }
    }

    #[test]
    fn field_matches_hand_values() {
        let params = SystemParams::new(0.5, 0.1).unwrap();
        let undamped = DampingProfile::constant(0.0).unwrap();
        let s = State::new(PI / 2.0, 0.0);
        let (dth, dv) = vector_field(&params, &undamped, &s, 0.0);
        assert_eq!(dth, 0.0);
        assert!((dv - (-0.4)).abs() < 1e-15);

        let damped = DampingProfile::constant(0.02).unwrap();
        let s = State::new(PI / 2.0, 1.0);
        let (dth, dv) = vector_field(&params, &damped, &s, 0.0);
        assert_eq!(dth, 1.0);
        assert!((dv - (-0.42)).abs() < 1e-15);
    }

    #[test]
    fn field_is_periodic_in_time_at_section_times() {
        let params = SystemParams::new(0.5, 0.1).unwrap();
        let profile = DampingProfile::constant(0.02).unwrap();
        let s = State::new(1.3, -0.7);
        let base = vector_field(&params, &profile, &s, 0.0);
        for k in 1..50u32 {
            let shifted = vector_field(&params, &profile, &s, TWO_PI * f64::from(k));
            // Exact: cos is flat at multiples of 2*pi, so the rounding of
            // 2*pi*k never moves the drive term off 1.0.
            assert_eq!(base.0.to_bits(), shifted.0.to_bits());
            assert_eq!(base.1.to_bits(), shifted.1.to_bits());
        }
        // Off-section times are periodic up to the representability of t + 2*pi.
        for i in 0..100 {
            let t = 0.063 * f64::from(i);
            let a = vector_field(&params, &profile, &s, t);
            let b = vector_field(&params, &profile, &s, t + TWO_PI);
            assert!((a.1 - b.1).abs() < 4e-15);
        }
    }

    #[test]
    fn wrap_angle_canonical_range() {
        for &(input, expected) in &[
            (0.0, 0.0),
            (PI, -PI),
            (-PI, -PI),
            (3.0 * PI, -PI),
            (7.0, 7.0 - TWO_PI),
            (-1e-18, -1e-18),
        ] {
            let w = wrap_angle(input);
            assert!((-PI..PI).contains(&w), "wrap({input}) = {w} out of range");
            assert!((w - expected).abs() < 1e-12, "wrap({input}) = {w}");
        }
    }

    #[test]
    fn state_keeps_unwrapped_angle_in_sync() {
        let mut s = State::new(3.0, 0.5);
        s.advance(0.5, 0.4); // crosses the pi seam
        assert!((s.theta_unwrapped - 3.5).abs() < 1e-15);
        assert!((s.theta - (3.5 - TWO_PI)).abs() < 1e-15);
        assert!((wrap_angle(s.theta_unwrapped) - s.theta).abs() < 1e-12);
    }
}
