//! Time integration with two independent schemes and stroboscopic sampling.
//!
//! Two deliberately different integrators back every computation so results
//! can be cross-checked: a classical fixed-step 4-stage Runge-Kutta scheme
//! and an adaptive embedded Dormand-Prince 5(4) pair. Both advance the
//! canonical angle and accumulate the unwrapped angle, and both land exactly
//! on requested end times so that stroboscopic sections at multiples of the
//! forcing period stay attractor-preserving.

use crate::dynamics::{rhs, DampingProfile, State, SystemParams, TWO_PI};
use crate::error::{Error, Result};

/// Default fixed step: resolves the forcing period in 1000 steps, so every
/// time span that is a multiple of 2*pi is reachable in whole steps.
pub const DEFAULT_RK4_STEP: f64 = TWO_PI / 1000.0;

/// Integration scheme selection with per-scheme settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegratorConfig {
    /// Classical 4th-order Runge-Kutta with a fixed step `step`;
    /// `2*pi / step` must be an integer.
    FixedRk4 { step: f64 },
    /// Dormand-Prince 5(4) embedded pair with per-step error control.
    AdaptiveEmbedded { abs_tol: f64, rel_tol: f64 },
}

impl IntegratorConfig {
    pub fn fixed_rk4(step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("step must be positive, got {step}")));
        }
        let per_period = TWO_PI / step;
        if (per_period - per_period.round()).abs() > 1e-9 * per_period {
            return Err(Error::Config(format!(
                "2*pi/step must be an integer so fixed steps land on period \
                 boundaries, got {per_period}"
            )));
        }
        Ok(IntegratorConfig::FixedRk4 { step })
    }

    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || !abs_tol.is_finite() || !rel_tol.is_finite() {
            return Err(Error::Config(format!(
                "tolerances must be positive, got abs_tol = {abs_tol}, rel_tol = {rel_tol}"
            )));
        }
        Ok(IntegratorConfig::AdaptiveEmbedded { abs_tol, rel_tol })
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::AdaptiveEmbedded {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

/// Trajectory sampled at stroboscopic section times `t = 2*pi*k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StroboscopicOrbit {
    /// `(theta, theta_dot)` at each sampled period boundary, canonical theta.
    pub section_points: Vec<(f64, f64)>,
    /// Change of the unwrapped angle over each sampled period, in turns.
    pub winding_increments: Vec<f64>,
}

// Dormand-Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Error weights: 5th-order solution minus the embedded 4th-order one.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const H_MAX: f64 = 0.25 * std::f64::consts::PI;
const H_INIT: f64 = 1e-2;
const SAFETY: f64 = 0.9;

/// Adaptive-driver state carried across segments so chained integrations
/// (one call per forcing period) do not re-ramp the step size.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AdaptiveCarry {
    h: f64,
    k1: Option<(f64, f64)>,
}

impl AdaptiveCarry {
    pub(crate) fn fresh() -> Self {
        AdaptiveCarry {
            h: H_INIT,
            k1: None,
        }
    }
}

#[inline]
fn rk4_step(
    params: &SystemParams,
    profile: &DampingProfile,
    th: f64,
    v: f64,
    t: f64,
    h: f64,
) -> (f64, f64) {
    let (k1t, k1v) = rhs(params, profile, th, v, t);
    let half = 0.5 * h;
    let tm = t + half;
    let (k2t, k2v) = rhs(params, profile, th + half * k1t, v + half * k1v, tm);
    let (k3t, k3v) = rhs(params, profile, th + half * k2t, v + half * k2v, tm);
    let (k4t, k4v) = rhs(params, profile, th + h * k3t, v + h * k3v, t + h);
    let sixth = h / 6.0;
    (
        sixth * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

fn integrate_fixed(
    params: &SystemParams,
    profile: &DampingProfile,
    mut state: State,
    t_from: f64,
    t_to: f64,
    step: f64,
) -> Result<State> {
    let span = t_to - t_from;
    if span == 0.0 {
        return Ok(state);
    }
    // Derive step times from the step index so period boundaries are exact.
    let q = span / step;
    let mut n_full = q.floor();
    if q - n_full > 1.0 - 1e-9 {
        n_full += 1.0;
    }
    let n_full = n_full as u64;
    for i in 0..n_full {
        let t = t_from + step * i as f64;
        let (dth, dv) = rk4_step(params, profile, state.theta, state.theta_dot, t, step);
        if !dth.is_finite() || !dv.is_finite() {
            return Err(Error::Divergence { t });
        }
        state.advance(dth, state.theta_dot + dv);
    }
    let t_reached = t_from + step * n_full as f64;
    let rem = t_to - t_reached;
    if rem > 1e-12 * t_to.abs().max(1.0) {
        let (dth, dv) = rk4_step(params, profile, state.theta, state.theta_dot, t_reached, rem);
        if !dth.is_finite() || !dv.is_finite() {
            return Err(Error::Divergence { t: t_reached });
        }
        state.advance(dth, state.theta_dot + dv);
    }
    Ok(state)
}

fn integrate_adaptive(
    params: &SystemParams,
    profile: &DampingProfile,
    mut state: State,
    t_from: f64,
    t_to: f64,
    abs_tol: f64,
    rel_tol: f64,
    carry: &mut AdaptiveCarry,
) -> Result<State> {
    if t_to == t_from {
        return Ok(state);
    }
    let mut t = t_from;
    let mut h = carry.h.min(H_MAX);
    let mut k1 = match carry.k1 {
        Some(k) => k,
        None => rhs(params, profile, state.theta, state.theta_dot, t),
    };

    loop {
        let remaining = t_to - t;
        let last = h >= remaining;
        let hs = if last { remaining } else { h };

        let th = state.theta;
        let v = state.theta_dot;
        let (k1t, k1v) = k1;
        let (k2t, k2v) = rhs(
            params,
            profile,
            th + hs * (A21 * k1t),
            v + hs * (A21 * k1v),
            t + C2 * hs,
        );
        let (k3t, k3v) = rhs(
            params,
            profile,
            th + hs * (A31 * k1t + A32 * k2t),
            v + hs * (A31 * k1v + A32 * k2v),
            t + C3 * hs,
        );
        let (k4t, k4v) = rhs(
            params,
            profile,
            th + hs * (A41 * k1t + A42 * k2t + A43 * k3t),
            v + hs * (A41 * k1v + A42 * k2v + A43 * k3v),
            t + C4 * hs,
        );
        let (k5t, k5v) = rhs(
            params,
            profile,
            th + hs * (A51 * k1t + A52 * k2t + A53 * k3t + A54 * k4t),
            v + hs * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
            t + C5 * hs,
        );
        let (k6t, k6v) = rhs(
            params,
            profile,
            th + hs * (A61 * k1t + A62 * k2t + A63 * k3t + A64 * k4t + A65 * k5t),
            v + hs * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
            t + hs,
        );
        let dth = hs * (B1 * k1t + B3 * k3t + B4 * k4t + B5 * k5t + B6 * k6t);
        let dv = hs * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v);
        let th_new = th + dth;
        let v_new = v + dv;
        let t_new = if last { t_to } else { t + hs };
        let (k7t, k7v) = rhs(params, profile, th_new, v_new, t_new);

        let err_th =
            hs * (E1 * k1t + E3 * k3t + E4 * k4t + E5 * k5t + E6 * k6t + E7 * k7t);
        let err_v = hs * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v);
        let sc_th = abs_tol + rel_tol * th.abs().max(th_new.abs());
        let sc_v = abs_tol + rel_tol * v.abs().max(v_new.abs());
        let e0 = err_th / sc_th;
        let e1 = err_v / sc_v;
        let err = (0.5 * (e0 * e0 + e1 * e1)).sqrt();

        if !err.is_finite() || !th_new.is_finite() || !v_new.is_finite() {
            h *= 0.5;
            if h < 1e-13 * (1.0 + t.abs()) {
                return Err(Error::Divergence { t });
            }
            continue;
        }

        if err <= 1.0 {
            state.advance(dth, v_new);
            t = t_new;
            k1 = (k7t, k7v);
            let factor = if err == 0.0 {
                5.0
            } else {
                (SAFETY * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (hs * factor).min(H_MAX);
            if last {
                carry.h = h;
                carry.k1 = Some(k1);
                return Ok(state);
            }
        } else {
            h = hs * (SAFETY * err.powf(-0.2)).clamp(0.2, 0.9);
            if h < 1e-13 * (1.0 + t.abs()) {
                return Err(Error::Divergence { t });
            }
        }
    }
}

fn integrate_with_carry(
    params: &SystemParams,
    profile: &DampingProfile,
    state: State,
    t_from: f64,
    t_to: f64,
    config: &IntegratorConfig,
    carry: &mut AdaptiveCarry,
) -> Result<State> {
    if !(t_to >= t_from) {
        return Err(Error::Domain(format!(
            "integration span reversed: t_from = {t_from}, t_to = {t_to}"
        )));
    }
    match *config {
        IntegratorConfig::FixedRk4 { step } => {
            integrate_fixed(params, profile, state, t_from, t_to, step)
        }
        IntegratorConfig::AdaptiveEmbedded { abs_tol, rel_tol } => integrate_adaptive(
            params, profile, state, t_from, t_to, abs_tol, rel_tol, carry,
        ),
    }
}

/// Advance `state` from `t_from` to `t_to`.
///
/// Deterministic: identical inputs give bit-identical outputs. The adaptive
/// scheme clamps its final step so the returned state is sampled exactly at
/// `t_to`.
pub fn integrate(
    params: &SystemParams,
    profile: &DampingProfile,
    state: State,
    t_from: f64,
    t_to: f64,
    config: &IntegratorConfig,
) -> Result<State> {
    let mut carry = AdaptiveCarry::fresh();
    integrate_with_carry(params, profile, state, t_from, t_to, config, &mut carry)
}

/// Integrate `n_transient` forcing periods, then record the section point
/// and per-period winding increment at each of the next `n_sample` period
/// boundaries. Section times are derived from integer period counts
/// (`t = 2*pi*k`), never accumulated.
pub fn stroboscopic_orbit(
    params: &SystemParams,
    profile: &DampingProfile,
    state: State,
    n_transient: u64,
    n_sample: u64,
    config: &IntegratorConfig,
) -> Result<StroboscopicOrbit> {
    let mut runner = OrbitRunner::new(params, profile, state, config);
    runner.advance_periods(n_transient)?;
    runner.sample_periods(n_sample)
}

/// Incremental stroboscopic driver: keeps the trajectory state between
/// segments so callers can extend an integration (e.g. when a classification
/// needs more time) without recomputing the transient.
pub struct OrbitRunner<'a> {
    params: &'a SystemParams,
    profile: &'a DampingProfile,
    config: &'a IntegratorConfig,
    state: State,
    period: u64,
    carry: AdaptiveCarry,
}

impl<'a> OrbitRunner<'a> {
    pub fn new(
        params: &'a SystemParams,
        profile: &'a DampingProfile,
        state: State,
        config: &'a IntegratorConfig,
    ) -> Self {
        OrbitRunner {
            params,
            profile,
            config,
            state,
            period: 0,
            carry: AdaptiveCarry::fresh(),
        }
    }

    /// Number of whole forcing periods integrated so far.
    pub fn periods_elapsed(&self) -> u64 {
        self.period
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Advance by `n` forcing periods without recording anything.
    pub fn advance_periods(&mut self, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step_period()?;
        }
        Ok(())
    }

    /// Advance by `n` periods recording a section sample at each boundary.
    pub fn sample_periods(&mut self, n: u64) -> Result<StroboscopicOrbit> {
        let mut section_points = Vec::with_capacity(n as usize);
        let mut winding_increments = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let before = self.state.theta_unwrapped;
            self.step_period()?;
            section_points.push((self.state.theta, self.state.theta_dot));
            winding_increments.push((self.state.theta_unwrapped - before) / TWO_PI);
        }
        Ok(StroboscopicOrbit {
            section_points,
            winding_increments,
        })
    }

    fn step_period(&mut self) -> Result<()> {
        let t_from = TWO_PI * self.period as f64;
        let t_to = TWO_PI * (self.period + 1) as f64;
        self.state = integrate_with_carry(
            self.params,
            self.profile,
            self.state,
            t_from,
            t_to,
            self.config,
            &mut self.carry,
        )?;
        self.period += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::energy;

    fn params() -> SystemParams {
        SystemParams::new(0.5, 0.1).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::fixed_rk4(TWO_PI / 1000.0).is_ok());
        assert!(IntegratorConfig::fixed_rk4(1.0).is_err()); // 2*pi not divisible
        assert!(IntegratorConfig::fixed_rk4(-0.1).is_err());
        assert!(IntegratorConfig::adaptive(1e-10, 1e-8).is_ok());
        assert!(IntegratorConfig::adaptive(0.0, 1e-8).is_err());
    }

    #[test]
    fn equilibrium_is_preserved_exactly() {
        let profile = DampingProfile::new(0.02, 0.05, 8.0 * TWO_PI).unwrap();
        for config in [
            IntegratorConfig::fixed_rk4(DEFAULT_RK4_STEP).unwrap(),
            IntegratorConfig::adaptive(1e-10, 1e-10).unwrap(),
        ] {
            let s = integrate(&params(), &profile, State::new(0.0, 0.0), 0.0, 10.0 * TWO_PI, &config)
                .unwrap();
            assert_eq!(s.theta, 0.0);
            assert_eq!(s.theta_dot, 0.0);
            assert_eq!(s.theta_unwrapped, 0.0);
        }
    }

    #[test]
    fn damped_unforced_pendulum_dissipates_energy() {
        let p = SystemParams::new(0.5, 0.0).unwrap();
        let profile = DampingProfile::constant(0.05).unwrap();
        let config = IntegratorConfig::fixed_rk4(DEFAULT_RK4_STEP).unwrap();
        let s0 = State::new(0.1, 0.0);
        let e0 = energy(&p, &s0);
        let s1 = integrate(&p, &profile, s0, 0.0, TWO_PI, &config).unwrap();
        let e1 = energy(&p, &s1);
        assert!(e1 < e0, "energy must strictly decrease: {e0} -> {e1}");
    }

    #[test]
    fn energy_never_increases_without_forcing() {
        // Per-period energy change stays within integrator accuracy for a
        // range of damping values and initial conditions.
        let p = SystemParams::new(0.5, 0.0).unwrap();
        let config = IntegratorConfig::adaptive(1e-12, 1e-12).unwrap();
        for gamma in [0.0, 0.02, 0.3] {
            let profile = DampingProfile::constant(gamma).unwrap();
            let mut s = State::new(2.4, 1.1);
            let mut e_prev = energy(&p, &s);
            for k in 0..20u64 {
                s = integrate(
                    &p,
                    &profile,
                    s,
                    TWO_PI * k as f64,
                    TWO_PI * (k + 1) as f64,
                    &config,
                )
                .unwrap();
                let e = energy(&p, &s);
                assert!(e <= e_prev + 1e-9, "gamma={gamma}: {e_prev} -> {e}");
                e_prev = e;
            }
        }
    }

    fn rk4_error_vs(reference: &State, s: &State) -> f64 {
        ((s.theta_unwrapped - reference.theta_unwrapped).powi(2)
            + (s.theta_dot - reference.theta_dot).powi(2))
        .sqrt()
    }

    #[test]
    fn rk4_step_halving_shows_fourth_order() {
        let p = params();
        let profile = DampingProfile::constant(0.02).unwrap();
        let s0 = State::new(3.0, 0.5);
        let run = |den: f64, periods: f64| {
            let config = IntegratorConfig::fixed_rk4(TWO_PI / den).unwrap();
            integrate(&p, &profile, s0, 0.0, periods * TWO_PI, &config).unwrap()
        };
        // Coarse steps over several periods keep the truncation error well
        // above the rounding floor, where the order is measurable.
        let r = run(4000.0, 4.0);
        let err_c = rk4_error_vs(&r, &run(500.0, 4.0));
        let err_f = rk4_error_vs(&r, &run(1000.0, 4.0));
        let order = (err_c / err_f).log2();
        assert!(
            order >= 3.8,
            "observed RK4 order {order} (errors {err_c} vs {err_f})"
        );

        // At the default resolution the halving factor is noisier (errors sit
        // around 1e-12) but must still be near 16.
        let r = run(8000.0, 1.0);
        let factor = rk4_error_vs(&r, &run(1000.0, 1.0)) / rk4_error_vs(&r, &run(2000.0, 1.0));
        assert!((12.0..24.0).contains(&factor), "halving factor {factor}");
    }

    #[test]
    fn integration_is_bit_deterministic() {
        let p = params();
        let profile = DampingProfile::new(0.02, 0.05, 8.0 * std::f64::consts::PI).unwrap();
        for config in [
            IntegratorConfig::fixed_rk4(DEFAULT_RK4_STEP).unwrap(),
            IntegratorConfig::adaptive(1e-10, 1e-8).unwrap(),
        ] {
            let a = integrate(&p, &profile, State::new(1.2, -0.4), 0.0, 20.0 * TWO_PI, &config)
                .unwrap();
            let b = integrate(&p, &profile, State::new(1.2, -0.4), 0.0, 20.0 * TWO_PI, &config)
                .unwrap();
            assert_eq!(a.theta.to_bits(), b.theta.to_bits());
            assert_eq!(a.theta_dot.to_bits(), b.theta_dot.to_bits());
            assert_eq!(a.theta_unwrapped.to_bits(), b.theta_unwrapped.to_bits());
        }
    }

    #[test]
    fn schemes_agree_over_a_hundred_periods() {
        let p = params();
        let profile = DampingProfile::constant(0.05).unwrap();
        let rk4 = IntegratorConfig::fixed_rk4(DEFAULT_RK4_STEP).unwrap();
        let dp = IntegratorConfig::adaptive(1e-10, 1e-10).unwrap();
        for ic in [(1.0, 0.5), (0.5, -2.0), (2.5, 1.5)] {
            let s0 = State::new(ic.0, ic.1);
            let a = stroboscopic_orbit(&p, &profile, s0, 100, 1, &rk4).unwrap();
            let b = stroboscopic_orbit(&p, &profile, s0, 100, 1, &dp).unwrap();
            let (ta, va) = a.section_points[0];
            let (tb, vb) = b.section_points[0];
            assert!(
                (ta - tb).abs() < 1e-6 && (va - vb).abs() < 1e-6,
                "ic {ic:?}: rk4 ({ta}, {va}) vs adaptive ({tb}, {vb})"
            );
        }
    }

    #[test]
    fn stroboscopic_orbit_lengths_and_origin() {
        let p = params();
        let profile = DampingProfile::constant(0.05).unwrap();
        let config = IntegratorConfig::default();
        let orbit =
            stroboscopic_orbit(&p, &profile, State::new(0.0, 0.0), 5, 7, &config).unwrap();
        assert_eq!(orbit.section_points.len(), 7);
        assert_eq!(orbit.winding_increments.len(), 7);
        assert!(orbit.section_points.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
        assert!(orbit.winding_increments.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn unforced_orbit_converges_to_origin() {
        let p = SystemParams::new(0.5, 0.0).unwrap();
        let profile = DampingProfile::constant(0.05).unwrap();
        let config = IntegratorConfig::default();
        let orbit =
            stroboscopic_orbit(&p, &profile, State::new(2.0, 1.0), 300, 1, &config).unwrap();
        let (th, v) = orbit.section_points[0];
        assert!(th.abs() < 1e-2 && v.abs() < 1e-2, "({th}, {v})");
    }

    #[test]
    fn rotating_orbit_winds_once_per_period() {
        // (1.5, 2.5) sits in the positively rotating basin at gamma = 0.02;
        // its mirror image rotates the other way.
        let p = params();
        let profile = DampingProfile::constant(0.02).unwrap();
        let config = IntegratorConfig::default();
        for dir in [1.0f64, -1.0] {
            let s0 = State::new(dir * 1.5, dir * 2.5);
            let orbit = stroboscopic_orbit(&p, &profile, s0, 500, 8, &config).unwrap();
            for w in &orbit.winding_increments {
                assert!((w - dir).abs() < 1e-3, "winding increment {w} vs {dir}");
            }
        }
    }

    #[test]
    fn divergence_reports_time() {
        // A wildly unstable artificial configuration: huge negative damping.
        let p = params();
        let profile = DampingProfile::new(0.0, 0.0, 0.0).unwrap();
        // Negative damping is rejected by the profile constructor, so force a
        // divergence through a non-finite initial state instead.
        let bad = State {
            theta: 0.1,
            theta_dot: f64::INFINITY,
            theta_unwrapped: 0.1,
        };
        let config = IntegratorConfig::fixed_rk4(DEFAULT_RK4_STEP).unwrap();
        match integrate(&p, &profile, bad, 0.0, TWO_PI, &config) {
            Err(Error::Divergence { t }) => assert_eq!(t, 0.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
