//! Classification of asymptotic behaviour from stroboscopic samples, and a
//! deduplicated catalog of the attractors found.
//!
//! A trajectory sampled at period boundaries is searched for the smallest
//! cycle length k whose last 2k section points repeat within a convergence
//! tolerance. The per-cycle winding (net turns of the unwrapped angle)
//! separates oscillations from rotations; a 1-cycle sitting on an
//! equilibrium is the fixed point.

use crate::dynamics::{wrap_angle, DampingProfile, State, SystemParams};
use crate::error::Result;
use crate::integrator::{IntegratorConfig, OrbitRunner, StroboscopicOrbit};

/// Default convergence tolerance (phase-space Euclidean distance).
pub const DEFAULT_EPS_CONVERGE: f64 = 1e-4;
/// Default catalog matching tolerance.
pub const DEFAULT_MATCH_EPS: f64 = 1e-2;
/// Default maximum cycle length searched.
pub const DEFAULT_MAX_PERIOD: u32 = 8;
/// Winding counts must sit this close to an integer to be accepted.
const WINDING_EPS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttractorKind {
    FixedPoint,
    Oscillation { period: u32 },
    Rotation { direction: i8, period: u32 },
}

impl AttractorKind {
    /// Net winding (turns of theta) accumulated over one full cycle.
    pub fn net_winding(&self) -> i64 {
        match *self {
            AttractorKind::FixedPoint | AttractorKind::Oscillation { .. } => 0,
            AttractorKind::Rotation { direction, period } => {
                i64::from(direction) * i64::from(period)
            }
        }
    }

    pub fn period(&self) -> u32 {
        match *self {
            AttractorKind::FixedPoint => 1,
            AttractorKind::Oscillation { period } | AttractorKind::Rotation { period, .. } => {
                period
            }
        }
    }

    /// Short display name following the usual pendulum nomenclature.
    pub fn short_name(&self) -> String {
        match *self {
            AttractorKind::FixedPoint => "FP".into(),
            AttractorKind::Oscillation { period: 1 } => "OSC".into(),
            AttractorKind::Oscillation { period } => format!("DO{period}"),
            AttractorKind::Rotation { direction: 1, period: 1 } => "PR".into(),
            AttractorKind::Rotation { direction: -1, period: 1 } => "NR".into(),
            AttractorKind::Rotation { direction, period } => format!("R{direction:+}x{period}"),
        }
    }
}

/// A classified limit set: its kind and the k section points of the cycle in
/// chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorLabel {
    pub kind: AttractorKind,
    pub representative: Vec<(f64, f64)>,
}

/// Result of classifying one orbit; unresolved orbits are retried with a
/// longer integration by the callers before being given up on.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyOutcome {
    Resolved(AttractorLabel),
    Unresolved,
}

/// Distance on the phase cylinder: circular in theta, Euclidean in theta_dot.
#[inline]
fn phase_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dth = wrap_angle(a.0 - b.0);
    let dv = a.1 - b.1;
    (dth * dth + dv * dv).sqrt()
}

/// Find the smallest cycle length <= `max_period` under which the tail of
/// the orbit repeats within `eps_converge`.
///
/// Requires at least `2 * max_period` section points. A cycle with integral
/// winding w per k periods classifies as: fixed point (k = 1, on an
/// equilibrium), oscillation (w = 0), or rotation (|w| = k, one turn per
/// period). Anything else stays unresolved.
pub fn classify(
    orbit: &StroboscopicOrbit,
    eps_converge: f64,
    max_period: u32,
) -> ClassifyOutcome {
    let pts = &orbit.section_points;
    let winds = &orbit.winding_increments;
    let n = pts.len();
    assert!(
        n >= 2 * max_period as usize && n == winds.len(),
        "classification needs at least 2*max_period section samples"
    );

    for k in 1..=max_period as usize {
        let window = &pts[n - 2 * k..];
        let converged = (0..k).all(|j| phase_distance(window[j], window[j + k]) < eps_converge);
        if !converged {
            continue;
        }
        let net: f64 = winds[n - k..].iter().sum();
        let rounded = net.round();
        if (net - rounded).abs() > WINDING_EPS {
            continue;
        }
        let w = rounded as i64;
        let representative = pts[n - k..].to_vec();
        let kind = if w == 0 {
            let (th, v) = pts[n - 1];
            if k == 1 && v.abs() < eps_converge && th.sin().abs() < eps_converge {
                AttractorKind::FixedPoint
            } else {
                AttractorKind::Oscillation { period: k as u32 }
            }
        } else if w.unsigned_abs() as usize == k {
            AttractorKind::Rotation {
                direction: if w > 0 { 1 } else { -1 },
                period: k as u32,
            }
        } else {
            // Winding incompatible with a one-turn-per-period rotation:
            // leave it for a larger k or the unresolved bucket.
            continue;
        };
        return ClassifyOutcome::Resolved(AttractorLabel { kind, representative });
    }
    ClassifyOutcome::Unresolved
}

/// Convergence settings for the settle-and-classify loop.
#[derive(Debug, Clone, Copy)]
pub struct SettleSettings {
    pub eps_converge: f64,
    pub max_period: u32,
    /// Unresolved orbits are retried with doubled integration time until the
    /// total budget reaches this multiple of the base time.
    pub retry_cap_mult: u64,
}

impl Default for SettleSettings {
    fn default() -> Self {
        SettleSettings {
            eps_converge: DEFAULT_EPS_CONVERGE,
            max_period: DEFAULT_MAX_PERIOD,
            retry_cap_mult: 4,
        }
    }
}

/// Integrate for `base_periods` forcing periods and classify the orbit tail;
/// unresolved orbits keep integrating (doubling the budget, reusing the work
/// already done) up to `retry_cap_mult` times the base budget.
pub fn settle_and_classify(
    params: &SystemParams,
    profile: &DampingProfile,
    state: State,
    base_periods: u64,
    config: &IntegratorConfig,
    settings: &SettleSettings,
) -> Result<ClassifyOutcome> {
    let window = 2 * u64::from(settings.max_period);
    let base = base_periods.max(window);
    let cap = base.saturating_mul(settings.retry_cap_mult.max(1));
    let mut runner = OrbitRunner::new(params, profile, state, config);
    let mut target = base;
    loop {
        let transient = target - window - runner.periods_elapsed();
        runner.advance_periods(transient)?;
        let orbit = runner.sample_periods(window)?;
        match classify(&orbit, settings.eps_converge, settings.max_period) {
            ClassifyOutcome::Resolved(label) => return Ok(ClassifyOutcome::Resolved(label)),
            ClassifyOutcome::Unresolved => {}
        }
        if target >= cap {
            return Ok(ClassifyOutcome::Unresolved);
        }
        target = (target * 2).min(cap);
    }
}

/// Registry of distinct attractors with stable ids in first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCatalog {
    entries: Vec<AttractorLabel>,
    match_eps: f64,
}

impl AttractorCatalog {
    pub fn new(match_eps: f64) -> Self {
        AttractorCatalog {
            entries: Vec::new(),
            match_eps,
        }
    }

    pub fn with_default_eps() -> Self {
        Self::new(DEFAULT_MATCH_EPS)
    }

    pub fn match_eps(&self) -> f64 {
        self.match_eps
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AttractorLabel] {
        &self.entries
    }

    pub fn get(&self, id: u16) -> Option<&AttractorLabel> {
        self.entries.get(id as usize)
    }

    /// Two labels describe the same attractor when their cycle lengths and
    /// net windings agree and the representative cycles coincide within
    /// `match_eps` under some cyclic shift.
    fn matches(&self, a: &AttractorLabel, b: &AttractorLabel) -> bool {
        cycles_match(&a.representative, &b.representative, self.match_eps)
            && a.kind.net_winding() == b.kind.net_winding()
    }

    /// Id of the entry matching `label`, if any.
    pub fn find(&self, label: &AttractorLabel) -> Option<u16> {
        self.entries
            .iter()
            .position(|e| self.matches(e, label))
            .map(|i| i as u16)
    }

    /// Return the id of a matching entry, inserting the label as a new entry
    /// when nothing matches. Ids are never reused.
    pub fn match_or_insert(&mut self, label: &AttractorLabel) -> u16 {
        if let Some(id) = self.find(label) {
            return id;
        }
        assert!(self.entries.len() < usize::from(u16::MAX), "catalog overflow");
        self.entries.push(label.clone());
        (self.entries.len() - 1) as u16
    }

    /// Merge another catalog into this one; returns the id each of `other`'s
    /// entries ended up with. The set of distinct attractors after a merge
    /// does not depend on the merge order.
    pub fn merge(&mut self, other: &AttractorCatalog) -> Vec<u16> {
        other
            .entries
            .iter()
            .map(|label| self.match_or_insert(label))
            .collect()
    }

    /// Group entries related by the phase-space symmetry
    /// `(theta, theta_dot) -> (-theta, -theta_dot)` of the equations of
    /// motion. Only same-kind entries merge (a positive and a negative
    /// rotation stay distinct); the result maps each id to the smallest id
    /// of its group.
    pub fn symmetric_groups(&self) -> Vec<u16> {
        let mut group: Vec<u16> = (0..self.entries.len() as u16).collect();
        for i in 0..self.entries.len() {
            if group[i] != i as u16 {
                continue;
            }
            let a = &self.entries[i];
            for j in (i + 1)..self.entries.len() {
                if group[j] != j as u16 {
                    continue;
                }
                let b = &self.entries[j];
                if a.kind != b.kind {
                    continue;
                }
                let mirrored: Vec<(f64, f64)> = b
                    .representative
                    .iter()
                    .map(|&(th, v)| (wrap_angle(-th), -v))
                    .collect();
                if cycles_match(&a.representative, &mirrored, self.match_eps) {
                    group[j] = i as u16;
                }
            }
        }
        group
    }
}

/// Cyclic-shift comparison of two cycles under the phase metric.
fn cycles_match(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let k = a.len();
    (0..k).any(|shift| (0..k).all(|j| phase_distance(a[j], b[(j + shift) % k]) < eps))
}
