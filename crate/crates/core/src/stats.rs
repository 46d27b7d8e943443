//! Monte Carlo confidence intervals for estimated basin areas.
//!
//! Areas are estimated as binomial proportions over N sampled initial
//! conditions; the half-width of the normal-approximation interval is
//! `z * sqrt(p(1-p)/N)` with tabulated z values.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceLevel {
    P90,
    P95,
    P99,
}

impl ConfidenceLevel {
    pub fn from_percent(pct: u32) -> Result<Self> {
        match pct {
            90 => Ok(ConfidenceLevel::P90),
            95 => Ok(ConfidenceLevel::P95),
            99 => Ok(ConfidenceLevel::P99),
            other => Err(Error::Config(format!(
                "unsupported confidence level {other}%, expected 90, 95 or 99"
            ))),
        }
    }

    pub fn as_fraction(self) -> f64 {
        match self {
            ConfidenceLevel::P90 => 0.90,
            ConfidenceLevel::P95 => 0.95,
            ConfidenceLevel::P99 => 0.99,
        }
    }
}

/// A confidence level together with its critical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSpec {
    pub level: ConfidenceLevel,
    pub z: f64,
}

impl ConfidenceSpec {
    /// Tabulated critical values; no special-function evaluation involved.
    pub fn new(level: ConfidenceLevel) -> Self {
        let z = match level {
            ConfidenceLevel::P90 => 1.6449,
            ConfidenceLevel::P95 => 1.9600,
            ConfidenceLevel::P99 => 2.5758,
        };
        ConfidenceSpec { level, z }
    }

    pub fn p95() -> Self {
        Self::new(ConfidenceLevel::P95)
    }
}

/// Half-width of the confidence interval around an estimated proportion
/// `p_hat` from `n` samples, as a fraction.
pub fn ci_half_width(p_hat: f64, n: u64, spec: &ConfidenceSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::Domain(format!(
            "proportion must lie in [0, 1], got {p_hat}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    Ok(spec.z * (p_hat * (1.0 - p_hat) / n as f64).sqrt())
}

/// Full cross product of half-widths for lists of proportions and sample
/// counts; `table[i][j]` pairs `p_hats[i]` with `ns[j]`.
pub fn ci_table(p_hats: &[f64], ns: &[u64], spec: &ConfidenceSpec) -> Result<Vec<Vec<f64>>> {
    if p_hats.is_empty() || ns.is_empty() {
        return Err(Error::Config("confidence table inputs must be non-empty".into()));
    }
    p_hats
        .iter()
        .map(|&p| ns.iter().map(|&n| ci_half_width(p, n, spec)).collect())
        .collect()
}

/// True when `area_a` lies within the confidence interval centred on
/// `area_b` at sample size `n`.
pub fn within_ci(area_a: f64, area_b: f64, n: u64, spec: &ConfidenceSpec) -> Result<bool> {
    for (name, v) in [("area_a", area_a), ("area_b", area_b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok((area_a - area_b).abs() <= ci_half_width(area_b, n, spec)?)
}

/// Proportions (percent) and sample counts used for the standard exported
/// confidence table.
pub const TABLE_P_HAT_PERCENT: [f64; 12] =
    [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0];
pub const TABLE_N: [u64; 9] = [
    10_000, 50_000, 100_000, 200_000, 300_000, 400_000, 500_000, 600_000, 1_000_000,
];

/// CSV rendering of the standard table: one row per proportion, one column
/// per sample count, half-widths in percentage points to 4 decimals.
pub fn ci_table_csv(spec: &ConfidenceSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# confidence_level = {:.2}\n# z = {}\n",
        spec.level.as_fraction(),
        spec.z
    ));
    out.push_str("p_hat_percent");
    for n in TABLE_N {
        out.push_str(&format!(",N={n}"));
    }
    out.push('\n');
    for &p_pct in TABLE_P_HAT_PERCENT.iter() {
        out.push_str(&format!("{p_pct}"));
        for &n in TABLE_N.iter() {
            let hw = ci_half_width(p_pct / 100.0, n, spec).expect("table inputs are valid");
            out.push_str(&format!(",{:.4}", hw * 100.0));
        }
        out.push('\n');
    }
    out
}
