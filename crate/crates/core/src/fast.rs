//! Fast basin estimation: evolve initial conditions only to an observation
//! time T1, round onto the constant-damping atlas mesh, and read off the
//! asymptotic label — plus the ground-truth full integration and the
//! point-by-point accuracy comparison between the two.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::atlas::{periods_of, Atlas, Mesh, SAMPLE_V_BOUND};
use crate::attractor::{
    settle_and_classify, AttractorCatalog, ClassifyOutcome, SettleSettings, DEFAULT_MATCH_EPS,
};
use crate::dynamics::{DampingProfile, State, SystemParams, PI, TWO_PI};
use crate::error::{Error, Result};
use crate::hash::Fnv1a64;
use crate::integrator::{integrate, IntegratorConfig};
use crate::stats::{ci_half_width, ConfidenceSpec};

/// Smallest integer multiple of the forcing period that is at least
/// `max(t0, t_min)`.
pub fn choose_t1(t0: f64, t_min: f64) -> f64 {
    let target = t0.max(t_min);
    // A hair of slack so 24.000000000000004 periods round down, not up.
    let n = (target / TWO_PI - 1e-9).ceil().max(0.0);
    TWO_PI * n
}

/// How the initial conditions were generated.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialMode {
    Mesh(Mesh),
    Random { count: usize, seed: u64 },
}

/// A realized set of initial conditions in the sample region
/// S = [-pi, pi] x [-4, 4].
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSet {
    pub mode: InitialMode,
    pub points: Vec<(f64, f64)>,
}

impl InitialSet {
    /// Uniform random points over S, reproducible from the seed.
    pub fn random(count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("initial set must contain at least one point".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                let theta = rng.random_range(-PI..PI);
                let v = rng.random_range(-SAMPLE_V_BOUND..SAMPLE_V_BOUND);
                (theta, v)
            })
            .collect();
        Ok(InitialSet {
            mode: InitialMode::Random { count, seed },
            points,
        })
    }

    /// All nodes of a mesh, in node-index order.
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut points = Vec::with_capacity(mesh.n_nodes());
        for i in 0..=mesh.p {
            for j in 0..=mesh.m {
                points.push(mesh.node(i, j));
            }
        }
        InitialSet {
            mode: InitialMode::Mesh(*mesh),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            InitialMode::Random { seed, .. } => Some(seed),
            InitialMode::Mesh(_) => None,
        }
    }

    /// Order-sensitive fingerprint of the realized points, used to verify
    /// that two results were computed over the identical initial set.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a64::new();
        for &(th, v) in &self.points {
            h.update(&th.to_le_bytes());
            h.update(&v.to_le_bytes());
        }
        h.finish()
    }
}

/// Arrival of one trajectory at the observation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arrival {
    At { theta: f64, theta_dot: f64 },
    Divergent { t: f64 },
}

/// Record of the movement map restricted to an initial set: where each
/// departure point arrives at time `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovementMapRecord {
    pub t1: f64,
    pub arrivals: Vec<Arrival>,
}

impl MovementMapRecord {
    /// Arrival coordinates of non-divergent trajectories.
    pub fn arrival_points(&self) -> Vec<(f64, f64)> {
        self.arrivals
            .iter()
            .filter_map(|a| match *a {
                Arrival::At { theta, theta_dot } => Some((theta, theta_dot)),
                Arrival::Divergent { .. } => None,
            })
            .collect()
    }
}

/// Integrate every point of `initial` over `[0, t1]` with the time-varying
/// profile; arrival angles are reported canonical. Divergent trajectories
/// are recorded per point, not raised.
pub fn movement_map(
    params: &SystemParams,
    profile: &DampingProfile,
    initial: &InitialSet,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<MovementMapRecord> {
    periods_of(t1, "t1")?;
    let arrivals = initial
        .points
        .par_iter()
        .map(|&(theta, v)| {
            match integrate(params, profile, State::new(theta, v), 0.0, t1, config) {
                Ok(s) => Arrival::At {
                    theta: s.theta,
                    theta_dot: s.theta_dot,
                },
                Err(Error::Divergence { t }) => Arrival::Divergent { t },
                Err(e) => unreachable!("integrate over a validated span: {e}"),
            }
        })
        .collect();
    Ok(MovementMapRecord { t1, arrivals })
}

/// Outcome for one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointOutcome {
    Attractor(u16),
    Unresolved,
    OutOfMesh,
    Divergent,
}

/// Which method produced a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodTag {
    Fast { t1: f64 },
    Full { t_full: f64 },
}

/// Per-point labels plus aggregate relative areas for one basin computation.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinResult {
    pub outcomes: Vec<PointOutcome>,
    pub catalog: AttractorCatalog,
    pub method: MethodTag,
    pub n_points: usize,
    pub seed: Option<u64>,
    fingerprint: u64,
}

impl BasinResult {
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Count per attractor id, then unresolved, out-of-mesh and divergent.
    pub fn counts(&self) -> (Vec<u64>, u64, u64, u64) {
        let mut per_id = vec![0u64; self.catalog.len()];
        let (mut unresolved, mut out_of_mesh, mut divergent) = (0u64, 0u64, 0u64);
        for o in &self.outcomes {
            match *o {
                PointOutcome::Attractor(id) => per_id[id as usize] += 1,
                PointOutcome::Unresolved => unresolved += 1,
                PointOutcome::OutOfMesh => out_of_mesh += 1,
                PointOutcome::Divergent => divergent += 1,
            }
        }
        (per_id, unresolved, out_of_mesh, divergent)
    }

    /// Relative area per attractor id. Together with the failure buckets the
    /// fractions sum to one.
    pub fn relative_areas(&self) -> Vec<f64> {
        let (per_id, ..) = self.counts();
        per_id
            .into_iter()
            .map(|c| c as f64 / self.n_points as f64)
            .collect()
    }

    /// Area of the attractor with the given id.
    pub fn area_of(&self, id: u16) -> f64 {
        self.relative_areas().get(id as usize).copied().unwrap_or(0.0)
    }

    /// First catalog id with the given kind, if present.
    pub fn find_kind(&self, kind: crate::attractor::AttractorKind) -> Option<u16> {
        self.catalog
            .entries()
            .iter()
            .position(|e| e.kind == kind)
            .map(|i| i as u16)
    }

    /// CSV rendering: one row per attractor id plus one per failure bucket,
    /// self-describing header comments with seed, N and the CI level.
    pub fn to_csv(&self, spec: &ConfidenceSpec) -> String {
        let (per_id, unresolved, out_of_mesh, divergent) = self.counts();
        let n = self.n_points as u64;
        let mut s = String::new();
        match self.method {
            MethodTag::Fast { t1 } => s.push_str(&format!("# method = fast\n# t1 = {t1}\n")),
            MethodTag::Full { t_full } => {
                s.push_str(&format!("# method = full\n# t_full = {t_full}\n"))
            }
        }
        s.push_str(&format!(
            "# n_points = {}\n# seed = {}\n# confidence_level = {:.2}\n",
            self.n_points,
            self.seed.map_or_else(|| "-".into(), |v| v.to_string()),
            spec.level.as_fraction(),
        ));
        s.push_str("id,name,kind,period,winding,count,relative_area,ci_half_width\n");
        for (id, entry) in self.catalog.entries().iter().enumerate() {
            let count = per_id[id];
            let area = count as f64 / n as f64;
            let hw = ci_half_width(area, n, spec).expect("area is a fraction");
            let kind_name = match entry.kind {
                crate::attractor::AttractorKind::FixedPoint => "fixed_point",
                crate::attractor::AttractorKind::Oscillation { .. } => "oscillation",
                crate::attractor::AttractorKind::Rotation { .. } => "rotation",
            };
            s.push_str(&format!(
                "{id},{},{kind_name},{},{},{count},{:.6},{:.6}\n",
                entry.kind.short_name(),
                entry.kind.period(),
                entry.kind.net_winding(),
                area,
                hw,
            ));
        }
        for (name, count) in [
            ("unresolved", unresolved),
            ("out_of_mesh", out_of_mesh),
            ("divergent", divergent),
        ] {
            let area = count as f64 / n as f64;
            let hw = ci_half_width(area, n, spec).expect("area is a fraction");
            s.push_str(&format!("{name},{name},-,-,-,{count},{:.6},{:.6}\n", area, hw));
        }
        s
    }

    /// Flat binary per-point dump `(theta, theta_dot, label)` for overlay
    /// tooling; little-endian, 18 bytes per record after a short header.
    pub fn write_dump(&self, initial: &InitialSet, path: &Path) -> Result<()> {
        if initial.fingerprint() != self.fingerprint {
            return Err(Error::Config(
                "dump requested with a different initial set than the result".into(),
            ));
        }
        let mut buf = Vec::with_capacity(16 + 18 * self.n_points);
        buf.extend_from_slice(b"BASNPTS1");
        buf.extend_from_slice(&(self.n_points as u64).to_le_bytes());
        for (&(th, v), outcome) in initial.points.iter().zip(&self.outcomes) {
            buf.extend_from_slice(&th.to_le_bytes());
            buf.extend_from_slice(&v.to_le_bytes());
            buf.extend_from_slice(&outcome_code(*outcome).to_le_bytes());
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn outcome_code(o: PointOutcome) -> u16 {
    match o {
        PointOutcome::Attractor(id) => id,
        PointOutcome::Unresolved => u16::MAX,
        PointOutcome::OutOfMesh => u16::MAX - 1,
        PointOutcome::Divergent => u16::MAX - 2,
    }
}

/// Read back a per-point dump: `(points, label codes)`.
pub fn read_dump(path: &Path) -> Result<(Vec<(f64, f64)>, Vec<u16>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 || &bytes[..8] != b"BASNPTS1" {
        return Err(Error::Truncated("not a per-point dump".into()));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 18 * n {
        return Err(Error::Truncated(format!(
            "dump holds {} bytes, expected {} for {n} records",
            bytes.len(),
            16 + 18 * n
        )));
    }
    let mut points = Vec::with_capacity(n);
    let mut codes = Vec::with_capacity(n);
    for rec in bytes[16..].chunks_exact(18) {
        let th = f64::from_le_bytes(rec[0..8].try_into().unwrap());
        let v = f64::from_le_bytes(rec[8..16].try_into().unwrap());
        points.push((th, v));
        codes.push(u16::from_le_bytes(rec[16..18].try_into().unwrap()));
    }
    Ok((points, codes))
}

/// The fast method: integrate each initial condition to
/// `t1 = choose_t1(profile.t_ramp, t_min)`, round the arrival onto the atlas
/// mesh and read off the precomputed label.
///
/// The atlas must have been built for the same system parameters and final
/// damping as the run; a mismatch aborts before any integration.
pub fn fast_basins(
    atlas: &Atlas,
    params: &SystemParams,
    profile: &DampingProfile,
    initial: &InitialSet,
    t_min: f64,
    config: &IntegratorConfig,
) -> Result<BasinResult> {
    if atlas.params != *params {
        return Err(Error::AtlasMismatch(format!(
            "atlas built for alpha={}, beta={}; run uses alpha={}, beta={}",
            atlas.params.alpha, atlas.params.beta, params.alpha, params.beta
        )));
    }
    if atlas.gamma_f != profile.gamma_f {
        return Err(Error::AtlasMismatch(format!(
            "atlas built for gamma_f={}, run profile ends at gamma_f={}",
            atlas.gamma_f, profile.gamma_f
        )));
    }
    let t1 = choose_t1(profile.t_ramp, t_min);
    let record = movement_map(params, profile, initial, t1, config)?;
    let outcomes = record
        .arrivals
        .iter()
        .map(|arrival| match *arrival {
            Arrival::Divergent { .. } => PointOutcome::Divergent,
            Arrival::At { theta, theta_dot } => match atlas.label_for_point(theta, theta_dot) {
                Ok(Some(id)) => PointOutcome::Attractor(id),
                // Uncovered node or velocity outside the padded mesh range:
                // counted separately, never silently clamped.
                Ok(None) | Err(Error::OutOfMesh { .. }) => PointOutcome::OutOfMesh,
                Err(e) => unreachable!("nearest-node lookup: {e}"),
            },
        })
        .collect();
    Ok(BasinResult {
        outcomes,
        catalog: atlas.catalog.clone(),
        method: MethodTag::Fast { t1 },
        n_points: initial.len(),
        seed: initial.seed(),
        fingerprint: initial.fingerprint(),
    })
}

/// Ground truth: integrate each initial condition over the full settle time
/// with the time-varying profile and classify its asymptotic behaviour.
///
/// When `base_catalog` is given (typically the atlas catalog) its ids are
/// reused, so fast and full results share an id space.
pub fn full_basins(
    params: &SystemParams,
    profile: &DampingProfile,
    initial: &InitialSet,
    t_full: f64,
    config: &IntegratorConfig,
    base_catalog: Option<&AttractorCatalog>,
) -> Result<BasinResult> {
    let periods = periods_of(t_full, "t_full")?;
    if profile.gamma_f > 0.0 && t_full < 10.0 / profile.gamma_f - 1e-9 {
        return Err(Error::Config(format!(
            "t_full = {t_full} is below 10/gamma_f = {}",
            10.0 / profile.gamma_f
        )));
    }
    let settings = SettleSettings::default();
    let classified: Vec<Result<ClassifyOutcome>> = initial
        .points
        .par_iter()
        .map(|&(theta, v)| {
            settle_and_classify(params, profile, State::new(theta, v), periods, config, &settings)
        })
        .collect();

    let mut catalog = base_catalog
        .cloned()
        .unwrap_or_else(|| AttractorCatalog::new(DEFAULT_MATCH_EPS));
    let mut outcomes = Vec::with_capacity(initial.len());
    for item in classified {
        outcomes.push(match item {
            Ok(ClassifyOutcome::Resolved(label)) => {
                PointOutcome::Attractor(catalog.match_or_insert(&label))
            }
            Ok(ClassifyOutcome::Unresolved) => PointOutcome::Unresolved,
            Err(Error::Divergence { .. }) => PointOutcome::Divergent,
            Err(e) => return Err(e),
        });
    }
    Ok(BasinResult {
        outcomes,
        catalog,
        method: MethodTag::Full { t_full },
        n_points: initial.len(),
        seed: initial.seed(),
        fingerprint: initial.fingerprint(),
    })
}

/// Percentage of points whose limiting behaviour the fast method describes
/// correctly: both outcomes are attractors and they match (catalog ids are
/// reconciled through representative matching, so the two results need not
/// share an id space).
pub fn accuracy(fast: &BasinResult, full: &BasinResult) -> Result<f64> {
    if fast.fingerprint != full.fingerprint || fast.n_points != full.n_points {
        return Err(Error::Config(
            "accuracy requires results over the identical initial set".into(),
        ));
    }
    // Map ids of `full`'s catalog onto `fast`'s.
    let mapping: Vec<Option<u16>> = full
        .catalog
        .entries()
        .iter()
        .map(|e| fast.catalog.find(e))
        .collect();
    let agree = fast
        .outcomes
        .iter()
        .zip(&full.outcomes)
        .filter(|(f, g)| match (f, g) {
            (PointOutcome::Attractor(a), PointOutcome::Attractor(b)) => {
                mapping[*b as usize] == Some(*a)
            }
            _ => false,
        })
        .count();
    Ok(100.0 * agree as f64 / fast.n_points as f64)
}
