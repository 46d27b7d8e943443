//! The constant-damping atlas: a mesh over the sample region with the
//! asymptotic attractor of every node, persisted in a checksummed binary
//! format with a human-readable sidecar.
//!
//! The atlas is the precomputed half of the fast method. Building it means
//! integrating every mesh node at constant damping until its attractor is
//! identified; afterwards any trajectory that has reached a node's vicinity
//! inherits the node's label without further integration.

use std::path::Path;

use rayon::prelude::*;

use crate::analysis::OccupancyGrid;
use crate::attractor::{
    settle_and_classify, AttractorCatalog, AttractorKind, AttractorLabel, ClassifyOutcome,
    SettleSettings, DEFAULT_MATCH_EPS,
};
use crate::dynamics::{wrap_angle, DampingProfile, State, SystemParams, PI, TWO_PI};
use crate::error::{Error, Result};
use crate::hash::fnv1a64;
use crate::integrator::IntegratorConfig;

/// Velocity extent of the sample region S = [-pi, pi] x [-4, 4].
pub const SAMPLE_V_BOUND: f64 = 4.0;

/// Sentinel label for nodes excluded from the build or never resolved.
pub const UNCOVERED: u16 = u16::MAX;

const MAGIC: [u8; 8] = *b"BASNATLS";
const FORMAT_VERSION: u32 = 1;

/// Uniform mesh over a sub-rectangle of the sample region; node `(i, j)` is
/// `(theta_min + i*dtheta, v_min + j*dv)` for `0 <= i <= p`, `0 <= j <= m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub theta_min: f64,
    pub dtheta: f64,
    pub p: u32,
    pub v_min: f64,
    pub dv: f64,
    pub m: u32,
}

impl Mesh {
    pub fn new(theta_min: f64, dtheta: f64, p: u32, v_min: f64, dv: f64, m: u32) -> Result<Self> {
        if !(dtheta > 0.0) || !(dv > 0.0) || p == 0 || m == 0 {
            return Err(Error::Config(
                "mesh spacings must be positive and node counts non-zero".into(),
            ));
        }
        let theta_span = dtheta * f64::from(p);
        if theta_span > TWO_PI + 1e-9 {
            return Err(Error::Config(format!(
                "mesh wraps past a full circle: p*dtheta = {theta_span}"
            )));
        }
        if theta_min < -PI - 1e-9 || theta_min + theta_span > PI + 1e-9 {
            return Err(Error::Config(
                "mesh theta range must lie inside [-pi, pi]".into(),
            ));
        }
        let v_span = dv * f64::from(m);
        if v_min < -SAMPLE_V_BOUND - 1e-9 || v_min + v_span > SAMPLE_V_BOUND + 1e-9 {
            return Err(Error::Config(format!(
                "mesh velocity range must lie inside [-{SAMPLE_V_BOUND}, {SAMPLE_V_BOUND}]"
            )));
        }
        Ok(Mesh {
            theta_min,
            dtheta,
            p,
            v_min,
            dv,
            m,
        })
    }

    /// The standard full-region mesh, centred on the origin with uniform
    /// spacings: the largest node range fitting [-3.14, 3.14] x [-4, 4].
    /// With 0.01-divisible spacings this is exactly theta in [-3.14, 3.14]
    /// and velocity in [-4, 4].
    pub fn covering(delta_theta: f64, delta_v: f64) -> Result<Self> {
        if !(delta_theta > 0.0) || !(delta_v > 0.0) {
            return Err(Error::Config("mesh spacings must be positive".into()));
        }
        let p = (6.28 / delta_theta + 1e-9).floor() as u32;
        let m = (2.0 * SAMPLE_V_BOUND / delta_v + 1e-9).floor() as u32;
        Mesh::new(
            -delta_theta * f64::from(p) / 2.0,
            delta_theta,
            p,
            -delta_v * f64::from(m) / 2.0,
            delta_v,
            m,
        )
    }

    pub fn node(&self, i: u32, j: u32) -> (f64, f64) {
        (
            self.theta_min + self.dtheta * f64::from(i),
            self.v_min + self.dv * f64::from(j),
        )
    }

    pub fn n_nodes(&self) -> usize {
        (self.p as usize + 1) * (self.m as usize + 1)
    }

    /// Row-major (i-major) index of node `(i, j)`.
    pub fn node_index(&self, i: u32, j: u32) -> usize {
        i as usize * (self.m as usize + 1) + j as usize
    }

    pub fn node_of_index(&self, idx: usize) -> (u32, u32) {
        let cols = self.m as usize + 1;
        ((idx / cols) as u32, (idx % cols) as u32)
    }

    /// Nearest node to a phase-space point. The angle is wrapped to
    /// `[-pi, pi)` first and seam wrap-around is considered, so points just
    /// past one end of the mesh round to the other end when that is closer
    /// on the torus. Ties break toward the smaller index, first in i then j.
    ///
    /// The velocity must lie within half a spacing of the mesh's range,
    /// otherwise the point is reported as out of mesh.
    pub fn nearest_node(&self, theta: f64, theta_dot: f64) -> Result<(u32, u32)> {
        let v_max = self.v_min + self.dv * f64::from(self.m);
        if theta_dot < self.v_min - 0.5 * self.dv - 1e-12
            || theta_dot > v_max + 0.5 * self.dv + 1e-12
        {
            return Err(Error::OutOfMesh { theta_dot });
        }
        let j = round_half_down((theta_dot - self.v_min) / self.dv)
            .clamp(0, i64::from(self.m)) as u32;

        let th = wrap_angle(theta);
        let mut best: Option<(u32, f64)> = None;
        for shift in [0.0, -TWO_PI, TWO_PI] {
            let i = round_half_down((th + shift - self.theta_min) / self.dtheta)
                .clamp(0, i64::from(self.p)) as u32;
            let node_theta = self.theta_min + self.dtheta * f64::from(i);
            let d = wrap_angle(th - node_theta).abs();
            best = match best {
                None => Some((i, d)),
                Some((bi, bd)) if d < bd || (d == bd && i < bi) => Some((i, d)),
                keep => keep,
            };
        }
        Ok((best.expect("at least one candidate").0, j))
    }
}

/// Round to nearest with exact halves going down, as the tie rule requires.
#[inline]
fn round_half_down(q: f64) -> i64 {
    (q - 0.5).ceil() as i64
}

/// Mesh over the sample region with the asymptotic attractor of every
/// covered node at constant damping `gamma_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    pub mesh: Mesh,
    pub params: SystemParams,
    pub gamma_f: f64,
    /// Integration time used to settle every node.
    pub t_full: f64,
    pub catalog: AttractorCatalog,
    /// Nodes that stayed unresolved after the retry cap (excluded nodes are
    /// not counted here).
    pub unresolved_warnings: u32,
    labels: Vec<u16>,
}

impl Atlas {
    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Label of node `(i, j)`; `None` when the node is uncovered.
    pub fn label_at(&self, i: u32, j: u32) -> Option<u16> {
        let l = self.labels[self.mesh.node_index(i, j)];
        (l != UNCOVERED).then_some(l)
    }

    /// Label for an arbitrary phase-space point via nearest-node rounding.
    /// `Ok(None)` means the nearest node is uncovered.
    pub fn label_for_point(&self, theta: f64, theta_dot: f64) -> Result<Option<u16>> {
        let (i, j) = self.mesh.nearest_node(theta, theta_dot)?;
        Ok(self.label_at(i, j))
    }

    pub fn covered_count(&self) -> u64 {
        self.labels.iter().filter(|&&l| l != UNCOVERED).count() as u64
    }

    /// Node count per attractor id (indexed by id).
    pub fn label_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.catalog.len()];
        for &l in &self.labels {
            if l != UNCOVERED {
                counts[l as usize] += 1;
            }
        }
        counts
    }

    /// Relative area of each basin over the covered nodes.
    pub fn relative_areas(&self) -> Vec<f64> {
        let covered = self.covered_count();
        self.label_counts()
            .into_iter()
            .map(|c| {
                if covered == 0 {
                    0.0
                } else {
                    c as f64 / covered as f64
                }
            })
            .collect()
    }

    /// Default settle time for a given final damping: the conservative end
    /// of the 10-100 times 1/gamma range, rounded up to a whole number of
    /// forcing periods, never below 1500.
    pub fn default_t_full(gamma_f: f64) -> f64 {
        let t = (100.0 / gamma_f).max(1500.0);
        TWO_PI * (t / TWO_PI).ceil()
    }
}

/// Build the atlas by settling every mesh node at constant `gamma_f`.
///
/// `t_full` must be a whole number of forcing periods and at least
/// `10 / gamma_f`. When `restrict_to` is given, nodes outside the occupancy
/// grid are recorded as uncovered without being integrated. Nodes are
/// processed in parallel; labels and catalog ids do not depend on the worker
/// count or node order.
pub fn build_atlas(
    params: &SystemParams,
    gamma_f: f64,
    mesh: &Mesh,
    t_full: f64,
    config: &IntegratorConfig,
    restrict_to: Option<&OccupancyGrid>,
) -> Result<Atlas> {
    if !(gamma_f > 0.0) {
        return Err(Error::Config(format!(
            "atlas damping must be positive, got {gamma_f}"
        )));
    }
    let periods = periods_of(t_full, "t_full")?;
    if t_full < 10.0 / gamma_f - 1e-9 {
        return Err(Error::Config(format!(
            "t_full = {t_full} is below 10/gamma_f = {}",
            10.0 / gamma_f
        )));
    }
    let profile = DampingProfile::constant(gamma_f)?;
    let settings = SettleSettings::default();

    let n = mesh.n_nodes();
    let node_results: Vec<Option<ClassifyOutcome>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = mesh.node_of_index(idx);
            let (theta, v) = mesh.node(i, j);
            if let Some(grid) = restrict_to {
                if !grid.contains(theta, v) {
                    return None;
                }
            }
            let state = State::new(theta, v);
            // Divergence is recorded like an unresolved node: the atlas
            // stays usable, the warning count flags the gap.
            Some(
                settle_and_classify(params, &profile, state, periods, config, &settings)
                    .unwrap_or(ClassifyOutcome::Unresolved),
            )
        })
        .collect();

    let mut catalog = AttractorCatalog::new(DEFAULT_MATCH_EPS);
    let mut labels = vec![UNCOVERED; n];
    let mut unresolved = 0u32;
    for (idx, outcome) in node_results.into_iter().enumerate() {
        match outcome {
            None => {}
            Some(ClassifyOutcome::Unresolved) => unresolved += 1,
            Some(ClassifyOutcome::Resolved(label)) => {
                labels[idx] = catalog.match_or_insert(&label);
            }
        }
    }

    Ok(Atlas {
        mesh: *mesh,
        params: *params,
        gamma_f,
        t_full,
        catalog,
        unresolved_warnings: unresolved,
        labels,
    })
}

/// Whole number of forcing periods in `t`, or a config error.
pub fn periods_of(t: f64, what: &str) -> Result<u64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("{what} must be non-negative, got {t}")));
    }
    let q = t / TWO_PI;
    let rounded = q.round();
    if (q - rounded).abs() > 1e-9 * q.max(1.0) {
        return Err(Error::Config(format!(
            "{what} = {t} is not a whole number of forcing periods (t / 2pi = {q})"
        )));
    }
    Ok(rounded as u64)
}

// --- persistence ---------------------------------------------------------

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Truncated(format!(
                "need {n} bytes at offset {}, file has {}",
                self.pos,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

fn encode(atlas: &Atlas) -> Vec<u8> {
    let mut w = Writer::new();
    w.buf.extend_from_slice(&MAGIC);
    w.u32(FORMAT_VERSION);
    w.f64(atlas.params.alpha);
    w.f64(atlas.params.beta);
    w.f64(atlas.gamma_f);
    w.f64(atlas.t_full);
    w.f64(atlas.mesh.theta_min);
    w.f64(atlas.mesh.dtheta);
    w.u32(atlas.mesh.p);
    w.f64(atlas.mesh.v_min);
    w.f64(atlas.mesh.dv);
    w.u32(atlas.mesh.m);
    w.u32(atlas.unresolved_warnings);
    w.f64(atlas.catalog.match_eps());
    w.u16(atlas.catalog.len() as u16);
    for entry in atlas.catalog.entries() {
        let (tag, direction) = match entry.kind {
            AttractorKind::FixedPoint => (0u8, 0i8),
            AttractorKind::Oscillation { .. } => (1, 0),
            AttractorKind::Rotation { direction, .. } => (2, direction),
        };
        w.u8(tag);
        w.u8(direction as u8);
        w.u16(entry.representative.len() as u16);
        for &(th, v) in &entry.representative {
            w.f64(th);
            w.f64(v);
        }
    }
    for &l in &atlas.labels {
        w.u16(l);
    }
    let checksum = fnv1a64(&w.buf);
    w.u64(checksum);
    w.buf
}

fn decode(bytes: &[u8]) -> Result<Atlas> {
    if bytes.len() < MAGIC.len() + 4 + 8 {
        return Err(Error::Truncated("file shorter than header".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(Error::ChecksumMismatch);
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Truncated("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let alpha = r.f64()?;
    let beta = r.f64()?;
    let gamma_f = r.f64()?;
    let t_full = r.f64()?;
    let theta_min = r.f64()?;
    let dtheta = r.f64()?;
    let p = r.u32()?;
    let v_min = r.f64()?;
    let dv = r.f64()?;
    let m = r.u32()?;
    let unresolved_warnings = r.u32()?;
    let match_eps = r.f64()?;
    let n_entries = r.u16()?;
    let mut catalog = AttractorCatalog::new(match_eps);
    for _ in 0..n_entries {
        let tag = r.u8()?;
        let direction = r.u8()? as i8;
        let k = r.u16()?;
        let mut representative = Vec::with_capacity(usize::from(k));
        for _ in 0..k {
            let th = r.f64()?;
            let v = r.f64()?;
            representative.push((th, v));
        }
        let kind = match tag {
            0 => AttractorKind::FixedPoint,
            1 => AttractorKind::Oscillation { period: u32::from(k) },
            2 => AttractorKind::Rotation {
                direction,
                period: u32::from(k),
            },
            other => return Err(Error::Truncated(format!("unknown attractor tag {other}"))),
        };
        catalog.match_or_insert(&AttractorLabel {
            kind,
            representative,
        });
    }
    let mesh = Mesh::new(theta_min, dtheta, p, v_min, dv, m)?;
    let n = mesh.n_nodes();
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.u16()?);
    }
    if r.pos != body.len() {
        return Err(Error::Truncated(format!(
            "{} trailing bytes after label array",
            body.len() - r.pos
        )));
    }
    Ok(Atlas {
        mesh,
        params: SystemParams { alpha, beta },
        gamma_f,
        t_full,
        catalog,
        unresolved_warnings,
        labels,
    })
}

/// Serialize the atlas to `path` and write the human-readable `.meta`
/// sidecar next to it.
pub fn save_atlas(atlas: &Atlas, path: &Path) -> Result<()> {
    std::fs::write(path, encode(atlas)).map_err(|e| Error::io(path, e))?;
    let sidecar = path.with_extension("meta");
    std::fs::write(&sidecar, sidecar_text(atlas)).map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

pub fn load_atlas(path: &Path) -> Result<Atlas> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Checksum used by the atlas format over everything preceding the trailing
/// eight checksum bytes.
pub fn file_checksum(bytes: &[u8]) -> u64 {
    fnv1a64(bytes)
}

fn sidecar_text(atlas: &Atlas) -> String {
    let mut s = String::new();
    let mesh = &atlas.mesh;
    s.push_str(&format!("format_version: {FORMAT_VERSION}\n"));
    s.push_str(&format!("alpha: {}\n", atlas.params.alpha));
    s.push_str(&format!("beta: {}\n", atlas.params.beta));
    s.push_str(&format!("gamma_f: {}\n", atlas.gamma_f));
    s.push_str(&format!("t_full: {}\n", atlas.t_full));
    s.push_str(&format!(
        "mesh: theta_min={} dtheta={} p={} v_min={} dv={} m={}\n",
        mesh.theta_min, mesh.dtheta, mesh.p, mesh.v_min, mesh.dv, mesh.m
    ));
    let total = mesh.n_nodes() as u64;
    let covered = atlas.covered_count();
    s.push_str(&format!("nodes_total: {total}\n"));
    s.push_str(&format!("nodes_covered: {covered}\n"));
    s.push_str(&format!("nodes_uncovered: {}\n", total - covered));
    s.push_str(&format!("unresolved_warnings: {}\n", atlas.unresolved_warnings));
    s.push_str(&format!("attractors: {}\n", atlas.catalog.len()));
    let counts = atlas.label_counts();
    for (id, entry) in atlas.catalog.entries().iter().enumerate() {
        let count = counts[id];
        let area = if covered > 0 {
            100.0 * count as f64 / covered as f64
        } else {
            0.0
        };
        s.push_str(&format!(
            "attractor_{id}: {} period={} winding={} nodes={count} area_pct={area:.4}\n",
            entry.kind.short_name(),
            entry.kind.period(),
            entry.kind.net_winding(),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_mesh() -> Mesh {
        Mesh::new(-3.14, 0.01, 628, -4.0, 0.01, 800).unwrap()
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh::new(-3.14, 0.01, 629, -4.0, 0.01, 800).is_err()); // past pi
        assert!(Mesh::new(-3.14, 0.0, 10, -4.0, 0.01, 10).is_err());
        assert!(Mesh::new(-3.14, 0.01, 10, -4.5, 0.01, 10).is_err()); // below -4
        assert!(Mesh::covering(0.01, 0.01).is_ok());
    }

    #[test]
    fn node_coordinates_reproducible() {
        let mesh = small_mesh();
        assert_eq!(mesh.node(0, 0), (-3.14, -4.0));
        let (th, v) = mesh.node(628, 800);
        assert!((th - 3.14).abs() < 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        assert_eq!(mesh.n_nodes(), 629 * 801);
    }

    #[test]
    fn nearest_node_rounds_to_origin() {
        let mesh = small_mesh();
        let (i, j) = mesh.nearest_node(0.0049, 0.0).unwrap();
        assert_eq!(mesh.node(i, j), (-3.14 + 0.01 * 314.0, 0.0));
        assert!((mesh.node(i, j).0 - 0.0).abs() < 1e-10);
    }

    #[test]
    fn nearest_node_wraps_across_the_seam() {
        let mesh = small_mesh();
        // 3.141 lies between the last node (3.14) and pi; the direct side is
        // closer than going through the seam.
        let (i, _) = mesh.nearest_node(3.141, 0.0).unwrap();
        assert_eq!(i, 628);
        // 3.143 is past pi; it wraps to the -pi side and rounds to node 0.
        let (i, _) = mesh.nearest_node(3.143, 0.0).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn nearest_node_ties_go_to_smaller_index() {
        let mesh = Mesh::new(-3.14, 0.01, 628, -4.0, 0.01, 800).unwrap();
        // Exactly midway between nodes 314 (0.0) and 315 (0.01).
        let (i, j) = mesh.nearest_node(0.005, 0.005).unwrap();
        assert_eq!(i, 314);
        assert_eq!(j, 400);
    }

    #[test]
    fn nearest_node_velocity_bounds() {
        let mesh = small_mesh();
        assert!(mesh.nearest_node(0.0, 4.004).is_ok()); // inside padding
        match mesh.nearest_node(0.0, 4.2) {
            Err(Error::OutOfMesh { theta_dot }) => assert_eq!(theta_dot, 4.2),
            other => panic!("{other:?}"),
        }
        assert!(mesh.nearest_node(0.0, -4.2).is_err());
    }

    #[test]
    fn atlas_roundtrip_and_corruption_errors() {
        use crate::attractor::AttractorKind;
        let mesh = Mesh::new(-3.14, 1.0, 6, -4.0, 1.0, 8).unwrap();
        let mut catalog = AttractorCatalog::with_default_eps();
        let fp = catalog.match_or_insert(&AttractorLabel {
            kind: AttractorKind::FixedPoint,
            representative: vec![(0.0, 0.0)],
        });
        let pr = catalog.match_or_insert(&AttractorLabel {
            kind: AttractorKind::Rotation { direction: 1, period: 1 },
            representative: vec![(0.3, 2.4)],
        });
        let mut labels = vec![UNCOVERED; mesh.n_nodes()];
        for (k, l) in labels.iter_mut().enumerate() {
            if k % 3 != 0 {
                *l = if k % 2 == 0 { fp } else { pr };
            }
        }
        let atlas = Atlas {
            mesh,
            params: SystemParams { alpha: 0.5, beta: 0.1 },
            gamma_f: 0.05,
            t_full: 1500.0,
            catalog,
            unresolved_warnings: 2,
            labels,
        };

        let dir = std::env::temp_dir().join(format!("atlas-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.atlas");
        save_atlas(&atlas, &path).unwrap();
        let loaded = load_atlas(&path).unwrap();
        assert_eq!(atlas, loaded);
        assert!(path.with_extension("meta").exists());

        // Flip one byte in the label area: checksum error.
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        let flipped = dir.join("flipped.atlas");
        std::fs::write(&flipped, &bytes).unwrap();
        assert!(matches!(load_atlas(&flipped), Err(Error::ChecksumMismatch)));

        // Patch a future version (re-checksummed): version error.
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
        let n = bytes.len();
        let sum = file_checksum(&bytes[..n - 8]);
        bytes[n - 8..].copy_from_slice(&sum.to_le_bytes());
        let future = dir.join("future.atlas");
        std::fs::write(&future, &bytes).unwrap();
        assert!(matches!(
            load_atlas(&future),
            Err(Error::VersionMismatch { found: 99, .. })
        ));

        // Truncation: distinct error.
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.join("cut.atlas");
        std::fs::write(&cut, &bytes[..bytes.len() - 20]).unwrap();
        assert!(matches!(
            load_atlas(&cut),
            Err(Error::ChecksumMismatch) | Err(Error::Truncated(_))
        ));

        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn periods_of_accepts_multiples_only() {
        assert_eq!(periods_of(0.0, "t").unwrap(), 0);
        assert_eq!(periods_of(TWO_PI * 24.0, "t").unwrap(), 24);
        assert!(periods_of(100.0, "t").is_err());
        assert!(periods_of(-1.0, "t").is_err());
    }

    #[test]
    fn default_t_full_is_period_aligned_and_conservative() {
        for gamma in [0.02, 0.05, 0.2725] {
            let t = Atlas::default_t_full(gamma);
            assert!(t >= 100.0 / gamma - 1e-9 || t >= 1500.0 - 1e-9);
            assert!(periods_of(t, "t").is_ok());
        }
        assert!((Atlas::default_t_full(0.05) - TWO_PI * 319.0).abs() < 1e-9);
    }
}
