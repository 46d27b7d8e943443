//! Contracted-phase-space, density, cluster, overlay and jump-scan
//! analytics over movement-map arrivals.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::atlas::{Atlas, SAMPLE_V_BOUND};
use crate::attractor::{AttractorCatalog, DEFAULT_MATCH_EPS};
use crate::dynamics::{DampingProfile, SystemParams, PI};
use crate::error::{Error, Result};
use crate::fast::{full_basins, BasinResult, InitialSet, MovementMapRecord, PointOutcome};
use crate::integrator::IntegratorConfig;

/// Default cell size for occupancy and density grids.
pub const DEFAULT_CELL_SIZE: f64 = 0.05;
/// Default jump threshold between adjacent ramp times, in area fraction.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.05;

fn default_origin() -> (f64, f64) {
    (-PI, -SAMPLE_V_BOUND)
}

#[inline]
fn cell_of(origin: (f64, f64), r: f64, point: (f64, f64)) -> (i32, i32) {
    (
        ((point.0 - origin.0) / r).floor() as i32,
        ((point.1 - origin.1) / r).floor() as i32,
    )
}

/// Set of phase-space cells of side `r` containing at least one arrival:
/// a discrete representation of the contracted phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub r: f64,
    pub origin: (f64, f64),
    cells: BTreeSet<(i32, i32)>,
}

impl OccupancyGrid {
    pub fn cells(&self) -> &BTreeSet<(i32, i32)> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, theta: f64, theta_dot: f64) -> bool {
        self.cells
            .contains(&cell_of(self.origin, self.r, (theta, theta_dot)))
    }

    /// Grow the occupied set by `rings` layers of 8-neighbourhoods. Used to
    /// pad a contracted region before restricting an atlas build to it, so
    /// arrivals near cell edges still round onto covered nodes.
    pub fn dilate(&self, rings: u32) -> OccupancyGrid {
        let mut cells = self.cells.clone();
        for _ in 0..rings {
            let mut grown = cells.clone();
            for &(x, y) in &cells {
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        grown.insert((x + dx, y + dy));
                    }
                }
            }
            cells = grown;
        }
        OccupancyGrid {
            r: self.r,
            origin: self.origin,
            cells,
        }
    }

    /// Fraction of the sample region S covered by the occupied cells.
    pub fn fraction_of_sample_region(&self) -> f64 {
        let s_area = 2.0 * PI * 2.0 * SAMPLE_V_BOUND;
        self.cells.len() as f64 * self.r * self.r / s_area
    }
}

/// Cells of size `r` occupied by at least one arrival point.
pub fn contracted_region(arrivals: &MovementMapRecord, r: f64) -> Result<OccupancyGrid> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("cell size must be positive, got {r}")));
    }
    let origin = default_origin();
    let cells = arrivals
        .arrival_points()
        .into_iter()
        .map(|p| cell_of(origin, r, p))
        .collect();
    Ok(OccupancyGrid { r, origin, cells })
}

/// Arrival counts per cell, normalized by the number of counted
/// trajectories. Cells with zero count are absent from storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub r: f64,
    pub origin: (f64, f64),
    counts: BTreeMap<(i32, i32), u64>,
    total: u64,
}

impl DensityGrid {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<(i32, i32), u64> {
        &self.counts
    }

    pub fn rho(&self, cell: (i32, i32)) -> f64 {
        self.counts.get(&cell).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn cell_center(&self, cell: (i32, i32)) -> (f64, f64) {
        (
            self.origin.0 + (cell.0 as f64 + 0.5) * self.r,
            self.origin.1 + (cell.1 as f64 + 0.5) * self.r,
        )
    }

    /// Cell with the highest density; ties resolve to the smallest cell
    /// index for determinism.
    pub fn argmax_cell(&self) -> Option<(i32, i32)> {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&c, _)| c)
    }

    /// The occupied-cell set underneath this density map.
    pub fn support(&self) -> OccupancyGrid {
        OccupancyGrid {
            r: self.r,
            origin: self.origin,
            cells: self.counts.keys().copied().collect(),
        }
    }

    /// CSV rows `(cell center theta, cell center theta_dot, rho)` in cell
    /// index order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,theta_dot,rho\n");
        for (&cell, &count) in &self.counts {
            let (th, v) = self.cell_center(cell);
            s.push_str(&format!(
                "{th:.6},{v:.6},{:.8}\n",
                count as f64 / self.total as f64
            ));
        }
        s
    }
}

/// Arrival counts per cell of size `r`, normalized by the number of
/// non-divergent trajectories so the densities sum to one exactly.
pub fn density_map(arrivals: &MovementMapRecord, r: f64) -> Result<DensityGrid> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("cell size must be positive, got {r}")));
    }
    let points = arrivals.arrival_points();
    if points.is_empty() {
        return Err(Error::Config("density map needs at least one arrival".into()));
    }
    let origin = default_origin();
    let mut counts: BTreeMap<(i32, i32), u64> = BTreeMap::new();
    for p in &points {
        *counts.entry(cell_of(origin, r, *p)).or_insert(0) += 1;
    }
    Ok(DensityGrid {
        r,
        origin,
        counts,
        total: points.len() as u64,
    })
}

/// Cell adjacency used when joining dense cells into clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Four,
    Eight,
}

/// A connected component of high-density cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub cells: Vec<(i32, i32)>,
    /// Total density mass of the member cells, in (0, 1].
    pub mass: f64,
    /// Density-weighted centroid of the member cell centers.
    pub centroid: (f64, f64),
}

/// Connected components (default 8-neighbour adjacency) of the minimal set
/// of highest-density cells whose cumulative mass reaches `mass_threshold`,
/// sorted by mass descending.
pub fn find_clusters(grid: &DensityGrid, mass_threshold: f64) -> Result<Vec<Cluster>> {
    find_clusters_with_adjacency(grid, mass_threshold, Adjacency::Eight)
}

pub fn find_clusters_with_adjacency(
    grid: &DensityGrid,
    mass_threshold: f64,
    adjacency: Adjacency,
) -> Result<Vec<Cluster>> {
    if !(mass_threshold > 0.0 && mass_threshold < 1.0) {
        return Err(Error::Config(format!(
            "mass threshold must lie in (0, 1), got {mass_threshold}"
        )));
    }
    // Highest-density cells first; ties in count resolve by cell index so
    // the selected set is deterministic.
    let mut cells: Vec<((i32, i32), u64)> =
        grid.counts().iter().map(|(&c, &n)| (c, n)).collect();
    cells.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let needed = mass_threshold * grid.total() as f64;
    let mut selected: BTreeSet<(i32, i32)> = BTreeSet::new();
    let mut cum = 0u64;
    for (cell, count) in cells {
        if cum as f64 >= needed - 1e-9 {
            break;
        }
        selected.insert(cell);
        cum += count;
    }

    // Flood fill over the selected set.
    let neighbours: &[(i32, i32)] = match adjacency {
        Adjacency::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Adjacency::Eight => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };
    let mut unvisited = selected.clone();
    let mut clusters = Vec::new();
    while let Some(&start) = unvisited.iter().next() {
        let mut stack = vec![start];
        unvisited.remove(&start);
        let mut members = Vec::new();
        while let Some(cell) = stack.pop() {
            members.push(cell);
            for &(dx, dy) in neighbours {
                let n = (cell.0 + dx, cell.1 + dy);
                if unvisited.remove(&n) {
                    stack.push(n);
                }
            }
        }
        members.sort();
        let mass: f64 = members.iter().map(|&c| grid.rho(c)).sum();
        let mut cx = 0.0;
        let mut cy = 0.0;
        for &c in &members {
            let w = grid.rho(c) / mass;
            let (x, y) = grid.cell_center(c);
            cx += w * x;
            cy += w * y;
        }
        clusters.push(Cluster {
            cells: members,
            mass,
            centroid: (cx, cy),
        });
    }
    clusters.sort_by(|a, b| {
        b.mass
            .partial_cmp(&a.mass)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cells.cmp(&b.cells))
    });
    Ok(clusters)
}

/// Constant-damping basin membership of a point, read from the atlas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlayOutcome {
    Label(u16),
    /// Nearest node exists but carries no label, or the point lies outside
    /// the mesh's velocity range.
    Flagged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayItem {
    pub point: (f64, f64),
    pub outcome: OverlayOutcome,
}

/// Atlas label at the nearest node of each given point (typically cluster
/// centroids superimposed on the constant-damping basins).
pub fn overlay(atlas: &Atlas, points: &[(f64, f64)]) -> Vec<OverlayItem> {
    points
        .iter()
        .map(|&point| {
            let outcome = match atlas.label_for_point(point.0, point.1) {
                Ok(Some(id)) => OverlayOutcome::Label(id),
                Ok(None) | Err(_) => OverlayOutcome::Flagged,
            };
            OverlayItem { point, outcome }
        })
        .collect()
}

/// One full-integration run of a ramp-time scan.
#[derive(Debug, Clone)]
pub struct JumpScanRun {
    pub t0: f64,
    /// Areas per master-catalog id, plus failure-bucket fractions.
    pub areas: Vec<f64>,
    pub unresolved: f64,
    pub out_of_mesh: f64,
    pub divergent: f64,
}

/// An abrupt change of one attractor's relative area between adjacent
/// ramp times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub t0_from: f64,
    pub t0_to: f64,
    pub attractor: u16,
    /// Signed area change (fraction).
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct JumpScan {
    pub runs: Vec<JumpScanRun>,
    pub jumps: Vec<Jump>,
    /// Attractor ids shared by all runs of the scan.
    pub catalog: AttractorCatalog,
}

impl JumpScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t0");
        for e in self.catalog.entries() {
            s.push_str(&format!(",{}", e.kind.short_name()));
        }
        s.push_str(",unresolved,out_of_mesh,divergent\n");
        for run in &self.runs {
            s.push_str(&format!("{}", run.t0));
            for a in &run.areas {
                s.push_str(&format!(",{a:.6}"));
            }
            s.push_str(&format!(
                ",{:.6},{:.6},{:.6}\n",
                run.unresolved, run.out_of_mesh, run.divergent
            ));
        }
        s
    }
}

/// Full-integration basin areas for every ramp time in `t0_values`, with
/// detected jumps: adjacent pairs whose area change for some attractor
/// exceeds `jump_threshold`. Runs share one catalog so areas are comparable
/// across ramp times; results do not depend on the worker count.
#[allow(clippy::too_many_arguments)]
pub fn jump_scan(
    params: &SystemParams,
    gamma_i: f64,
    gamma_f: f64,
    t0_values: &[f64],
    initial: &InitialSet,
    t_full: f64,
    config: &IntegratorConfig,
    jump_threshold: f64,
) -> Result<JumpScan> {
    if t0_values.is_empty() {
        return Err(Error::Config("jump scan needs at least one ramp time".into()));
    }
    if t0_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("ramp times must be sorted ascending".into()));
    }
    let profiles: Vec<DampingProfile> = t0_values
        .iter()
        .map(|&t0| DampingProfile::new(gamma_i, gamma_f, t0))
        .collect::<Result<_>>()?;

    let results: Vec<Result<BasinResult>> = profiles
        .par_iter()
        .map(|profile| full_basins(params, profile, initial, t_full, config, None))
        .collect();

    // Merge per-run catalogs in scan order into one master id space.
    let mut catalog = AttractorCatalog::new(DEFAULT_MATCH_EPS);
    let mut runs = Vec::with_capacity(results.len());
    for (result, &t0) in results.into_iter().zip(t0_values) {
        let result = result?;
        let remap = catalog.merge(&result.catalog);
        let (per_id, unresolved, out_of_mesh, divergent) = result.counts();
        let n = result.n_points as f64;
        let mut areas = vec![0.0; catalog.len()];
        for (old_id, count) in per_id.into_iter().enumerate() {
            areas[remap[old_id] as usize] += count as f64 / n;
        }
        runs.push(JumpScanRun {
            t0,
            areas,
            unresolved: unresolved as f64 / n,
            out_of_mesh: out_of_mesh as f64 / n,
            divergent: divergent as f64 / n,
        });
    }
    // Pad earlier runs so all area vectors span the final catalog.
    let k = catalog.len();
    for run in &mut runs {
        run.areas.resize(k, 0.0);
    }

    let mut jumps = Vec::new();
    for w in runs.windows(2) {
        for id in 0..k {
            let delta = w[1].areas[id] - w[0].areas[id];
            if delta.abs() > jump_threshold {
                jumps.push(Jump {
                    t0_from: w[0].t0,
                    t0_to: w[1].t0,
                    attractor: id as u16,
                    delta,
                });
            }
        }
    }
    Ok(JumpScan { runs, jumps, catalog })
}

/// Fraction of points (by outcome vector) matching between two runs; helper
/// for parallel/serial equality checks in tests.
pub fn outcomes_identical(a: &[PointOutcome], b: &[PointOutcome]) -> bool {
    a == b
}
