//! PPM (P6) raster output: basin diagrams with the fixed attractor palette
//! and density maps with a five-level colour ramp.

use std::path::Path;

use crate::analysis::DensityGrid;
use crate::atlas::Mesh;
use crate::attractor::{AttractorCatalog, AttractorKind};
use crate::error::{Error, Result};
use crate::fast::PointOutcome;

pub type Rgb = [u8; 3];

pub const BLUE: Rgb = [0, 0, 255];
pub const RED: Rgb = [255, 0, 0];
pub const YELLOW: Rgb = [255, 255, 0];
pub const GREEN: Rgb = [0, 200, 0];
pub const ORANGE: Rgb = [255, 140, 0];
pub const BLACK: Rgb = [0, 0, 0];
pub const GRAY: Rgb = [96, 96, 96];
pub const WHITE: Rgb = [255, 255, 255];

/// Fixed basin palette: FP blue, PR red, NR yellow, OSC and DO2 green,
/// DO4 orange; unresolved points are black.
pub fn basin_color(kind: &AttractorKind) -> Rgb {
    match *kind {
        AttractorKind::FixedPoint => BLUE,
        AttractorKind::Rotation { direction: 1, .. } => RED,
        AttractorKind::Rotation { .. } => YELLOW,
        AttractorKind::Oscillation { period: 4 } => ORANGE,
        AttractorKind::Oscillation { .. } => GREEN,
    }
}

pub fn outcome_color(outcome: PointOutcome, catalog: &AttractorCatalog) -> Rgb {
    match outcome {
        PointOutcome::Attractor(id) => catalog
            .get(id)
            .map(|e| basin_color(&e.kind))
            .unwrap_or(WHITE),
        PointOutcome::Unresolved => BLACK,
        PointOutcome::OutOfMesh => GRAY,
        PointOutcome::Divergent => WHITE,
    }
}

/// Five-level density ramp, densest first: red, yellow, green, blue, black.
pub fn density_color(rho: f64, rho_max: f64) -> Rgb {
    if rho <= 0.0 || rho_max <= 0.0 {
        return BLACK;
    }
    let f = (rho / rho_max).clamp(0.0, 1.0);
    if f > 0.75 {
        RED
    } else if f > 0.5 {
        YELLOW
    } else if f > 0.25 {
        GREEN
    } else {
        BLUE
    }
}

/// Binary PPM writer. `pixels` is row-major from the top row down.
pub fn write_ppm(path: &Path, width: usize, height: usize, pixels: &[Rgb]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::Config(format!(
            "raster has {} pixels for {width}x{height}",
            pixels.len()
        )));
    }
    let mut buf = Vec::with_capacity(20 + 3 * pixels.len());
    buf.extend_from_slice(format!("P6\n{width} {height}\n255\n").as_bytes());
    for px in pixels {
        buf.extend_from_slice(px);
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Render per-node outcomes over a mesh-shaped initial set: one pixel per
/// node, highest velocity on the top row.
pub fn render_basin_raster(
    mesh: &Mesh,
    outcomes: &[PointOutcome],
    catalog: &AttractorCatalog,
) -> Result<(usize, usize, Vec<Rgb>)> {
    let width = mesh.p as usize + 1;
    let height = mesh.m as usize + 1;
    if outcomes.len() != width * height {
        return Err(Error::Config(format!(
            "{} outcomes for a {width}x{height} mesh",
            outcomes.len()
        )));
    }
    let mut pixels = vec![BLACK; width * height];
    for i in 0..width {
        for j in 0..height {
            let outcome = outcomes[i * height + j];
            let row = height - 1 - j;
            pixels[row * width + i] = outcome_color(outcome, catalog);
        }
    }
    Ok((width, height, pixels))
}

/// Render a density grid over the bounding box of its occupied cells.
pub fn render_density_raster(grid: &DensityGrid) -> (usize, usize, Vec<Rgb>) {
    let cells = grid.counts();
    let (mut x0, mut x1, mut y0, mut y1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for &(x, y) in cells.keys() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if cells.is_empty() {
        return (0, 0, Vec::new());
    }
    let width = (x1 - x0 + 1) as usize;
    let height = (y1 - y0 + 1) as usize;
    let rho_max = cells
        .keys()
        .map(|&c| grid.rho(c))
        .fold(0.0f64, f64::max);
    let mut pixels = vec![BLACK; width * height];
    for &(x, y) in cells.keys() {
        let col = (x - x0) as usize;
        let row = (y1 - y) as usize;
        pixels[row * width + col] = density_color(grid.rho((x, y)), rho_max);
    }
    (width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::AttractorLabel;

    #[test]
    fn palette_follows_the_convention() {
        assert_eq!(basin_color(&AttractorKind::FixedPoint), BLUE);
        assert_eq!(
            basin_color(&AttractorKind::Rotation { direction: 1, period: 1 }),
            RED
        );
        assert_eq!(
            basin_color(&AttractorKind::Rotation { direction: -1, period: 1 }),
            YELLOW
        );
        assert_eq!(basin_color(&AttractorKind::Oscillation { period: 1 }), GREEN);
        assert_eq!(basin_color(&AttractorKind::Oscillation { period: 2 }), GREEN);
        assert_eq!(basin_color(&AttractorKind::Oscillation { period: 4 }), ORANGE);
    }

    #[test]
    fn density_ramp_levels() {
        assert_eq!(density_color(0.0, 1.0), BLACK);
        assert_eq!(density_color(0.1, 1.0), BLUE);
        assert_eq!(density_color(0.4, 1.0), GREEN);
        assert_eq!(density_color(0.6, 1.0), YELLOW);
        assert_eq!(density_color(1.0, 1.0), RED);
    }

    #[test]
    fn ppm_bytes_are_deterministic() {
        let dir = std::env::temp_dir().join(format!("ppm-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.ppm");
        write_ppm(&path, 2, 1, &[RED, BLUE]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..7], b"P6\n2 1\n");
        assert_eq!(&bytes[bytes.len() - 6..], &[255, 0, 0, 0, 0, 255]);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn mesh_raster_orients_velocity_upward() {
        let mesh = Mesh::new(-3.14, 1.0, 1, -4.0, 1.0, 1).unwrap();
        let mut catalog = AttractorCatalog::with_default_eps();
        let fp = catalog.match_or_insert(&AttractorLabel {
            kind: AttractorKind::FixedPoint,
            representative: vec![(0.0, 0.0)],
        });
        // Node (0, 1) — low theta, high v — must land on the top-left pixel.
        let mut outcomes = vec![PointOutcome::Unresolved; 4];
        outcomes[mesh.node_index(0, 1)] = PointOutcome::Attractor(fp);
        let (w, h, px) = render_basin_raster(&mesh, &outcomes, &catalog).unwrap();
        assert_eq!((w, h), (2, 2));
        assert_eq!(px[0], BLUE);
        assert_eq!(px[1], BLACK);
    }
}
