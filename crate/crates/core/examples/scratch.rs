// Temporary exploration harness (not shipped).
use std::time::Instant;

use basins_core::atlas::{build_atlas, Mesh};
use basins_core::dynamics::{SystemParams, TWO_PI};
use basins_core::integrator::IntegratorConfig;

fn survey(alpha: f64, beta: f64, gamma: f64, delta: f64, periods: u64) {
    let params = SystemParams::new(alpha, beta).unwrap();
    let config = IntegratorConfig::adaptive(1e-10, 1e-8).unwrap();
    let mesh = Mesh::covering(delta, delta).unwrap();
    let t0 = Instant::now();
    let atlas = build_atlas(&params, gamma, &mesh, TWO_PI * periods as f64, &config, None).unwrap();
    let counts = atlas.label_counts();
    let covered = atlas.covered_count();
    println!(
        "alpha={alpha} beta={beta} gamma={gamma} delta={delta} nodes={} t={:?} unresolved={}",
        mesh.n_nodes(),
        t0.elapsed(),
        atlas.unresolved_warnings
    );
    for (id, entry) in atlas.catalog.entries().iter().enumerate() {
        println!(
            "  id {id}: {} rep {:?} area {:.4}%",
            entry.kind.short_name(),
            entry
                .representative
                .iter()
                .map(|&(a, b)| (format!("{a:.3}"), format!("{b:.3}")))
                .collect::<Vec<_>>(),
            100.0 * counts[id] as f64 / covered as f64
        );
    }
    let groups = atlas.catalog.symmetric_groups();
    let distinct: std::collections::BTreeSet<u16> = groups.iter().copied().collect();
    println!("  symmetric groups: {groups:?} -> {} distinct", distinct.len());
}

fn main() {
    // Paper regime A: alpha=0.5, beta=0.1.
    survey(0.5, 0.1, 0.05, 0.1, 239);
    survey(0.5, 0.1, 0.02, 0.15, 239);
    // Paper regime B: alpha=-0.1, beta=0.545.
    survey(-0.1, 0.545, 0.23, 0.1, 80);
    survey(-0.1, 0.545, 0.2725, 0.1, 80);
}
