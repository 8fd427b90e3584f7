//! Energy-map mismatch and peak-based angular error on hand-built maps.
//!
//! `cargo run --release --example map_metrics`

use hybridsr::geometry::{angular_distance, icosphere};
use hybridsr::metrics::{angular_errors, energy_map_mismatch, KernelTable, PeakSelectConfig};
use hybridsr::pipeline::EnergyMap;

fn main() -> hybridsr::Result<()> {
    let grid = icosphere(3);
    let table = KernelTable::new(&grid);
    let truth_idx = [40usize, 300];
    let mut truth = vec![0.0; grid.len()];
    for &i in &truth_idx {
        truth[i] = 1.0;
    }
    let truth = EnergyMap::new(grid.id(), truth)?;

    let nb = grid.adjacency()[40][0];
    let cases: Vec<(&str, Vec<(usize, f64)>)> = vec![
        ("exact", vec![(40, 1.0), (300, 1.0)]),
        ("one neighbor off", vec![(nb, 1.0), (300, 1.0)]),
        ("smeared", vec![(40, 0.6), (nb, 0.4), (300, 1.0)]),
        ("one source missing", vec![(40, 1.0)]),
    ];
    println!(
        "neighbor spacing {:.2} deg",
        angular_distance(&grid.direction(40), &grid.direction(nb)).to_degrees()
    );
    for (name, entries) in cases {
        let mut e = vec![0.0; grid.len()];
        for (i, v) in entries {
            e[i] += v;
        }
        let map = EnergyMap::new(grid.id(), e)?;
        let mismatch = energy_map_mismatch(&map, &truth, &table)?;
        let truths: Vec<_> = truth_idx.iter().map(|&i| grid.direction(i)).collect();
        let errs: Vec<String> = angular_errors(&map, &grid, &truths, &PeakSelectConfig::default())
            .iter()
            .map(|r| r.error_rad.map_or("miss".into(), |a| format!("{:.2} deg", a.to_degrees())))
            .collect();
        println!("{name:<20} mismatch {mismatch:.4}  errors [{}]", errs.join(", "));
    }
    Ok(())
}
