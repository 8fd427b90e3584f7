//! Icosphere direction grids: vertex counts, neighbor spacing and CSV export.
//!
//! `cargo run --release --example direction_grid -- [level] [out.csv]`

use hybridsr::geometry::{angular_distance, icosphere};

fn main() -> std::io::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let level: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    for l in 0..=level {
        let g = icosphere(l);
        let spacings: Vec<f64> = g
            .adjacency()
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
            .map(|(i, j)| angular_distance(&g.direction(i), &g.direction(j)).to_degrees())
            .collect();
        let lo = spacings.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spacings.iter().cloned().fold(0.0, f64::max);
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        println!(
            "level {l}: {:>5} directions, neighbor spacing {lo:.2}..{hi:.2} deg (mean {mean:.2})",
            g.len()
        );
    }
    if let Some(path) = args.get(1) {
        std::fs::write(path, icosphere(level).to_csv())?;
        println!("wrote {path}");
    }
    Ok(())
}
