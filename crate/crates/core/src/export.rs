//! CSV and PPM writers for maps and result tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{azimuth_elevation, from_azimuth_elevation, nearest_grid_index, DirectionGrid};
use crate::metrics::CellSummary;
use crate::pipeline::EnergyMap;
use crate::roomsim::ExperimentRow;

pub const HEATMAP_WIDTH: usize = 360;
pub const HEATMAP_HEIGHT: usize = 181;

/// `index,azimuth_deg,elevation_deg,energy,normalized_energy`, normalized to
/// the map maximum.
pub fn energy_map_csv(map: &EnergyMap, grid: &DirectionGrid) -> Result<String> {
    if map.grid != grid.id() || map.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let max = map.max();
    let mut s = String::from("index,azimuth_deg,elevation_deg,energy,normalized_energy\n");
    for (i, (d, e)) in grid.directions().iter().zip(&map.energy).enumerate() {
        let (az, el) = azimuth_elevation(d);
        let norm = if max > 0.0 { e / max } else { 0.0 };
        let _ = writeln!(
            s,
            "{i},{:.6},{:.6},{:.12e},{:.12e}",
            az.to_degrees(),
            el.to_degrees(),
            e,
            norm
        );
    }
    Ok(s)
}

/// Equirectangular grayscale heatmap (binary PPM, P6). Column `x` spans
/// azimuth 180 deg (left) to -180 deg, row `y` elevation 90 deg (top) to
/// -90 deg; each pixel takes the value of the nearest grid direction.
pub fn energy_map_ppm(map: &EnergyMap, grid: &DirectionGrid) -> Result<Vec<u8>> {
    if map.grid != grid.id() || map.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let max = map.max();
    let mut out = format!("P6\n{HEATMAP_WIDTH} {HEATMAP_HEIGHT}\n255\n").into_bytes();
    out.reserve(HEATMAP_WIDTH * HEATMAP_HEIGHT * 3);
    for y in 0..HEATMAP_HEIGHT {
        let el = (90.0 - y as f64).to_radians();
        for x in 0..HEATMAP_WIDTH {
            let az = (180.0 - x as f64).to_radians();
            let idx = nearest_grid_index(grid, &from_azimuth_elevation(az, el));
            let v = if max > 0.0 { map.energy[idx] / max } else { 0.0 };
            let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            out.extend_from_slice(&[g, g, g]);
        }
    }
    Ok(out)
}

/// Per-trial metrics table.
pub fn results_csv(rows: &[ExperimentRow]) -> String {
    let mut s = String::from("trial_id,method,n_sources,distance_m,mismatch,median_angular_error_deg,miss_rate\n");
    for r in rows {
        for sc in &r.scores {
            let ang = sc
                .median_angular_error()
                .map_or_else(|| "nan".to_string(), |a| format!("{:.6}", a.to_degrees()));
            let _ = writeln!(
                s,
                "{},{},{},{:.3},{:.9},{},{:.6}",
                r.trial_id,
                sc.method,
                r.n_sources,
                r.distance_m,
                sc.mismatch,
                ang,
                sc.miss_rate()
            );
        }
    }
    s
}

/// Per-cell order statistics.
pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut s = String::from(
        "method,n_sources,distance_m,trials,mismatch_q1,mismatch_median,mismatch_q3,median_angular_error_deg,miss_rate\n",
    );
    for c in cells {
        let ang = c
            .angular_median
            .map_or_else(|| "nan".to_string(), |a| format!("{:.6}", a.to_degrees()));
        let _ = writeln!(
            s,
            "{},{},{:.3},{},{:.9},{:.9},{:.9},{},{:.6}",
            c.key.method,
            c.key.n_sources,
            c.key.distance_mm as f64 / 1000.0,
            c.trials,
            c.mismatch_q1,
            c.mismatch_median,
            c.mismatch_q3,
            ang,
            c.miss_rate
        );
    }
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::icosphere;

    #[test]
    fn csv_has_one_row_per_direction() {
        let g = icosphere(1);
        let mut e = vec![0.0; g.len()];
        e[3] = 2.0;
        let m = EnergyMap::new(g.id(), e).unwrap();
        let csv = energy_map_csv(&m, &g).unwrap();
        assert_eq!(csv.lines().count(), g.len() + 1);
        assert!(csv.lines().nth(4).unwrap().ends_with("1.000000000000e0"));
    }

    #[test]
    fn ppm_header_and_size() {
        let g = icosphere(1);
        let m = EnergyMap::new(g.id(), vec![1.0; g.len()]).unwrap();
        let ppm = energy_map_ppm(&m, &g).unwrap();
        let header = b"P6\n360 181\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert_eq!(ppm.len(), header.len() + 360 * 181 * 3);
        assert!(ppm[header.len()..].iter().all(|&b| b == 255));
    }
}
