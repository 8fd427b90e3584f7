//! Encodes a far-field plane wave captured by the 64-microphone sphere and
//! compares the result with the matching HOA dictionary column across the
//! processing band, for the default and a relaxed gain cap.
//!
//! `cargo run --release --example hoa_encoding`

use hybridsr::dictionary::hoa_dictionary;
use hybridsr::geometry::{default_sma_geometry, icosphere, Vec3};
use hybridsr::sigproc::{hoa_encode, synth_plane_wave, EncoderConfig, TfTensor};
use hybridsr::specfun::SphereKind;
use hybridsr::{Complex64, SPEED_OF_SOUND};

fn main() -> hybridsr::Result<()> {
    let grid = icosphere(3);
    let d = hoa_dictionary(&grid, 4);
    let sma = default_sma_geometry(Vec3::zeros());
    let dir = 123;
    let mut src = TfTensor::zeros(1, 1, 16000.0, 1024, 512);
    let bins: Vec<usize> = (20..=256).step_by(24).collect();
    for &f in &bins {
        src.set(0, 0, f, Complex64::new(1.0, 0.0));
    }
    let obs = synth_plane_wave(&sma, &Vec3::zeros(), &grid.direction(dir), &src, SPEED_OF_SOUND)?;
    let configs = [
        ("20 dB cap", EncoderConfig::default()),
        (
            "60 dB cap",
            EncoderConfig {
                max_gain_db: 60.0,
                ..EncoderConfig::default()
            },
        ),
    ];
    println!("freq_hz   relative error vs dictionary column");
    let encoded: Vec<TfTensor> = configs
        .iter()
        .map(|(_, c)| hoa_encode(&obs, &sma, 4, SphereKind::Open, c))
        .collect::<hybridsr::Result<_>>()?;
    let col = d.matrix.column(dir);
    for &f in &bins {
        let errs: Vec<String> = encoded
            .iter()
            .zip(&configs)
            .map(|(e, (name, _))| {
                let num: f64 = (0..col.len()).map(|i| (e.get(i, 0, f) - col[i]).norm_sqr()).sum();
                format!("{name}: {:.3e}", (num / col.norm_squared()).sqrt())
            })
            .collect();
        println!("{:<9.1} {}", src.bin_freq(f), errs.join("   "));
    }
    Ok(())
}
