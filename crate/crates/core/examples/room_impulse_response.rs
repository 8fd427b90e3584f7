//! Shoebox image-source impulse responses: Schroeder decay against the
//! Sabine prediction for a few reverberation times, optionally saved as WAV.
//!
//! `cargo run --release --example room_impulse_response -- [out.wav]`

use hybridsr::geometry::Vec3;
use hybridsr::roomsim::{decay_time, image_source_rir, sabine_absorption, RoomSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = 16000.0;
    let src = Vec3::new(2.0, 2.5, 1.2);
    let mic = Vec3::new(7.0, 5.0, 1.6);
    println!("rt60_s  alpha   taps   t(-20 dB)  t(-60 dB)");
    let mut last = Vec::new();
    for rt60 in [0.2, 0.3, 0.5, 0.8] {
        let room = RoomSpec {
            rt60,
            ..RoomSpec::default()
        };
        let alpha = sabine_absorption(&room);
        let h = image_source_rir(&room, &src, &mic, alpha, fs)?;
        let fmt = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{t:.3} s"));
        println!(
            "{rt60:<7} {alpha:.3}  {:>6}  {:>9}  {:>9}",
            h.len(),
            fmt(decay_time(&h, fs, -20.0)),
            fmt(decay_time(&h, fs, -60.0))
        );
        last = h;
    }
    if let Some(path) = std::env::args().nth(1) {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: fs as u32,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let peak = last.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut w = hound::WavWriter::create(&path, spec)?;
        for v in &last {
            w.write_sample((v / peak) as f32)?;
        }
        w.finalize()?;
        println!("wrote {path}");
    }
    Ok(())
}
