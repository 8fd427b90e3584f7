//! Spherical Bessel functions, spherical harmonics and open/rigid sphere
//! mode strengths for the default 10 cm array.
//!
//! `cargo run --release --example special_functions`

use std::f64::consts::PI;

use hybridsr::specfun::{mode_strength, sph_harm_all, spherical_bessel_j, spherical_bessel_y, SphereKind};

fn main() -> hybridsr::Result<()> {
    println!("x      j_0(x)      j_4(x)      y_1(x)");
    for x in [0.5, 1.0, 2.0, 5.0, 10.0] {
        println!(
            "{x:<6} {:>11.6e} {:>11.6e} {:>11.6e}",
            spherical_bessel_j(0, x),
            spherical_bessel_j(4, x),
            spherical_bessel_y(1, x)?
        );
    }

    let y = sph_harm_all(2, 0.9, 0.3);
    println!("\nY_n^m(0.9, 0.3), ACN order:");
    for (i, v) in y.iter().enumerate() {
        println!("  {i}: {:+.6} {:+.6}j", v.re, v.im);
    }

    let radius = 0.1;
    let rigid = SphereKind::rigid(radius)?;
    println!("\n|b_n| in dB re 4pi, r = {radius} m");
    println!("freq_hz  n=0    n=1    n=2    n=3    n=4   (rigid n=4)");
    for f in [250.0, 500.0, 1000.0, 2000.0, 4000.0] {
        let k = 2.0 * PI * f / hybridsr::SPEED_OF_SOUND;
        let db = |b: hybridsr::Complex64| 20.0 * (b.norm() / (4.0 * PI)).log10();
        let open: Vec<String> = (0..=4)
            .map(|n| mode_strength(n, k * radius, SphereKind::Open, k).map(|b| format!("{:6.1}", db(b))))
            .collect::<hybridsr::Result<_>>()?;
        let r4 = db(mode_strength(4, k * radius, rigid, k)?);
        println!("{f:<8} {}  ({r4:.1})", open.join(" "));
    }
    Ok(())
}
