//! Curves, the radial map to the circle, and shrinking curve families.
//!
//! Every computation downstream rests on three geometric tools: smooth
//! Jordan curves given by trigonometric coefficients, the star-shaped
//! radial diffeomorphism onto the unit circle, and one-parameter families
//! of curves sweeping a tube on one side of the base curve.

use scl::curves::{nice_family, radial_diffeo, FamilySide, JordanCurve};
use std::f64::consts::TAU;

fn main() {
    println!("built-in curves:");
    println!("  name           length    diameter  reach     grid");
    for name in ["circle", "circle:2", "ellipse:1.2:1", "blob:7"] {
        let c = JordanCurve::builtin(name).unwrap();
        println!(
            "  {name:<13}  {:<8.4}  {:<8.4}  {:<8.4}  {}",
            c.total_length(),
            c.diameter(),
            c.reach(),
            c.grid_size()
        );
    }

    let curve = JordanCurve::builtin("ellipse:1.2:1").unwrap();
    let diffeo = radial_diffeo(&curve, None).unwrap();
    println!("\nradial map on the 1.2:1 ellipse, forward then inverse:");
    let mut worst = 0.0f64;
    for k in 0..8 {
        let z = curve.psi(TAU * k as f64 / 8.0) * 1.1;
        let round_trip = diffeo.inverse(diffeo.forward(z));
        worst = worst.max((round_trip - z).norm());
    }
    println!("  worst round-trip error over 8 offset points: {worst:.2e}");

    let family = nice_family(&diffeo, FamilySide::Outside, 0.5).unwrap();
    println!("\noutside family at speed 0.5 (scale -> uniform distance bound):");
    for s in [0.5, 0.25, 0.125, 0.0625] {
        let pts = family.generate(s, 256);
        let max_dist: f64 = pts
            .iter()
            .map(|p| curve.project_flat(p.point).distance)
            .fold(0.0, f64::max);
        println!("  s = {s:<7}  sigma(s) = {:<9.4e}  max dist = {max_dist:.4e}", family.sigma(s));
    }

    // Curves round-trip through their coefficient file format.
    let data = curve.file_data();
    let again = JordanCurve::from_file_data(&data, curve.grid_density()).unwrap();
    let gap = (0..16)
        .map(|k| (curve.psi(TAU * k as f64 / 16.0) - again.psi(TAU * k as f64 / 16.0)).norm())
        .fold(0.0f64, f64::max);
    println!("\ncoefficient file round trip: max pointwise gap {gap:.1e}");
}
