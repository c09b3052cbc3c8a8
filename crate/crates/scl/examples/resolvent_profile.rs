//! Resolvent profile along a shrinking tube around the spectrum.
//!
//! A normal operator pins dist * ||R|| at exactly one on every level; a
//! Jordan block pushes the same product toward infinity as the tube
//! tightens. The profile constant is the certificate separating the two.

use num_complex::Complex64;
use scl::criteria::{resolvent_profile, ProfileGrid, Thresholds};
use scl::curves::{JordanCurve, Side};
use scl::linalg::ComplexMatrix;
use scl::zoo::{make_operator, MakeParams, OperatorKind};

fn main() {
    let curve = JordanCurve::builtin("circle").unwrap();
    let grid = ProfileGrid::default();
    let thresholds = Thresholds::default();

    let normal = ComplexMatrix::from_diag(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ]);
    let jordan = make_operator(OperatorKind::Jordan, &curve, 2, &MakeParams::default(), 0)
        .unwrap();

    for (name, t) in [("diagonal unitary", &normal), ("2x2 Jordan block", &jordan)] {
        let profile = resolvent_profile(t, &curve, &grid, &thresholds).unwrap();
        println!("{name}:");
        println!("  level  dist        sup dist*||R|| (in)   sup dist*||R|| (out)");
        for (level, d) in profile.levels.iter().enumerate() {
            println!(
                "  {level}      {d:<10.4e}  {:<20.6}  {:.6}",
                profile.level_constant(Side::Interior, level),
                profile.level_constant(Side::Exterior, level),
            );
        }
        println!(
            "  overall: C_inside = {:.6}, C_outside = {:.6}, normality certificate: {}\n",
            profile.c_inside, profile.c_outside, profile.stampfli_normal
        );
    }
}
