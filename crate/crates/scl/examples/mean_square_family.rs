//! Mean-square resolvent averages along a family of shrinking curves.
//!
//! For a unitary with the concentric-circle family at unit speed, the
//! average over the circle of radius r = 1 + s has the closed form
//! 2 pi r / (r + 1) for every unit probe, so the fitted growth exponent
//! is zero. A Jordan block grows like s^(-2) instead, and the fitted
//! exponent near two is what the detector reports.

use num_complex::Complex64;
use scl::criteria::{mean_square, MeanSquareGrid, ProbeSpec};
use scl::curves::{nice_family, radial_diffeo, FamilySide, JordanCurve};
use scl::linalg::ComplexMatrix;
use scl::zoo::{make_operator, MakeParams, OperatorKind};
use std::f64::consts::TAU;

fn main() {
    let curve = JordanCurve::builtin("circle").unwrap();
    let diffeo = radial_diffeo(&curve, None).unwrap();
    let family = nice_family(&diffeo, FamilySide::Outside, 1.0).unwrap();
    let grid = MeanSquareGrid::default();
    let probes = ProbeSpec::default();

    let diag: Vec<Complex64> = (0..16)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 16.0))
        .collect();
    let unitary = ComplexMatrix::from_diag(&diag);
    let report = mean_square(&unitary, &family, false, &probes, &grid).unwrap();

    println!("diagonal unitary, outside family at unit speed:");
    println!("  s         measured       closed form    relative gap");
    for &(s, v) in &report.per_s {
        let r = 1.0 + s;
        let exact = TAU * r / (r + 1.0);
        println!(
            "  {s:<8.4}  {v:<13.8}  {exact:<13.8}  {:.2e}",
            (v - exact).abs() / exact
        );
    }
    println!(
        "  fitted C = {:.4}, growth exponent = {:+.4} (flat means certified)\n",
        report.fitted_c, report.growth_exponent
    );

    let jordan = make_operator(OperatorKind::Jordan, &curve, 2, &MakeParams::default(), 0)
        .unwrap();
    let family = nice_family(&diffeo, FamilySide::Outside, 0.5).unwrap();
    let report = mean_square(&jordan, &family, false, &probes, &grid).unwrap();
    println!("2x2 Jordan block, same family at half speed:");
    println!(
        "  fitted C = {:.4e}, growth exponent = {:+.4} (the blow-up signature)",
        report.fitted_c, report.growth_exponent
    );
}
