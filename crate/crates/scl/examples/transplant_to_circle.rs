//! Transplanting an operator from a curve onto the unit circle.
//!
//! The radial diffeomorphism eta maps the curve to the circle; applying it
//! through the calculus gives A = eta(T) whose spectrum is the image of
//! the spectrum of T. The comparability constant then measures how far
//! resolvent geometry is preserved in both directions.

use num_complex::Complex64;
use scl::criteria::{probe_vectors, ProbeSpec};
use scl::curves::{radial_diffeo, JordanCurve};
use scl::dynkin::{comparability_report, hausdorff_distance, transplant, QuadratureSpec};
use scl::linalg::eigenvalues;
use scl::zoo::{make_operator, MakeParams, OperatorKind};
use std::f64::consts::TAU;

fn main() {
    let curve = JordanCurve::builtin("ellipse:1.2:1").unwrap();
    let diffeo = radial_diffeo(&curve, None).unwrap();
    let t = make_operator(OperatorKind::Normal, &curve, 8, &MakeParams::default(), 3).unwrap();

    let a = transplant(&t, &diffeo, &curve, &QuadratureSpec::default()).unwrap();
    let a_eigs = eigenvalues(&a).unwrap();
    let mapped: Vec<Complex64> = eigenvalues(&t)
        .unwrap()
        .iter()
        .map(|&ev| diffeo.forward(ev))
        .collect();

    println!("spectrum of eta(T) against eta applied to the spectrum of T:");
    for ev in &a_eigs {
        let (gap, nearest) = mapped.iter().fold(
            (f64::INFINITY, Complex64::default()),
            |(best, arg), &m| {
                let d = (ev - m).norm();
                if d < best { (d, m) } else { (best, arg) }
            },
        );
        println!(
            "  {:>24}  vs  {:>24}   gap {gap:.2e}",
            format!("{:.6}{:+.6}i", ev.re, ev.im),
            format!("{:.6}{:+.6}i", nearest.re, nearest.im),
        );
    }
    println!(
        "\nHausdorff distance between the two spectra: {:.3e}",
        hausdorff_distance(&a_eigs, &mapped)
    );

    // Comparability of resolvents through the map, probed on a ring of
    // spectral parameters offset to both sides of the curve.
    let offsets: Vec<Complex64> = (0..16)
        .flat_map(|j| {
            let p = curve.psi(TAU * (j as f64 + 0.37) / 16.0);
            let dp = curve.psi_t(TAU * (j as f64 + 0.37) / 16.0);
            let normal = -Complex64::new(0.0, 1.0) * dp / dp.norm();
            let d = 0.3 * curve.reach();
            [p + d * normal, p - d * normal]
        })
        .collect();
    let probes = probe_vectors(8, &ProbeSpec::default());
    let report = comparability_report(&t, &a, &diffeo, &offsets, &probes).unwrap();
    println!(
        "comparability constant C = {:.6} over {} spectral parameters",
        report.constant,
        offsets.len()
    );
}
