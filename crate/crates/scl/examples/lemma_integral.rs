//! Uniform bound for the singular annulus integral.
//!
//! The integral of |z - w|^(-1) |1 - |z|^2|^beta over the annulus a < |z|
//! < b stays bounded uniformly in w for beta in (-1, 0). The sampler
//! takes the supremum over a grid of w values at two mesh resolutions;
//! agreement between them is the evidence that the supremum is real and
//! not a quadrature artifact.

use num_complex::Complex64;
use scl::dynkin::lemma_integral_bound_with;
use std::f64::consts::TAU;

fn main() {
    let (a, b) = (0.5, 2.0);
    let mut w_grid = Vec::new();
    for i in 0..4 {
        let r = a + (b - a) * i as f64 / 3.0;
        for j in 0..4 {
            w_grid.push(Complex64::from_polar(r, TAU * j as f64 / 4.0));
        }
    }

    println!("annulus {a} < |z| < {b}, supremum over 16 w-points:");
    println!("  beta    base mesh   doubled     drift");
    for beta in [-0.9, -0.5, -0.1] {
        let base = lemma_integral_bound_with(a, b, beta, &w_grid, 1);
        let fine = lemma_integral_bound_with(a, b, beta, &w_grid, 2);
        println!(
            "  {beta:<6}  {base:<10.4}  {fine:<10.4}  {:.3}%",
            100.0 * (fine - base).abs() / base
        );
    }
    println!("\nthe bound degrades as beta approaches -1, where integrability fails.");
}
