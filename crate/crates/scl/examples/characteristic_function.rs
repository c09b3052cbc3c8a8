//! The characteristic function of a contraction on its defect spaces.
//!
//! For a scalar contraction the function is the classical Mobius
//! transform; at the origin it acts as the negated operator compressed to
//! the defect space; and a contraction with no defect (a unitary) has
//! nothing to test, which the disk criterion reports as a vacuous pass.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scl::criteria::{nf_criterion, CharacteristicFunction, DiskGrid};
use scl::linalg::{operator_norm, ComplexMatrix};

fn main() {
    // Scalar case against the closed form.
    let t = 0.5;
    let scalar = ComplexMatrix::from_diag(&[Complex64::new(t, 0.0)]);
    let cf = CharacteristicFunction::new(&scalar).unwrap();
    println!("scalar T = {t}: Theta(lambda) against (lambda - T)/(1 - T lambda)");
    for k in [0usize, 5, 12, 19] {
        let lambda = Complex64::from_polar(0.9 * (k + 1) as f64 / 20.0, 0.37 * k as f64);
        let measured = cf.evaluate(lambda).unwrap().get(0, 0);
        let exact = (lambda - t) / (1.0 - t * lambda);
        println!(
            "  lambda = {:.3}{:+.3}i   gap {:.2e}",
            lambda.re,
            lambda.im,
            (measured - exact).norm()
        );
    }

    // A seeded 6x6 strict contraction: defect spaces are full, and the
    // value at zero acts like -T between them.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let raw = ComplexMatrix::from_fn(6, |_, _| {
        Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    let contraction = raw.scale(Complex64::new(0.8 / operator_norm(&raw), 0.0));
    let cf = CharacteristicFunction::new(&contraction).unwrap();
    let theta0 = cf.evaluate(Complex64::default()).unwrap();
    let k = cf.defect_dimension();
    println!("\n6x6 contraction with norm 0.8: defect dimension {k}");
    let mut worst = 0.0f64;
    for j in 0..k {
        let mut lifted = vec![Complex64::default(); 6];
        for i in 0..k {
            for (row, b) in cf.basis_adj()[i].iter().enumerate() {
                lifted[row] += theta0.get(i, j) * b;
            }
        }
        let mut gap = 0.0f64;
        for row in 0..6 {
            let mut acc = Complex64::default();
            for col in 0..6 {
                acc += contraction.get(row, col) * cf.basis()[j][col];
            }
            gap += (lifted[row] + acc).norm_sqr();
        }
        worst = worst.max(gap.sqrt());
    }
    println!("action of Theta(0) against -T on the defect basis: gap {worst:.2e}");

    // A unitary has empty defect spaces; the inverse-norm sweep over the
    // disk has nothing to measure and reports the vacuous outcome.
    let unitary = ComplexMatrix::from_diag(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]);
    let report = nf_criterion(&unitary, &DiskGrid::default()).unwrap();
    println!(
        "\nunitary 2x2: empty defect = {}, sup ||Theta^-1|| = {}, vacuous pass",
        report.empty_defect, report.sup_inv_norm
    );
}
