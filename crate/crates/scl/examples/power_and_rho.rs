//! Power boundedness and the rho-contraction tests side by side.
//!
//! A unitary has flat power norms and passes every rho test. A Jordan
//! block on the circle has linearly growing powers and fails. The two
//! detectors agree on both, from different measurements: one walks the
//! powers, the other checks the real-part operator inequality over a
//! sweep of rotations plus resolvent bounds on the outside annulus.

use scl::criteria::{default_band_grid, power_bounded_check, rho_tests};
use scl::curves::JordanCurve;
use scl::zoo::{make_operator, MakeParams, OperatorKind};

fn main() {
    let curve = JordanCurve::builtin("circle").unwrap();
    let unitary = make_operator(OperatorKind::Normal, &curve, 8, &MakeParams::default(), 1)
        .unwrap();
    let jordan = make_operator(OperatorKind::Jordan, &curve, 2, &MakeParams::default(), 0)
        .unwrap();

    for (name, t) in [("8x8 unitary", &unitary), ("2x2 Jordan block", &jordan)] {
        println!("{name}:");
        for n_max in [64, 256] {
            let power = power_bounded_check(t, n_max);
            println!(
                "  sup ||T^k|| over k <= {n_max}: {:.4} (growing sup means not power bounded)",
                power.sup_forward
            );
        }
        let rho = rho_tests(t, 2.0, 64, &default_band_grid(2.0, 6, 64)).unwrap();
        println!(
            "  rho = 2: real-part margin {:+.4}, band margin {:+.4}, holds: {}\n",
            rho.real_part_margin, rho.band_margin, rho.holds
        );
    }
}
