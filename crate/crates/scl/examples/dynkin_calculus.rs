//! Functional calculus by a contour integral corrected with an area term.
//!
//! Boundary data is extended into a two-sided tube with controlled dbar
//! decay; the operator value is the boundary contour integral minus the
//! area integral of the dbar defect against the resolvent. For rational
//! data the result can be checked against direct matrix arithmetic, and
//! halving the mesh should cut the error by at least the grading order.

use scl::cli::expr;
use scl::curves::{nice_family, radial_diffeo, FamilySide, JordanCurve};
use scl::dynkin::{cauchy_green_apply, QuadratureSpec};
use scl::linalg::operator_norm;
use scl::pseudoanalytic::{jet_extension, CurveFunction};
use scl::zoo::{make_operator, MakeParams, OperatorKind};

fn main() {
    let curve = JordanCurve::builtin("circle").unwrap();
    let diffeo = radial_diffeo(&curve, None).unwrap();
    let fam_out = nice_family(&diffeo, FamilySide::Outside, 0.5).unwrap();
    let fam_in = nice_family(&diffeo, FamilySide::Inside, 0.5).unwrap();

    let params = MakeParams { kappa: Some(10.0), ..MakeParams::default() };
    let t = make_operator(OperatorKind::Similar, &curve, 12, &params, 42).unwrap();
    println!("operator: 12 x 12, similar to normal with condition number 10\n");

    for src in ["1/(z-2)", "(z-3)/(z+5)", "z^2"] {
        let node = expr::parse(src).unwrap();
        let data = CurveFunction::from_closure(&curve, |z| node.eval(z));
        let ext = jet_extension(&curve, &data, 0.4 * curve.reach(), 0.9).unwrap();
        let direct = node.eval_matrix(&t).unwrap();
        let denom = operator_norm(&direct);

        println!("f(z) = {src}");
        println!("  nodes  layers  relative error");
        for (nodes, layers) in [(256, 8), (512, 16), (1024, 32)] {
            let quad = QuadratureSpec {
                contour_nodes: nodes,
                radial_layers: layers,
                ..QuadratureSpec::default()
            };
            let result = cauchy_green_apply(&t, &ext, &curve, &fam_out, &fam_in, &quad)
                .unwrap();
            let err = operator_norm(&result.matrix.sub(&direct)) / denom;
            println!("  {nodes:<6} {layers:<7} {err:.3e}");
        }
        println!();
    }
}
